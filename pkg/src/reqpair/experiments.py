"""Experiment runners: k-fold CV, cross-domain transfer, paired F-tests.

A PipelineConfig describes everything needed to turn a PairDataset into
predictions: the embedding source (an explicit store or the built-in
hashed encoder), the classifier head shape and training settings, and an
optional rule filter applied to positive predictions. All randomness
derives from the caller's base seed through `derive_seed`, so repeated
runs are bit-identical.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .annotations import AnnotationRecord
from .classifier import TrainConfig, init_model, predict, train
from .corpus import CONFLICT, PairDataset, RequirementPair, stratified_kfold
from .errors import LabelModeError, ValidationError
from .features import EmbeddingStore, builtin_embed, feature_matrix
from .filters import apply_filter, run_filter
from .metrics import ConfusionMatrix, MetricsReport, confusion, metrics
from .stats import FTestResult, combined_f_test

REPORT_SCHEMA_VERSION = 1


def derive_seed(base: int, *parts) -> int:
    """Stable 63-bit seed derived from a base seed and a stage path."""
    payload = json.dumps([int(base), *map(str, parts)]).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


@dataclass(frozen=True)
class PipelineConfig:
    """Embedding source + classifier head + optional positive-prediction filter."""

    embedding_dim: int = 256
    hidden_units: int = 1500
    dropout_rate: float = 0.2
    train: TrainConfig = field(default_factory=TrainConfig)
    embeddings: EmbeddingStore | None = None
    filter_method: str | None = None
    annotations: Mapping[str, AnnotationRecord] | None = None

    def resolve_store(self, requirements, seed: int) -> EmbeddingStore:
        if self.embeddings is not None:
            return self.embeddings
        return builtin_embed(requirements, self.embedding_dim,
                             derive_seed(seed, "embed"))


@dataclass
class FoldOutcome:
    """Predictions and scores for one evaluated pair set."""

    predictions: dict[RequirementPair, str]
    confusion: ConfusionMatrix
    report: MetricsReport


@dataclass
class CVResult:
    """Per-fold reports plus mean/std aggregates and the summed confusion."""

    dataset: str
    k: int
    seed: int
    classes: tuple[str, ...]
    folds: list[MetricsReport]
    aggregate: dict[str, tuple[float, float]]
    confusion_total: ConfusionMatrix


_AGGREGATE_KEYS = (
    "accuracy", "macro_precision", "macro_recall", "macro_f1",
    "weighted_precision", "weighted_recall", "weighted_f1",
    "conflict_precision", "conflict_recall", "conflict_f1",
    "conflict_tp", "conflict_fp",
)


def _evaluate_pairs(model, store, test_pairs, classes, config: PipelineConfig,
                    requirements) -> FoldOutcome:
    X_test = feature_matrix(store, test_pairs)
    predicted = predict(model, X_test)
    predictions = {pair: label for pair, (label, _) in zip(test_pairs, predicted)}
    if config.filter_method is not None:
        positives = [p for p, lab in predictions.items() if lab == CONFLICT]
        decisions = run_filter(config.filter_method, positives,
                               annotations=config.annotations,
                               requirements=requirements)
        predictions = apply_filter(predictions, decisions)
    cm = confusion([p.label for p in test_pairs],
                   [predictions[p] for p in test_pairs], classes)
    return FoldOutcome(predictions=predictions, confusion=cm, report=metrics(cm))


def _train_model(store, train_pairs, classes, config: PipelineConfig, seed: int):
    X = feature_matrix(store, train_pairs)
    labels = [p.label for p in train_pairs]
    if any(lab is None for lab in labels):
        raise ValidationError("cannot train on unlabeled pairs")
    model = init_model(3 * store.dim, config.hidden_units, len(classes),
                       seed=derive_seed(seed, "init"),
                       dropout_rate=config.dropout_rate)
    cfg = replace(config.train, seed=derive_seed(seed, "train"))
    fitted, report = train(model, X, labels, cfg)
    return fitted, report


def run_pipeline_once(train_pairs, test_pairs, requirements, classes,
                      config: PipelineConfig, seed: int,
                      store: EmbeddingStore | None = None) -> FoldOutcome:
    """Train on one pair set and evaluate on another; fully seeded."""
    if store is None:
        store = config.resolve_store(requirements, seed)
    fitted, _ = _train_model(store, train_pairs, classes, config, seed)
    return _evaluate_pairs(fitted, store, test_pairs, classes, config, requirements)


def _aggregate(folds: list[MetricsReport], classes) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    for key in _AGGREGATE_KEYS:
        if key.startswith("conflict") and CONFLICT not in classes:
            continue
        values = np.asarray([rep.value(key) for rep in folds], dtype=np.float64)
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        out[key] = (float(values.mean()), std)
    return out


def run_cv(dataset: PairDataset, k: int, config: PipelineConfig,
           seed: int, jobs: int = 1) -> CVResult:
    """Stratified k-fold cross-validation of the configured pipeline.

    Each fold trains on the other k-1 folds and is scored on its own
    pairs; aggregates report mean and sample (n-1) standard deviation.
    Folds are independent, so `jobs` > 1 runs them on a thread pool;
    results are identical either way.
    """
    plan = stratified_kfold(dataset, k, derive_seed(seed, "folds"))
    store = config.resolve_store(dataset.requirements, seed)
    classes = dataset.classes

    def one_fold(fold: int) -> FoldOutcome:
        return run_pipeline_once(
            plan.rest_pairs(dataset, fold), plan.fold_pairs(dataset, fold),
            dataset.requirements, classes, config,
            derive_seed(seed, "fold", fold), store=store)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one_fold, range(k)))
    else:
        outcomes = [one_fold(fold) for fold in range(k)]

    folds = [o.report for o in outcomes]
    total: ConfusionMatrix | None = None
    for outcome in outcomes:
        total = outcome.confusion if total is None else total.add(outcome.confusion)
    return CVResult(dataset=dataset.name, k=k, seed=seed, classes=classes,
                    folds=folds, aggregate=_aggregate(folds, classes),
                    confusion_total=total)


def _merge_requirements(datasets) -> dict:
    merged: dict = {}
    for ds in datasets:
        for rid, req in ds.requirements.items():
            if rid in merged and merged[rid] != req:
                raise ValidationError(
                    f"requirement id {rid!r} appears in multiple datasets "
                    "with different content")
            merged[rid] = req
    return merged


def run_cross_domain(train_sets, test_set: PairDataset,
                     config: PipelineConfig, seed: int = 0) -> MetricsReport:
    """Train one model on concatenated domains, evaluate on an unseen one."""
    outcome = run_cross_domain_detailed(train_sets, test_set, config, seed)
    return outcome.report


def run_cross_domain_detailed(train_sets, test_set: PairDataset,
                              config: PipelineConfig, seed: int = 0) -> FoldOutcome:
    train_sets = list(train_sets)
    if not train_sets:
        raise ValidationError("cross-domain run needs at least one training dataset")
    for ds in train_sets:
        if ds.mode != test_set.mode:
            raise LabelModeError(
                f"training dataset {ds.name!r} has mode {ds.mode}, "
                f"test dataset {test_set.name!r} has mode {test_set.mode}")
    test_keys = {p.key for p in test_set.pairs}
    for ds in train_sets:
        overlap = test_keys & {p.key for p in ds.pairs}
        if overlap:
            raise ValidationError(
                f"training dataset {ds.name!r} shares {len(overlap)} pairs "
                "with the test dataset")
    requirements = _merge_requirements([*train_sets, test_set])
    store = config.resolve_store(requirements, seed)
    train_pairs = sorted((p for ds in train_sets for p in ds.pairs),
                         key=lambda p: p.key)
    classes = test_set.classes
    fitted, _ = _train_model(store, train_pairs, classes, config, seed)
    return _evaluate_pairs(fitted, store, list(test_set.pairs), classes,
                           config, requirements)


def ftest_5x2cv(dataset: PairDataset, pipeline_a: PipelineConfig,
                pipeline_b: PipelineConfig, metric: str, seed: int) -> FTestResult:
    """Five replications of paired 2-fold CV feeding the combined F statistic.

    Replication i splits with seed + i; both pipelines see identical
    splits, and the per-fold differences are pipeline_a minus pipeline_b
    on the named metric.
    """
    differences: list[tuple[float, float]] = []
    for i in range(5):
        plan = stratified_kfold(dataset, 2, seed + i)
        fold_diffs = []
        for j in range(2):
            train_pairs = plan.rest_pairs(dataset, j)
            test_pairs = plan.fold_pairs(dataset, j)
            run_seed = derive_seed(seed, "rep", i, "fold", j)
            score_a = run_pipeline_once(train_pairs, test_pairs,
                                        dataset.requirements, dataset.classes,
                                        pipeline_a, run_seed).report.value(metric)
            score_b = run_pipeline_once(train_pairs, test_pairs,
                                        dataset.requirements, dataset.classes,
                                        pipeline_b, run_seed).report.value(metric)
            fold_diffs.append(score_a - score_b)
        differences.append((fold_diffs[0], fold_diffs[1]))
    return combined_f_test(differences)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def metrics_report_dict(report: MetricsReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "macro": {"precision": report.macro_precision,
                  "recall": report.macro_recall, "f1": report.macro_f1},
        "weighted": {"precision": report.weighted_precision,
                     "recall": report.weighted_recall, "f1": report.weighted_f1},
        "per_class": {
            cls: {"precision": cm.precision, "recall": cm.recall,
                  "f1": cm.f1, "support": cm.support}
            for cls, cm in report.per_class.items()
        },
        "conflict_tp": report.conflict_tp,
        "conflict_fp": report.conflict_fp,
        "zero_division_classes": list(report.zero_division_classes),
    }


def report_to_dict(result) -> dict:
    """Schema-versioned dict for CVResult, MetricsReport, or FTestResult."""
    if isinstance(result, CVResult):
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "kind": "cross_validation",
            "dataset": result.dataset,
            "k": result.k,
            "seed": result.seed,
            "classes": list(result.classes),
            "folds": [metrics_report_dict(rep) for rep in result.folds],
            "aggregate": {key: {"mean": mean, "std": std}
                          for key, (mean, std) in result.aggregate.items()},
            "confusion": result.confusion_total.counts.tolist(),
        }
    if isinstance(result, MetricsReport):
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "kind": "single_evaluation",
            "report": metrics_report_dict(result),
        }
    if isinstance(result, FTestResult):
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "kind": "f_test",
            "f_statistic": result.f_statistic,
            "dof": list(result.dof),
            "p_value": result.p_value,
            "differences": [list(rep) for rep in result.differences],
        }
    raise ValidationError(f"cannot serialize result of type {type(result).__name__}")


def _render_confusion(classes, counts) -> list[str]:
    width = max(9, max(len(c) for c in classes) + 2)
    lines = ["confusion (rows true, cols predicted):"]
    header = " " * width + "".join(f"{c:>{width}}" for c in classes)
    lines.append(header)
    for cls, row in zip(classes, counts):
        lines.append(f"{cls:>{width}}" + "".join(f"{int(n):>{width}}" for n in row))
    return lines


def report_to_text(result) -> str:
    """Human-readable rendering with one "mean ± std" line per aggregate."""
    if isinstance(result, CVResult):
        lines = [f"dataset: {result.dataset}  k={result.k}  seed={result.seed}"]
        lines.extend(_render_confusion(result.classes, result.confusion_total.counts))
        lines.append("")
        for key, (mean, std) in result.aggregate.items():
            lines.append(f"{key}: {mean:.4f} ± {std:.4f}")
        return "\n".join(lines) + "\n"
    if isinstance(result, MetricsReport):
        lines = [f"accuracy: {result.accuracy:.4f}",
                 f"macro_f1: {result.macro_f1:.4f}",
                 f"weighted_f1: {result.weighted_f1:.4f}",
                 f"conflict_tp: {result.conflict_tp}",
                 f"conflict_fp: {result.conflict_fp}"]
        for cls, cm in result.per_class.items():
            lines.append(f"{cls}: precision={cm.precision:.4f} "
                         f"recall={cm.recall:.4f} f1={cm.f1:.4f} support={cm.support}")
        return "\n".join(lines) + "\n"
    if isinstance(result, FTestResult):
        return (f"f_statistic: {result.f_statistic:.6f}\n"
                f"dof: F{result.dof}\n"
                f"p_value: {result.p_value:.6f}\n")
    raise ValidationError(f"cannot render result of type {type(result).__name__}")


def report_emit(result, path: str | Path, format: str = "json") -> Path:
    """Write a result as schema-versioned JSON or as text; returns the path."""
    path = Path(path)
    if format == "json":
        payload = json.dumps(report_to_dict(result), indent=2, sort_keys=True) + "\n"
    elif format == "text":
        payload = report_to_text(result)
    else:
        raise ValidationError(f"unknown report format {format!r}; expected json or text")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(payload, encoding="utf-8")
    return path


__all__ = [
    "PipelineConfig", "CVResult", "FoldOutcome", "derive_seed",
    "run_pipeline_once", "run_cv", "run_cross_domain",
    "run_cross_domain_detailed", "ftest_5x2cv", "report_emit",
    "report_to_dict", "report_to_text", "metrics_report_dict",
    "REPORT_SCHEMA_VERSION",
]
