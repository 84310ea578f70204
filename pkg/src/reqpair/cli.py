"""Command-line entry point wiring the pipeline into reproducible runs.

Subcommands: ingest, gen-pairs, synth, embed-import, train, predict,
filter, eval, cross-domain, ftest. Exit codes: 0 success, 1 usage error,
2 data/validation error. Every successful run writes a manifest.json
(effective config, its hash, and input digests) under the output
directory so the run can be replayed bit-identically.

Configuration precedence: command-line flags override keys from the
optional --config JSON file, which overrides built-in defaults. The
REQPAIR_OUT environment variable sets the default output root.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .classifier import TrainConfig, load_model, predict, save_model
from .corpus import (
    MODE_CDN,
    MODE_CN,
    PairDataset,
    RequirementPair,
    derive_cn,
    generate_pairs,
    ingest_pairs,
    ingest_requirements,
    load_dataset_dir,
    make_dataset,
    save_dataset_dir,
    save_pairs,
    synth_annotations,
    synth_corpus,
)
from .annotations import load_annotations, save_annotations
from .errors import ReqpairError, ValidationError
from .experiments import (
    PipelineConfig,
    derive_seed,
    ftest_5x2cv,
    report_emit,
    run_cross_domain_detailed,
    run_cv,
)
from .features import builtin_embed, feature_matrix, load_embeddings, save_embeddings
from .filters import apply_filter, run_filter

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return doc


def _effective(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag value if explicitly set, else config-file key, else default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _out_dir(args, config, command: str) -> Path:
    out = _effective(args, config, "out")
    if out is None:
        root = os.environ.get("REQPAIR_OUT", "runs")
        out = Path(root) / command
    return Path(out)


def _resolve_dataset(spec: str, mode: str, seed: int, config: dict) -> PairDataset:
    """A dataset flag is either "synth[:domain]" or a dataset directory."""
    if spec.startswith("synth"):
        domain = int(spec.split(":", 1)[1]) if ":" in spec else 0
        dataset = synth_corpus(
            n_templates=int(config.get("synth_templates", 8)),
            n_per_class=int(config.get("synth_per_class", 80)),
            seed=seed,
            domain=domain,
            n_bait=int(config.get("synth_bait", 0)),
        )
    else:
        dataset = load_dataset_dir(spec, mode=MODE_CDN)
    if mode == MODE_CN:
        dataset = derive_cn(dataset)
    return dataset


def _pipeline_config(args, config: dict, seed: int) -> PipelineConfig:
    embeddings = None
    emb_spec = _effective(args, config, "embeddings", "builtin")
    if emb_spec != "builtin":
        embeddings = load_embeddings(emb_spec)
    annotations = None
    ann_path = _effective(args, config, "annotations")
    if ann_path:
        annotations = load_annotations(ann_path)
    method = _effective(args, config, "method")
    if method:
        method = method.replace("-", "_")
    train_cfg = TrainConfig(
        max_epochs=int(_effective(args, config, "epochs", 50)),
        batch_size=int(config.get("batch_size", 16)),
        learning_rate=float(config.get("learning_rate", 1e-3)),
        patience=int(config.get("patience", 5)),
        min_delta=float(config.get("min_delta", 1e-4)),
        val_fraction=float(config.get("val_fraction", 0.1)),
        seed=seed,
        class_weighting=str(config.get("class_weighting", "none")),
    )
    return PipelineConfig(
        embedding_dim=int(_effective(args, config, "dim", 256)),
        hidden_units=int(_effective(args, config, "hidden_units", 1500)),
        dropout_rate=float(config.get("dropout_rate", 0.2)),
        train=train_cfg,
        embeddings=embeddings,
        filter_method=method,
        annotations=annotations,
    )


def _write_manifest(out: Path, command: str, args: argparse.Namespace,
                    config: dict, inputs: list[Path], outputs: list[Path]) -> None:
    effective = {k: v for k, v in vars(args).items()
                 if k not in ("func", "command") and v is not None}
    effective["config_file_values"] = config
    canonical = json.dumps(effective, sort_keys=True, default=str)
    manifest = {
        "tool": "reqpair",
        "version": __version__,
        "command": command,
        "config": json.loads(canonical),
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "inputs": {str(p): _sha256_file(Path(p)) for p in inputs if Path(p).is_file()},
        "outputs": sorted(str(p) for p in outputs),
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_ingest(args, config) -> int:
    out = _out_dir(args, config, "ingest")
    out.mkdir(parents=True, exist_ok=True)
    reqs = ingest_requirements(args.requirements)
    mode = (args.mode or "cdn").upper()
    dataset = make_dataset(args.name or "dataset", reqs, mode=MODE_CDN)
    inputs = [Path(args.requirements)]
    if args.pairs:
        dataset = ingest_pairs(args.pairs, dataset)
        inputs.append(Path(args.pairs))
    if mode == MODE_CN:
        dataset = derive_cn(dataset)
    save_dataset_dir(dataset, out)
    counts = dataset.label_counts()
    print(f"ingested {len(dataset.requirements)} requirements, "
          f"{len(dataset.pairs)} pairs {counts}")
    _write_manifest(out, "ingest", args, config, inputs,
                    [out / "requirements.csv", out / "pairs.csv"])
    return 0


def _cmd_gen_pairs(args, config) -> int:
    out = _out_dir(args, config, "gen-pairs")
    out.mkdir(parents=True, exist_ok=True)
    dataset = _resolve_dataset(args.dataset, MODE_CDN, args.seed or 0, config)
    pairs = generate_pairs(dataset)
    path = out / "candidate_pairs.csv"
    save_pairs(pairs, path)
    print(f"generated {len(pairs)} candidate pairs -> {path}")
    _write_manifest(out, "gen-pairs", args, config, [], [path])
    return 0


def _cmd_synth(args, config) -> int:
    out = _out_dir(args, config, "synth")
    out.mkdir(parents=True, exist_ok=True)
    dataset = synth_corpus(
        n_templates=args.templates,
        n_per_class=args.per_class,
        seed=args.seed or 0,
        domain=args.domain,
        n_bait=args.bait,
    )
    if (args.mode or "cdn").upper() == MODE_CN:
        dataset = derive_cn(dataset)
    save_dataset_dir(dataset, out)
    ann_path = out / "annotations.jsonl"
    save_annotations(synth_annotations(dataset), ann_path)
    print(f"synthesized {len(dataset.requirements)} requirements, "
          f"{len(dataset.pairs)} pairs -> {out}")
    _write_manifest(out, "synth", args, config, [],
                    [out / "requirements.csv", out / "pairs.csv", ann_path])
    return 0


def _cmd_embed_import(args, config) -> int:
    out = _out_dir(args, config, "embed-import")
    out.mkdir(parents=True, exist_ok=True)
    store = load_embeddings(args.embeddings)
    path = out / "embeddings.jsonl"
    save_embeddings(store, path)
    print(f"imported {len(store.vectors)} embeddings of dim {store.dim} -> {path}")
    _write_manifest(out, "embed-import", args, config, [Path(args.embeddings)], [path])
    return 0


def _resolve_store(args, config, dataset: PairDataset, seed: int):
    emb = _effective(args, config, "embeddings", "builtin")
    if emb == "builtin":
        dim = int(_effective(args, config, "dim", 256))
        return builtin_embed(dataset.requirements, dim, derive_seed(seed, "embed"))
    return load_embeddings(emb)


def _cmd_train(args, config) -> int:
    out = _out_dir(args, config, "train")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed or 0
    mode = (args.mode or "cdn").upper()
    dataset = _resolve_dataset(args.dataset, mode, seed, config)
    store = _resolve_store(args, config, dataset, seed)
    pipeline = _pipeline_config(args, config, seed)
    from .experiments import _train_model  # shared trainer plumbing
    fitted, report = _train_model(store, list(dataset.pairs), dataset.classes,
                                  pipeline, seed)
    model_path = out / "model.json"
    save_model(fitted, model_path)
    report_path = out / "train_report.json"
    report_path.write_text(json.dumps({
        "epochs_run": report.epochs_run,
        "best_epoch": report.best_epoch,
        "stopped_early": report.stopped_early,
        "train_loss_history": report.train_loss_history,
        "val_loss_history": report.val_loss_history,
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"trained {report.epochs_run} epochs (best {report.best_epoch}) -> {model_path}")
    _write_manifest(out, "train", args, config, [], [model_path, report_path])
    return 0


def _predictions_csv(pairs, predicted, path: Path) -> None:
    import csv
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id1", "id2", "predicted", "probabilities"])
        for pair, (label, probs) in zip(pairs, predicted):
            writer.writerow([pair.id1, pair.id2, label,
                             " ".join(f"{p:.6f}" for p in probs)])


def _cmd_predict(args, config) -> int:
    out = _out_dir(args, config, "predict")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed or 0
    mode = (args.mode or "cdn").upper()
    dataset = _resolve_dataset(args.dataset, mode, seed, config)
    model = load_model(args.model)
    store = _resolve_store(args, config, dataset, seed)
    pairs = list(dataset.pairs)
    predicted = predict(model, feature_matrix(store, pairs))
    path = out / "predictions.csv"
    _predictions_csv(pairs, predicted, path)
    print(f"wrote {len(pairs)} predictions -> {path}")
    _write_manifest(out, "predict", args, config, [Path(args.model)], [path])
    return 0


def _cmd_filter(args, config) -> int:
    out = _out_dir(args, config, "filter")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed or 0
    mode = (args.mode or "cn").upper()
    dataset = _resolve_dataset(args.dataset, mode, seed, config)
    annotations = load_annotations(args.annotations) if args.annotations else None
    method = args.method.replace("-", "_")

    import csv
    predictions: dict[RequirementPair, str] = {}
    with Path(args.predictions).open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            pair = RequirementPair(id1=row["id1"], id2=row["id2"])
            predictions[pair] = row["predicted"]

    positives = [p for p, lab in predictions.items() if lab == "conflict"]
    decisions = run_filter(method, positives, annotations=annotations,
                           requirements=dataset.requirements)
    final = apply_filter(predictions, decisions)

    path = out / "filtered_predictions.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id1", "id2", "predicted", "filtered"])
        for pair in sorted(predictions, key=lambda p: p.key):
            writer.writerow([pair.id1, pair.id2, predictions[pair], final[pair]])
    demoted = sum(1 for p in predictions if predictions[p] != final[p])
    print(f"filter {method}: {len(positives)} positives, {demoted} demoted -> {path}")
    _write_manifest(out, "filter", args, config,
                    [Path(args.predictions)] +
                    ([Path(args.annotations)] if args.annotations else []), [path])
    return 0


def _cmd_eval(args, config) -> int:
    out = _out_dir(args, config, "eval")
    seed = args.seed or 0
    mode = (args.mode or "cdn").upper()
    dataset = _resolve_dataset(args.dataset, mode, seed, config)
    pipeline = _pipeline_config(args, config, seed)
    result = run_cv(dataset, args.k or 5, pipeline, seed, jobs=args.jobs or 1)
    json_path = report_emit(result, out / "report.json", "json")
    text_path = report_emit(result, out / "report.txt", "text")
    print(Path(text_path).read_text(encoding="utf-8"), end="")
    _write_manifest(out, "eval", args, config, [], [json_path, text_path])
    return 0


def _cmd_cross_domain(args, config) -> int:
    out = _out_dir(args, config, "cross-domain")
    seed = args.seed or 0
    mode = (args.mode or "cn").upper()
    train_sets = [_resolve_dataset(spec.strip(), mode, seed, config)
                  for spec in args.train.split(",")]
    test_set = _resolve_dataset(args.test, mode, seed, config)
    pipeline = _pipeline_config(args, config, seed)
    outcome = run_cross_domain_detailed(train_sets, test_set, pipeline, seed)
    json_path = report_emit(outcome.report, out / "report.json", "json")
    text_path = report_emit(outcome.report, out / "report.txt", "text")
    print(Path(text_path).read_text(encoding="utf-8"), end="")
    _write_manifest(out, "cross-domain", args, config, [], [json_path, text_path])
    return 0


def _cmd_ftest(args, config) -> int:
    out = _out_dir(args, config, "ftest")
    seed = args.seed or 0
    mode = (args.mode or "cdn").upper()
    dataset = _resolve_dataset(args.dataset, mode, seed, config)
    cfg_a = dict(config)
    cfg_a.update(config.get("pipeline_a", {}))
    cfg_b = dict(config)
    cfg_b.update(config.get("pipeline_b", {}))
    pipeline_a = _pipeline_config(args, cfg_a, seed)
    pipeline_b = _pipeline_config(args, cfg_b, seed)
    result = ftest_5x2cv(dataset, pipeline_a, pipeline_b,
                         args.metric or "macro_f1", seed)
    json_path = report_emit(result, out / "ftest.json", "json")
    print(f"f={result.f_statistic:.6f} dof=F{result.dof} p={result.p_value:.6f}")
    _write_manifest(out, "ftest", args, config, [], [json_path])
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reqpair",
                     description="Requirement-pair conflict/duplicate pipeline")
    parser.add_argument("--version", action="version", version=f"reqpair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="output directory (default $REQPAIR_OUT/<cmd>)")
        p.add_argument("--seed", type=int, help="base seed for all stages")
        p.add_argument("--mode", choices=["cdn", "cn"], help="label mode")

    p = sub.add_parser("ingest", help="normalize requirement/pair files")
    common(p)
    p.add_argument("--requirements", required=True)
    p.add_argument("--pairs")
    p.add_argument("--name")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("gen-pairs", help="emit all unordered candidate pairs")
    common(p)
    p.add_argument("--dataset", required=True, help="dataset dir or synth[:domain]")
    p.set_defaults(func=_cmd_gen_pairs)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    common(p)
    p.add_argument("--templates", type=int, default=8)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--domain", type=int, default=0)
    p.add_argument("--bait", type=int, default=0,
                   help="extra neutral near-miss pairs for filter experiments")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("embed-import", help="validate and import an embedding file")
    common(p)
    p.add_argument("--embeddings", required=True)
    p.set_defaults(func=_cmd_embed_import)

    p = sub.add_parser("train", help="train the classification head")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", help="embedding JSONL or 'builtin'")
    p.add_argument("--dim", type=int)
    p.add_argument("--hidden-units", type=int)
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="classify pairs with a trained model")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--dim", type=int)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("filter", help="re-check conflict predictions with one rule filter")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--annotations")
    p.add_argument("--method", required=True,
                   choices=["actor-action", "pos", "srl"])
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("eval", help="k-fold cross-validation run")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--embeddings")
    p.add_argument("--dim", type=int)
    p.add_argument("--hidden-units", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--method", choices=["actor-action", "pos", "srl"])
    p.add_argument("--annotations")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("cross-domain", help="train on some domains, test another")
    common(p)
    p.add_argument("--train", required=True, help="comma-separated dataset specs")
    p.add_argument("--test", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--dim", type=int)
    p.add_argument("--hidden-units", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--method", choices=["actor-action", "pos", "srl"])
    p.add_argument("--annotations")
    p.set_defaults(func=_cmd_cross_domain)

    p = sub.add_parser("ftest", help="compare two pipelines with the paired F-test")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--metric", help="metric key, e.g. macro_f1 (default)")
    p.set_defaults(func=_cmd_ftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config_file(args.config)
        return args.func(args, config)
    except ReqpairError as exc:
        print(f"reqpair: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except FileNotFoundError as exc:
        print(f"reqpair: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
