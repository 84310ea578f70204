"""Requirement corpora: ingest, pair generation, fold planning, synthesis.

A PairDataset bundles identified requirement texts with labeled requirement
pairs. Pairs are unordered and stored in canonical lexicographic order so
each unordered pair appears exactly once. Datasets are treated as immutable
after construction; every operation returns new objects.

File formats:
  requirements CSV : header id,doc_id,text (UTF-8, RFC-4180 quoting)
  pairs CSV        : header id1,id2,label (label case-insensitive)
  JSONL            : one object per line with the same keys
"""
from __future__ import annotations

import csv
import itertools
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from .annotations import AnnotationRecord, SrlFrame, normalize_phrase
from .errors import (
    ClassTooSmallError,
    DuplicateIdError,
    EmptyTextError,
    ParseError,
    SelfPairError,
    UnknownIdError,
    UnknownLabelError,
    ValidationError,
)
from .postag import builtin_pos_tag

CONFLICT = "conflict"
DUPLICATE = "duplicate"
NEUTRAL = "neutral"

# Fixed class order; argmax ties in the classifier break toward the
# lowest index, i.e. toward conflict.
CDN_CLASSES = (CONFLICT, DUPLICATE, NEUTRAL)
CN_CLASSES = (CONFLICT, NEUTRAL)

MODE_CDN = "CDN"
MODE_CN = "CN"

MAX_TEXT_CHARS = 10_000


def canonical_label(raw: str) -> str:
    """Lowercase a label and validate it against the admissible set."""
    label = raw.strip().lower()
    if label not in CDN_CLASSES:
        raise UnknownLabelError(f"unknown label {raw!r}; expected one of {CDN_CLASSES}")
    return label


def classes_for_mode(mode: str) -> tuple[str, ...]:
    if mode == MODE_CDN:
        return CDN_CLASSES
    if mode == MODE_CN:
        return CN_CLASSES
    raise ValidationError(f"unknown dataset mode {mode!r}; expected CDN or CN")


@dataclass(frozen=True)
class Requirement:
    """One identified requirement sentence from a source document."""

    id: str
    doc_id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("requirement id must be non-empty")
        if not self.text.strip():
            raise EmptyTextError(f"requirement {self.id!r} has empty text")
        if len(self.text) > MAX_TEXT_CHARS:
            raise ValidationError(
                f"requirement {self.id!r} exceeds {MAX_TEXT_CHARS} characters")


@dataclass(frozen=True)
class RequirementPair:
    """Unordered requirement pair; ids are canonicalized to id1 < id2."""

    id1: str
    id2: str
    label: str | None = None

    def __post_init__(self):
        if self.id1 == self.id2:
            raise SelfPairError(f"pair may not reference {self.id1!r} twice")
        if self.id2 < self.id1:
            first, second = self.id2, self.id1
            object.__setattr__(self, "id1", first)
            object.__setattr__(self, "id2", second)
        if self.label is not None:
            object.__setattr__(self, "label", canonical_label(self.label))

    @property
    def key(self) -> tuple[str, str]:
        return (self.id1, self.id2)


@dataclass(frozen=True)
class PairDataset:
    """Named collection of requirements plus labeled pairs over them."""

    name: str
    requirements: dict[str, Requirement]
    pairs: tuple[RequirementPair, ...]
    mode: str = MODE_CDN

    def __post_init__(self):
        classes_for_mode(self.mode)
        for pair in self.pairs:
            for rid in (pair.id1, pair.id2):
                if rid not in self.requirements:
                    raise UnknownIdError(
                        f"pair ({pair.id1}, {pair.id2}) references unknown id {rid!r}")
            if self.mode == MODE_CN and pair.label == DUPLICATE:
                raise ValidationError(
                    f"CN dataset {self.name!r} may not contain duplicate-labeled pairs")
        keys = [p.key for p in self.pairs]
        if len(set(keys)) != len(keys):
            raise DuplicateIdError(f"dataset {self.name!r} repeats an unordered pair")

    @property
    def classes(self) -> tuple[str, ...]:
        return classes_for_mode(self.mode)

    def label_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for pair in self.pairs:
            if pair.label is not None:
                counts[pair.label] = counts.get(pair.label, 0) + 1
        return counts


def make_dataset(name: str, requirements, pairs=(), mode: str = MODE_CDN) -> PairDataset:
    """Build a dataset from requirement/pair iterables, rejecting id reuse."""
    index: dict[str, Requirement] = {}
    for req in requirements:
        if req.id in index:
            if index[req.id] == req:
                continue
            raise DuplicateIdError(f"duplicate requirement id {req.id!r}")
        index[req.id] = req
    return PairDataset(name=name, requirements=index, pairs=tuple(pairs), mode=mode)


# ---------------------------------------------------------------------------
# Ingest / serialization
# ---------------------------------------------------------------------------

def _iter_rows(path: Path, fmt: str, required: tuple[str, ...]):
    """Yield (lineno, dict) rows from a CSV or JSONL file."""
    if fmt == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ParseError(str(path), 1, "missing CSV header")
            missing = [c for c in required if c not in reader.fieldnames]
            if missing:
                raise ParseError(str(path), 1, f"missing required columns {missing}")
            for row in reader:
                if any(row.get(c) is None for c in required):
                    raise ParseError(str(path), reader.line_num, "short row")
                yield reader.line_num, row
    elif fmt == "jsonl":
        with path.open("r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ParseError(str(path), lineno, f"invalid JSON: {exc.msg}") from exc
                if not isinstance(obj, dict):
                    raise ParseError(str(path), lineno, "line must be a JSON object")
                missing = [c for c in required if c not in obj]
                if missing:
                    raise ParseError(str(path), lineno, f"missing required keys {missing}")
                yield lineno, obj
    else:
        raise ValidationError(f"unknown format {fmt!r}; expected csv or jsonl")


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    raise ValidationError(f"cannot infer format from {path!r}; pass format explicitly")


def ingest_requirements(path: str | Path, format: str | None = None) -> list[Requirement]:
    """Parse a requirements file, rejecting duplicate ids and empty texts.

    Rows that repeat an id with identical content are collapsed; a repeated
    id with different content raises DuplicateIdError.
    """
    path = Path(path)
    fmt = format or detect_format(path)
    seen: dict[str, Requirement] = {}
    for lineno, row in _iter_rows(path, fmt, ("id", "doc_id", "text")):
        try:
            req = Requirement(id=str(row["id"]), doc_id=str(row["doc_id"]),
                              text=str(row["text"]))
        except EmptyTextError as exc:
            raise EmptyTextError(f"{path}:{lineno}: {exc}") from exc
        if req.id in seen:
            if seen[req.id] == req:
                continue
            raise DuplicateIdError(
                f"{path}:{lineno}: duplicate requirement id {req.id!r}")
        seen[req.id] = req
    return list(seen.values())


def ingest_pairs(path: str | Path, dataset: PairDataset,
                 format: str | None = None) -> PairDataset:
    """Parse labeled pairs into `dataset`, returning a new dataset.

    Ids must resolve within the dataset; labels are canonicalized to
    lowercase; pairs are stored in canonical order.
    """
    path = Path(path)
    fmt = format or detect_format(path)
    pairs: list[RequirementPair] = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in _iter_rows(path, fmt, ("id1", "id2", "label")):
        id1, id2 = str(row["id1"]), str(row["id2"])
        for rid in (id1, id2):
            if rid not in dataset.requirements:
                raise UnknownIdError(f"{path}:{lineno}: unknown requirement id {rid!r}")
        raw_label = row["label"]
        label = canonical_label(str(raw_label)) if raw_label not in (None, "") else None
        pair = RequirementPair(id1=id1, id2=id2, label=label)
        if pair.key in seen:
            raise DuplicateIdError(
                f"{path}:{lineno}: unordered pair {pair.key} appears twice")
        seen.add(pair.key)
        pairs.append(pair)
    return replace(dataset, pairs=tuple(pairs))


def save_requirements(requirements, path: str | Path) -> None:
    """Write requirements as canonical CSV (sorted by id, LF line endings)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "doc_id", "text"])
        for req in sorted(requirements, key=lambda r: r.id):
            writer.writerow([req.id, req.doc_id, req.text])


def save_pairs(pairs, path: str | Path) -> None:
    """Write pairs as canonical CSV (sorted by key, LF line endings)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id1", "id2", "label"])
        for pair in sorted(pairs, key=lambda p: p.key):
            writer.writerow([pair.id1, pair.id2, pair.label or ""])


def load_dataset_dir(path: str | Path, name: str | None = None,
                     mode: str = MODE_CDN) -> PairDataset:
    """Load a dataset directory holding requirements.(csv|jsonl) and pairs.(csv|jsonl)."""
    path = Path(path)
    req_path = next((path / f"requirements.{ext}" for ext in ("csv", "jsonl")
                     if (path / f"requirements.{ext}").exists()), None)
    if req_path is None:
        raise ValidationError(f"no requirements.csv or requirements.jsonl under {path}")
    reqs = ingest_requirements(req_path)
    dataset = make_dataset(name or path.name, reqs, mode=mode)
    pair_path = next((path / f"pairs.{ext}" for ext in ("csv", "jsonl")
                      if (path / f"pairs.{ext}").exists()), None)
    if pair_path is not None:
        dataset = ingest_pairs(pair_path, dataset)
    return dataset


def save_dataset_dir(dataset: PairDataset, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    save_requirements(dataset.requirements.values(), path / "requirements.csv")
    save_pairs(dataset.pairs, path / "pairs.csv")


# ---------------------------------------------------------------------------
# Pair generation and derived datasets
# ---------------------------------------------------------------------------

def generate_pairs(dataset: PairDataset) -> list[RequirementPair]:
    """All n(n-1)/2 unordered, unlabeled candidate pairs in canonical order."""
    ids = sorted(dataset.requirements)
    if len(ids) < 2:
        raise ValidationError("pair generation needs at least two requirements")
    return [RequirementPair(id1=a, id2=b) for a, b in itertools.combinations(ids, 2)]


def derive_cn(dataset: PairDataset) -> PairDataset:
    """Drop duplicate-labeled pairs and switch the dataset to CN mode.

    Idempotent: a CN dataset is returned unchanged.
    """
    if dataset.mode == MODE_CN:
        return dataset
    kept = tuple(p for p in dataset.pairs if p.label != DUPLICATE)
    return replace(dataset, pairs=kept, mode=MODE_CN)


@dataclass(frozen=True)
class FoldPlan:
    """Stratified assignment of pair keys to folds 0..k-1."""

    k: int
    assignments: dict[tuple[str, str], int]
    seed: int

    def fold_pairs(self, dataset: PairDataset, fold: int) -> list[RequirementPair]:
        # Canonical (key-sorted) order so results never depend on the
        # dataset's incidental pair ordering.
        return sorted((p for p in dataset.pairs if self.assignments[p.key] == fold),
                      key=lambda p: p.key)

    def rest_pairs(self, dataset: PairDataset, fold: int) -> list[RequirementPair]:
        return sorted((p for p in dataset.pairs if self.assignments[p.key] != fold),
                      key=lambda p: p.key)


def stratified_kfold(dataset: PairDataset, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified k-fold plan over the dataset's labeled pairs.

    Within each class, members are shuffled under `seed` and dealt
    round-robin, so per-class fold sizes differ by at most one.
    """
    if k < 2:
        raise ValidationError(f"k must be at least 2, got {k}")
    by_class: dict[str, list[tuple[str, str]]] = {}
    for pair in dataset.pairs:
        if pair.label is None:
            raise ValidationError(f"pair {pair.key} is unlabeled; cannot stratify")
        by_class.setdefault(pair.label, []).append(pair.key)

    rng = random.Random(seed)
    assignments: dict[tuple[str, str], int] = {}
    for label in sorted(by_class):
        keys = sorted(by_class[label])
        if len(keys) < k:
            raise ClassTooSmallError(
                f"class {label!r} has {len(keys)} pairs; needs at least {k}")
        rng.shuffle(keys)
        for i, key in enumerate(keys):
            assignments[key] = i % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


# ---------------------------------------------------------------------------
# Synthetic desk-scale corpora
# ---------------------------------------------------------------------------

# Actor vocabularies per synthetic domain; templates are shared across
# domains so cross-domain experiments have transferable structure.
_DOMAIN_ACTORS = (
    ("UAV", "Pilot", "Ground Station", "Battery Monitor", "Flight Controller"),
    ("Scheduler", "Operator", "Payment Gateway", "Audit Service", "Dispatcher"),
    ("Infusion Pump", "Nurse", "Patient Portal", "Records System", "Lab Console"),
)

_ACTION_SYNONYMS = {
    "send": "transmit",
    "record": "log",
    "display": "show",
    "store": "retain",
    "report": "announce",
    "verify": "validate",
    "monitor": "track",
    "update": "refresh",
}
_ACTIONS = tuple(_ACTION_SYNONYMS)

_OBJECT_SYNONYMS = {
    "the status report": "the status summary",
    "the telemetry data": "the telemetry information",
    "the error message": "the fault message",
    "the mission plan": "the mission schedule",
    "the access token": "the access credential",
    "the battery level": "the charge level",
    "the maintenance record": "the maintenance entry",
    "the position estimate": "the position reading",
}
_OBJECTS = tuple(_OBJECT_SYNONYMS)

_TAILS = (
    "within {n} seconds",
    "every {n} minutes",
    "after {n} retries",
    "in under {n} milliseconds",
)


@dataclass(frozen=True)
class _SynthSpec:
    actor: str
    action: str
    obj: str
    tail: str
    quantity: int

    def render(self, *, negate: bool = False, action: str | None = None,
               obj: str | None = None, quantity: int | None = None) -> str:
        verb = action or self.action
        target = obj or self.obj
        number = self.quantity if quantity is None else quantity
        modal = "shall not" if negate else "shall"
        tail = self.tail.format(n=number)
        return f"The {self.actor} {modal} {verb} {target} {tail}."


def _make_specs(n_templates: int, actors, rng: random.Random) -> list[_SynthSpec]:
    specs = []
    for i in range(n_templates):
        specs.append(
            _SynthSpec(
                actor=actors[i % len(actors)],
                action=_ACTIONS[i % len(_ACTIONS)],
                obj=_OBJECTS[(i // 2) % len(_OBJECTS)],
                tail=_TAILS[i % len(_TAILS)],
                quantity=rng.randrange(2, 60),
            )
        )
    return specs


def synth_corpus(n_templates: int, n_per_class: int, seed: int, *,
                 domain: int = 0, n_bait: int = 0,
                 name: str | None = None) -> PairDataset:
    """Generate a deterministic templated corpus with labeled pairs.

    Emits n_per_class pairs for each of conflict/duplicate/neutral:
    duplicates are synonym-substituted rewrites, conflicts negate the modal
    or mutate the quantity, neutrals pair unrelated templates. `n_bait`
    adds extra neutral-labeled pairs that share actor and object but use
    unrelated verbs - textual near-misses meant to draw false-positive
    conflict predictions for filter experiments.
    """
    if n_per_class < 1:
        raise ValidationError("n_per_class must be at least 1")
    if n_templates < 2:
        raise ValidationError("n_templates must be at least 2")
    # Mix the domain into the seed so sibling domains differ deterministically.
    rng = random.Random(seed * 1_000_003 + domain)
    actors = _DOMAIN_ACTORS[domain % len(_DOMAIN_ACTORS)]
    specs = _make_specs(n_templates, actors, rng)
    name = name or f"synth{domain}"

    requirements: list[Requirement] = []
    pairs: list[RequirementPair] = []
    counter = itertools.count(1)

    def add_req(text: str) -> str:
        rid = f"{name}-r{next(counter):04d}"
        requirements.append(Requirement(id=rid, doc_id=name, text=text))
        return rid

    for i in range(n_per_class):
        spec = specs[i % len(specs)]
        q = rng.randrange(2, 60)
        a = add_req(spec.render(quantity=q))
        b = add_req(spec.render(quantity=q, action=_ACTION_SYNONYMS[spec.action],
                                obj=_OBJECT_SYNONYMS[spec.obj]))
        pairs.append(RequirementPair(id1=a, id2=b, label=DUPLICATE))

    for i in range(n_per_class):
        spec = specs[(i + 1) % len(specs)]
        q = rng.randrange(2, 60)
        a = add_req(spec.render(quantity=q))
        if rng.random() < 0.5:
            b = add_req(spec.render(quantity=q, negate=True))
        else:
            b = add_req(spec.render(quantity=q + rng.randrange(5, 40)))
        pairs.append(RequirementPair(id1=a, id2=b, label=CONFLICT))

    for i in range(n_per_class):
        first = specs[i % len(specs)]
        others = [s for s in specs if s.actor != first.actor and s.action != first.action]
        second = others[i % len(others)] if others else specs[(i + 1) % len(specs)]
        a = add_req(first.render(quantity=rng.randrange(2, 60)))
        b = add_req(second.render(quantity=rng.randrange(2, 60)))
        pairs.append(RequirementPair(id1=a, id2=b, label=NEUTRAL))

    for i in range(n_bait):
        spec = specs[i % len(specs)]
        decoys = [v for v in _ACTIONS if v != spec.action]
        q = rng.randrange(2, 60)
        a = add_req(spec.render(quantity=q))
        b = add_req(spec.render(quantity=q, action=decoys[i % len(decoys)]))
        pairs.append(RequirementPair(id1=a, id2=b, label=NEUTRAL))

    return make_dataset(name, requirements, pairs, mode=MODE_CDN)


def synth_annotations(dataset: PairDataset) -> dict[str, AnnotationRecord]:
    """Derive annotation records from the synthetic template grammar.

    Only valid for synth_corpus output, whose sentences all follow
    "The <actor> shall [not] <verb> <object...>.". Produces actors,
    actions, built-in POS tags, and one semantic-role frame per text.
    """
    records: dict[str, AnnotationRecord] = {}
    for req in dataset.requirements.values():
        words = normalize_phrase(req.text).split()
        try:
            modal_idx = words.index("shall")
        except ValueError as exc:
            raise ValidationError(
                f"requirement {req.id!r} does not follow the synthetic grammar") from exc
        actor = " ".join(words[1:modal_idx])
        verb_idx = modal_idx + 1
        while words[verb_idx] in ("not", "only"):
            verb_idx += 1
        verb = words[verb_idx]
        rest = " ".join(words[verb_idx + 1:])
        records[req.id] = AnnotationRecord(
            id=req.id,
            actors={actor},
            actions={verb},
            pos=builtin_pos_tag(req.text),
            srl=[SrlFrame(verb=verb, args={"ARG0": actor, "ARG1": rest})],
        )
    return records


__all__ = [
    "CONFLICT", "DUPLICATE", "NEUTRAL", "CDN_CLASSES", "CN_CLASSES",
    "MODE_CDN", "MODE_CN", "Requirement", "RequirementPair", "PairDataset",
    "FoldPlan", "canonical_label", "classes_for_mode", "make_dataset",
    "ingest_requirements", "ingest_pairs", "save_requirements", "save_pairs",
    "load_dataset_dir", "save_dataset_dir", "generate_pairs", "derive_cn",
    "stratified_kfold", "synth_corpus", "synth_annotations", "detect_format",
]
