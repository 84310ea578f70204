"""Export job execution: requirements file in, interchange files out.

Produces the embedding JSONL ({"id", "vec"}, constant vector length) and
annotation JSONL ({"id", "actors", "actions", "pos", "srl"}, requested
sections only) consumed by the classification pipeline. Outputs are
written atomically (temp file, then rename) and are idempotent for fixed
checkpoint versions. A record whose extraction fails for one section is
logged and emitted with that section absent; record counts always equal
the input requirement count.
"""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import CheckpointError, load_embedder, load_ner, load_pos, load_srl

logger = logging.getLogger("reqpair_exporter")

TASKS = ("embed", "ner", "pos", "srl")
ANNOTATION_TASKS = ("ner", "pos", "srl")

DEFAULT_CHECKPOINTS = {
    "embed": "st:sentence-transformers/distilbert-base-nli-mean-tokens",
    "ner": "heuristic",
    "pos": "lexicon",
    "srl": "heuristic",
}


class ExportError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExportJob:
    """One export run: which requirements, which tasks, which checkpoints."""

    requirements_path: Path
    out_dir: Path
    tasks: tuple[str, ...]
    checkpoints: dict[str, str] = field(default_factory=dict)
    batch_size: int = 32

    def __post_init__(self):
        if not self.tasks:
            raise ExportError("at least one task is required")
        unknown = [t for t in self.tasks if t not in TASKS]
        if unknown:
            raise ExportError(f"unknown tasks {unknown}; expected subset of {TASKS}")
        if self.batch_size < 1:
            raise ExportError("batch_size must be positive")

    def checkpoint(self, task: str) -> str:
        return self.checkpoints.get(task, DEFAULT_CHECKPOINTS[task])


def read_requirements(path: Path) -> list[tuple[str, str]]:
    """(id, text) rows from a requirements CSV or JSONL file."""
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    if path.suffix.lower() == ".csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is not None:
                missing = {"id", "text"} - set(reader.fieldnames)
                if missing:
                    raise ExportError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                rows.append((str(row["id"]), str(row["text"])))
    elif path.suffix.lower() in (".jsonl", ".ndjson"):
        with path.open("r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ExportError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
                rows.append((str(obj["id"]), str(obj["text"])))
    else:
        raise ExportError(f"unsupported requirements format: {path}")
    for rid, _ in rows:
        if rid in seen:
            raise ExportError(f"duplicate requirement id {rid!r} in {path}")
        seen.add(rid)
    return rows


def _atomic_write_lines(path: Path, lines: list[str]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    os.replace(tmp, path)


def _export_embeddings(job: ExportJob, rows: list[tuple[str, str]]) -> Path:
    encode = load_embedder(job.checkpoint("embed"), job.batch_size)
    lines: list[str] = []
    if rows:
        vectors = encode([text for _, text in rows])
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2 or len(vectors) != len(rows):
            raise ExportError("encoder returned a malformed embedding matrix")
        for (rid, _), vec in zip(rows, vectors):
            lines.append(json.dumps({"id": rid, "vec": [float(x) for x in vec]}))
    path = job.out_dir / "embeddings.jsonl"
    _atomic_write_lines(path, lines)
    logger.info("wrote %d embeddings -> %s", len(lines), path)
    return path


def _export_annotations(job: ExportJob, rows: list[tuple[str, str]]) -> Path:
    extractors = {}
    if "ner" in job.tasks:
        extractors["ner"] = load_ner(job.checkpoint("ner"))
    if "pos" in job.tasks:
        extractors["pos"] = load_pos(job.checkpoint("pos"))
    if "srl" in job.tasks:
        extractors["srl"] = load_srl(job.checkpoint("srl"))

    lines: list[str] = []
    for rid, text in rows:
        record: dict = {"id": rid}
        if "ner" in extractors:
            try:
                actors, actions = extractors["ner"](text)
                record["actors"] = sorted(actors)
                record["actions"] = sorted(actions)
            except Exception as exc:
                logger.warning("ner failed for %s: %s", rid, exc)
        if "pos" in extractors:
            try:
                record["pos"] = [[tok, tag] for tok, tag in extractors["pos"](text)]
            except Exception as exc:
                logger.warning("pos failed for %s: %s", rid, exc)
        if "srl" in extractors:
            try:
                record["srl"] = extractors["srl"](text)
            except Exception as exc:
                logger.warning("srl failed for %s: %s", rid, exc)
        lines.append(json.dumps(record, ensure_ascii=False))
    path = job.out_dir / "annotations.jsonl"
    _atomic_write_lines(path, lines)
    logger.info("wrote %d annotation records -> %s", len(lines), path)
    return path


def export(job: ExportJob) -> list[Path]:
    """Run the job; returns the written interchange files."""
    rows = read_requirements(Path(job.requirements_path))
    job.out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    if "embed" in job.tasks:
        outputs.append(_export_embeddings(job, rows))
    if any(task in job.tasks for task in ANNOTATION_TASKS):
        outputs.append(_export_annotations(job, rows))
    return outputs


__all__ = ["ExportJob", "ExportError", "CheckpointError", "export",
           "read_requirements", "TASKS", "DEFAULT_CHECKPOINTS"]
