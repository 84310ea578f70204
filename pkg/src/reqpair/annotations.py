"""Per-requirement annotation records and their JSONL interchange format.

Records hold extracted actors, actions, POS tags, and shallow semantic-role
frames for one requirement. Every section except the id is optional; an
absent section is stored as None so downstream filters can distinguish
"not annotated" from "annotated but empty".

Interchange format (one JSON object per line):
    {"id": str, "actors": [str], "actions": [str],
     "pos": [[token, tag]],
     "srl": [{"verb": str, "args": {"ARG0": str, "ARG1": str}}]}
"""
from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateIdError, ParseError, UnknownTagWarning
from .postag import PTB_TAGS

# Content-word filtering for argument-overlap checks.
STOPWORDS = frozenset(
    [
        "the", "a", "an", "any", "all", "this", "that", "these", "those",
        "each", "every", "some", "no", "of", "in", "on", "at", "by", "for",
        "with", "from", "to", "and", "or", "but", "nor", "not", "only",
        "shall", "will", "would", "should", "can", "could", "may", "might",
        "must", "be", "is", "are", "was", "were", "been", "being", "it",
        "its", "their", "more", "less", "than", "as", "into", "onto", "per",
    ]
)

_PUNCT_RE = re.compile(r"[^a-z0-9\s]+")
_WS_RE = re.compile(r"\s+")

# Argument roles kept from semantic-role frames; other roles are dropped
# on load because the rule filters only compare agent/patient spans.
SRL_ROLES = ("ARG0", "ARG1")


def normalize_phrase(text: str) -> str:
    """Casefold, strip punctuation, and collapse whitespace."""
    text = _PUNCT_RE.sub(" ", text.casefold())
    return _WS_RE.sub(" ", text).strip()


def light_stem(word: str) -> str:
    """Strip the -ing/-ed/-s suffixes used for loose entity matching."""
    if len(word) >= 5 and word.endswith("ing"):
        return word[:-3]
    if len(word) >= 4 and word.endswith("ed"):
        return word[:-2]
    if len(word) > 3 and word.endswith("s") and not word.endswith(
            ("ss", "us", "is")):
        return word[:-1]
    return word


def stem_phrase(phrase: str) -> str:
    return " ".join(light_stem(w) for w in phrase.split())


def content_tokens(span: str) -> set[str]:
    """Normalized tokens of a span with stopwords removed."""
    return {t for t in normalize_phrase(span).split() if t not in STOPWORDS}


@dataclass(frozen=True)
class SrlFrame:
    """One predicate with its agent/patient argument spans."""

    verb: str
    args: dict[str, str] = field(default_factory=dict)


@dataclass
class AnnotationRecord:
    """Extracted annotations for one requirement; None marks absent sections."""

    id: str
    actors: set[str] | None = None
    actions: set[str] | None = None
    pos: list[tuple[str, str]] | None = None
    srl: list[SrlFrame] | None = None


def _parse_record(obj: dict, path: str, line: int) -> AnnotationRecord:
    if "id" not in obj or not isinstance(obj["id"], str):
        raise ParseError(path, line, "annotation record must carry a string 'id'")
    rec = AnnotationRecord(id=obj["id"])

    if "actors" in obj:
        rec.actors = {normalize_phrase(str(a)) for a in obj["actors"]}
        rec.actors.discard("")
    if "actions" in obj:
        rec.actions = {normalize_phrase(str(a)) for a in obj["actions"]}
        rec.actions.discard("")
    if "pos" in obj:
        pos: list[tuple[str, str]] = []
        for entry in obj["pos"]:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ParseError(path, line, "pos entries must be [token, tag] pairs")
            token, tag = str(entry[0]).lower(), str(entry[1])
            if tag not in PTB_TAGS:
                warnings.warn(
                    f"{path}:{line}: unknown POS tag {tag!r} for token {token!r}",
                    UnknownTagWarning,
                    stacklevel=2,
                )
            pos.append((token, tag))
        rec.pos = pos
    if "srl" in obj:
        frames: list[SrlFrame] = []
        for raw in obj["srl"]:
            verb = normalize_phrase(str(raw.get("verb", "")))
            if not verb:
                raise ParseError(path, line, "srl frame is missing a verb")
            args = {
                role: normalize_phrase(str(raw.get("args", {}).get(role, "")))
                for role in SRL_ROLES
                if raw.get("args", {}).get(role)
            }
            frames.append(SrlFrame(verb=verb, args=args))
        rec.srl = frames
    return rec


def load_annotations(path: str | Path) -> dict[str, AnnotationRecord]:
    """Load annotation JSONL into a mapping keyed by requirement id.

    Strings are normalized on load (case-folded, punctuation-stripped).
    Unknown POS tags produce an UnknownTagWarning but are kept. Malformed
    JSON raises ParseError with the offending line number.
    """
    path = Path(path)
    records: dict[str, AnnotationRecord] = {}
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
                raise ParseError(str(path), lineno, "annotation line must be a JSON object")
            rec = _parse_record(obj, str(path), lineno)
            if rec.id in records:
                raise DuplicateIdError(f"duplicate annotation id {rec.id!r}")
            records[rec.id] = rec
    return records


def save_annotations(records: dict[str, AnnotationRecord] | list[AnnotationRecord],
                     path: str | Path) -> None:
    """Write records as annotation JSONL (sections absent when None)."""
    items = list(records.values()) if isinstance(records, dict) else list(records)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in items:
            obj: dict = {"id": rec.id}
            if rec.actors is not None:
                obj["actors"] = sorted(rec.actors)
            if rec.actions is not None:
                obj["actions"] = sorted(rec.actions)
            if rec.pos is not None:
                obj["pos"] = [[t, g] for t, g in rec.pos]
            if rec.srl is not None:
                obj["srl"] = [{"verb": f.verb, "args": dict(f.args)} for f in rec.srl]
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
