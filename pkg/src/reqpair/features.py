"""Embedding storage and pair-feature construction.

The classifier consumes one fixed-length vector per requirement pair:
the two requirement embeddings concatenated with their difference,
concat(u, v, u - v), giving a feature of length 3 * dim. Embeddings come
either from an interchange file produced by an external encoder or from
the built-in hashed character n-gram embedder, which keeps the pipeline
self-contained.

Embedding JSONL interchange: one object per line,
    {"id": str, "vec": [finite numbers]}
with a constant vector length across records and no header line. Values
are stored at 32-bit float precision on disk and widened to 64-bit in
memory for training math.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import RequirementPair
from .errors import (
    DimensionMismatchError,
    DuplicateIdError,
    MissingEmbeddingError,
    NonFiniteValueError,
    ParseError,
    ValidationError,
)

_WS_RE = re.compile(r"\s+")

NGRAM_SIZES = (3, 4, 5)
MIN_BUILTIN_DIM = 16


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable map from requirement id to a real vector of length dim."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, rid: str) -> bool:
        return rid in self.vectors

    def get(self, rid: str) -> np.ndarray:
        try:
            return self.vectors[rid]
        except KeyError:
            raise MissingEmbeddingError(f"no embedding for requirement {rid!r}") from None


@dataclass(frozen=True)
class FeatureVector:
    """Pair feature concat(u, v, u - v) tagged with its pair key."""

    values: np.ndarray
    pair: tuple[str, str]


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load embedding JSONL; dim is inferred from the first record.

    Raises DimensionMismatchError naming the offending id,
    NonFiniteValueError for NaN/inf components, and DuplicateIdError for
    repeated ids.
    """
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or "id" not in obj or "vec" not in obj:
                raise ParseError(str(path), lineno, 'expected {"id": ..., "vec": [...]}')
            rid = str(obj["id"])
            if rid in vectors:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate embedding id {rid!r}")
            try:
                vec = np.asarray(obj["vec"], dtype=np.float32).astype(np.float64)
            except (TypeError, ValueError) as exc:
                raise ParseError(str(path), lineno, f"bad vector: {exc}") from exc
            if vec.ndim != 1 or vec.size == 0:
                raise ParseError(str(path), lineno, "vector must be a non-empty flat list")
            if not np.isfinite(vec).all():
                raise NonFiniteValueError(
                    f"{path}:{lineno}: non-finite value in embedding for {rid!r}")
            if dim is None:
                dim = int(vec.size)
            elif vec.size != dim:
                raise DimensionMismatchError(
                    f"{path}:{lineno}: embedding for {rid!r} has length "
                    f"{vec.size}, expected {dim}")
            vectors[rid] = vec
    if dim is None:
        raise ValidationError(f"embedding file {path} contains no records")
    return EmbeddingStore(dim=dim, vectors=vectors)


def save_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Write the store as embedding JSONL at 32-bit precision, sorted by id."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rid in sorted(store.vectors):
            vec = store.vectors[rid].astype(np.float32)
            fh.write(json.dumps({"id": rid, "vec": [float(x) for x in vec]}) + "\n")


def _hash_ngram(ngram: str, key: bytes) -> int:
    digest = hashlib.blake2b(ngram.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def embed_text(text: str, dim: int, seed: int) -> np.ndarray:
    """Signed hashed character n-gram embedding of one text, L2-normalized.

    N-grams (sizes 3..5) of the casefolded, whitespace-collapsed text are
    hashed with BLAKE2b-64 keyed by the little-endian 8-byte seed; the
    low bits select the bucket and the top bit the sign. Texts too short
    to produce any n-gram embed to the zero vector.
    """
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    normalized = _WS_RE.sub(" ", text.casefold()).strip()
    vec = np.zeros(dim, dtype=np.float64)
    for n in NGRAM_SIZES:
        for i in range(len(normalized) - n + 1):
            h = _hash_ngram(normalized[i:i + n], key)
            sign = -1.0 if h >> 63 else 1.0
            vec[h % dim] += sign
    norm = math.sqrt(float(vec @ vec))
    if norm > 0.0:
        vec /= norm
    return vec


def builtin_embed(requirements, dim: int, seed: int) -> EmbeddingStore:
    """Embed requirements with the built-in hashed n-gram encoder.

    Deterministic under (dim, seed); identical texts map to identical
    vectors regardless of requirement ordering.
    """
    if dim < MIN_BUILTIN_DIM:
        raise ValidationError(f"builtin embedder needs dim >= {MIN_BUILTIN_DIM}")
    items = requirements.values() if isinstance(requirements, dict) else requirements
    vectors = {req.id: embed_text(req.text, dim, seed) for req in items}
    return EmbeddingStore(dim=dim, vectors=vectors)


def pair_feature(store: EmbeddingStore, pair: RequirementPair) -> FeatureVector:
    """Build concat(u, v, u - v) for the pair's canonical orientation."""
    u = store.get(pair.id1)
    v = store.get(pair.id2)
    values = np.concatenate([u, v, u - v])
    return FeatureVector(values=values, pair=pair.key)


def feature_matrix(store: EmbeddingStore, pairs) -> np.ndarray:
    """Stack pair features into an (n_pairs, 3*dim) float64 matrix."""
    if not pairs:
        return np.zeros((0, 3 * store.dim), dtype=np.float64)
    return np.stack([pair_feature(store, p).values for p in pairs])


__all__ = [
    "EmbeddingStore", "FeatureVector", "load_embeddings", "save_embeddings",
    "embed_text", "builtin_embed", "pair_feature", "feature_matrix",
    "NGRAM_SIZES", "MIN_BUILTIN_DIM",
]
