"""Checkpoint-identifier resolution for each export task.

Identifiers are plain strings from the job config:

  embed : "st:<model-or-path>" (sentence-transformers; a bare path works
          too) - any directory a sentence encoder can load, including a
          plain transformer checkpoint, which gets mean pooling.
  ner   : "heuristic" or "hf:<token-classification checkpoint>" whose
          entity groups name actors/actions (ACTOR/PER/ORG vs ACTION/VERB).
  pos   : "lexicon" (built-in rules), "nltk" (requires nltk + tagger
          data), or "hf:<token-classification checkpoint>" emitting
          Penn Treebank labels.
  srl   : "heuristic" or "hf:<token-classification checkpoint>" with
          BIO ARG0/ARG1/V labels, aggregated into a single frame per
          sentence (an approximation of per-predicate role labeling).

Loading problems raise CheckpointError; per-record extraction problems
are the caller's to handle.
"""
from __future__ import annotations

import logging
from typing import Callable

from . import heuristics

logger = logging.getLogger("reqpair_exporter")


class CheckpointError(RuntimeError):
    """A configured checkpoint could not be resolved or loaded."""


def _strip_scheme(identifier: str, scheme: str) -> str:
    return identifier[len(scheme):] if identifier.startswith(scheme) else identifier


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------

def load_embedder(identifier: str, batch_size: int) -> Callable[[list[str]], "object"]:
    """Returns texts -> float32 matrix (n, hidden_size)."""
    name = _strip_scheme(identifier, "st:")
    try:
        from sentence_transformers import SentenceTransformer
        model = SentenceTransformer(name)
    except Exception as exc:
        raise CheckpointError(f"cannot load sentence encoder {identifier!r}: {exc}") from exc

    def encode(texts: list[str]):
        return model.encode(texts, batch_size=batch_size, convert_to_numpy=True,
                            show_progress_bar=False)

    return encode


# ---------------------------------------------------------------------------
# token-classification plumbing shared by hf: backends
# ---------------------------------------------------------------------------

def _load_token_pipeline(checkpoint: str):
    try:
        from transformers import pipeline
        return pipeline("token-classification", model=checkpoint,
                        aggregation_strategy="simple")
    except Exception as exc:
        raise CheckpointError(
            f"cannot load token-classification checkpoint {checkpoint!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# ner
# ---------------------------------------------------------------------------

_ACTOR_GROUPS = {"actor", "per", "org", "agent"}
_ACTION_GROUPS = {"action", "verb", "act"}


def load_ner(identifier: str) -> Callable[[str], tuple[set[str], set[str]]]:
    """Returns text -> (actors, actions)."""
    if identifier == "heuristic":
        return heuristics.extract_actors_actions
    if identifier.startswith("hf:"):
        tagger = _load_token_pipeline(_strip_scheme(identifier, "hf:"))

        def extract(text: str) -> tuple[set[str], set[str]]:
            actors: set[str] = set()
            actions: set[str] = set()
            for entity in tagger(text):
                group = str(entity.get("entity_group", "")).lower()
                word = str(entity.get("word", "")).strip()
                if not word:
                    continue
                if group in _ACTOR_GROUPS:
                    actors.add(word)
                elif group in _ACTION_GROUPS:
                    actions.add(word)
            return actors, actions

        return extract
    raise CheckpointError(f"unknown ner checkpoint identifier {identifier!r}")


# ---------------------------------------------------------------------------
# pos
# ---------------------------------------------------------------------------

def load_pos(identifier: str) -> Callable[[str], list[tuple[str, str]]]:
    """Returns text -> [(token, tag)]."""
    if identifier == "lexicon":
        return heuristics.pos_tag
    if identifier == "nltk":
        try:
            import nltk
            nltk.pos_tag(["probe"])  # fails fast when tagger data is absent
        except Exception as exc:
            raise CheckpointError(f"nltk tagger unavailable: {exc}") from exc

        def tag(text: str) -> list[tuple[str, str]]:
            tokens = heuristics.tokenize(text)
            return [(tok.lower(), tag) for tok, tag in nltk.pos_tag(tokens)]

        return tag
    if identifier.startswith("hf:"):
        tagger = _load_token_pipeline(_strip_scheme(identifier, "hf:"))

        def tag(text: str) -> list[tuple[str, str]]:
            out = []
            for entity in tagger(text):
                word = str(entity.get("word", "")).strip().lower()
                label = str(entity.get("entity_group", "NN"))
                if word:
                    out.append((word, label))
            return out

        return tag
    raise CheckpointError(f"unknown pos checkpoint identifier {identifier!r}")


# ---------------------------------------------------------------------------
# srl
# ---------------------------------------------------------------------------

def load_srl(identifier: str) -> Callable[[str], list[dict]]:
    """Returns text -> [{"verb": ..., "args": {"ARG0": ..., "ARG1": ...}}]."""
    if identifier == "heuristic":
        return heuristics.extract_frames
    if identifier.startswith("hf:"):
        tagger = _load_token_pipeline(_strip_scheme(identifier, "hf:"))

        def frames(text: str) -> list[dict]:
            verb = None
            args: dict[str, list[str]] = {"ARG0": [], "ARG1": []}
            for entity in tagger(text):
                group = str(entity.get("entity_group", "")).upper()
                word = str(entity.get("word", "")).strip()
                if not word:
                    continue
                if group == "V" and verb is None:
                    verb = word
                elif group in args:
                    args[group].append(word)
            if verb is None:
                return []
            return [{"verb": verb,
                     "args": {k: " ".join(v) for k, v in args.items() if v}}]

        return frames
    raise CheckpointError(f"unknown srl checkpoint identifier {identifier!r}")
