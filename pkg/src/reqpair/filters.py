"""Rule-based post-filters that re-check conflict-predicted pairs.

Each filter partitions its input pairs into conflict/neutral using one
information-extraction view:

  actor_action : conflict iff the two requirements share at least one
                 actor AND at least one action (normalized string match).
  pos          : conflict iff they share a noun (NN* tag) AND a verb (VB*)
                 after case-folding and light suffix stemming.
  srl          : neutral whenever the predicate (verb) sets are disjoint;
                 otherwise conflict iff the ARG0/ARG1 content-token sets
                 of a shared verb's frames overlap.

Filters never run chained; `apply_filter` then demotes conflict
predictions whose decision came back neutral and never promotes a
neutral prediction, so the positive count is non-increasing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .annotations import AnnotationRecord, content_tokens, light_stem, stem_phrase
from .corpus import CONFLICT, NEUTRAL, Requirement, RequirementPair
from .errors import MissingAnnotationError, UncoveredPositiveError
from .postag import NOUN_TAGS, VERB_TAGS, builtin_pos_tag

FILTER_METHODS = ("actor_action", "pos", "srl")


@dataclass(frozen=True)
class FilterDecision:
    """Binary verdict for one pair plus the evidence that produced it."""

    pair: RequirementPair
    verdict: str  # conflict | neutral
    method: str
    evidence: dict[str, tuple[str, ...]]


def _record_for(annotations: Mapping[str, AnnotationRecord], rid: str,
                section: str) -> AnnotationRecord:
    rec = annotations.get(rid)
    if rec is None:
        raise MissingAnnotationError(f"no annotation record for requirement {rid!r}")
    if getattr(rec, section) is None:
        raise MissingAnnotationError(
            f"annotation record for {rid!r} is missing the {section!r} section")
    return rec


def _match_entities(left: set[str], right: set[str], stem: bool) -> tuple[str, ...]:
    """Shared entities under normalized (optionally stemmed) exact match."""
    if stem:
        left_keys = {stem_phrase(e) for e in left}
        right_keys = {stem_phrase(e) for e in right}
    else:
        left_keys, right_keys = set(left), set(right)
    return tuple(sorted(left_keys & right_keys))


def actor_action_filter(pairs: Iterable[RequirementPair],
                        annotations: Mapping[str, AnnotationRecord],
                        strict: bool = False) -> list[FilterDecision]:
    """Conflict iff actor sets and action sets both intersect.

    `strict` disables suffix stemming so only exact normalized strings
    match. Requires actors and actions for both sides of every pair.
    """
    decisions = []
    for pair in pairs:
        rec1 = _record_for(annotations, pair.id1, "actors")
        rec2 = _record_for(annotations, pair.id2, "actors")
        _record_for(annotations, pair.id1, "actions")
        _record_for(annotations, pair.id2, "actions")
        shared_actors = _match_entities(rec1.actors, rec2.actors, stem=not strict)
        shared_actions = _match_entities(rec1.actions, rec2.actions, stem=not strict)
        if shared_actors and shared_actions:
            verdict = CONFLICT
            evidence = {"actors": shared_actors, "actions": shared_actions}
        else:
            verdict = NEUTRAL
            evidence = {}
        decisions.append(FilterDecision(pair=pair, verdict=verdict,
                                        method="actor_action", evidence=evidence))
    return decisions


def _pos_tags_for(annotations: Mapping[str, AnnotationRecord] | None,
                  requirements: Mapping[str, Requirement] | None,
                  rid: str) -> list[tuple[str, str]]:
    rec = annotations.get(rid) if annotations else None
    if rec is not None and rec.pos is not None:
        return rec.pos
    if requirements is not None and rid in requirements:
        return builtin_pos_tag(requirements[rid].text)
    raise MissingAnnotationError(
        f"no POS tags for {rid!r} and no requirement text to tag")


def _tag_family(tags: list[tuple[str, str]], family: frozenset[str]) -> set[str]:
    return {light_stem(token) for token, tag in tags if tag in family}


def pos_filter(pairs: Iterable[RequirementPair],
               annotations: Mapping[str, AnnotationRecord] | None = None,
               requirements: Mapping[str, Requirement] | None = None) -> list[FilterDecision]:
    """Conflict iff the pair shares a noun and a verb.

    Tags come from annotation records when present and otherwise from the
    built-in tagger applied to the requirement text, so passing a
    requirement map makes the filter total.
    """
    decisions = []
    for pair in pairs:
        tags1 = _pos_tags_for(annotations, requirements, pair.id1)
        tags2 = _pos_tags_for(annotations, requirements, pair.id2)
        shared_nouns = tuple(sorted(_tag_family(tags1, NOUN_TAGS)
                                    & _tag_family(tags2, NOUN_TAGS)))
        shared_verbs = tuple(sorted(_tag_family(tags1, VERB_TAGS)
                                    & _tag_family(tags2, VERB_TAGS)))
        if shared_nouns and shared_verbs:
            verdict = CONFLICT
            evidence = {"nouns": shared_nouns, "verbs": shared_verbs}
        else:
            verdict = NEUTRAL
            evidence = {}
        decisions.append(FilterDecision(pair=pair, verdict=verdict,
                                        method="pos", evidence=evidence))
    return decisions


def _frame_tokens(frames, verb_key: str) -> set[str]:
    tokens: set[str] = set()
    for frame in frames:
        if light_stem(frame.verb) == verb_key:
            for span in frame.args.values():
                tokens |= content_tokens(span)
    return tokens


def srl_filter(pairs: Iterable[RequirementPair],
               annotations: Mapping[str, AnnotationRecord],
               arg_scope: str = "shared-verb") -> list[FilterDecision]:
    """Verb-set intersection first, then argument overlap on shared verbs.

    With arg_scope="shared-verb" (default) the ARG0/ARG1 token sets are
    compared per shared verb; "all-frames" pools argument tokens across
    every frame of any shared verb before comparing.
    """
    if arg_scope not in ("shared-verb", "all-frames"):
        raise ValueError(f"unknown arg_scope {arg_scope!r}")
    decisions = []
    for pair in pairs:
        rec1 = _record_for(annotations, pair.id1, "srl")
        rec2 = _record_for(annotations, pair.id2, "srl")
        verbs1 = {light_stem(f.verb) for f in rec1.srl}
        verbs2 = {light_stem(f.verb) for f in rec2.srl}
        shared_verbs = sorted(verbs1 & verbs2)
        verdict = NEUTRAL
        evidence: dict[str, tuple[str, ...]] = {}
        if shared_verbs:
            if arg_scope == "shared-verb":
                for verb in shared_verbs:
                    overlap = _frame_tokens(rec1.srl, verb) & _frame_tokens(rec2.srl, verb)
                    if overlap:
                        verdict = CONFLICT
                        evidence = {"verbs": (verb,),
                                    "argument_tokens": tuple(sorted(overlap))}
                        break
            else:
                pooled1: set[str] = set()
                pooled2: set[str] = set()
                for verb in shared_verbs:
                    pooled1 |= _frame_tokens(rec1.srl, verb)
                    pooled2 |= _frame_tokens(rec2.srl, verb)
                overlap = pooled1 & pooled2
                if overlap:
                    verdict = CONFLICT
                    evidence = {"verbs": tuple(shared_verbs),
                                "argument_tokens": tuple(sorted(overlap))}
        decisions.append(FilterDecision(pair=pair, verdict=verdict,
                                        method="srl", evidence=evidence))
    return decisions


def run_filter(method: str, pairs, annotations=None, requirements=None,
               **kwargs) -> list[FilterDecision]:
    """Dispatch to one of the three filters by method name."""
    if method == "actor_action":
        return actor_action_filter(pairs, annotations, **kwargs)
    if method == "pos":
        return pos_filter(pairs, annotations, requirements, **kwargs)
    if method == "srl":
        return srl_filter(pairs, annotations, **kwargs)
    raise ValueError(f"unknown filter method {method!r}; expected {FILTER_METHODS}")


def apply_filter(predictions: Mapping[RequirementPair, str],
                 decisions: Iterable[FilterDecision]) -> dict[RequirementPair, str]:
    """Replace conflict predictions with their filter verdicts.

    Non-conflict predictions pass through untouched; a pair is never
    promoted to conflict. Every conflict-predicted pair must be covered
    by a decision, else UncoveredPositiveError.
    """
    verdicts = {d.pair.key: d.verdict for d in decisions}
    final: dict[RequirementPair, str] = {}
    for pair, label in predictions.items():
        if label == CONFLICT:
            verdict = verdicts.get(pair.key)
            if verdict is None:
                raise UncoveredPositiveError(
                    f"conflict-predicted pair {pair.key} has no filter decision")
            final[pair] = verdict
        else:
            final[pair] = label
    return final


__all__ = [
    "FilterDecision", "FILTER_METHODS", "actor_action_filter", "pos_filter",
    "srl_filter", "run_filter", "apply_filter",
]
