"""Self-contained fallback extraction for requirement-style sentences.

These back the "lexicon"/"heuristic" checkpoint identifiers so exports
run with no model downloads. They assume the common requirement shape
"<subject> <modal> [adverb] <verb> <complement...>" and degrade to
empty sections when a sentence does not match.
"""
from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")
_NUMBER_RE = re.compile(r"^[0-9]+(?:[.,][0-9]+)*$")

_DETERMINERS = {"the", "a", "an", "any", "all", "this", "that", "these",
                "those", "each", "every", "some", "no", "both"}
_MODALS = {"shall", "will", "would", "should", "can", "could", "may",
           "might", "must"}
_PREPOSITIONS = {"of", "in", "on", "at", "by", "for", "with", "from",
                 "against", "within", "without", "during", "between",
                 "through", "under", "over", "about", "than", "into",
                 "onto", "per", "via", "as", "upon", "across", "until"}
_CONJUNCTIONS = {"and", "or", "but", "nor"}
_ADVERBS = {"not", "only", "also", "always", "never", "often", "sometimes",
            "very", "too", "more", "less", "most", "least", "then", "when",
            "where", "while", "if"}
_PRONOUNS = {"it", "he", "she", "we", "they", "them", "him", "her", "us",
             "me", "i", "you"}
_POSSESSIVES = {"its", "his", "their", "our", "your", "my", "hers"}
_BE_FORMS = {"be": "VB", "is": "VBZ", "are": "VBP", "am": "VBP",
             "was": "VBD", "were": "VBD", "been": "VBN", "being": "VBG",
             "has": "VBZ", "have": "VBP", "had": "VBD"}


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def pos_tag(text: str) -> list[tuple[str, str]]:
    """Penn-Treebank-style tags from a closed-class lexicon plus heuristics."""
    tokens = tokenize(text)
    tags: list[str] = []
    for i, token in enumerate(tokens):
        if _NUMBER_RE.match(token):
            tags.append("CD")
        elif token in _DETERMINERS:
            tags.append("DT")
        elif token in _MODALS:
            tags.append("MD")
        elif token == "to":
            tags.append("TO")
        elif token in _PREPOSITIONS:
            tags.append("IN")
        elif token in _CONJUNCTIONS:
            tags.append("CC")
        elif token in _ADVERBS:
            tags.append("RB")
        elif token in _PRONOUNS:
            tags.append("PRP")
        elif token in _POSSESSIVES:
            tags.append("PRP$")
        elif token in _BE_FORMS:
            tags.append(_BE_FORMS[token])
        elif len(token) > 3 and token.endswith("ly"):
            tags.append("RB")
        else:
            j = i - 1
            while j >= 0 and tags[j] == "RB":
                j -= 1
            if j >= 0 and tags[j] in ("MD", "TO"):
                tags.append("VB")
            elif len(token) > 3 and token.endswith("s") and not token.endswith(
                    ("ss", "us", "is")):
                tags.append("NNS")
            elif len(token) >= 4 and token.endswith("ed"):
                tags.append("NN" if i > 0 and tags[i - 1] == "DT" else "VBD")
            elif len(token) >= 5 and token.endswith("ing"):
                tags.append("NN" if i > 0 and tags[i - 1] == "DT" else "VBG")
            else:
                tags.append("NN")
    return list(zip(tokens, tags))


def _subject_span(tagged: list[tuple[str, str]]) -> tuple[list[str], int]:
    """Noun tokens before the first modal, and the modal's index (-1 if none)."""
    modal_idx = next((i for i, (_, tag) in enumerate(tagged) if tag == "MD"), -1)
    limit = modal_idx if modal_idx >= 0 else len(tagged)
    subject = [tok for tok, tag in tagged[:limit] if tag.startswith("NN")]
    return subject, modal_idx


def extract_actors_actions(text: str) -> tuple[set[str], set[str]]:
    """Actor = subject noun phrase; actions = verbs in the predicate."""
    tagged = pos_tag(text)
    subject, modal_idx = _subject_span(tagged)
    actors = {" ".join(subject)} if subject else set()
    rest = tagged[modal_idx + 1:] if modal_idx >= 0 else tagged
    actions = {tok for tok, tag in rest if tag.startswith("VB")}
    return actors, actions


def extract_frames(text: str) -> list[dict]:
    """One predicate-argument frame per verb after the modal.

    ARG0 is the subject span; ARG1 is everything after the verb. Returns
    dicts shaped like the annotation interchange's "srl" entries.
    """
    tagged = pos_tag(text)
    subject, modal_idx = _subject_span(tagged)
    arg0 = " ".join(subject)
    frames: list[dict] = []
    start = modal_idx + 1 if modal_idx >= 0 else 0
    for i in range(start, len(tagged)):
        token, tag = tagged[i]
        if not tag.startswith("VB"):
            continue
        arg1 = " ".join(tok for tok, _ in tagged[i + 1:])
        args = {}
        if arg0:
            args["ARG0"] = arg0
        if arg1:
            args["ARG1"] = arg1
        frames.append({"verb": token, "args": args})
    return frames
