"""Lightweight rule-based part-of-speech tagger over a Penn-Treebank-style tagset.

This is the self-contained fallback used when no external annotation file
supplies tags. It is intentionally small: a closed-class lexicon plus a few
positional and suffix heuristics. Tokens are lowercased; the tagger never
emits proper-noun tags (NNP/NNPS) itself, but loaders accept them.

Rule order per token:
  1. numbers (digits, optionally with separators) -> CD
  2. closed-class lexicon (determiners, modals, pronouns, prepositions,
     conjunctions, be/have forms, a short adverb list)
  3. "-ly" suffix -> RB
  4. first non-adverb token after a modal or after "to" -> VB
  5. suffix heuristics: "-s" -> NNS (not -ss/-us/-is), "-ed" -> VBD,
     "-ing" -> VBG; the -ed/-ing rules yield NN instead when the token
     directly follows a determiner (attributive position)
  6. default NN
"""
from __future__ import annotations

import re

from .errors import EmptyTextError

# Full Penn Treebank word-level tagset; loaders validate against this.
PTB_TAGS = frozenset(
    [
        "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD",
        "NN", "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR",
        "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP",
        "VBZ", "WDT", "WP", "WP$", "WRB",
    ]
)

NOUN_TAGS = frozenset(["NN", "NNS", "NNP", "NNPS"])
VERB_TAGS = frozenset(["VB", "VBD", "VBG", "VBN", "VBP", "VBZ"])

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")
_NUMBER_RE = re.compile(r"^[0-9]+(?:[.,][0-9]+)*$")

_LEXICON: dict[str, str] = {}
for _word in ("the", "a", "an", "any", "all", "this", "that", "these", "those",
              "each", "every", "some", "no", "both", "either", "neither"):
    _LEXICON[_word] = "DT"
for _word in ("shall", "will", "would", "should", "can", "could", "may",
              "might", "must"):
    _LEXICON[_word] = "MD"
for _word in ("i", "you", "he", "she", "it", "we", "they", "them", "him",
              "her", "us", "me"):
    _LEXICON[_word] = "PRP"
for _word in ("its", "his", "their", "our", "your", "my", "hers"):
    _LEXICON[_word] = "PRP$"
for _word in ("of", "in", "on", "at", "by", "for", "with", "from", "against",
              "within", "without", "during", "between", "among", "through",
              "under", "over", "about", "than", "into", "onto", "per", "via",
              "as", "upon", "across", "until"):
    _LEXICON[_word] = "IN"
for _word in ("and", "or", "but", "nor"):
    _LEXICON[_word] = "CC"
for _word in ("not", "only", "also", "always", "never", "often", "sometimes",
              "very", "too", "then", "when", "where", "while", "if", "more",
              "less", "least", "most"):
    _LEXICON[_word] = "RB"
_LEXICON["to"] = "TO"
_LEXICON["be"] = "VB"
_LEXICON["is"] = "VBZ"
_LEXICON["are"] = "VBP"
_LEXICON["am"] = "VBP"
_LEXICON["was"] = "VBD"
_LEXICON["were"] = "VBD"
_LEXICON["been"] = "VBN"
_LEXICON["being"] = "VBG"
_LEXICON["has"] = "VBZ"
_LEXICON["have"] = "VBP"
_LEXICON["had"] = "VBD"


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation, keeping digits."""
    return _TOKEN_RE.findall(text.lower())


def _suffix_tag(token: str, prev_tag: str | None) -> str | None:
    if len(token) > 3 and token.endswith("s") and not token.endswith(
            ("ss", "us", "is")):
        return "NNS"
    if len(token) >= 4 and token.endswith("ed"):
        return "NN" if prev_tag == "DT" else "VBD"
    if len(token) >= 5 and token.endswith("ing"):
        return "NN" if prev_tag == "DT" else "VBG"
    return None


def builtin_pos_tag(text: str) -> list[tuple[str, str]]:
    """Tag `text`, returning (lowercased token, tag) pairs.

    Deterministic and idempotent: the same text always yields the same
    sequence. Raises EmptyTextError when the text has no tokens.
    """
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError("cannot tag empty or punctuation-only text")

    tags: list[str] = []
    for i, token in enumerate(tokens):
        if _NUMBER_RE.match(token):
            tags.append("CD")
            continue
        lex = _LEXICON.get(token)
        if lex is not None:
            tags.append(lex)
            continue
        if len(token) > 3 and token.endswith("ly"):
            tags.append("RB")
            continue
        # Position rule: the first non-adverb word after a modal or "to"
        # is a base-form verb ("shall only accept ..." -> accept/VB).
        j = i - 1
        while j >= 0 and tags[j] == "RB":
            j -= 1
        if j >= 0 and tags[j] in ("MD", "TO"):
            tags.append("VB")
            continue
        prev_tag = tags[i - 1] if i > 0 else None
        suffix = _suffix_tag(token, prev_tag)
        tags.append(suffix if suffix is not None else "NN")

    return list(zip(tokens, tags))
