"""Label normalization and character-level string similarity."""

from __future__ import annotations

import re
from functools import lru_cache

_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_NONWORD_RE = re.compile(r"[^\w\s]|_")
_WS_RE = re.compile(r"\s+")


def normalize_label(text: str) -> str:
    """Normalize a label to lowercase space-separated tokens.

    camelCase and snake_case are split into tokens, punctuation becomes
    whitespace, and runs of whitespace collapse to single spaces.
    """
    text = _CAMEL_RE.sub(" ", text)
    text = _NONWORD_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip().lower()


@lru_cache(maxsize=1 << 18)
def levenshtein_distance(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_sim(a: str, b: str) -> float:
    """1 - distance / max length; two empty strings count as identical."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / max(len(a), len(b))


@lru_cache(maxsize=1 << 18)
def lcs_length(a: str, b: str) -> int:
    """Length of the longest common subsequence."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, 1):
            if ca == cb:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcs_sim(a: str, b: str) -> float:
    """Dice-style LCS similarity: 2*|LCS| / (|a| + |b|)."""
    if not a and not b:
        return 1.0
    return 2.0 * lcs_length(a, b) / (len(a) + len(b))


def char_ngrams(s: str, n: int) -> frozenset[str]:
    """Set of character n-grams of ``s`` without padding."""
    return frozenset(s[i : i + n] for i in range(len(s) - n + 1))


def ngram_sim(a: str, b: str, n: int = 2) -> float:
    """Dice coefficient over unpadded character n-gram sets."""
    if n < 2:
        raise ValueError(f"n-gram size must be >= 2, got {n}")
    if a == b:
        return 1.0
    grams_a = char_ngrams(a, n)
    grams_b = char_ngrams(b, n)
    if not grams_a or not grams_b:
        return 0.0
    return 2.0 * len(grams_a & grams_b) / (len(grams_a) + len(grams_b))
