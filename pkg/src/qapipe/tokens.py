"""Shared text primitives: whitespace normalization and term extraction."""
from __future__ import annotations

import string

_PUNCT = string.punctuation


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends."""
    return " ".join(text.split())


def terms(text: str) -> list[str]:
    """Lowercased whitespace tokens with leading/trailing punctuation stripped.

    Tokens that are pure punctuation vanish. No stemming, no stopword removal.
    """
    out = []
    for tok in text.split():
        t = tok.strip(_PUNCT).lower()
        if t:
            out.append(t)
    return out
