"""Deterministic offline stand-ins for the model endpoints.

Every mock is a pure function of its input and scripted state, so full
pipeline runs on mocks are byte-reproducible.
"""
from __future__ import annotations

import hashlib
from typing import Any

from .llm import Message
from .tokens import terms


def _last_user_content(messages: list[Message]) -> str:
    for msg in reversed(messages):
        if msg.get("role") == "user":
            return msg.get("content", "")
    return ""


class FixedReplyChat:
    """Always returns the configured string."""

    def __init__(self, reply: str):
        self.reply = reply
        self.calls: list[list[Message]] = []

    def chat(self, messages: list[Message], decoding: Any | None = None) -> str:
        self.calls.append(messages)
        return self.reply


class EchoChat:
    """Returns the content of the last user message."""

    def __init__(self) -> None:
        self.calls: list[list[Message]] = []

    def chat(self, messages: list[Message], decoding: Any | None = None) -> str:
        self.calls.append(messages)
        return _last_user_content(messages)


class ScriptedChat:
    """Replies by substring rules against the last user message.

    ``rules`` is an ordered list of ``(substring, reply)`` pairs; the first
    matching rule wins. A reply that is an exception instance is raised
    instead, which lets tests script endpoint failures per question.
    """

    def __init__(self, rules: list[tuple[str, str | Exception]], default: str = ""):
        self.rules = rules
        self.default = default
        self.calls: list[list[Message]] = []

    def chat(self, messages: list[Message], decoding: Any | None = None) -> str:
        self.calls.append(messages)
        content = _last_user_content(messages)
        for needle, reply in self.rules:
            if needle in content:
                if isinstance(reply, Exception):
                    raise reply
                return reply
        return self.default


class HashEmbedder:
    """Feature-hashing bag-of-words embedder.

    Each term is folded into one of ``dim`` signed buckets via sha256, so the
    same text always maps to the same vector and texts sharing vocabulary get
    correlated vectors. An optional synonym table canonicalizes terms before
    hashing, giving the mock a desk-scale notion of semantic match that plain
    term overlap does not have.
    """

    def __init__(self, dim: int = 64, synonyms: dict[str, str] | None = None):
        self.dim = dim
        self.synonyms = dict(synonyms or {})
        self.calls: list[list[str]] = []

    def _bucket(self, term: str) -> tuple[int, float]:
        digest = hashlib.sha256(term.encode("utf-8")).digest()
        index = int.from_bytes(digest[:4], "big") % self.dim
        sign = 1.0 if digest[4] & 1 else -1.0
        return index, sign

    def embed(self, texts: list[str]) -> list[list[float]]:
        self.calls.append(list(texts))
        out = []
        for text in texts:
            vec = [0.0] * self.dim
            for term in terms(text):
                term = self.synonyms.get(term, term)
                index, sign = self._bucket(term)
                vec[index] += sign
            out.append(vec)
        return out


class LexicalOverlapScorer:
    """Scores a passage by the fraction of distinct query terms it contains."""

    def __init__(self) -> None:
        self.calls: list[tuple[str, int]] = []

    def rerank_score(self, query: str, passages: list[str]) -> list[float]:
        self.calls.append((query, len(passages)))
        query_terms = set(terms(query))
        if not query_terms:
            return [0.0] * len(passages)
        scores = []
        for passage in passages:
            overlap = len(query_terms & set(terms(passage)))
            scores.append(overlap / len(query_terms))
        return scores


class OracleScorer:
    """Test-only scorer: 1.0 for passages whose text is in the gold set."""

    def __init__(self, gold_texts: set[str]):
        self.gold_texts = set(gold_texts)

    def rerank_score(self, query: str, passages: list[str]) -> list[float]:
        return [1.0 if p in self.gold_texts else 0.0 for p in passages]
