"""Okapi BM25 inverted index over chunks.

Score of a chunk for a query is the sum over query term occurrences of

    idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))

with idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1). Terms absent from a chunk
contribute zero.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .chunking import Chunk
from .tokens import terms


class DuplicateChunkError(ValueError):
    pass


class UnknownChunkError(KeyError):
    pass


@dataclass
class SparseIndex:
    # postings lists are sorted by chunk_ref so iteration order is stable
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avgdl: float
    k1: float = 0.9
    b: float = 0.4
    _tf: dict[str, dict[str, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._tf = {t: dict(pairs) for t, pairs in self.postings.items()}

    @property
    def n_chunks(self) -> int:
        return len(self.doc_lengths)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        n = self.n_chunks
        return math.log((n - df + 0.5) / (df + 0.5) + 1.0)

    def term_frequency(self, term: str, chunk_ref: str) -> int:
        return self._tf.get(term, {}).get(chunk_ref, 0)


def build_sparse(chunks: Iterable[Chunk], k1: float = 0.9, b: float = 0.4) -> SparseIndex:
    """Build an inverted index; duplicate chunk ids are an ingest error."""
    doc_lengths: dict[str, int] = {}
    raw_postings: dict[str, list[tuple[str, int]]] = defaultdict(list)
    for chunk in chunks:
        if chunk.chunk_id in doc_lengths:
            raise DuplicateChunkError(f"duplicate chunk_id: {chunk.chunk_id}")
        chunk_terms = terms(chunk.text)
        doc_lengths[chunk.chunk_id] = len(chunk_terms)
        for term, tf in Counter(chunk_terms).items():
            raw_postings[term].append((chunk.chunk_id, tf))

    postings = {t: sorted(pairs) for t, pairs in sorted(raw_postings.items())}
    avgdl = sum(doc_lengths.values()) / len(doc_lengths) if doc_lengths else 0.0
    return SparseIndex(postings=postings, doc_lengths=doc_lengths, avgdl=avgdl, k1=k1, b=b)


def bm25_score(idx: SparseIndex, query_terms: list[str], chunk_ref: str) -> float:
    """Okapi BM25 score of one chunk for a pre-tokenized query.

    Each query term occurrence contributes separately, so repeated terms add.
    """
    if chunk_ref not in idx.doc_lengths:
        raise UnknownChunkError(chunk_ref)
    dl = idx.doc_lengths[chunk_ref]
    score = 0.0
    for term in query_terms:
        tf = idx.term_frequency(term, chunk_ref)
        if tf == 0:
            continue
        denom = tf + idx.k1 * (1.0 - idx.b + idx.b * dl / idx.avgdl)
        score += idx.idf(term) * tf * (idx.k1 + 1.0) / denom
    return score
