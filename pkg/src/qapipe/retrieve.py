"""Sparse and dense retrieval plus hybrid candidate pooling.

A single-document plan runs one sparse and one dense search; a multi-document
plan runs both searches for each of its two sub-questions. Results are merged
into one deduplicated pool keeping the best score per source, so anything a
single source can find is in the pool. Merging is commutative: leg order never
changes the pool.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .dense import DenseIndex, DimensionMismatchError, EmbedClient, cosine_scores
from .llm import LlmError
from .rewrite import RewritePlan
from .sparse import SparseIndex
from .classify import QuestionType
from .tokens import terms


class Source(str, Enum):
    SPARSE = "sparse"
    DENSE = "dense"
    RERANKED = "reranked"


@dataclass(frozen=True)
class RankedHit:
    chunk_ref: str
    score: float
    source: Source
    origin_query: str


@dataclass(frozen=True)
class LegResult:
    """One retrieval leg: a (source, query) pair and its top-k hits."""

    source: Source
    origin_query: str
    hits: tuple[RankedHit, ...]
    degraded: bool = False


@dataclass
class PoolEntry:
    chunk_ref: str
    sparse_score: float | None = None
    dense_score: float | None = None
    # (source value, origin query) pairs that surfaced this chunk, sorted
    origins: tuple[tuple[str, str], ...] = ()

    def score_for(self, source: Source) -> float | None:
        return self.sparse_score if source is Source.SPARSE else self.dense_score


@dataclass
class CandidatePool:
    entries: list[PoolEntry] = field(default_factory=list)
    per_source_counts: dict[Source, int] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def chunk_refs(self) -> list[str]:
        return [e.chunk_ref for e in self.entries]


def _top_k(scored: Iterable[tuple[str, float]], k: int) -> list[tuple[str, float]]:
    # positive scores only; ties broken by ascending chunk_ref
    positive = [(ref, s) for ref, s in scored if s > 0.0]
    positive.sort(key=lambda pair: (-pair[1], pair[0]))
    return positive[:k]


def search_sparse(idx: SparseIndex, query: str, k: int) -> list[RankedHit]:
    """Top-k chunks by BM25, descending; zero-scoring chunks are excluded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    query_terms = terms(query)
    scores: dict[str, float] = {}
    for term in query_terms:
        pairs = idx.postings.get(term)
        if not pairs:
            continue
        idf = idx.idf(term)
        for ref, tf in pairs:
            dl = idx.doc_lengths[ref]
            denom = tf + idx.k1 * (1.0 - idx.b + idx.b * dl / idx.avgdl)
            scores[ref] = scores.get(ref, 0.0) + idf * tf * (idx.k1 + 1.0) / denom
    return [
        RankedHit(chunk_ref=ref, score=s, source=Source.SPARSE, origin_query=query)
        for ref, s in _top_k(scores.items(), k)
    ]


def search_dense(idx: DenseIndex, query: str, embedder: EmbedClient, k: int) -> list[RankedHit]:
    """Top-k chunks by cosine similarity; non-positive similarities are excluded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if idx.n_chunks == 0:
        return []
    vector = np.asarray(embedder.embed([query])[0], dtype=np.float64)
    if vector.shape != (idx.d,):
        raise DimensionMismatchError(
            f"query embedding has dimension {vector.shape[0]}, index has {idx.d}"
        )
    sims = cosine_scores(idx, vector)
    scored = zip(idx.refs, (float(s) for s in sims))
    return [
        RankedHit(chunk_ref=ref, score=s, source=Source.DENSE, origin_query=query)
        for ref, s in _top_k(scored, k)
    ]


def retrieve_legs(
    plan: RewritePlan,
    sparse_idx: SparseIndex,
    dense_idx: DenseIndex,
    embedder: EmbedClient,
    k_per_source: int = 10,
) -> list[LegResult]:
    """Run every retrieval leg the plan calls for.

    A leg whose client fails in transport degrades to an empty, flagged result
    instead of failing the question.
    """
    if plan.qclass.label is QuestionType.SINGLE_DOC:
        assert plan.sparse_query is not None and plan.dense_query is not None
        wanted = [(Source.SPARSE, plan.sparse_query), (Source.DENSE, plan.dense_query)]
    else:
        assert plan.sub_questions is not None
        wanted = []
        for sub in plan.sub_questions:
            wanted.append((Source.SPARSE, sub))
            wanted.append((Source.DENSE, sub))

    legs: list[LegResult] = []
    for source, query in wanted:
        try:
            if source is Source.SPARSE:
                hits = search_sparse(sparse_idx, query, k_per_source)
            else:
                hits = search_dense(dense_idx, query, embedder, k_per_source)
            legs.append(LegResult(source=source, origin_query=query, hits=tuple(hits)))
        except LlmError:
            legs.append(LegResult(source=source, origin_query=query, hits=(), degraded=True))
    return legs


def merge_legs(legs: Iterable[LegResult]) -> CandidatePool:
    """Union-deduplicate hits by chunk_ref, keeping the max score per source.

    Max-merge is associative and commutative, so the pool is independent of
    the order legs complete in.
    """
    sparse_best: dict[str, float] = {}
    dense_best: dict[str, float] = {}
    origins: dict[str, set[tuple[str, str]]] = {}
    flags: set[str] = set()
    for leg in legs:
        if leg.degraded:
            flags.add(f"{leg.source.value}_leg_degraded")
        best = sparse_best if leg.source is Source.SPARSE else dense_best
        for hit in leg.hits:
            prev = best.get(hit.chunk_ref)
            if prev is None or hit.score > prev:
                best[hit.chunk_ref] = hit.score
            origins.setdefault(hit.chunk_ref, set()).add((hit.source.value, hit.origin_query))

    entries = [
        PoolEntry(
            chunk_ref=ref,
            sparse_score=sparse_best.get(ref),
            dense_score=dense_best.get(ref),
            origins=tuple(sorted(origins[ref])),
        )
        for ref in sorted(origins)
    ]
    counts = {
        Source.SPARSE: sum(1 for e in entries if e.sparse_score is not None),
        Source.DENSE: sum(1 for e in entries if e.dense_score is not None),
    }
    return CandidatePool(entries=entries, per_source_counts=counts, flags=tuple(sorted(flags)))


def hybrid_retrieve(
    plan: RewritePlan,
    sparse_idx: SparseIndex,
    dense_idx: DenseIndex,
    embedder: EmbedClient,
    k_per_source: int = 10,
) -> CandidatePool:
    """Retrieve all legs for a plan and merge them into one candidate pool."""
    return merge_legs(retrieve_legs(plan, sparse_idx, dense_idx, embedder, k_per_source))
