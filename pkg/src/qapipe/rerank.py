"""Cross-encoder reranking of the hybrid candidate pool.

Candidates are scored against the original question text (not the rewrites,
which exist to serve the first-stage retrievers). Output order depends only on
the (question, candidate) scores, never on input order. When the scorer is
unreachable, a deterministic rank-fusion fallback keeps the pipeline moving.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .llm import LlmError, MalformedResponseError, RerankClient
from .retrieve import CandidatePool, RankedHit, Source


@dataclass(frozen=True)
class RerankRequest:
    question_text: str
    candidates: tuple[tuple[str, str], ...]  # (chunk_ref, chunk_text)

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("rerank request needs at least one candidate")
        refs = [ref for ref, _ in self.candidates]
        if len(set(refs)) != len(refs):
            raise ValueError("rerank candidates contain duplicate chunk_refs")


def rerank(req: RerankRequest, scorer: RerankClient, top_n: int) -> list[RankedHit]:
    """Score every candidate and return the top_n, best first.

    Candidates are scored in canonical (chunk_ref) order so batching quirks of
    a scorer cannot leak input order into the result.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    ordered = sorted(req.candidates)
    scores = scorer.rerank_score(req.question_text, [text for _, text in ordered])
    if len(scores) != len(ordered):
        raise MalformedResponseError(
            f"scorer returned {len(scores)} scores for {len(ordered)} candidates"
        )
    hits = [
        RankedHit(chunk_ref=ref, score=float(score), source=Source.RERANKED, origin_query=req.question_text)
        for (ref, _), score in zip(ordered, scores)
    ]
    hits.sort(key=lambda h: (-h.score, h.chunk_ref))
    return hits[:top_n]


def fallback_ranking(pool: CandidatePool, question_text: str) -> list[RankedHit]:
    """Deterministic scorer-free ordering by best per-source normalized rank.

    Within each source, entries are ranked by that source's score; an entry's
    key is its best normalized rank across sources (1/n .. 1). Lower is
    better. Returned scores are 1 - key so that higher still means better.
    """
    rank_key: dict[str, float] = {}
    for source in (Source.SPARSE, Source.DENSE):
        scored = [e for e in pool.entries if e.score_for(source) is not None]
        scored.sort(key=lambda e: (-(e.score_for(source) or 0.0), e.chunk_ref))
        n = len(scored)
        for position, entry in enumerate(scored, start=1):
            nrank = position / n
            prev = rank_key.get(entry.chunk_ref)
            if prev is None or nrank < prev:
                rank_key[entry.chunk_ref] = nrank
    ordered = sorted(pool.entries, key=lambda e: (rank_key.get(e.chunk_ref, 1.0), e.chunk_ref))
    return [
        RankedHit(
            chunk_ref=e.chunk_ref,
            score=1.0 - rank_key.get(e.chunk_ref, 1.0),
            source=Source.RERANKED,
            origin_query=question_text,
        )
        for e in ordered
    ]


def rerank_pool(
    question_text: str,
    pool: CandidatePool,
    chunk_texts: Mapping[str, str] | None = None,
    scorer: RerankClient | None = None,
    top_n: int = 10,
    *,
    text_of=None,
) -> tuple[list[RankedHit], tuple[str, ...]]:
    """Rerank a candidate pool, degrading to :func:`fallback_ranking` on outage.

    ``text_of`` may be any callable mapping chunk_ref to text (e.g. a chunk
    store method); ``chunk_texts`` is the mapping alternative.
    """
    if not pool.entries:
        return [], ()
    if text_of is None:
        assert chunk_texts is not None
        text_of = chunk_texts.__getitem__
    req = RerankRequest(
        question_text=question_text,
        candidates=tuple((e.chunk_ref, text_of(e.chunk_ref)) for e in pool.entries),
    )
    if scorer is None:
        return fallback_ranking(pool, question_text)[:top_n], ("rerank_degraded",)
    try:
        return rerank(req, scorer, top_n), ()
    except LlmError:
        return fallback_ranking(pool, question_text)[:top_n], ("rerank_degraded",)
