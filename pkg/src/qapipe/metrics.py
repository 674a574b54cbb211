"""Deterministic retrieval metrics: reciprocal rank, MRR@K, recall@K.

Retrieval runs over chunks while ground truth is documents, so chunk hits are
mapped to parent doc ids first, keeping the first occurrence of each document.
Recall is micro-averaged over gold documents: a two-gold question with one
gold found contributes half its weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class MetricsError(ValueError):
    pass


def doc_ids_from_chunk_refs(chunk_refs: Iterable[str]) -> list[str]:
    """Map chunk refs (``doc_id#ordinal``) to doc ids, first occurrence kept."""
    seen: set[str] = set()
    out: list[str] = []
    for ref in chunk_refs:
        doc_id = ref.rsplit("#", 1)[0]
        if doc_id not in seen:
            seen.add(doc_id)
            out.append(doc_id)
    return out


@dataclass(frozen=True)
class RetrievalJudgment:
    question_id: str
    ranked_doc_ids: tuple[str, ...]
    gold_doc_ids: frozenset[str]

    def __post_init__(self) -> None:
        if not self.gold_doc_ids:
            raise MetricsError(f"question {self.question_id!r}: empty gold set")
        if len(set(self.ranked_doc_ids)) != len(self.ranked_doc_ids):
            raise MetricsError(f"question {self.question_id!r}: ranked list has duplicates")

    @classmethod
    def from_chunk_refs(
        cls,
        question_id: str,
        chunk_refs: Iterable[str],
        gold_doc_ids: Iterable[str],
    ) -> "RetrievalJudgment":
        return cls(
            question_id=question_id,
            ranked_doc_ids=tuple(doc_ids_from_chunk_refs(chunk_refs)),
            gold_doc_ids=frozenset(gold_doc_ids),
        )


def reciprocal_rank(judgment: RetrievalJudgment, k: int) -> float:
    """1/r for the first gold document within the top k, else 0."""
    if k < 1:
        raise MetricsError("k must be >= 1")
    for position, doc_id in enumerate(judgment.ranked_doc_ids[:k], start=1):
        if doc_id in judgment.gold_doc_ids:
            return 1.0 / position
    return 0.0


def mrr(judgments: Sequence[RetrievalJudgment], k: int) -> float:
    """Mean reciprocal rank over a non-empty judgment set."""
    if not judgments:
        raise MetricsError("mrr over an empty judgment set")
    return sum(reciprocal_rank(j, k) for j in judgments) / len(judgments)


def recall_at_k(judgments: Sequence[RetrievalJudgment], k: int) -> float:
    """Micro-averaged gold recall: found golds over total golds."""
    if k < 1:
        raise MetricsError("k must be >= 1")
    if not judgments:
        raise MetricsError("recall over an empty judgment set")
    found = 0
    total = 0
    for j in judgments:
        top = set(j.ranked_doc_ids[:k])
        found += len(top & j.gold_doc_ids)
        total += len(j.gold_doc_ids)
    return found / total


def metrics_report(judgments: Sequence[RetrievalJudgment], cutoffs: Sequence[int]) -> dict:
    """MRR and recall at every cutoff, as a plain dict for JSON emission."""
    return {
        "n_questions": len(judgments),
        "mrr": {str(k): mrr(judgments, k) for k in cutoffs},
        "recall": {str(k): recall_at_k(judgments, k) for k in cutoffs},
    }


def format_metrics_table(report: dict) -> str:
    """Aligned plain-text table, one row per metric, one column per cutoff."""
    cutoffs = list(report["mrr"].keys())
    headers = ["metric"] + [f"@{k}" for k in cutoffs]
    rows = [
        ["mrr"] + [f"{report['mrr'][k]:.4f}" for k in cutoffs],
        ["recall"] + [f"{report['recall'][k]:.4f}" for k in cutoffs],
    ]
    widths = [max(len(r[i]) for r in [headers] + rows) for i in range(len(headers))]
    lines = []
    for row in [headers] + rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
