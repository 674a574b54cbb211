"""Evaluation of answer records: judge scores plus retrieval metrics.

Works from the answer file alone: each record carries its reranked chunk ids,
so MRR and recall come straight from the record, and the judged context is the
exact passage set the generator saw.
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

from .classify import Question
from .judge import EvalRecord, NormalizedScores, aggregate, judge_one
from .llm import ChatClient
from .metrics import RetrievalJudgment, format_metrics_table, metrics_report, reciprocal_rank


def evaluate_records(
    records: Sequence[dict],
    questions: Sequence[Question],
    judge_client: ChatClient,
    cutoffs: Sequence[int] = (1, 2, 3, 10),
) -> tuple[list[dict], dict]:
    """Per-question evaluation rows plus an aggregate summary dict."""
    by_id = {q.id: q for q in questions}
    rows: list[dict] = []
    eval_records: list[EvalRecord] = []
    judgments: list[RetrievalJudgment] = []

    for record in records:
        question = by_id.get(record.get("id", ""))
        row: dict = {"id": record.get("id", "")}
        if "error" in record:
            row["error"] = record["error"]
            rows.append(row)
            continue

        if question is not None and question.gold_doc_ids:
            judgment = RetrievalJudgment.from_chunk_refs(
                question.id, record.get("ranking", []), question.gold_doc_ids
            )
            judgments.append(judgment)
            for k in cutoffs:
                row[f"rr@{k}"] = reciprocal_rank(judgment, k)

        context = "\n".join(p["text"] for p in record.get("passages", []))
        gold_answer = question.gold_answer if question is not None else None
        if record.get("answer", "").strip():
            eval_record = judge_one(
                record["id"],
                record["question"],
                record["answer"],
                context,
                judge_client,
                gold_answer=gold_answer,
            )
            eval_records.append(eval_record)
            row["equivalence"] = eval_record.equivalence
            row["relevance"] = eval_record.relevance
            row["faithfulness"] = eval_record.faithfulness
        rows.append(row)

    scores = aggregate(eval_records)
    summary: dict = {"judge": asdict(scores), "n_answered": len(eval_records)}
    if judgments:
        summary["retrieval"] = metrics_report(judgments, list(cutoffs))
    return rows, summary


def format_summary(summary: dict) -> str:
    """Aligned plain-text rendering of an evaluation summary."""
    judge = summary["judge"]
    lines = ["judge scores (normalized)"]
    for metric in ("equivalence", "relevance", "faithfulness"):
        value = judge[metric]
        n = judge[f"n_{metric}"]
        shown = "n/a" if value is None else f"{value:.4f}"
        lines.append(f"  {metric:<13} {shown:>8}  (n={n})")
    if "retrieval" in summary:
        lines.append("")
        lines.append(format_metrics_table(summary["retrieval"]))
    return "\n".join(lines)


def write_eval(rows: Iterable[dict], summary: dict, path: str | Path) -> None:
    """JSONL rows followed by one summary object marked with ``"summary": true``."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        fh.write(json.dumps({"summary": True, **summary}, ensure_ascii=False) + "\n")


def read_eval(path: str | Path) -> tuple[list[dict], dict | None]:
    rows: list[dict] = []
    summary: dict | None = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("summary") is True:
                obj.pop("summary")
                summary = obj
            else:
                rows.append(obj)
    return rows, summary
