"""Cartesian experiment sweeps over generation settings.

Each cell re-runs the pipeline with one combination of context size, prompt
strategy, decoding profile, and generation method, then evaluates the answers.
The row schema mirrors the evaluation summary: equivalence, relevance,
faithfulness, plus retrieval metrics when gold documents exist.
"""
from __future__ import annotations

import itertools
from dataclasses import replace
from typing import Sequence

from .classify import Question
from .config import AppConfig, parse_decoding
from .evaluation import evaluate_records
from .generate import GenerationMethod, PromptStrategy
from .pipeline import PipelineClients, run_pipeline
from .storage import IndexBundle


def run_experiment(
    questions: Sequence[Question],
    bundle: IndexBundle,
    cfg: AppConfig,
    axes: dict[str, Sequence] | None = None,
) -> list[dict]:
    """Sweep the requested axes; absent axes pin to the config's value."""
    axes = axes or {}
    context_ks = [int(k) for k in axes.get("context_k", [cfg.context_k])]
    strategies = [PromptStrategy(s) for s in axes.get("prompt_strategy", [cfg.prompt_strategy])]
    decodings = [parse_decoding(d) if not hasattr(d, "max_new_tokens") else d
                 for d in axes.get("decoding", [cfg.decoding])]
    methods = [GenerationMethod(m) for m in axes.get("method", [cfg.generation_method])]

    rows: list[dict] = []
    for context_k, strategy, decoding, method in itertools.product(
        context_ks, strategies, decodings, methods
    ):
        cell_cfg = replace(
            cfg,
            context_k=context_k,
            prompt_strategy=strategy,
            decoding=decoding,
            generation_method=method,
            templates=dict(cfg.templates),
            endpoints=dict(cfg.endpoints),
        )
        clients = PipelineClients.from_config(cell_cfg)
        records = run_pipeline(questions, bundle, clients, cell_cfg)
        _, summary = evaluate_records(
            records, questions, cell_cfg.build_chat("judge"), cutoffs=cfg.eval_cutoffs
        )
        judge = summary["judge"]
        row = {
            "context_k": context_k,
            "prompt_strategy": strategy.value,
            "decoding": "greedy" if not decoding.sampling else (
                f"temp={decoding.temperature},top_p={decoding.top_p},top_k={decoding.top_k}"
            ),
            "method": method.value,
            "equivalence": judge["equivalence"],
            "relevance": judge["relevance"],
            "faithfulness": judge["faithfulness"],
            "n_answered": summary["n_answered"],
            "n_errors": sum(1 for r in records if "error" in r),
        }
        retrieval = summary.get("retrieval")
        if retrieval:
            top = str(max(int(k) for k in retrieval["recall"]))
            row["mrr"] = retrieval["mrr"][top]
            row["recall"] = retrieval["recall"][top]
        rows.append(row)
    return rows


def format_report(rows: Sequence[dict]) -> str:
    """Aligned plain-text table of sweep rows."""
    if not rows:
        return "(no rows)"
    columns = list(rows[0].keys())

    def cell(row: dict, col: str) -> str:
        value = row.get(col)
        if isinstance(value, float):
            return f"{value:.4f}"
        return "n/a" if value is None else str(value)

    table = [[cell(r, c) for c in columns] for r in rows]
    widths = [max(len(columns[i]), max(len(t[i]) for t in table)) for i in range(len(columns))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    for t in table:
        lines.append("  ".join(c.ljust(w) for c, w in zip(t, widths)).rstrip())
    return "\n".join(lines)
