"""End-to-end batch orchestration over a question file.

Each question flows classify -> rewrite/decompose -> hybrid retrieve ->
rerank -> assemble context -> generate and produces one JSON record. A
failing question yields a record with an ``error`` field instead of aborting
the batch, and an optional wall-clock budget marks not-yet-started questions
as budget-exceeded. Questions run on a bounded worker pool; output order is
always input order.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .classify import ClassifierMethod, Question, QuestionType, classify
from .config import AppConfig
from .generate import (
    GenerationMethod,
    GenerationTask,
    assemble_context,
    generate_multi,
    generate_standard,
)
from .rerank import rerank_pool
from .retrieve import merge_legs, retrieve_legs
from .rewrite import decompose_multi, rewrite_single
from .storage import IndexBundle


class StartupError(Exception):
    """Configuration or input problems detected before any question runs."""


@dataclass
class PipelineClients:
    classifier: object
    rewriter: object
    generator: object
    embedder: object
    reranker: object

    @classmethod
    def from_config(cls, cfg: AppConfig) -> "PipelineClients":
        return cls(
            classifier=cfg.build_chat("classifier"),
            rewriter=cfg.build_chat("rewriter"),
            generator=cfg.build_chat("generator"),
            embedder=cfg.build_embedder(),
            reranker=cfg.build_reranker(),
        )


def load_questions(path: str | Path) -> list[Question]:
    """Read a JSON-lines question file: {id, question, answer?, document_ids?}."""
    questions = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise StartupError(f"cannot read questions file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                doc_ids = obj.get("document_ids")
                questions.append(
                    Question(
                        id=str(obj["id"]),
                        text=str(obj["question"]),
                        gold_answer=obj.get("answer"),
                        gold_doc_ids=tuple(str(d) for d in doc_ids) if doc_ids else None,
                    )
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise StartupError(f"{path}:{lineno}: invalid question record: {exc}") from exc
    if not questions:
        raise StartupError(f"{path}: no questions found")
    return questions


def answer_question(
    q: Question,
    bundle: IndexBundle,
    clients: PipelineClients,
    cfg: AppConfig,
) -> dict:
    """Run one question through the full pipeline and build its output record."""
    flags: set[str] = set()
    qclass = classify(
        q,
        cfg.classifier_method,
        client=clients.classifier,
        lexicon=cfg.lexicon,
        template=cfg.templates["classify"],
    )

    if qclass.label is QuestionType.SINGLE_DOC:
        plan = rewrite_single(
            q,
            qclass,
            clients.rewriter,
            sparse_template=cfg.templates["rewrite_sparse"],
            dense_template=cfg.templates["rewrite_dense"],
        )
    else:
        plan = decompose_multi(q, qclass, clients.rewriter, template=cfg.templates["decompose"])
    flags.update(plan.flags)

    legs = retrieve_legs(plan, bundle.sparse, bundle.dense, clients.embedder, cfg.k_per_source)
    pool = merge_legs(legs)
    flags.update(pool.flags)

    top_n = max(cfg.ranking_depth, cfg.context_k)
    ranked, rerank_flags = rerank_pool(
        q.text, pool, scorer=clients.reranker, top_n=top_n, text_of=bundle.chunks.text_of
    )
    flags.update(rerank_flags)

    text_of = bundle.chunks.text_of
    merged_context = assemble_context(ranked, text_of, cfg.context_k) if ranked else []
    if ranked and len(merged_context) < cfg.context_k:
        flags.add("short_context")

    if (
        qclass.label is QuestionType.MULTI_DOC
        and cfg.generation_method is not GenerationMethod.STANDARD
    ):
        assert plan.sub_questions is not None
        sub_contexts = []
        for sub_q in plan.sub_questions:
            sub_pool = merge_legs(leg for leg in legs if leg.origin_query == sub_q)
            sub_ranked, sub_flags = rerank_pool(
                sub_q, sub_pool, scorer=clients.reranker, top_n=cfg.context_k,
                text_of=text_of,
            )
            flags.update(sub_flags)
            sub_contexts.append(
                assemble_context(sub_ranked, text_of, cfg.context_k) if sub_ranked else []
            )
        answer = generate_multi(
            q.id,
            q.text,
            plan.sub_questions,
            sub_contexts,
            merged_context,
            cfg.generation_method,
            cfg.prompt_strategy,
            cfg.decoding,
            clients.generator,
        )
    else:
        if not merged_context:
            # surfaces as an error record: generating without grounding is refused
            assemble_context(ranked, text_of, cfg.context_k)
        task = GenerationTask.build(
            q.id, q.text, merged_context, cfg.prompt_strategy, cfg.decoding
        )
        answer = generate_standard(task, clients.generator)
    flags.update(answer.flags)

    passages = []
    for ref in answer.context_refs:
        if ref in bundle.chunks:
            chunk = bundle.chunks.get(ref)
            passages.append({"doc_id": chunk.doc_id, "chunk_id": ref, "text": chunk.text})
    return {
        "id": q.id,
        "question": q.text,
        "class": qclass.label.value,
        "passages": passages,
        "ranking": [hit.chunk_ref for hit in ranked],
        "final_prompt": answer.final_prompt,
        "answer": answer.text,
        "degraded_flags": sorted(flags),
    }


def run_pipeline(
    questions: Iterable[Question],
    bundle: IndexBundle,
    clients: PipelineClients,
    cfg: AppConfig,
    budget_seconds: float | None = None,
) -> list[dict]:
    """Answer every question, isolating per-question failures.

    Returns records in input order. With a budget, questions that have not
    started when the clock runs out are emitted as budget-exceeded errors.
    """
    question_list = list(questions)
    budget = budget_seconds if budget_seconds is not None else cfg.budget_seconds
    deadline = time.monotonic() + budget if budget is not None else None

    def one(q: Question) -> dict:
        if deadline is not None and time.monotonic() >= deadline:
            return {"id": q.id, "question": q.text, "error": "budget exceeded"}
        try:
            return answer_question(q, bundle, clients, cfg)
        except Exception as exc:  # noqa: BLE001 - per-question isolation is the contract
            return {"id": q.id, "question": q.text, "error": f"{type(exc).__name__}: {exc}"}

    if cfg.parallelism == 1:
        return [one(q) for q in question_list]
    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        return list(pool.map(one, question_list))


def write_records(records: Iterable[dict], path: str | Path) -> int:
    """Write JSONL records; returns the count of records carrying errors."""
    errors = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            if "error" in record:
                errors += 1
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return errors


def read_records(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
