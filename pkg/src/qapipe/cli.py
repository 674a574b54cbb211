"""Command-line interface exposing every pipeline stage.

Exit codes: 0 on success, 1 on startup errors (bad config, unreadable inputs,
missing index), 2 when the batch completed but some questions carry errors.
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click

from .classify import classify as classify_question
from .config import AppConfig, ConfigError
from .evaluation import evaluate_records, format_summary, read_eval, write_eval
from .fixtures import decomposition_fixture, retrieval_fixture, scale_questions
from .pipeline import (
    PipelineClients,
    StartupError,
    load_questions,
    read_records,
    run_pipeline,
    write_records,
)
from .classify import QuestionType
from .rewrite import decompose_multi, rewrite_single
from .storage import (
    PersistenceError,
    build_bundle,
    load_indices,
    read_corpus_jsonl,
    save_indices,
)
from .sweep import format_report, run_experiment

_STARTUP_ERRORS = (ConfigError, StartupError, PersistenceError, OSError)


def _load_config(path: str | None) -> AppConfig:
    return AppConfig.load(path) if path else AppConfig.default()


def _startup_fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Question-aware retrieval-augmented QA pipeline."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(), help="Corpus JSONL: {doc_id, text}.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Index directory.")
@click.option("--config", "config_path", type=click.Path(), default=None)
def index(corpus: str, out_dir: str, config_path: str | None) -> None:
    """Chunk a corpus and build the sparse and dense indices."""
    try:
        cfg = _load_config(config_path)
        docs = read_corpus_jsonl(corpus)
        bundle = build_bundle(
            docs,
            cfg.build_embedder(),
            k1=cfg.bm25_k1,
            b=cfg.bm25_b,
            max_tokens=cfg.max_chunk_tokens,
        )
        save_indices(bundle, out_dir)
    except _STARTUP_ERRORS as exc:
        _startup_fail(exc)
    click.echo(
        f"indexed {len(docs)} documents into {len(bundle.chunks)} chunks "
        f"(dense dim {bundle.dense.d}) at {out_dir}"
    )


@main.command()
@click.option("--questions", "questions_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None, help="Default: stdout.")
def classify(questions_path: str, config_path: str | None, out_path: str | None) -> None:
    """Classify each question as single- or multi-document."""
    try:
        cfg = _load_config(config_path)
        questions = load_questions(questions_path)
        client = cfg.build_chat("classifier")
    except _STARTUP_ERRORS as exc:
        _startup_fail(exc)
    lines = []
    for q in questions:
        qc = classify_question(
            q, cfg.classifier_method, client=client, lexicon=cfg.lexicon,
            template=cfg.templates["classify"],
        )
        lines.append(json.dumps(
            {"id": q.id, "question": q.text, "class": qc.label.value, "method": qc.method.value},
            ensure_ascii=False,
        ))
    _emit_lines(lines, out_path)


@main.command()
@click.option("--questions", "questions_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def rewrite(questions_path: str, config_path: str | None, out_path: str | None) -> None:
    """Classify then rewrite or decompose each question."""
    try:
        cfg = _load_config(config_path)
        questions = load_questions(questions_path)
        classifier = cfg.build_chat("classifier")
        rewriter = cfg.build_chat("rewriter")
    except _STARTUP_ERRORS as exc:
        _startup_fail(exc)
    lines = []
    for q in questions:
        qc = classify_question(
            q, cfg.classifier_method, client=classifier, lexicon=cfg.lexicon,
            template=cfg.templates["classify"],
        )
        if qc.label is QuestionType.SINGLE_DOC:
            plan = rewrite_single(
                q, qc, rewriter,
                sparse_template=cfg.templates["rewrite_sparse"],
                dense_template=cfg.templates["rewrite_dense"],
            )
        else:
            plan = decompose_multi(q, qc, rewriter, template=cfg.templates["decompose"])
        lines.append(json.dumps(
            {
                "id": q.id,
                "class": qc.label.value,
                "sparse_query": plan.sparse_query,
                "dense_query": plan.dense_query,
                "sub_questions": list(plan.sub_questions) if plan.sub_questions else None,
                "flags": list(plan.flags),
            },
            ensure_ascii=False,
        ))
    _emit_lines(lines, out_path)


@main.command()
@click.option("--index", "index_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--question", "question_text", required=True)
def ask(index_dir: str, config_path: str | None, question_text: str) -> None:
    """Answer one ad-hoc question and print the record as JSON."""
    from .classify import Question

    try:
        cfg = _load_config(config_path)
        bundle = load_indices(index_dir)
        clients = PipelineClients.from_config(cfg)
    except _STARTUP_ERRORS as exc:
        _startup_fail(exc)
    records = run_pipeline(
        [Question(id="adhoc-0", text=question_text)], bundle, clients, cfg
    )
    click.echo(json.dumps(records[0], ensure_ascii=False, indent=2))
    if "error" in records[0]:
        sys.exit(2)


@main.command()
@click.option("--questions", "questions_path", required=True, type=click.Path())
@click.option("--index", "index_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--budget-seconds", type=float, default=None, help="Wall-clock cap for the batch.")
def run(
    questions_path: str,
    index_dir: str,
    config_path: str | None,
    out_path: str,
    budget_seconds: float | None,
) -> None:
    """Run the full pipeline over a question file."""
    try:
        cfg = _load_config(config_path)
        questions = load_questions(questions_path)
        bundle = load_indices(index_dir)
        clients = PipelineClients.from_config(cfg)
    except _STARTUP_ERRORS as exc:
        _startup_fail(exc)
    records = run_pipeline(questions, bundle, clients, cfg, budget_seconds=budget_seconds)
    errors = write_records(records, out_path)
    click.echo(f"answered {len(records) - errors}/{len(records)} questions -> {out_path}")
    if errors:
        sys.exit(2)


@main.command("eval")
@click.option("--answers", "answers_path", required=True, type=click.Path())
@click.option("--questions", "questions_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_cmd(
    answers_path: str, questions_path: str, config_path: str | None, out_path: str
) -> None:
    """Judge answers and compute retrieval metrics from an answers file."""
    try:
        cfg = _load_config(config_path)
        questions = load_questions(questions_path)
        records = read_records(answers_path)
        judge_client = cfg.build_chat("judge")
    except _STARTUP_ERRORS + (json.JSONDecodeError,) as exc:
        _startup_fail(exc)
    rows, summary = evaluate_records(records, questions, judge_client, cutoffs=cfg.eval_cutoffs)
    write_eval(rows, summary, out_path)
    click.echo(format_summary(summary))


@main.command()
@click.option("--eval", "eval_path", required=True, type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write summary JSON here.")
def report(eval_path: str, out_path: str | None) -> None:
    """Render the aggregate report from an evaluation file."""
    try:
        _, summary = read_eval(eval_path)
    except (OSError, json.JSONDecodeError) as exc:
        _startup_fail(exc)
    if summary is None:
        _startup_fail(ValueError(f"{eval_path}: no summary row found"))
    if out_path:
        Path(out_path).write_text(
            json.dumps(summary, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    click.echo(format_summary(summary))


@main.command()
@click.option("--questions", "questions_path", required=True, type=click.Path())
@click.option("--index", "index_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--context-k", "context_ks", multiple=True, type=int)
@click.option("--strategy", "strategies", multiple=True, type=click.Choice(["A", "B", "C", "D"]))
@click.option("--decoding", "decodings", multiple=True, type=str)
@click.option("--method", "methods", multiple=True,
              type=click.Choice(["standard", "two_step_context", "two_step_answer"]))
@click.option("--out", "out_path", type=click.Path(), default=None)
def sweep(
    questions_path: str,
    index_dir: str,
    config_path: str | None,
    context_ks: tuple[int, ...],
    strategies: tuple[str, ...],
    decodings: tuple[str, ...],
    methods: tuple[str, ...],
    out_path: str | None,
) -> None:
    """Cartesian sweep over generation axes; prints an aligned report table."""
    try:
        cfg = _load_config(config_path)
        questions = load_questions(questions_path)
        bundle = load_indices(index_dir)
        axes: dict = {}
        if context_ks:
            axes["context_k"] = list(context_ks)
        if strategies:
            axes["prompt_strategy"] = list(strategies)
        if decodings:
            axes["decoding"] = list(decodings)
        if methods:
            axes["method"] = list(methods)
        rows = run_experiment(questions, bundle, cfg, axes)
    except _STARTUP_ERRORS as exc:
        _startup_fail(exc)
    if out_path:
        Path(out_path).write_text(
            "\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n", encoding="utf-8"
        )
    click.echo(format_report(rows))


@main.command()
@click.option("--kind", type=click.Choice(["retrieval", "decomposition", "scale"]),
              default="retrieval")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--n", "n_questions", type=int, default=500, help="Question count for kind=scale.")
def fixture(kind: str, out_dir: str, n_questions: int) -> None:
    """Write a bundled fixture corpus, questions, and matching config."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    if kind == "decomposition":
        fx = decomposition_fixture()
        questions = fx.questions
    else:
        fx = retrieval_fixture()
        questions = scale_questions(n_questions) if kind == "scale" else fx.questions
    with open(directory / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc in fx.docs:
            fh.write(json.dumps({"doc_id": doc.doc_id, "text": doc.text}, ensure_ascii=False) + "\n")
    with open(directory / "questions.jsonl", "w", encoding="utf-8") as fh:
        for q in questions:
            obj = {"id": q.id, "question": q.text}
            if q.gold_answer:
                obj["answer"] = q.gold_answer
            if q.gold_doc_ids:
                obj["document_ids"] = list(q.gold_doc_ids)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    config = {
        "classifier": "rule",
        "endpoints": {
            "embedder": {
                "kind": "mock-hash",
                "dim": fx.embedder_dim,
                "synonyms": fx.synonyms,
            },
        },
    }
    import yaml

    (directory / "config.yaml").write_text(yaml.safe_dump(config, sort_keys=True), encoding="utf-8")
    click.echo(f"wrote {len(fx.docs)} docs, {len(questions)} questions to {out_dir}")


if __name__ == "__main__":
    main()
