"""Model-assisted answer evaluation on three metrics.

Equivalence (0-2, needs a gold answer), relevance (0-2), and faithfulness
(-1..1) are each asked with a fixed template demanding a single "Metric: n"
line. Scores are never fabricated: a transport failure or an unparseable
reply (after one re-ask) leaves the metric missing, and missing metrics are
excluded from both the numerator and denominator of the aggregates.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .llm import ChatClient, LlmError

EQUIVALENCE_TEMPLATE = """\
You are an assistant evaluating the equivalence of a generated answer compared to the gold answer. Equivalence measures semantic similarity, not surface similarity. Use this scale: 2: Fully equivalent — expresses the same meaning. 1: Partially equivalent — some shared meaning, but incomplete or imprecise. 0: Not equivalent — meaning differs or is wrong.
Question: {question}
Gold Answer: {gold_answer}
Generated Answer: {answer}
Return ONLY your evaluation like this: Equivalence: <score>"""

RELEVANCE_TEMPLATE = """\
You are an assistant evaluating the relevance of a generated answer based on the question. Relevance is defined as how directly and completely the answer addresses the question, regardless of correctness. Use this scale: 2: Fully relevant — directly answers the question. 1: Partially relevant — somewhat related, vague, or off-topic parts. 0: Not relevant — does not answer or is unrelated.
Question: {question}
Generated Answer: {answer}
Return ONLY your evaluation like this: Relevance: <score>"""

FAITHFULNESS_TEMPLATE = """\
You are an assistant evaluating the faithfulness of a generated answer based on the given context and question. Faithfulness assesses whether the response is grounded in the retrieved passages. Use this scale: 1: Full support. All answer parts are grounded. 0: Partial support. Some parts are grounded, others are not. -1: No support. All answer parts are unsupported by the context.
Context: {context}
Question: {question}
Generated Answer: {answer}
Return ONLY your evaluation like this: Faithfulness: <score>"""

SCALES = {
    "equivalence": (0, 1, 2),
    "relevance": (0, 1, 2),
    "faithfulness": (-1, 0, 1),
}

_SCALE_MAX = {"equivalence": 2, "relevance": 2, "faithfulness": 1}


class JudgeParseError(ValueError):
    def __init__(self, metric: str, raw: str):
        super().__init__(f"could not parse {metric} score from reply: {raw[:120]!r}")
        self.metric = metric
        self.raw = raw


@dataclass
class EvalRecord:
    question_id: str
    equivalence: int | None = None
    relevance: int | None = None
    faithfulness: int | None = None
    judge_raw: dict[str, list[str]] = field(default_factory=dict)


@dataclass(frozen=True)
class NormalizedScores:
    equivalence: float | None
    relevance: float | None
    faithfulness: float | None
    n_equivalence: int
    n_relevance: int
    n_faithfulness: int


def render_judge_prompt(
    metric: str,
    question: str,
    answer: str,
    context: str = "",
    gold_answer: str = "",
) -> str:
    """Substitute placeholders literally, so braces in values are inert."""
    template = {
        "equivalence": EQUIVALENCE_TEMPLATE,
        "relevance": RELEVANCE_TEMPLATE,
        "faithfulness": FAITHFULNESS_TEMPLATE,
    }[metric]
    return (
        template.replace("{question}", question)
        .replace("{gold_answer}", gold_answer)
        .replace("{answer}", answer)
        .replace("{context}", context)
    )


def parse_judge_reply(metric: str, raw: str) -> int:
    """Extract "Metric: n"; whitespace is flexible and trailing text ignored."""
    match = re.search(rf"{metric}\s*:\s*(-?\d+)", raw, re.IGNORECASE)
    if not match:
        raise JudgeParseError(metric, raw)
    value = int(match.group(1))
    if value not in SCALES[metric]:
        raise JudgeParseError(metric, raw)
    return value


def _ask_metric(
    client: ChatClient,
    metric: str,
    prompt: str,
    raw_log: list[str],
) -> int | None:
    # transport retries live in the client; one re-ask covers parse failures
    for _ in range(2):
        try:
            raw = client.chat([{"role": "user", "content": prompt}])
        except LlmError as exc:
            raw_log.append(f"<error: {exc}>")
            return None
        raw_log.append(raw)
        try:
            return parse_judge_reply(metric, raw)
        except JudgeParseError:
            continue
    return None


def judge_one(
    question_id: str,
    question: str,
    answer: str,
    context: str,
    client: ChatClient,
    gold_answer: str | None = None,
) -> EvalRecord:
    """Judge one answer; equivalence is only asked when a gold answer exists."""
    if not answer.strip():
        raise ValueError(f"question {question_id!r}: empty answer cannot be judged")
    record = EvalRecord(question_id=question_id)

    if gold_answer is not None:
        log: list[str] = []
        prompt = render_judge_prompt("equivalence", question, answer, gold_answer=gold_answer)
        record.equivalence = _ask_metric(client, "equivalence", prompt, log)
        record.judge_raw["equivalence"] = log

    log = []
    prompt = render_judge_prompt("relevance", question, answer)
    record.relevance = _ask_metric(client, "relevance", prompt, log)
    record.judge_raw["relevance"] = log

    log = []
    prompt = render_judge_prompt("faithfulness", question, answer, context=context)
    record.faithfulness = _ask_metric(client, "faithfulness", prompt, log)
    record.judge_raw["faithfulness"] = log
    return record


def aggregate(records: Sequence[EvalRecord]) -> NormalizedScores:
    """Sum each metric over scored questions and divide by its maximum."""
    sums = {m: 0 for m in SCALES}
    counts = {m: 0 for m in SCALES}
    for record in records:
        for metric in SCALES:
            value = getattr(record, metric)
            if value is not None:
                sums[metric] += value
                counts[metric] += 1

    def norm(metric: str) -> float | None:
        if counts[metric] == 0:
            return None
        return sums[metric] / (_SCALE_MAX[metric] * counts[metric])

    return NormalizedScores(
        equivalence=norm("equivalence"),
        relevance=norm("relevance"),
        faithfulness=norm("faithfulness"),
        n_equivalence=counts["equivalence"],
        n_relevance=counts["relevance"],
        n_faithfulness=counts["faithfulness"],
    )
