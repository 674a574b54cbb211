"""Question rewriting for retrieval.

Single-document questions get two rewrites, one tuned for keyword search and
one for embedding search. Multi-document questions are decomposed into exactly
two sub-questions; when the model's reply cannot be parsed, a deterministic
rule split takes over so the pipeline never stalls.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .classify import Question, QuestionClass, QuestionType
from .llm import ChatClient, LlmError, PromptTemplate

SPARSE_REWRITE_TEMPLATE = PromptTemplate(
    system=(
        "Rewrite the question as a short web-style search query for a keyword "
        "search engine. Keep the distinctive terms, drop premises and filler "
        "words. Return only the rewritten query."
    ),
    user="{question}",
)

DENSE_REWRITE_TEMPLATE = PromptTemplate(
    system=(
        "Rewrite the question for an embedding-based retriever: remove "
        "unnecessary premises and put the key terms directly into a single "
        "focused question. Return only the rewritten question."
    ),
    user="{question}",
)

DECOMPOSE_TEMPLATE = PromptTemplate(
    system=(
        "Split the question into exactly two self-contained sub-questions, one "
        "per distinct information need. Reply with a numbered list, '1.' then "
        "'2.', and nothing else."
    ),
    user="{question}",
)

_NUMBERED_ITEM = re.compile(r"^\s*\d+[.)]\s*(.+?)\s*$", re.MULTILINE)

_INTERROGATIVE_OPENERS = frozenset(
    {
        "what", "which", "who", "whom", "whose", "when", "where", "why", "how",
        "is", "are", "was", "were", "do", "does", "did", "can", "could",
        "will", "would", "should", "has", "have", "had",
    }
)


@dataclass(frozen=True)
class RewritePlan:
    """Retrieval-ready reformulations for one classified question."""

    original: Question
    qclass: QuestionClass
    sparse_query: str | None = None
    dense_query: str | None = None
    sub_questions: tuple[str, str] | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.qclass.label is QuestionType.SINGLE_DOC:
            if not self.sparse_query or not self.dense_query or self.sub_questions is not None:
                raise ValueError("single-doc plan needs sparse_query and dense_query only")
        else:
            if self.sub_questions is None or self.sparse_query or self.dense_query:
                raise ValueError("multi-doc plan needs sub_questions only")
            if len(self.sub_questions) != 2 or not all(s.strip() for s in self.sub_questions):
                raise ValueError("sub_questions must be exactly two non-empty strings")


def strip_rewrite(text: str) -> str:
    """Trim whitespace and any number of matching surrounding quote pairs."""
    out = text.strip()
    while len(out) >= 2 and out[0] == out[-1] and out[0] in "\"'":
        out = out[1:-1].strip()
    return out


def _one_rewrite(q: Question, client: ChatClient, template: PromptTemplate) -> str | None:
    try:
        reply = strip_rewrite(client.chat(template.render(question=q.text)))
    except LlmError:
        return None
    return reply or None


def rewrite_single(
    q: Question,
    qclass: QuestionClass,
    client: ChatClient,
    sparse_template: PromptTemplate = SPARSE_REWRITE_TEMPLATE,
    dense_template: PromptTemplate = DENSE_REWRITE_TEMPLATE,
) -> RewritePlan:
    """Produce sparse- and dense-optimized rewrites, falling back per slot.

    The two rewrites come from two independent calls, so a failure on one
    slot never loses the other. A failed or empty slot falls back to the
    original question text and is flagged.
    """
    flags: list[str] = []
    sparse_query = _one_rewrite(q, client, sparse_template)
    if sparse_query is None:
        sparse_query = q.text
        flags.append("sparse_rewrite_fallback")
    dense_query = _one_rewrite(q, client, dense_template)
    if dense_query is None:
        dense_query = q.text
        flags.append("dense_rewrite_fallback")
    if len(flags) == 2:
        flags.append("degraded")
    return RewritePlan(
        original=q,
        qclass=qclass,
        sparse_query=sparse_query,
        dense_query=dense_query,
        flags=tuple(flags),
    )


def rule_split(text: str) -> tuple[str, str, bool]:
    """Deterministic decomposition: split at the last ", and ".

    The second clause is re-interrogativized with a "What" prefix only when it
    does not already open with an interrogative word. Returns the two clauses
    plus a degraded marker set when no split point exists and the original is
    duplicated into both slots.
    """
    lowered = text.lower()
    idx = lowered.rfind(", and ")
    if idx <= 0:
        return text, text, True
    first = text[:idx].strip()
    second = text[idx + len(", and ") :].strip()
    if not first or not second:
        return text, text, True
    opener = second.split()[0].strip("\"'").lower()
    if opener in _INTERROGATIVE_OPENERS:
        second = second[0].upper() + second[1:]
    else:
        second = "What " + second
    return first, second, False


def decompose_multi(
    q: Question,
    qclass: QuestionClass,
    client: ChatClient,
    template: PromptTemplate = DECOMPOSE_TEMPLATE,
) -> RewritePlan:
    """Decompose into exactly two sub-questions, rule-splitting on bad replies."""
    items: list[str] = []
    try:
        reply = client.chat(template.render(question=q.text))
        items = [m.strip() for m in _NUMBERED_ITEM.findall(reply) if m.strip()]
    except LlmError:
        items = []
    if len(items) == 2:
        return RewritePlan(original=q, qclass=qclass, sub_questions=(items[0], items[1]))

    first, second, degraded = rule_split(q.text)
    flags = ["decompose_fallback"]
    if degraded:
        flags.append("degraded")
    return RewritePlan(
        original=q,
        qclass=qclass,
        sub_questions=(first, second),
        flags=tuple(flags),
    )
