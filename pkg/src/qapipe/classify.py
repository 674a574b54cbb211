"""Single- vs multi-document question classification.

Three classifiers: a rule-based one (four deliberately trigger-happy rules,
since missing a multi-document question costs more than over-retrieving for a
single-document one), an LLM-backed one, and their OR-combination.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .llm import ChatClient, LlmError, PromptTemplate


class QuestionType(str, Enum):
    SINGLE_DOC = "single"
    MULTI_DOC = "multi"


class ClassifierMethod(str, Enum):
    RULE_BASED = "rule"
    LLM = "llm"
    COMBINED = "combined"


class ClassificationParseError(ValueError):
    pass


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    gold_answer: str | None = None
    gold_doc_ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"question {self.id!r} has empty text")
        if self.gold_doc_ids is not None:
            ids = tuple(self.gold_doc_ids)
            if not ids:
                raise ValueError(f"question {self.id!r}: gold_doc_ids must be non-empty when present")
            if len(set(ids)) != len(ids):
                raise ValueError(f"question {self.id!r}: gold_doc_ids contains duplicates")
            object.__setattr__(self, "gold_doc_ids", ids)


@dataclass(frozen=True)
class QuestionClass:
    label: QuestionType
    method: ClassifierMethod


@dataclass(frozen=True)
class RuleLexicon:
    """Marker sets for the rule classifier; extensible via config."""

    comparison_markers: tuple[str, ...] = (
        "compare",
        "comparison",
        "difference between",
        "versus",
        "vs.",
        "vs ",
    )
    conjunction_patterns: tuple[str, ...] = (
        ", and what",
        ", and how",
        ", and which",
        "and what are",
        "and how does",
    )
    both_markers: tuple[str, ...] = ("both", "respectively", "each of")


DEFAULT_LEXICON = RuleLexicon()

CLASSIFY_TEMPLATE = PromptTemplate(
    system=(
        "You are a question triage assistant. Decide whether answering the "
        "question needs one source passage or more than one. Reply with exactly "
        "one token: SINGLE if a single passage suffices, MULTI if two or more "
        "distinct passages are needed."
    ),
    user="{question}",
)

_CAP_TOKEN = re.compile(r"[A-Z][A-Za-z0-9]")


def _capitalized_spans(text: str) -> set[str]:
    """Maximal runs of capitalized tokens, skipping sentence-initial tokens."""
    spans: set[str] = set()
    current: list[str] = []
    sentence_start = True
    for raw in text.split():
        tok = raw.lstrip("(\"'[")
        is_cap = bool(_CAP_TOKEN.match(tok)) and not sentence_start
        if is_cap:
            current.append(tok.rstrip(".,;:!?)\"']"))
        else:
            if current:
                spans.add(" ".join(current))
            current = []
        sentence_start = raw.rstrip("\"')").endswith((".", "?", "!"))
    if current:
        spans.add(" ".join(current))
    return spans


def _marker_present(lowered: str, marker: str) -> bool:
    if " " in marker or not marker.isalpha():
        return marker in lowered
    return re.search(rf"\b{re.escape(marker)}\b", lowered) is not None


def classify_rule_based(q: Question, lexicon: RuleLexicon = DEFAULT_LEXICON) -> QuestionClass:
    """Pure rule classifier: MULTI_DOC as soon as any rule fires.

    R1: a comparison marker appears.
    R2: a coordinating conjunction immediately followed by an interrogative.
    R3: a both-quantification marker plus two distinct capitalized spans.
    R4: two or more question marks.
    """
    text = q.text
    lowered = text.lower()
    fired = (
        any(m in lowered for m in lexicon.comparison_markers)
        or any(p in lowered for p in lexicon.conjunction_patterns)
        or (
            any(_marker_present(lowered, m) for m in lexicon.both_markers)
            and len(_capitalized_spans(text)) >= 2
        )
        or text.count("?") >= 2
    )
    label = QuestionType.MULTI_DOC if fired else QuestionType.SINGLE_DOC
    return QuestionClass(label=label, method=ClassifierMethod.RULE_BASED)


def classify_llm(
    q: Question,
    client: ChatClient,
    template: PromptTemplate = CLASSIFY_TEMPLATE,
) -> QuestionClass:
    """Ask the endpoint for SINGLE or MULTI and take the first token found."""
    reply = client.chat(template.render(question=q.text))
    single_at = reply.find("SINGLE")
    multi_at = reply.find("MULTI")
    if single_at == -1 and multi_at == -1:
        raise ClassificationParseError(f"no SINGLE/MULTI token in reply: {reply[:120]!r}")
    if multi_at == -1 or (single_at != -1 and single_at < multi_at):
        label = QuestionType.SINGLE_DOC
    else:
        label = QuestionType.MULTI_DOC
    return QuestionClass(label=label, method=ClassifierMethod.LLM)


def classify_combined(
    q: Question,
    client: ChatClient,
    lexicon: RuleLexicon = DEFAULT_LEXICON,
    template: PromptTemplate = CLASSIFY_TEMPLATE,
) -> QuestionClass:
    """MULTI_DOC if either sub-classifier says so; LLM failures degrade to rule."""
    rule = classify_rule_based(q, lexicon)
    try:
        llm = classify_llm(q, client, template)
    except (LlmError, ClassificationParseError):
        llm = None
    multi = rule.label is QuestionType.MULTI_DOC or (
        llm is not None and llm.label is QuestionType.MULTI_DOC
    )
    label = QuestionType.MULTI_DOC if multi else QuestionType.SINGLE_DOC
    return QuestionClass(label=label, method=ClassifierMethod.COMBINED)


def classify(
    q: Question,
    method: ClassifierMethod,
    client: ChatClient | None = None,
    lexicon: RuleLexicon = DEFAULT_LEXICON,
    template: PromptTemplate = CLASSIFY_TEMPLATE,
) -> QuestionClass:
    """Dispatch on classifier method, with rule-based fallback for LLM failures."""
    if method is ClassifierMethod.RULE_BASED:
        return classify_rule_based(q, lexicon)
    if client is None:
        raise ValueError(f"classifier method {method.value} requires a chat client")
    if method is ClassifierMethod.LLM:
        try:
            return classify_llm(q, client, template)
        except (LlmError, ClassificationParseError):
            return classify_rule_based(q, lexicon)
    return classify_combined(q, client, lexicon, template)
