"""Answer generation: context assembly, prompt rendering, and three methods.

The default operating point is strategy B, a top-3 context, greedy decoding,
and the standard single-call method. For multi-document questions two more
methods exist: answer each sub-question first and either feed both
intermediate answers to a final call (two-step context) or just concatenate
them (two-step answer).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .llm import ChatClient, LlmError
from .retrieve import RankedHit


class PromptStrategy(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


PROMPT_HEADERS: dict[PromptStrategy, str] = {
    PromptStrategy.A: (
        "Answer the question using only the provided context. Do not include "
        "any information not found in the context. Be concise. Keep the answer "
        "under 200 tokens."
    ),
    PromptStrategy.B: (
        "You are an expert assistant. Use only the retrieved context to answer "
        "the question clearly and accurately. Do not speculate. Keep the answer "
        "under 200 tokens."
    ),
    PromptStrategy.C: (
        "Based only on the provided context, answer the question in 1-3 "
        "sentences. Do not include any irrelevant information. Keep the answer "
        "under 200 tokens."
    ),
    PromptStrategy.D: (
        "Use only the context to answer the question. If reasoning is needed, "
        "do so briefly before giving a clear final answer. Keep the answer "
        "under 200 tokens. Do not use outside knowledge."
    ),
}


class GenerationMethod(str, Enum):
    STANDARD = "standard"
    TWO_STEP_CONTEXT = "two_step_context"
    TWO_STEP_ANSWER = "two_step_answer"


@dataclass(frozen=True)
class DecodingParams:
    """Decoding knobs; with sampling off the sampler fields are ignored."""

    sampling: bool = False
    temperature: float = 0.7
    top_p: float = 1.0
    top_k: int = 1
    max_new_tokens: int = 200

    def __post_init__(self) -> None:
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.sampling:
            if self.temperature <= 0:
                raise ValueError("temperature must be > 0 when sampling")
            if not (0 < self.top_p <= 1):
                raise ValueError("top_p must be in (0, 1]")
            if self.top_k < 1:
                raise ValueError("top_k must be >= 1")


DECODING_PROFILES: dict[str, DecodingParams] = {
    "greedy": DecodingParams(sampling=False),
    "sampling_low": DecodingParams(sampling=True, temperature=0.7, top_p=0.85, top_k=20),
    "sampling_mid": DecodingParams(sampling=True, temperature=0.9, top_p=0.9, top_k=40),
    "sampling_high": DecodingParams(sampling=True, temperature=1.2, top_p=0.95, top_k=60),
}


class EmptyContextError(Exception):
    """Raised instead of generating an ungrounded answer from nothing."""


class GenerationError(Exception):
    def __init__(self, question_id: str, message: str):
        super().__init__(f"question {question_id}: {message}")
        self.question_id = question_id


ContextEntry = tuple[str, str]  # (chunk_ref, labeled text)


def assemble_context(
    ranked: Sequence[RankedHit],
    text_of,
    k: int = 3,
) -> list[ContextEntry]:
    """First k hits in rank order, each labeled "[Doc i]" with 1-based i."""
    if not ranked:
        raise EmptyContextError("no retrieved context to generate from")
    entries: list[ContextEntry] = []
    for i, hit in enumerate(ranked[:k], start=1):
        entries.append((hit.chunk_ref, f"[Doc {i}] {text_of(hit.chunk_ref)}"))
    return entries


def render_prompt(
    strategy: PromptStrategy,
    question: str,
    context: Sequence[ContextEntry],
) -> str:
    """Pure rendering: strategy header, context block, question, answer cue."""
    header = PROMPT_HEADERS[strategy]
    joined = "\n".join(text for _, text in context)
    return f"{header}\nContext:\n{joined}\nQuestion: {question}\nAnswer:"


@dataclass(frozen=True)
class GenerationTask:
    """The exact generator input, preserved for audit."""

    question_id: str
    question_text: str
    context: tuple[ContextEntry, ...]
    strategy: PromptStrategy
    decoding: DecodingParams
    method: GenerationMethod
    final_prompt: str

    @classmethod
    def build(
        cls,
        question_id: str,
        question_text: str,
        context: Sequence[ContextEntry],
        strategy: PromptStrategy,
        decoding: DecodingParams,
        method: GenerationMethod = GenerationMethod.STANDARD,
    ) -> "GenerationTask":
        return cls(
            question_id=question_id,
            question_text=question_text,
            context=tuple(context),
            strategy=strategy,
            decoding=decoding,
            method=method,
            final_prompt=render_prompt(strategy, question_text, context),
        )


@dataclass(frozen=True)
class Answer:
    text: str
    final_prompt: str
    context_refs: tuple[str, ...]
    flags: tuple[str, ...] = ()


def generate_standard(task: GenerationTask, client: ChatClient) -> Answer:
    """One call with the rendered prompt; the client handles retries."""
    try:
        reply = client.chat([{"role": "user", "content": task.final_prompt}], task.decoding)
    except LlmError as exc:
        raise GenerationError(task.question_id, f"generation failed: {exc}") from exc
    return Answer(
        text=reply,
        final_prompt=task.final_prompt,
        context_refs=tuple(ref for ref, _ in task.context),
    )


def generate_multi(
    question_id: str,
    question_text: str,
    sub_questions: Sequence[str],
    sub_contexts: Sequence[Sequence[ContextEntry]],
    merged_context: Sequence[ContextEntry],
    method: GenerationMethod,
    strategy: PromptStrategy,
    decoding: DecodingParams,
    client: ChatClient,
) -> Answer:
    """Answer a multi-document question with the selected method.

    Two-step methods answer each sub-question over its own context first; any
    failure there falls back to the standard method on the merged context.
    """
    if method is GenerationMethod.STANDARD:
        task = GenerationTask.build(
            question_id, question_text, merged_context, strategy, decoding, method
        )
        return generate_standard(task, client)

    try:
        intermediates: list[str] = []
        sub_prompts: list[str] = []
        all_refs: list[str] = []
        for sub_q, context in zip(sub_questions, sub_contexts):
            if not context:
                raise EmptyContextError(f"no context for sub-question {sub_q!r}")
            task = GenerationTask.build(question_id, sub_q, context, strategy, decoding, method)
            sub_prompts.append(task.final_prompt)
            intermediates.append(
                client.chat([{"role": "user", "content": task.final_prompt}], decoding)
            )
            for ref, _ in context:
                if ref not in all_refs:
                    all_refs.append(ref)
    except (LlmError, EmptyContextError):
        task = GenerationTask.build(
            question_id, question_text, merged_context, strategy, decoding,
            GenerationMethod.STANDARD,
        )
        answer = generate_standard(task, client)
        return Answer(
            text=answer.text,
            final_prompt=answer.final_prompt,
            context_refs=answer.context_refs,
            flags=("multi_fallback_standard",),
        )

    if method is GenerationMethod.TWO_STEP_ANSWER:
        return Answer(
            text=" ".join(intermediates),
            final_prompt="\n\n".join(sub_prompts),
            context_refs=tuple(all_refs),
        )

    final_context = [
        (f"intermediate#{i}", f"[Doc {i}] {text}")
        for i, text in enumerate(intermediates, start=1)
    ]
    final_task = GenerationTask.build(
        question_id, question_text, final_context, strategy, decoding, method
    )
    try:
        reply = client.chat([{"role": "user", "content": final_task.final_prompt}], decoding)
    except LlmError as exc:
        raise GenerationError(question_id, f"final generation failed: {exc}") from exc
    return Answer(
        text=reply,
        final_prompt=final_task.final_prompt,
        context_refs=tuple(all_refs),
    )
