"""Sentence-aware document chunking.

Text is whitespace-normalized at ingest, split into sentences at ``.``, ``?``
or ``!`` followed by whitespace (abbreviation-blind on purpose), and sentences
are greedily packed into chunks of at most ``max_tokens`` whitespace tokens.
A single sentence longer than the budget is hard-split at token boundaries.
Concatenating a document's chunks in ordinal order reproduces the normalized
document text.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .tokens import normalize_ws

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.?!])\s+")


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"document {self.doc_id!r} has empty text")


@dataclass(frozen=True)
class Chunk:
    """A sentence-aligned slice of one document, the unit of indexing."""

    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    token_count: int


def split_sentences(text: str) -> list[str]:
    """Split normalized text at sentence-ending punctuation + whitespace."""
    return [s for s in _SENTENCE_BOUNDARY.split(text) if s]


def chunk_document(doc: Document, max_tokens: int = 512) -> list[Chunk]:
    """Split a document into chunks of at most ``max_tokens`` tokens.

    Greedy packing: sentences accumulate until the next one would overflow
    the budget; oversized sentences are pre-split into ``max_tokens``-sized
    pieces and fed through the same accumulator.
    """
    if max_tokens < 16:
        raise ValueError(f"max_tokens must be >= 16, got {max_tokens}")
    normalized = normalize_ws(doc.text)

    pieces: list[list[str]] = []
    for sentence in split_sentences(normalized):
        words = sentence.split()
        for i in range(0, len(words), max_tokens):
            pieces.append(words[i : i + max_tokens])

    chunks: list[Chunk] = []
    current: list[str] = []

    def flush() -> None:
        if not current:
            return
        ordinal = len(chunks)
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}#{ordinal}",
                doc_id=doc.doc_id,
                ordinal=ordinal,
                text=" ".join(current),
                token_count=len(current),
            )
        )
        current.clear()

    for piece in pieces:
        if current and len(current) + len(piece) > max_tokens:
            flush()
        current.extend(piece)
    flush()
    return chunks
