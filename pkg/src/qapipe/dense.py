"""Exact-scan dense vector index with cosine scoring."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Protocol

import numpy as np

from .chunking import Chunk
from .sparse import DuplicateChunkError


class DenseIngestError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class EmbedClient(Protocol):
    """Batch text embedder; ``dim`` is the reported output dimension."""

    dim: int | None

    def embed(self, texts: list[str]) -> list[list[float]]: ...


@dataclass
class DenseIndex:
    refs: list[str]          # sorted by chunk_ref
    matrix: np.ndarray       # shape (len(refs), d), float64
    d: int
    _norms: np.ndarray | None = field(default=None, init=False, repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseIndex):
            return NotImplemented
        return self.refs == other.refs and self.d == other.d and np.array_equal(self.matrix, other.matrix)

    @property
    def n_chunks(self) -> int:
        return len(self.refs)

    @property
    def norms(self) -> np.ndarray:
        if self._norms is None:
            self._norms = np.linalg.norm(self.matrix, axis=1)
        return self._norms


def build_dense(chunks: Iterable[Chunk], embedder: EmbedClient) -> DenseIndex:
    """Embed every chunk; all vectors must share one finite dimension."""
    chunk_list = list(chunks)
    seen: set[str] = set()
    for c in chunk_list:
        if c.chunk_id in seen:
            raise DuplicateChunkError(f"duplicate chunk_id: {c.chunk_id}")
        seen.add(c.chunk_id)

    if not chunk_list:
        d = embedder.dim or 0
        return DenseIndex(refs=[], matrix=np.zeros((0, d), dtype=np.float64), d=d)

    vectors = embedder.embed([c.text for c in chunk_list])
    if len(vectors) != len(chunk_list):
        raise DenseIngestError(
            f"embedder returned {len(vectors)} vectors for {len(chunk_list)} chunks"
        )
    d = len(vectors[0])
    for c, v in zip(chunk_list, vectors):
        if len(v) != d:
            raise DenseIngestError(
                f"embedding dimension changed: chunk {c.chunk_id} got {len(v)}, expected {d}"
            )

    order = sorted(range(len(chunk_list)), key=lambda i: chunk_list[i].chunk_id)
    matrix = np.asarray([vectors[i] for i in order], dtype=np.float64)
    if matrix.size and not np.all(np.isfinite(matrix)):
        raise DenseIngestError("embeddings contain non-finite values")
    refs = [chunk_list[i].chunk_id for i in order]
    return DenseIndex(refs=refs, matrix=matrix, d=d)


def cosine_scores(idx: DenseIndex, query_vector: np.ndarray) -> np.ndarray:
    """Cosine of the query against every stored vector; zero norms score 0."""
    if idx.n_chunks == 0:
        return np.zeros(0, dtype=np.float64)
    if query_vector.shape != (idx.d,):
        raise DimensionMismatchError(
            f"query dimension {query_vector.shape} does not match index dimension {idx.d}"
        )
    qn = float(np.linalg.norm(query_vector))
    if qn == 0.0:
        return np.zeros(idx.n_chunks, dtype=np.float64)
    dots = idx.matrix @ query_vector
    denom = idx.norms * qn
    out = np.zeros(idx.n_chunks, dtype=np.float64)
    nz = denom > 0
    out[nz] = dots[nz] / denom[nz]
    return out
