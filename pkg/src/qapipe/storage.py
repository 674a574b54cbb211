"""Versioned on-disk persistence for chunk store and both indices.

Every ``*.idx`` file is framed as:

    magic "QPIX" | format version u16 | section kind u8 | payload length u64
    | payload bytes | crc32(payload) u32      (all integers little-endian)

``meta`` is plain JSON. Round-trip identity is guaranteed: loading a saved
directory reproduces the in-memory indices exactly.
"""
from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .chunking import Chunk, Document, chunk_document
from .dense import DenseIndex, EmbedClient, build_dense
from .sparse import DuplicateChunkError, SparseIndex, build_sparse

MAGIC = b"QPIX"
FORMAT_VERSION = 1

KIND_SPARSE = 1
KIND_DENSE = 2
KIND_CHUNKS = 3

_HEADER = struct.Struct("<4sHBQ")
_CRC = struct.Struct("<I")

SPARSE_FILE = "sparse.idx"
DENSE_FILE = "dense.idx"
CHUNKS_FILE = "chunks.idx"
META_FILE = "meta"


class PersistenceError(Exception):
    pass


class MissingIndexFileError(PersistenceError):
    pass


class IndexVersionError(PersistenceError):
    pass


class CorruptIndexError(PersistenceError):
    pass


class ChunkStore:
    """Chunk lookup by id, preserving ingest order."""

    def __init__(self, chunks: Iterable[Chunk]):
        self.chunks: list[Chunk] = list(chunks)
        self._by_id: dict[str, Chunk] = {}
        for c in self.chunks:
            if c.chunk_id in self._by_id:
                raise DuplicateChunkError(f"duplicate chunk_id: {c.chunk_id}")
            self._by_id[c.chunk_id] = c

    def __len__(self) -> int:
        return len(self.chunks)

    def __contains__(self, chunk_ref: str) -> bool:
        return chunk_ref in self._by_id

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChunkStore):
            return NotImplemented
        return self.chunks == other.chunks

    def get(self, chunk_ref: str) -> Chunk:
        return self._by_id[chunk_ref]

    def text_of(self, chunk_ref: str) -> str:
        return self._by_id[chunk_ref].text

    def doc_of(self, chunk_ref: str) -> str:
        return self._by_id[chunk_ref].doc_id


@dataclass
class IndexBundle:
    chunks: ChunkStore
    sparse: SparseIndex
    dense: DenseIndex
    meta: dict


def corpus_hash(docs: Iterable[Document]) -> str:
    h = hashlib.sha256()
    for doc in docs:
        h.update(doc.doc_id.encode("utf-8"))
        h.update(b"\x00")
        h.update(doc.text.encode("utf-8"))
        h.update(b"\x01")
    return h.hexdigest()


def read_corpus_jsonl(path: str | Path) -> list[Document]:
    """Load a JSON-lines corpus of ``{"doc_id": ..., "text": ...}`` objects."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PersistenceError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if "doc_id" not in obj or "text" not in obj:
                raise PersistenceError(f"{path}:{lineno}: missing doc_id or text")
            docs.append(Document(doc_id=str(obj["doc_id"]), text=str(obj["text"])))
    return docs


def build_bundle(
    docs: Iterable[Document],
    embedder: EmbedClient,
    *,
    k1: float = 0.9,
    b: float = 0.4,
    max_tokens: int = 512,
) -> IndexBundle:
    """Chunk a corpus and build both indices over the chunks."""
    doc_list = list(docs)
    seen_ids: set[str] = set()
    for doc in doc_list:
        if doc.doc_id in seen_ids:
            raise DuplicateChunkError(f"duplicate doc_id: {doc.doc_id}")
        seen_ids.add(doc.doc_id)

    chunks: list[Chunk] = []
    for doc in doc_list:
        chunks.extend(chunk_document(doc, max_tokens=max_tokens))
    sparse = build_sparse(chunks, k1=k1, b=b)
    dense = build_dense(chunks, embedder)
    meta = {
        "format_version": FORMAT_VERSION,
        "k1": k1,
        "b": b,
        "d": dense.d,
        "max_tokens": max_tokens,
        "corpus_hash": corpus_hash(doc_list),
    }
    return IndexBundle(chunks=ChunkStore(chunks), sparse=sparse, dense=dense, meta=meta)


def _write_frame(path: Path, kind: int, payload: bytes) -> None:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, kind, len(payload))
    crc = _CRC.pack(zlib.crc32(payload))
    path.write_bytes(header + payload + crc)


def _read_frame(path: Path, kind: int) -> bytes:
    if not path.exists():
        raise MissingIndexFileError(f"missing index file: {path}")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size + _CRC.size:
        raise CorruptIndexError(f"{path.name}: truncated header")
    magic, version, got_kind, length = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptIndexError(f"{path.name}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"{path.name}: format version {version}, expected {FORMAT_VERSION}"
        )
    if got_kind != kind:
        raise CorruptIndexError(f"{path.name}: wrong section kind {got_kind}")
    payload = blob[_HEADER.size : _HEADER.size + length]
    if len(payload) != length or len(blob) != _HEADER.size + length + _CRC.size:
        raise CorruptIndexError(f"{path.name}: truncated payload")
    (crc,) = _CRC.unpack_from(blob, _HEADER.size + length)
    if crc != zlib.crc32(payload):
        raise CorruptIndexError(f"{path.name}: checksum mismatch")
    return payload


def _sparse_payload(idx: SparseIndex) -> bytes:
    obj = {
        "k1": idx.k1,
        "b": idx.b,
        "avgdl": idx.avgdl,
        "doc_lengths": idx.doc_lengths,
        "postings": {t: [[ref, tf] for ref, tf in pairs] for t, pairs in idx.postings.items()},
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _sparse_from_payload(payload: bytes, name: str) -> SparseIndex:
    try:
        obj = json.loads(payload.decode("utf-8"))
        postings = {t: [(ref, int(tf)) for ref, tf in pairs] for t, pairs in obj["postings"].items()}
        return SparseIndex(
            postings=postings,
            doc_lengths={k: int(v) for k, v in obj["doc_lengths"].items()},
            avgdl=float(obj["avgdl"]),
            k1=float(obj["k1"]),
            b=float(obj["b"]),
        )
    except (KeyError, ValueError, TypeError, UnicodeDecodeError) as exc:
        raise CorruptIndexError(f"{name}: malformed sparse payload: {exc}") from exc


def _chunks_payload(store: ChunkStore) -> bytes:
    rows = [
        {
            "chunk_id": c.chunk_id,
            "doc_id": c.doc_id,
            "ordinal": c.ordinal,
            "text": c.text,
            "token_count": c.token_count,
        }
        for c in store.chunks
    ]
    return json.dumps(rows, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _chunks_from_payload(payload: bytes, name: str) -> ChunkStore:
    try:
        rows = json.loads(payload.decode("utf-8"))
        return ChunkStore(
            Chunk(
                chunk_id=r["chunk_id"],
                doc_id=r["doc_id"],
                ordinal=int(r["ordinal"]),
                text=r["text"],
                token_count=int(r["token_count"]),
            )
            for r in rows
        )
    except (KeyError, ValueError, TypeError, UnicodeDecodeError) as exc:
        raise CorruptIndexError(f"{name}: malformed chunk payload: {exc}") from exc


def _dense_payload(idx: DenseIndex) -> bytes:
    parts = [struct.pack("<II", idx.n_chunks, idx.d)]
    for i, ref in enumerate(idx.refs):
        encoded = ref.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(idx.matrix[i].astype("<f8").tobytes())
    return b"".join(parts)


def _dense_from_payload(payload: bytes, name: str) -> DenseIndex:
    try:
        n, d = struct.unpack_from("<II", payload)
        # minimum plausible size, guards the allocation below against bogus headers
        if 8 + n * (2 + 8 * d) > len(payload):
            raise ValueError("size header inconsistent with payload length")
        offset = 8
        refs: list[str] = []
        rows = np.zeros((n, d), dtype=np.float64)
        for i in range(n):
            (ref_len,) = struct.unpack_from("<H", payload, offset)
            offset += 2
            refs.append(payload[offset : offset + ref_len].decode("utf-8"))
            offset += ref_len
            rows[i] = np.frombuffer(payload, dtype="<f8", count=d, offset=offset)
            offset += 8 * d
        if offset != len(payload):
            raise ValueError("trailing bytes")
        return DenseIndex(refs=refs, matrix=rows, d=d)
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise CorruptIndexError(f"{name}: malformed dense payload: {exc}") from exc


def save_indices(bundle: IndexBundle, idx_dir: str | Path) -> None:
    """Write sparse.idx, dense.idx, chunks.idx and meta into a directory."""
    directory = Path(idx_dir)
    directory.mkdir(parents=True, exist_ok=True)
    _write_frame(directory / SPARSE_FILE, KIND_SPARSE, _sparse_payload(bundle.sparse))
    _write_frame(directory / DENSE_FILE, KIND_DENSE, _dense_payload(bundle.dense))
    _write_frame(directory / CHUNKS_FILE, KIND_CHUNKS, _chunks_payload(bundle.chunks))
    meta = dict(bundle.meta)
    meta["format_version"] = FORMAT_VERSION
    (directory / META_FILE).write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_indices(idx_dir: str | Path) -> IndexBundle:
    """Load a directory written by :func:`save_indices`."""
    directory = Path(idx_dir)
    meta_path = directory / META_FILE
    if not meta_path.exists():
        raise MissingIndexFileError(f"missing index file: {meta_path}")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptIndexError(f"meta: malformed JSON: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise IndexVersionError(
            f"meta: format version {meta.get('format_version')}, expected {FORMAT_VERSION}"
        )
    sparse = _sparse_from_payload(_read_frame(directory / SPARSE_FILE, KIND_SPARSE), SPARSE_FILE)
    dense = _dense_from_payload(_read_frame(directory / DENSE_FILE, KIND_DENSE), DENSE_FILE)
    chunks = _chunks_from_payload(_read_frame(directory / CHUNKS_FILE, KIND_CHUNKS), CHUNKS_FILE)
    return IndexBundle(chunks=chunks, sparse=sparse, dense=dense, meta=meta)
