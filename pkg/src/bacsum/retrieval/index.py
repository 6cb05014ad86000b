"""Exact flat vector index with cosine scoring and a binary file format.

File layout (all integers little-endian)::

    b"PSIX" | version u16 | dim u32 | count u64
    embedder id      u32 length + UTF-8
    build timestamp  u32 length + UTF-8 (ISO 8601)
    per entry:
        id 32 bytes | ordinal u64 | dim x f32
        chunk text   u32 length + UTF-8
        metadata     u32 length + UTF-8 JSON {source, section_path, char_span}
"""

from __future__ import annotations

import json
import math
import re
import struct
from collections.abc import Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from bacsum.errors import (
    ConfigurationError,
    CorruptIndexError,
    IncompatibleIndexError,
    PreconditionError,
    UndefinedSimilarityError,
)
from bacsum.retrieval.chunking import Chunk

MAGIC = b"PSIX"
_HEX_ID = re.compile(r"[0-9a-f]{64}")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RetrievalResult:
    chunk: Chunk
    score: float
    rank: int
    keyword_matches: int = 0


@dataclass
class VectorIndex:
    """Chunks and their vectors in insertion order.

    Vectors live in one float32 matrix; scores are computed in float64.
    """

    dim: int
    embedder_id: str = ""
    built_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    chunks: list[Chunk] = field(default_factory=list)
    vectors: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.vectors is None:
            self.vectors = np.zeros((0, self.dim), dtype=np.float32)

    def __len__(self) -> int:
        return len(self.chunks)

    def add(self, chunks: Sequence[Chunk], vectors: np.ndarray) -> None:
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[1] != self.dim:
            raise ConfigurationError(f"vectors of shape {vectors.shape} do not match index dimension {self.dim}")
        if len(chunks) != vectors.shape[0]:
            raise ValueError("one vector per chunk required")
        if not np.isfinite(vectors).all():
            raise ValueError("vectors must be finite")
        self.chunks.extend(chunks)
        self.vectors = np.vstack([self.vectors, vectors]) if len(self.vectors) else vectors.copy()


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ConfigurationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = math.sqrt(float(a @ a)), math.sqrt(float(b @ b))
    if na == 0 or nb == 0:
        raise UndefinedSimilarityError("cosine similarity is undefined for a zero vector")
    return max(-1.0, min(1.0, float(a @ b) / (na * nb)))


def scores(index: VectorIndex, query: np.ndarray) -> np.ndarray:
    """Cosine score of every entry; zero-norm entries score 0."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (index.dim,):
        raise ConfigurationError(f"query dimension {q.shape} does not match index dimension {index.dim}")
    qn = math.sqrt(float(q @ q))
    if qn == 0:
        raise UndefinedSimilarityError("query vector has zero norm")
    m = index.vectors.astype(np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", m, m))
    dots = m @ q
    out = np.zeros(len(m))
    nz = norms > 0
    out[nz] = dots[nz] / (qn * norms[nz])
    return np.clip(out, -1.0, 1.0)


def index_search(index: VectorIndex, query: np.ndarray, k: int = 3) -> list[RetrievalResult]:
    """Top-``k`` entries by descending cosine score; ties keep insertion order."""
    if k < 1:
        raise PreconditionError("k must be at least 1")
    if len(index) == 0:
        return []
    s = scores(index, query)
    # stable sort on -score keeps the earlier entry first among equal scores
    order = np.argsort(-s, kind="stable")[:k]
    return [RetrievalResult(index.chunks[i], float(s[i]), rank) for rank, i in enumerate(order, start=1)]


# -- persistence --------------------------------------------------------------


def _pack_str(value: str) -> bytes:
    data = value.encode("utf-8")
    return struct.pack("<I", len(data)) + data


def save_index(index: VectorIndex, path: str | Path) -> None:
    parts = [
        MAGIC,
        struct.pack("<HIQ", FORMAT_VERSION, index.dim, len(index)),
        _pack_str(index.embedder_id),
        _pack_str(index.built_at),
    ]
    vectors = index.vectors.astype("<f4", copy=False)
    for ordinal, chunk in enumerate(index.chunks):
        if not _HEX_ID.fullmatch(chunk.id):
            raise ValueError(f"chunk {ordinal}: id {chunk.id!r} is not a 64-digit hex sha256")
        meta = json.dumps(
            {"source": chunk.source, "section_path": list(chunk.section_path), "char_span": list(chunk.char_span)},
            sort_keys=True,
        )
        parts += [
            bytes.fromhex(chunk.id),
            struct.pack("<Q", ordinal),
            vectors[ordinal].tobytes(),
            _pack_str(chunk.text),
            _pack_str(meta),
        ]
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptIndexError(f"index file truncated at byte {self.pos} (needed {n} more)")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptIndexError(f"invalid UTF-8 in index file: {exc}") from None


def load_index(path: str | Path) -> VectorIndex:
    r = _Reader(Path(path).read_bytes())
    if r.data[:4] != MAGIC:
        raise IncompatibleIndexError(f"{path}: not an index file (bad magic)")
    r.pos = 4
    version, dim, count = r.unpack("<HIQ")
    if version != FORMAT_VERSION:
        raise IncompatibleIndexError(f"{path}: index format version {version}, expected {FORMAT_VERSION}")
    embedder_id = r.string()
    built_at = r.string()
    vec_bytes = 4 * dim
    # every entry needs at least id + ordinal + vector + two length prefixes
    if count * (32 + 8 + vec_bytes + 8) > len(r.data) - r.pos:
        raise CorruptIndexError(f"{path}: header declares {count} entries but the file is too short")
    vectors = np.empty((count, dim), dtype=np.float32)
    chunks = []
    for i in range(count):
        chunk_hash = r.take(32).hex()
        (ordinal,) = r.unpack("<Q")
        if ordinal != i:
            raise CorruptIndexError(f"{path}: entry {i} has ordinal {ordinal}")
        vectors[i] = np.frombuffer(r.take(vec_bytes), dtype="<f4")
        text = r.string()
        try:
            meta = json.loads(r.string())
            chunk = Chunk(
                chunk_hash, text, meta["source"], tuple(meta["section_path"]), tuple(meta["char_span"])
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptIndexError(f"{path}: bad metadata for entry {i}: {exc}") from None
        chunks.append(chunk)
    if r.pos != len(r.data):
        raise CorruptIndexError(f"{path}: {len(r.data) - r.pos} trailing bytes")
    return VectorIndex(dim=dim, embedder_id=embedder_id, built_at=built_at, chunks=chunks, vectors=vectors)
