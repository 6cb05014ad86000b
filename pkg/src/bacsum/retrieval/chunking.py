"""Heading-aware recursive chunker.

Documents are cut at markdown headings first; a section longer than
``max_chunk_chars`` is split at paragraph breaks, then sentence breaks, and
finally at a hard character limit where consecutive chunks overlap by
``overlap_chars``. Chunks are exact slices of the source, so their spans
cover the whole document.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

_HEADING = re.compile(r"^(#{1,6})[ \t]+(.+?)[ \t#]*$", re.MULTILINE)
_PARAGRAPH = re.compile(r"\n[ \t]*\n+")
_SENTENCE = re.compile(r"(?<=[.!?])[\"')\]]*\s+")


@dataclass(frozen=True)
class ChunkingConfig:
    max_chunk_chars: int = 1000
    overlap_chars: int = 150

    def __post_init__(self) -> None:
        if not self.max_chunk_chars > self.overlap_chars >= 0:
            raise ValueError("need max_chunk_chars > overlap_chars >= 0")


@dataclass(frozen=True)
class Chunk:
    id: str
    text: str
    source: str
    section_path: tuple[str, ...]
    char_span: tuple[int, int]


def chunk_id(source: str, span: tuple[int, int], text: str) -> str:
    h = hashlib.sha256()
    for part in (source, f"{span[0]}:{span[1]}", text):
        data = part.encode("utf-8")
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


def _sections(text: str) -> list[tuple[int, int, tuple[str, ...]]]:
    """(start, end, heading trail) per heading-delimited section."""
    bounds = []
    trail: list[tuple[int, str]] = []
    prev_start, prev_path = 0, ()
    for m in _HEADING.finditer(text):
        if m.start() > prev_start:
            bounds.append((prev_start, m.start(), prev_path))
        level = len(m.group(1))
        while trail and trail[-1][0] >= level:
            trail.pop()
        trail.append((level, m.group(2).strip()))
        prev_start, prev_path = m.start(), tuple(title for _, title in trail)
    if prev_start < len(text):
        bounds.append((prev_start, len(text), prev_path))

    # whitespace-only stretches (e.g. blank lines before the first heading) join the next section
    merged: list[tuple[int, int, tuple[str, ...]]] = []
    carry = None
    for start, end, path in bounds:
        if not text[start:end].strip():
            carry = start if carry is None else carry
            continue
        merged.append((carry if carry is not None else start, end, path))
        carry = None
    if carry is not None:
        if merged:
            s, _, p = merged[-1]
            merged[-1] = (s, len(text), p)
        else:
            merged.append((carry, len(text), ()))
    return merged


def _pieces(text: str, start: int, end: int, pattern: re.Pattern) -> list[tuple[int, int]]:
    """Split [start, end) after each separator match; pieces tile the range."""
    cuts = [m.end() for m in pattern.finditer(text, start, end) if start < m.end() < end]
    edges = [start, *cuts, end]
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def _hard_split(start: int, end: int, size: int, overlap: int) -> list[tuple[int, int]]:
    spans = []
    pos = start
    while True:
        stop = min(pos + size, end)
        spans.append((pos, stop))
        if stop == end:
            return spans
        pos = stop - overlap


def _split(text: str, start: int, end: int, cfg: ChunkingConfig, level: int) -> list[tuple[int, int]]:
    if end - start <= cfg.max_chunk_chars:
        return [(start, end)]
    separators = (_PARAGRAPH, _SENTENCE)
    if level >= len(separators):
        return _hard_split(start, end, cfg.max_chunk_chars, cfg.overlap_chars)
    pieces = _pieces(text, start, end, separators[level])
    if len(pieces) == 1:
        return _split(text, start, end, cfg, level + 1)

    spans: list[tuple[int, int]] = []
    cur_start = cur_end = None
    for a, b in pieces:
        if b - a > cfg.max_chunk_chars:
            if cur_start is not None:
                spans.append((cur_start, cur_end))
                cur_start = None
            spans.extend(_split(text, a, b, cfg, level + 1))
        elif cur_start is None:
            cur_start, cur_end = a, b
        elif b - cur_start <= cfg.max_chunk_chars:
            cur_end = b
        else:
            spans.append((cur_start, cur_end))
            cur_start, cur_end = a, b
    if cur_start is not None:
        spans.append((cur_start, cur_end))
    return spans


def chunk_document(text: str, config: ChunkingConfig | None = None, source: str = "document") -> list[Chunk]:
    cfg = config or ChunkingConfig()
    chunks = []
    for start, end, path in _sections(text):
        for a, b in _split(text, start, end, cfg, 0):
            body = text[a:b]
            if not body.strip():
                continue
            chunks.append(Chunk(chunk_id(source, (a, b), body), body, source, path, (a, b)))
    return chunks
