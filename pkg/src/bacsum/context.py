"""Per-packet context gathering, de-duplication and token budgeting."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from bacsum.codec.render import render_query_text
from bacsum.codec.types import DecodedPacket
from bacsum.errors import BacsumError, PreconditionError
from bacsum.retrieval.embedding import EmbeddingProvider, embed
from bacsum.retrieval.index import VectorIndex, index_search
from bacsum.retrieval.keywords import keyword_rerank
from bacsum.services import ServiceKB, lookup_service

KINDS = ("service", "retrieved", "device")
_KIND_RANK = {kind: rank for rank, kind in enumerate(KINDS)}


@dataclass(frozen=True)
class ContextItem:
    kind: str
    text: str
    packet_index: int
    source_id: str

    def __post_init__(self) -> None:
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown context kind {self.kind!r}")
        if not self.text.strip():
            raise ValueError("context item text must not be empty")

    @property
    def tokens(self) -> int:
        return estimate_tokens(self.text)

    def to_json(self) -> dict:
        return {"kind": self.kind, "text": self.text, "packet_index": self.packet_index, "source_id": self.source_id}


@dataclass(frozen=True)
class ContextBundle:
    items: tuple[ContextItem, ...]
    token_estimate: int
    dropped: int
    budget: int | None = None

    def to_json(self) -> dict:
        return {
            "items": [item.to_json() for item in self.items],
            "token_estimate": self.token_estimate,
            "dropped": self.dropped,
            "budget": self.budget,
        }


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text) / 4)


def normalize(text: str) -> str:
    return " ".join(text.split())


def _device_text(label: str, record) -> str:
    text = f"{label}: Name :{record.name}, Type :{record.device_type}"
    if record.notes:
        text += f". Notes: {record.notes}"
    return text


def gather_context(
    packets: Sequence[DecodedPacket],
    kb: ServiceKB | None,
    index: VectorIndex | None,
    provider: EmbeddingProvider | None,
    k: int = 3,
    kinds: Iterable[str] = KINDS,
) -> list[ContextItem]:
    """Context items per packet, in packet order: service, retrieved chunk, devices.

    ``kinds`` restricts which extractions run (a missing KB or empty index also
    skips its extraction). Errors from the embedding provider propagate with a
    ``packet_index`` attribute.
    """
    wanted = set(kinds)
    use_index = "retrieved" in wanted and index is not None and len(index) > 0
    if use_index and provider is None:
        raise PreconditionError("retrieval needs an embedding provider")
    items: list[ContextItem] = []
    for i, packet in enumerate(packets):
        if "service" in wanted and kb is not None:
            entry = lookup_service(kb, packet)
            if entry is not None:
                text = f"Service {entry.service_name} ({entry.pdu_class}, code {entry.service_code}): {entry.summary}"
                items.append(ContextItem("service", text, i, f"kb:{entry.pdu_class}:{entry.service_code}"))
        if use_index:
            query = render_query_text(packet)
            if query.strip():
                try:
                    vector = embed(provider, query)
                    hits = index_search(index, vector, k)
                except BacsumError as exc:
                    exc.packet_index = i
                    exc.args = (f"packet {i}: {exc}",)
                    raise
                if hits:
                    best = keyword_rerank(query, hits)
                    items.append(ContextItem("retrieved", best.chunk.text.strip(), i, f"chunk:{best.chunk.id}"))
        if "device" in wanted:
            if packet.source_device is not None:
                dev = packet.source_device
                items.append(ContextItem("device", _device_text(f"Source device {dev.ip}", dev), i, f"ip:{dev.ip}"))
            for ref, record in packet.annotations:
                items.append(ContextItem("device", _device_text(f"Device {ref}", record), i, f"object:{ref}"))
    return items


def dedupe(items: Sequence[ContextItem]) -> list[ContextItem]:
    """Drop items whose whitespace-normalized text repeats an earlier item's."""
    seen: set[str] = set()
    out = []
    for item in items:
        key = normalize(item.text)
        if key not in seen:
            seen.add(key)
            out.append(item)
    return out


def priority_order(items: Sequence[ContextItem]) -> list[ContextItem]:
    """Service items first, then retrieved, then device; packet order within a kind."""
    return [
        item for _, item in sorted(
            enumerate(items), key=lambda pair: (_KIND_RANK[pair[1].kind], pair[1].packet_index, pair[0])
        )
    ]


def enforce_budget(items: Sequence[ContextItem], budget: int) -> ContextBundle:
    """Greedily keep items in priority order while the token estimate fits ``budget``."""
    if budget <= 0:
        raise PreconditionError("budget must be positive")
    kept = []
    used = 0
    for item in priority_order(items):
        cost = item.tokens
        if used + cost <= budget:
            kept.append(item)
            used += cost
    return ContextBundle(tuple(kept), used, len(items) - len(kept), budget)
