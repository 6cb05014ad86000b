"""Immutable records produced by the capture reader and the BACnet decoder."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from bacsum.codec import tables

if TYPE_CHECKING:
    from bacsum.registry import DeviceRecord

MAX_OBJECT_TYPE = 1023
MAX_INSTANCE = 4194302


@dataclass(frozen=True)
class RawFrame:
    """One Ethernet/IPv4/UDP record lifted out of a capture."""

    index: int
    ts_sec: int
    ts_usec: int
    src_mac: bytes
    dst_mac: bytes
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    payload: bytes

    @property
    def timestamp(self) -> float:
        return self.ts_sec + self.ts_usec / 1e6

    @property
    def src_oui(self) -> bytes:
        return self.src_mac[:3]

    @property
    def dst_oui(self) -> bytes:
        return self.dst_mac[:3]


@dataclass(frozen=True, order=True)
class ObjectRef:
    object_type: int
    instance: int

    def __post_init__(self) -> None:
        if not 0 <= self.object_type <= MAX_OBJECT_TYPE:
            raise ValueError(f"object type {self.object_type} outside [0, {MAX_OBJECT_TYPE}]")
        # 4194303 is the wildcard instance; it appears on the wire, so accept it
        if not 0 <= self.instance <= MAX_INSTANCE + 1:
            raise ValueError(f"instance {self.instance} outside [0, {MAX_INSTANCE}]")

    @property
    def type_name(self) -> str:
        return tables.object_type_name(self.object_type)

    def encode(self) -> int:
        return (self.object_type << 22) | self.instance

    def __str__(self) -> str:
        return f"{self.type_name}, {self.instance}"


@dataclass(frozen=True)
class NpduInfo:
    version: int
    control: int
    dnet: int | None = None
    dadr: bytes | None = None
    snet: int | None = None
    sadr: bytes | None = None
    hop_count: int | None = None

    @property
    def expects_reply(self) -> bool:
        return bool(self.control & 0x04)

    @property
    def priority(self) -> int:
        return self.control & 0x03


class PduType(enum.IntEnum):
    CONFIRMED_REQUEST = 0
    UNCONFIRMED_REQUEST = 1
    SIMPLE_ACK = 2
    COMPLEX_ACK = 3
    SEGMENT_ACK = 4
    ERROR = 5
    REJECT = 6
    ABORT = 7

    @property
    def label(self) -> str:
        return _PDU_LABELS[self]

    @property
    def confirmed_service(self) -> bool:
        """True when the service choice indexes the confirmed-service table."""
        return self is not PduType.UNCONFIRMED_REQUEST


_PDU_LABELS = {
    PduType.CONFIRMED_REQUEST: "Confirmed-REQ",
    PduType.UNCONFIRMED_REQUEST: "Unconfirmed-REQ",
    PduType.SIMPLE_ACK: "Simple-ACK",
    PduType.COMPLEX_ACK: "Complex-ACK",
    PduType.SEGMENT_ACK: "Segment-ACK",
    PduType.ERROR: "Error",
    PduType.REJECT: "Reject",
    PduType.ABORT: "Abort",
}


@dataclass(frozen=True)
class ServiceChoice:
    name: str
    code: int

    def __str__(self) -> str:
        return f"{self.name} ({self.code})"


@dataclass(frozen=True)
class Element:
    """One decoded APDU parameter.

    ``kind`` is one of ``object``, ``property``, ``value``, ``field``,
    ``error-class``, ``error-code`` or ``reason``. ``value`` holds the Python
    value (an :class:`ObjectRef` for objects, an int code for enumerations,
    ``None`` for BACnet NULL, ``bytes`` for tags rendered as hex).
    """

    kind: str
    label: str
    type_name: str
    value: Any
    name: str | None = None
    depth: int = 0


@dataclass(frozen=True)
class ApduInfo:
    pdu_type: PduType
    service_choice: ServiceChoice | None
    invoke_id: int | None
    elements: tuple[Element, ...]
    raw: bytes
    undecoded: bytes = b""
    flags: tuple[str, ...] = ()

    @property
    def object_refs(self) -> list[ObjectRef]:
        return [e.value for e in self.elements if e.kind == "object"]

    @property
    def segmented(self) -> bool:
        return "segmented" in self.flags


@dataclass(frozen=True)
class DecodedPacket:
    frame: RawFrame
    npdu: NpduInfo
    apdu: ApduInfo
    annotations: tuple[tuple[ObjectRef, DeviceRecord], ...] = field(default=())
    source_device: DeviceRecord | None = None

    def annotation_for(self, ref: ObjectRef) -> DeviceRecord | None:
        for key, record in self.annotations:
            if key == ref:
                return record
        return None
