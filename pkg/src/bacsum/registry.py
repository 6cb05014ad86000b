"""Site device database and packet annotation.

The registry file is a JSON array; each element needs ``object_type`` (name or
numeric code), ``instance``, ``name`` and ``device_type``, and may carry
``ip`` and ``notes``.
"""

from __future__ import annotations

import dataclasses
import ipaddress
import json
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from bacsum.codec import tables
from bacsum.codec.types import DecodedPacket, ObjectRef
from bacsum.errors import DuplicateRecordError, ValidationError


@dataclass(frozen=True)
class DeviceRecord:
    key: ObjectRef
    name: str
    device_type: str
    ip: str | None = None
    notes: str | None = None


@dataclass(frozen=True)
class Registry:
    records: dict[ObjectRef, DeviceRecord] = field(default_factory=dict)
    source_path: str = "<memory>"

    def __len__(self) -> int:
        return len(self.records)

    def lookup(self, ref: ObjectRef) -> DeviceRecord | None:
        return self.records.get(ref)

    def lookup_ip(self, ip: str) -> DeviceRecord | None:
        # first record in file order wins when several objects share a host
        for record in self.records.values():
            if record.ip == ip:
                return record
        return None

    @classmethod
    def from_records(cls, records: Iterable[DeviceRecord], source_path: str = "<memory>") -> "Registry":
        index: dict[ObjectRef, DeviceRecord] = {}
        for record in records:
            if record.key in index:
                raise DuplicateRecordError(
                    f"duplicate device record {record.key}: {index[record.key].name!r} and {record.name!r}"
                )
            index[record.key] = record
        return cls(index, source_path)


def _require(item: dict[str, Any], key: str, kind: type | tuple[type, ...], where: str) -> Any:
    if key not in item:
        raise ValidationError(f"{where}.{key}: required field missing")
    value = item[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValidationError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def parse_record(item: Any, where: str = "[0]") -> DeviceRecord:
    if not isinstance(item, dict):
        raise ValidationError(f"{where}: expected an object")
    raw_type = _require(item, "object_type", (str, int), where)
    if isinstance(raw_type, int):
        type_code = raw_type
    else:
        type_code = tables.object_type_code(raw_type)
        if type_code is None:
            raise ValidationError(f"{where}.object_type: unknown object type {raw_type!r}")
    instance = _require(item, "instance", int, where)
    try:
        key = ObjectRef(type_code, instance)
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from None
    name = _require(item, "name", str, where)
    device_type = _require(item, "device_type", str, where)
    ip = item.get("ip")
    if ip is not None:
        if not isinstance(ip, str):
            raise ValidationError(f"{where}.ip: expected str")
        try:
            ip = str(ipaddress.IPv4Address(ip))
        except ValueError:
            raise ValidationError(f"{where}.ip: not an IPv4 address: {ip!r}") from None
    notes = item.get("notes")
    if notes is not None and not isinstance(notes, str):
        raise ValidationError(f"{where}.notes: expected str")
    return DeviceRecord(key, name, device_type, ip, notes)


def load_registry(path: str | Path) -> Registry:
    """Load and index a device registry file.

    :raises OSError: file unreadable.
    :raises ValidationError: schema violation, message carries the field path.
    :raises DuplicateRecordError: two records share (object_type, instance).
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise ValidationError(f"{path}: top level must be a JSON array")
    records = [parse_record(item, f"[{i}]") for i, item in enumerate(data)]
    return Registry.from_records(records, str(path))


def annotate(packet: DecodedPacket, registry: Registry, by_ip: bool = True) -> DecodedPacket:
    """Attach registry hits for the packet's object identifiers.

    Misses are silent. With ``by_ip`` a record whose ``ip`` matches the frame's
    source address becomes the packet's ``source_device``.
    """
    annotations = []
    seen = set()
    for ref in packet.apdu.object_refs:
        if ref in seen:
            continue
        seen.add(ref)
        record = registry.lookup(ref)
        if record is not None:
            annotations.append((ref, record))
    source = registry.lookup_ip(packet.frame.src_ip) if by_ip else None
    return dataclasses.replace(packet, annotations=tuple(annotations), source_device=source)
