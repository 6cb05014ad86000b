"""Service knowledge base: one short summary per BACnet service.

Entries are keyed by normalized service name and by (pdu_class, code). Error
PDUs resolve to the entry of the service that failed, with a note appended.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from bacsum.codec.types import DecodedPacket, PduType
from bacsum.errors import DuplicateEntryError, ValidationError

BUILTIN = "builtin"
PDU_CLASSES = ("confirmed", "unconfirmed")
ERROR_NOTE = "This packet reports that a {name} request failed."


@dataclass(frozen=True)
class ServiceEntry:
    service_name: str
    service_code: int
    pdu_class: str
    summary: str


def normalize_name(name: str) -> str:
    return name.casefold().replace("-", "").replace("_", "")


@dataclass(frozen=True)
class ServiceKB:
    entries: tuple[ServiceEntry, ...] = ()
    by_name: dict[str, ServiceEntry] = field(default_factory=dict)
    by_code: dict[tuple[str, int], ServiceEntry] = field(default_factory=dict)
    source_path: str = "<memory>"

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_entries(cls, entries: list[ServiceEntry], source_path: str = "<memory>") -> "ServiceKB":
        by_name: dict[str, ServiceEntry] = {}
        by_code: dict[tuple[str, int], ServiceEntry] = {}
        for entry in entries:
            key = normalize_name(entry.service_name)
            if key in by_name:
                raise DuplicateEntryError(f"duplicate service name {entry.service_name!r}")
            code_key = (entry.pdu_class, entry.service_code)
            if code_key in by_code:
                raise DuplicateEntryError(
                    f"duplicate {entry.pdu_class} service code {entry.service_code}: "
                    f"{by_code[code_key].service_name!r} and {entry.service_name!r}"
                )
            by_name[key] = entry
            by_code[code_key] = entry
        return cls(tuple(entries), by_name, by_code, source_path)


def _parse_entry(item: object, where: str) -> ServiceEntry:
    if not isinstance(item, dict):
        raise ValidationError(f"{where}: expected an object")
    for key, kind in (("service_name", str), ("service_code", int), ("pdu_class", str), ("summary", str)):
        if key not in item:
            raise ValidationError(f"{where}.{key}: required field missing")
        if not isinstance(item[key], kind) or isinstance(item[key], bool):
            raise ValidationError(f"{where}.{key}: expected {kind.__name__}")
    if item["pdu_class"] not in PDU_CLASSES:
        raise ValidationError(f"{where}.pdu_class: must be one of {PDU_CLASSES}")
    if not item["summary"].strip():
        raise ValidationError(f"{where}.summary: must not be empty")
    if not item["service_name"].strip():
        raise ValidationError(f"{where}.service_name: must not be empty")
    return ServiceEntry(item["service_name"], item["service_code"], item["pdu_class"], item["summary"].strip())


def load_service_kb(path: str | Path = BUILTIN) -> ServiceKB:
    """Load a KB file; ``"builtin"`` selects the summaries shipped with the package."""
    if str(path) == BUILTIN:
        text = resources.files("bacsum").joinpath("data/services.json").read_text("utf-8")
        source = "builtin:services.json"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise ValidationError(f"{source}: top level must be a JSON array")
    return ServiceKB.from_entries([_parse_entry(item, f"[{i}]") for i, item in enumerate(data)], source)


def lookup_service(kb: ServiceKB, packet: DecodedPacket) -> ServiceEntry | None:
    """Entry for the packet's service choice, or None when there is nothing to look up."""
    choice = packet.apdu.service_choice
    if choice is None:
        return None
    pdu_class = "confirmed" if packet.apdu.pdu_type.confirmed_service else "unconfirmed"
    entry = kb.by_code.get((pdu_class, choice.code))
    if entry is None and choice.name != "unknown":
        entry = kb.by_name.get(normalize_name(choice.name))
    if entry is None:
        return None
    if packet.apdu.pdu_type is PduType.ERROR:
        note = ERROR_NOTE.format(name=entry.service_name)
        entry = dataclasses.replace(entry, summary=f"{entry.summary} {note}")
    return entry
