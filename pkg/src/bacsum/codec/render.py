"""Plain-text rendering of decoded packets.

The layout is the "formatted packet file" the rest of the pipeline consumes::

    Packet:
    Frame 1
      apdu_type :Confirmed-REQ
      apdu :
        Service Choice: writePropertyMultiple (16)
        ObjectIdentifier: analog-output, 28, Name :..., Type :...
        ...
"""

from __future__ import annotations

from collections.abc import Sequence

from bacsum.codec.types import DecodedPacket, Element, ObjectRef

INDENT = "    "

_TYPE_TITLES = {
    "unsigned": "Unsigned",
    "signed": "Signed",
    "enumerated": "Enumerated",
    "boolean": "Boolean",
    "real": "Real",
    "character-string": "Character String",
    "object-identifier": "Object Identifier",
}


def format_number(value: float) -> str:
    if value != value or value in (float("inf"), float("-inf")):
        return str(value)
    if float(value).is_integer():
        return str(int(value))
    # single-precision reals carry ~7 significant digits
    return f"{value:.7g}"


def format_value(element: Element) -> str:
    value = element.value
    if value is None:
        return "NULL"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, ObjectRef):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, bytes):
        return "0x" + value.hex() if value else "(empty)"
    if element.name is not None:
        return f"{element.name} ({value})"
    return str(value)


def _title(kebab: str) -> str:
    return " ".join(part.capitalize() for part in kebab.split("-"))


def render_element(element: Element, packet: DecodedPacket | None = None) -> str:
    kind = element.kind
    if kind == "object":
        line = f"{element.label}: {element.value}"
        record = packet.annotation_for(element.value) if packet is not None else None
        if record is not None:
            line += f", Name :{record.name}, Type :{record.device_type}"
        return line
    if kind == "property":
        name = element.name or "unknown"
        return f"{element.label}: {name} ({element.value})"
    if kind == "value":
        if element.value is None:
            return f"{element.label}: NULL"
        return f"{_title(element.label)} ({element.type_name}): {format_value(element)}"
    if kind in ("error-class", "error-code", "reason"):
        if element.name is not None:
            return f"{element.label}: {element.name} ({element.value})"
        return f"{element.label}: unknown ({element.value})"
    type_title = _TYPE_TITLES.get(element.type_name, element.type_name)
    return f"{element.label}: ({type_title}) {format_value(element)}"


def render_apdu_lines(packet: DecodedPacket) -> list[str]:
    """The APDU body lines (no indentation) for one packet."""
    apdu = packet.apdu
    lines = []
    if apdu.service_choice is not None:
        lines.append(f"Service Choice: {apdu.service_choice}")
    lines.extend(render_element(e, packet) for e in apdu.elements)
    if apdu.segmented:
        lines.append("Segmented: true (parameters partially decoded)")
    if "malformed" in apdu.flags:
        lines.append("Malformed: parameters truncated or invalid")
    if apdu.undecoded:
        lines.append(f"Undecoded ({len(apdu.undecoded)} bytes): 0x{apdu.undecoded.hex()}")
    return lines


def render_query_text(packet: DecodedPacket) -> str:
    """APDU portion of the formatted text, used as the retrieval query."""
    return "\n".join(render_apdu_lines(packet))


def _oui(mac: bytes) -> str:
    return ":".join(f"{b:02x}" for b in mac[:3])


def render_packet_text(packets: Sequence[DecodedPacket], link_header: bool = False) -> str:
    """Render decoded packets as formatted packet text (LF line endings).

    ``link_header`` adds an address line per frame (IPs, ports and OUIs).
    """
    lines = ["Packet:"]
    for number, packet in enumerate(packets, start=1):
        lines.append(f"Frame {number}")
        if link_header:
            f = packet.frame
            lines.append(
                f"  src :{f.src_ip}:{f.src_port} (OUI {_oui(f.src_mac)}), "
                f"dst :{f.dst_ip}:{f.dst_port} (OUI {_oui(f.dst_mac)})"
            )
        if packet.source_device is not None:
            dev = packet.source_device
            lines.append(f"  source_device :Name :{dev.name}, Type :{dev.device_type}")
        lines.append(f"  apdu_type :{packet.apdu.pdu_type.label}")
        lines.append("  apdu :")
        lines.extend(INDENT + line for line in render_apdu_lines(packet))
    return "\n".join(lines) + "\n"
