"""BVLC / NPDU / APDU decoding for BACnet/IP payloads.

Every read is bounds-checked; anything that does not parse surfaces as a
:class:`~bacsum.errors.DecodeError` subclass. Tagged APDU parameters decode
best-effort: the decodable prefix becomes :class:`Element` values and the
rest is kept verbatim in ``ApduInfo.undecoded``.
"""

from __future__ import annotations

import struct

from bacsum.codec import schemas, tables
from bacsum.codec.schemas import Field, Layout
from bacsum.codec.types import (
    ApduInfo,
    DecodedPacket,
    Element,
    NpduInfo,
    ObjectRef,
    PduType,
    RawFrame,
    ServiceChoice,
)
from bacsum.errors import (
    DecodeError,
    MalformedApduError,
    MalformedBvlcError,
    MalformedNpduError,
    NoApduError,
    UnsupportedVersionError,
)

BVLC_FUNCTIONS = {
    0x00: "BVLC-Result",
    0x01: "Write-Broadcast-Distribution-Table",
    0x02: "Read-Broadcast-Distribution-Table",
    0x03: "Read-Broadcast-Distribution-Table-Ack",
    0x04: "Forwarded-NPDU",
    0x05: "Register-Foreign-Device",
    0x06: "Read-Foreign-Device-Table",
    0x07: "Read-Foreign-Device-Table-Ack",
    0x08: "Delete-Foreign-Device-Table-Entry",
    0x09: "Distribute-Broadcast-To-Network",
    0x0A: "Original-Unicast-NPDU",
    0x0B: "Original-Broadcast-NPDU",
    0x0C: "Secure-BVLL",
}
_NPDU_OFFSET = {0x09: 4, 0x0A: 4, 0x0B: 4, 0x04: 10}

APP_TYPES = {
    0: "null",
    1: "boolean",
    2: "unsigned",
    3: "signed",
    4: "real",
    5: "double",
    6: "octet-string",
    7: "character-string",
    8: "bit-string",
    9: "enumerated",
    10: "date",
    11: "time",
    12: "object-identifier",
}

# enumerated property values that have a name table
_PROPERTY_ENUMS = {
    "object-type": "object-type",
    "units": "engineering-units",
    "event-state": "event-state",
    "reliability": "reliability",
    "segmentation-supported": "segmentation",
    "present-value": "binary-pv",
    "relinquish-default": "binary-pv",
}

_OPEN, _CLOSE, _PRIMITIVE = "open", "close", "primitive"


class TagError(MalformedApduError):
    pass


def decode_object_identifier(encoded: int) -> ObjectRef:
    """Split a 32-bit object identifier into (type, instance)."""
    return ObjectRef((encoded >> 22) & 0x3FF, encoded & 0x3FFFFF)


def decode_packet(frame: RawFrame) -> DecodedPacket:
    payload = frame.payload
    npdu_start = _decode_bvlc(payload)
    npdu, apdu_start = decode_npdu(payload, npdu_start)
    return DecodedPacket(frame=frame, npdu=npdu, apdu=decode_apdu(payload[apdu_start:]))


def _decode_bvlc(payload: bytes) -> int:
    if len(payload) < 4:
        raise MalformedBvlcError(f"BVLC header needs 4 bytes, got {len(payload)}")
    if payload[0] != 0x81:
        raise MalformedBvlcError(f"BVLC type 0x{payload[0]:02X} is not BACnet/IP (0x81)")
    function = payload[1]
    (length,) = struct.unpack_from("!H", payload, 2)
    if length != len(payload):
        raise MalformedBvlcError(f"BVLC length {length} does not match payload length {len(payload)}")
    if function not in _NPDU_OFFSET:
        name = BVLC_FUNCTIONS.get(function, f"0x{function:02X}")
        raise NoApduError(f"BVLC function {name} carries no NPDU")
    start = _NPDU_OFFSET[function]
    if len(payload) < start:
        raise MalformedBvlcError("Forwarded-NPDU shorter than its originating address")
    return start


def decode_npdu(buf: bytes, pos: int = 0) -> tuple[NpduInfo, int]:
    """Decode the network header at *pos*; returns the info and the APDU offset."""

    def need(n: int, what: str) -> None:
        if pos + n > len(buf):
            raise MalformedNpduError(f"NPDU truncated in {what}")

    need(1, "version")
    if buf[pos] != 1:
        raise UnsupportedVersionError(f"NPDU version {buf[pos]} (only version 1 is defined)")
    need(2, "control")
    control = buf[pos + 1]
    pos += 2
    dnet = dadr = snet = sadr = hop = None
    if control & 0x20:
        need(3, "destination specifier")
        dnet, dlen = struct.unpack_from("!HB", buf, pos)
        pos += 3
        need(dlen, "destination address")
        dadr = bytes(buf[pos:pos + dlen])
        pos += dlen
    if control & 0x08:
        need(3, "source specifier")
        snet, slen = struct.unpack_from("!HB", buf, pos)
        pos += 3
        need(slen, "source address")
        sadr = bytes(buf[pos:pos + slen])
        pos += slen
    if control & 0x20:
        need(1, "hop count")
        hop = buf[pos]
        pos += 1
    if control & 0x80:
        kind = f"0x{buf[pos]:02X}" if pos < len(buf) else "missing"
        raise NoApduError(f"network-layer message (type {kind}) carries no APDU")
    return NpduInfo(1, control, dnet, dadr, snet, sadr, hop), pos


def decode_apdu(raw: bytes) -> ApduInfo:
    if not raw:
        raise MalformedApduError("empty APDU")
    try:
        pdu_type = PduType(raw[0] >> 4)
    except ValueError:
        raise MalformedApduError(f"unknown APDU type {raw[0] >> 4}") from None

    def need(n: int) -> None:
        if len(raw) < n:
            raise MalformedApduError(f"{pdu_type.label} APDU needs {n} header bytes, got {len(raw)}")

    segmented = False
    sequence = 0
    invoke_id: int | None = None
    service: int | None = None
    flags: list[str] = []
    elements: list[Element] = []

    if pdu_type is PduType.CONFIRMED_REQUEST:
        segmented = bool(raw[0] & 0x08)
        header = 6 if segmented else 4
        need(header)
        invoke_id = raw[2]
        sequence = raw[3] if segmented else 0
        service = raw[header - 1]
    elif pdu_type is PduType.UNCONFIRMED_REQUEST:
        header = 2
        need(header)
        service = raw[1]
    elif pdu_type is PduType.SIMPLE_ACK:
        header = 3
        need(header)
        invoke_id, service = raw[1], raw[2]
    elif pdu_type is PduType.COMPLEX_ACK:
        segmented = bool(raw[0] & 0x08)
        header = 5 if segmented else 3
        need(header)
        invoke_id = raw[1]
        sequence = raw[2] if segmented else 0
        service = raw[header - 1]
    elif pdu_type is PduType.SEGMENT_ACK:
        header = 4
        need(header)
        invoke_id = raw[1]
        elements = [
            Element("field", "Sequence Number", "unsigned", raw[2]),
            Element("field", "Actual Window Size", "unsigned", raw[3]),
        ]
    elif pdu_type is PduType.ERROR:
        header = 3
        need(header)
        invoke_id, service = raw[1], raw[2]
    else:
        header = 3
        need(header)
        invoke_id = raw[1]
        table = "reject-reason" if pdu_type is PduType.REJECT else "abort-reason"
        label = "Reject Reason" if pdu_type is PduType.REJECT else "Abort Reason"
        elements = [Element("reason", label, "enumerated", raw[2], tables.enum_name(table, raw[2]))]

    choice = None
    if service is not None:
        name = tables.service_name(pdu_type.confirmed_service, service) or "unknown"
        choice = ServiceChoice(name, service)

    undecoded = b""
    if segmented:
        flags.append("segmented")
    if segmented and sequence != 0:
        # later segments continue a tag stream that started elsewhere
        undecoded = bytes(raw[header:])
    elif header < len(raw):
        walker = _TagWalker(raw, header)
        try:
            walker.walk(schemas.layout_for(pdu_type, service), depth=0, closing=None)
        except DecodeError:
            # keep the decoded prefix; the flag tells renderers the parameters are incomplete
            flags.append("malformed")
        elements = walker.elements
        undecoded = bytes(raw[walker.good:])
    if undecoded:
        flags.append("undecoded-suffix")

    return ApduInfo(
        pdu_type=pdu_type,
        service_choice=choice,
        invoke_id=invoke_id,
        elements=tuple(elements),
        raw=bytes(raw),
        undecoded=undecoded,
        flags=tuple(flags),
    )


# -- tags ---------------------------------------------------------------------


def read_tag(buf: bytes, pos: int) -> tuple[int, bool, str, int, bytes, int]:
    """Read one tag at *pos*: (number, is_context, kind, lvt, data, next_pos)."""
    end = len(buf)
    if pos >= end:
        raise TagError("tag expected past end of APDU")
    octet = buf[pos]
    pos += 1
    number = octet >> 4
    context = bool(octet & 0x08)
    lvt = octet & 0x07
    if number == 15:
        if pos >= end:
            raise TagError("extended tag number truncated")
        number = buf[pos]
        pos += 1
    if context and lvt == 6:
        return number, True, _OPEN, lvt, b"", pos
    if context and lvt == 7:
        return number, True, _CLOSE, lvt, b"", pos
    if not context and number == 1:
        return number, False, _PRIMITIVE, lvt, b"", pos
    length = lvt
    if lvt == 5:
        if pos >= end:
            raise TagError("extended length truncated")
        length = buf[pos]
        pos += 1
        if length == 254:
            if pos + 2 > end:
                raise TagError("extended length truncated")
            (length,) = struct.unpack_from("!H", buf, pos)
            pos += 2
        elif length == 255:
            if pos + 4 > end:
                raise TagError("extended length truncated")
            (length,) = struct.unpack_from("!I", buf, pos)
            pos += 4
    if pos + length > end:
        raise TagError(f"tag data of {length} bytes runs past end of APDU")
    return number, context, _PRIMITIVE, lvt, bytes(buf[pos:pos + length]), pos + length


def decode_application(number: int, lvt: int, data: bytes) -> tuple[str, object]:
    """Decode an application-tagged primitive into (type name, value)."""
    type_name = APP_TYPES.get(number, f"application-tag-{number}")
    if number == 0:
        return type_name, None
    if number == 1:
        return type_name, bool(lvt)
    if number in (2, 9):
        return type_name, int.from_bytes(data, "big")
    if number == 3:
        return type_name, int.from_bytes(data, "big", signed=True)
    if number == 4:
        if len(data) != 4:
            raise TagError(f"real needs 4 bytes, got {len(data)}")
        return type_name, struct.unpack("!f", data)[0]
    if number == 7:
        return type_name, _decode_string(data)
    if number == 12:
        if len(data) != 4:
            raise TagError(f"object identifier needs 4 bytes, got {len(data)}")
        return type_name, decode_object_identifier(int.from_bytes(data, "big"))
    return type_name, data


def _decode_string(data: bytes) -> str:
    if not data:
        raise TagError("character string without a character set octet")
    charset, body = data[0], data[1:]
    codec = {0: "utf-8", 4: "utf-16-be", 5: "latin-1"}.get(charset, "latin-1")
    return body.decode(codec, errors="replace")


def _property_title(element: Element | None) -> str:
    if element is None:
        return "value"
    return element.name or f"property-{element.value}"


class _TagWalker:
    """Walks a tag stream against a :class:`Layout`, collecting elements."""

    def __init__(self, buf: bytes, start: int) -> None:
        self.buf = buf
        self.pos = start
        self.good = start
        self.elements: list[Element] = []
        self.last_property: Element | None = None

    def walk(self, layout: Layout, depth: int, closing: int | None, values: bool = False) -> None:
        slot = 0
        while self.pos < len(self.buf):
            number, context, kind, lvt, data, nxt = read_tag(self.buf, self.pos)
            if kind == _CLOSE:
                if closing is None or number != closing:
                    raise TagError(f"unexpected closing tag {number}")
                self.pos = nxt
                return
            self.pos = nxt
            if kind == _OPEN:
                field = layout.context.get(number)
                if field is not None and field.kind == "value":
                    self.walk(schemas.EMPTY, depth + 1, number, values=True)
                elif field is not None and field.children is not None:
                    self.walk(field.children, depth + 1, number)
                else:
                    self.walk(schemas.EMPTY, depth + 1, number, values=values)
                self.good = self.pos
                continue
            if context:
                element = self._context_element(number, data, layout.context.get(number), depth)
            else:
                field = layout.positional[slot] if slot < len(layout.positional) else None
                slot += 1
                element = self._application_element(number, lvt, data, field, depth, values)
            if element.kind == "property":
                self.last_property = element
            self.elements.append(element)
            self.good = self.pos
        if closing is not None:
            raise TagError(f"missing closing tag {closing}")

    def _context_element(self, number: int, data: bytes, field: Field | None, depth: int) -> Element:
        if field is None:
            if len(data) <= 4:
                return Element("field", f"Context Tag {number}", "unsigned", int.from_bytes(data, "big"), depth=depth)
            return Element("field", f"Context Tag {number}", "octet-string", data, depth=depth)
        kind = field.kind
        if kind == "object":
            if len(data) != 4:
                raise TagError(f"object identifier needs 4 bytes, got {len(data)}")
            ref = decode_object_identifier(int.from_bytes(data, "big"))
            return Element("object", field.label, "object-identifier", ref, depth=depth)
        if kind == "property":
            code = int.from_bytes(data, "big")
            return Element("property", field.label, "enumerated", code, tables.property_name(code), depth)
        if kind in ("unsigned", "enumerated"):
            code = int.from_bytes(data, "big")
            name = tables.enum_name(field.enum_table, code) if field.enum_table else None
            return Element("field", field.label, kind, code, name, depth)
        if kind == "boolean":
            if len(data) != 1:
                raise TagError("context boolean needs 1 byte")
            return Element("field", field.label, "boolean", bool(data[0]), depth=depth)
        if kind == "string":
            return Element("field", field.label, "character-string", _decode_string(data), depth=depth)
        if kind == "real":
            if len(data) != 4:
                raise TagError(f"real needs 4 bytes, got {len(data)}")
            return Element("field", field.label, "real", struct.unpack("!f", data)[0], depth=depth)
        return Element("field", field.label, "octet-string", data, depth=depth)

    def _application_element(
        self, number: int, lvt: int, data: bytes, field: Field | None, depth: int, values: bool
    ) -> Element:
        type_name, value = decode_application(number, lvt, data)
        if field is not None and field.kind in ("error-class", "error-code"):
            name = tables.enum_name(field.enum_table, value) if isinstance(value, int) else None
            return Element(field.kind, field.label, type_name, value, name, depth)
        if type_name == "object-identifier" and not values:
            return Element("object", field.label if field else "ObjectIdentifier", type_name, value, depth=depth)
        if values or field is None:
            label = _property_title(self.last_property) if values else "value"
            name = None
            if type_name == "enumerated" and label in _PROPERTY_ENUMS:
                name = tables.enum_name(_PROPERTY_ENUMS[label], value)
            return Element("value", label, type_name, value, name, depth)
        name = None
        if type_name == "enumerated" and field.enum_table:
            name = tables.enum_name(field.enum_table, value)
        return Element("field", field.label, type_name, value, name, depth)
