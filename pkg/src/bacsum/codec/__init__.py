"""Capture reading, BACnet/IP decoding and packet-text rendering."""

from bacsum.codec.decode import decode_apdu, decode_npdu, decode_object_identifier, decode_packet
from bacsum.codec.pcap import BACNET_IP_PORT, CaptureStats, filter_bacnet, read_capture, scan_capture
from bacsum.codec.render import render_packet_text, render_query_text
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

__all__ = [
    "BACNET_IP_PORT",
    "ApduInfo",
    "CaptureStats",
    "DecodedPacket",
    "Element",
    "NpduInfo",
    "ObjectRef",
    "PduType",
    "RawFrame",
    "ServiceChoice",
    "decode_apdu",
    "decode_npdu",
    "decode_object_identifier",
    "decode_packet",
    "filter_bacnet",
    "read_capture",
    "render_packet_text",
    "render_query_text",
    "scan_capture",
]
