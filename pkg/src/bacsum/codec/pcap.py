"""Classic libpcap reader: Ethernet -> IPv4 -> UDP, nothing else."""

from __future__ import annotations

import ipaddress
import logging
import struct
from collections import Counter
from dataclasses import dataclass, field

from bacsum.codec.types import RawFrame
from bacsum.errors import TruncatedCaptureError, UnsupportedFormatError

log = logging.getLogger(__name__)

LINKTYPE_ETHERNET = 1
BACNET_IP_PORT = 47808
BVLC_TYPE_BACNET_IP = 0x81

_GLOBAL_HEADER_LEN = 24
_RECORD_HEADER_LEN = 16
_ETH_HEADER_LEN = 14
_ETHERTYPE_IPV4 = 0x0800
_ETHERTYPE_VLAN = 0x8100
_IPPROTO_UDP = 17

# magic as read little-endian -> (struct byte order, timestamp divisor to microseconds)
_MAGICS = {
    0xA1B2C3D4: ("<", 1),
    0xD4C3B2A1: (">", 1),
    0xA1B23C4D: ("<", 1000),
    0x4D3CB2A1: (">", 1000),
}


@dataclass
class CaptureStats:
    records: int = 0
    frames: int = 0
    skipped: Counter = field(default_factory=Counter)


def scan_capture(data: bytes) -> tuple[list[RawFrame], CaptureStats]:
    """Parse a classic pcap image, returning UDP frames plus skip counts by reason."""
    if len(data) < 4:
        raise UnsupportedFormatError("not a pcap file: shorter than the magic number")
    (magic,) = struct.unpack_from("<I", data, 0)
    if magic not in _MAGICS:
        raise UnsupportedFormatError(f"not a classic pcap file: magic 0x{magic:08X}")
    order, ts_div = _MAGICS[magic]
    if len(data) < _GLOBAL_HEADER_LEN:
        raise UnsupportedFormatError("pcap global header truncated")
    linktype = struct.unpack_from(order + "I", data, 20)[0] & 0x0FFFFFFF
    if linktype != LINKTYPE_ETHERNET:
        raise UnsupportedFormatError(f"unsupported link type {linktype} (only Ethernet)")

    stats = CaptureStats()
    frames: list[RawFrame] = []
    pos = _GLOBAL_HEADER_LEN
    record = 0
    while pos < len(data):
        if pos + _RECORD_HEADER_LEN > len(data):
            raise TruncatedCaptureError(record, "record header")
        ts_sec, ts_frac, incl_len, _orig_len = struct.unpack_from(order + "IIII", data, pos)
        pos += _RECORD_HEADER_LEN
        if pos + incl_len > len(data):
            raise TruncatedCaptureError(record, f"record data ({incl_len} bytes declared)")
        packet = data[pos:pos + incl_len]
        pos += incl_len
        stats.records += 1

        frame, reason = _parse_ethernet(record, ts_sec, ts_frac // ts_div, packet)
        if frame is None:
            stats.skipped[reason] += 1
        else:
            frames.append(frame)
            stats.frames += 1
        record += 1

    if stats.skipped:
        log.info("skipped %d non-UDP/IPv4 records: %s", sum(stats.skipped.values()), dict(stats.skipped))
    return frames, stats


def read_capture(data: bytes) -> list[RawFrame]:
    """One :class:`RawFrame` per Ethernet/IPv4/UDP record, in capture order."""
    return scan_capture(data)[0]


def _parse_ethernet(index: int, ts_sec: int, ts_usec: int, packet: bytes) -> tuple[RawFrame | None, str]:
    if len(packet) < _ETH_HEADER_LEN:
        return None, "short-ethernet"
    dst_mac, src_mac = packet[0:6], packet[6:12]
    (ethertype,) = struct.unpack_from("!H", packet, 12)
    offset = _ETH_HEADER_LEN
    if ethertype == _ETHERTYPE_VLAN:
        if len(packet) < offset + 4:
            return None, "short-vlan"
        (ethertype,) = struct.unpack_from("!H", packet, offset + 2)
        offset += 4
    if ethertype != _ETHERTYPE_IPV4:
        return None, "not-ipv4"

    ip = packet[offset:]
    if len(ip) < 20 or ip[0] >> 4 != 4:
        return None, "not-ipv4"
    ihl = (ip[0] & 0x0F) * 4
    total_len = struct.unpack_from("!H", ip, 2)[0]
    if ihl < 20 or len(ip) < ihl + 8:
        return None, "short-ipv4"
    if ip[9] != _IPPROTO_UDP:
        return None, "not-udp"
    frag = struct.unpack_from("!H", ip, 6)[0]
    if frag & 0x3FFF:
        # fragments other than a complete datagram cannot be decoded on their own
        return None, "ip-fragment"
    ip = ip[:max(total_len, ihl + 8)] if total_len else ip

    udp = ip[ihl:]
    src_port, dst_port, udp_len = struct.unpack_from("!HHH", udp, 0)
    end = min(udp_len, len(udp)) if udp_len >= 8 else len(udp)
    payload = bytes(udp[8:end])
    return RawFrame(
        index=index,
        ts_sec=ts_sec,
        ts_usec=ts_usec,
        src_mac=bytes(src_mac),
        dst_mac=bytes(dst_mac),
        src_ip=str(ipaddress.IPv4Address(bytes(ip[12:16]))),
        dst_ip=str(ipaddress.IPv4Address(bytes(ip[16:20]))),
        src_port=src_port,
        dst_port=dst_port,
        payload=payload,
    ), ""


def is_bacnet(frame: RawFrame, port: int = BACNET_IP_PORT) -> bool:
    return (
        port in (frame.src_port, frame.dst_port)
        and len(frame.payload) > 0
        and frame.payload[0] == BVLC_TYPE_BACNET_IP
    )


def filter_bacnet(frames: list[RawFrame], port: int = BACNET_IP_PORT) -> list[RawFrame]:
    """Keep frames on the BACnet/IP port whose payload starts with a BVLC header."""
    kept = [f for f in frames if is_bacnet(f, port)]
    if len(kept) != len(frames):
        log.info("dropped %d non-BACnet frames", len(frames) - len(kept))
    return kept
