import sys
from pathlib import Path

import pytest

from bacsum.codec.types import RawFrame

FIXTURES = Path(__file__).resolve().parent / "fixtures"
sys.path.insert(0, str(FIXTURES))


def bacnet_frame(payload: bytes, index: int = 1, src_ip="192.168.10.5", dst_ip="192.168.10.50") -> RawFrame:
    return RawFrame(
        index=index, ts_sec=0, ts_usec=0,
        src_mac=bytes.fromhex("001b210a0b0c"), dst_mac=bytes.fromhex("0050c2112233"),
        src_ip=src_ip, dst_ip=dst_ip, src_port=47808, dst_port=47808, payload=payload,
    )


def bvlc(npdu_apdu: bytes, function: int = 0x0A) -> bytes:
    return bytes([0x81, function]) + (len(npdu_apdu) + 4).to_bytes(2, "big") + npdu_apdu


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES
