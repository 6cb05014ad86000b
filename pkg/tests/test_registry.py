import json

import pytest

from bacsum.codec import decode_packet
from bacsum.codec.types import ObjectRef
from bacsum.errors import DuplicateRecordError, ValidationError
from bacsum.registry import Registry, annotate, load_registry

from conftest import bacnet_frame, bvlc
from make_fixtures import WPM_SETPOINT

AC_100 = {"object_type": "analog-output", "instance": 28,
          "name": "AC-100 Server room temperature setting", "device_type": "AirConditioning"}


def _write(tmp_path, data):
    path = tmp_path / "registry.json"
    path.write_text(json.dumps(data))
    return path


def test_single_record(tmp_path):
    registry = load_registry(_write(tmp_path, [AC_100]))
    assert len(registry) == 1
    record = registry.lookup(ObjectRef(1, 28))
    assert (record.name, record.device_type) == ("AC-100 Server room temperature setting", "AirConditioning")


def test_empty_array(tmp_path):
    assert len(load_registry(_write(tmp_path, []))) == 0


def test_duplicate_names_both_entries(tmp_path):
    other = {**AC_100, "object_type": 1, "name": "second"}
    with pytest.raises(DuplicateRecordError, match="AC-100.*second"):
        load_registry(_write(tmp_path, [AC_100, other]))


@pytest.mark.parametrize("bad, path", [
    ({**AC_100, "instance": "28"}, r"\[1\]\.instance"),
    ({k: v for k, v in AC_100.items() if k != "name"}, r"\[1\]\.name"),
    ({**AC_100, "object_type": "toaster"}, r"\[1\]\.object_type"),
    ({**AC_100, "instance": 4194304}, r"\[1\]"),
    ({**AC_100, "ip": "300.1.1.1"}, r"\[1\]\.ip"),
])
def test_validation_paths(tmp_path, bad, path):
    ok = {**AC_100, "instance": 29}
    with pytest.raises(ValidationError, match=path):
        load_registry(_write(tmp_path, [ok, bad]))


def test_not_an_array(tmp_path):
    with pytest.raises(ValidationError):
        load_registry(_write(tmp_path, {"a": 1}))


def test_unreadable_file(tmp_path):
    with pytest.raises(OSError):
        load_registry(tmp_path / "missing.json")


def test_annotate_hit_and_miss(fixtures):
    packet = decode_packet(bacnet_frame(bvlc(WPM_SETPOINT)))
    annotated = annotate(packet, load_registry(fixtures / "registry.json"))
    assert [(ref, rec.name) for ref, rec in annotated.annotations] == [
        (ObjectRef(1, 28), "AC-100 Server room temperature setting")]
    assert annotate(packet, Registry()).annotations == ()
    assert packet.annotations == ()  # input untouched


def test_two_refs_one_hit(fixtures):
    # I-Have from device 999 (not registered) about analog-input 3 (registered)
    payload = bytes.fromhex("0100" "1001" "c4020003e7" "c400000003" "750400414855")
    packet = decode_packet(bacnet_frame(bvlc(payload)))
    assert len(packet.apdu.object_refs) == 2
    annotated = annotate(packet, load_registry(fixtures / "registry.json"))
    assert len(annotated.annotations) == 1


def test_source_device_by_ip(fixtures):
    registry = load_registry(fixtures / "registry.json")
    packet = decode_packet(bacnet_frame(bvlc(WPM_SETPOINT), src_ip="192.168.10.50"))
    assert annotate(packet, registry).source_device.name == "Room controller RC-7"
    assert annotate(packet, registry, by_ip=False).source_device is None
