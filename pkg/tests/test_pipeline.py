import json
import shutil

import pytest

from bacsum.errors import ConfigurationError, EmbedError
from bacsum.pipeline import (
    PipelineConfig,
    StageError,
    build_index,
    config_from_dict,
    decode_capture,
    load_config,
    run_explain,
)
from bacsum.retrieval.embedding import HashedBagOfWords
from bacsum.retrieval.index import load_index, save_index
from bacsum.services import load_service_kb
from bacsum.summarizer import EchoStubClient

from conftest import FIXTURES


def test_config_defaults_and_budget():
    config = PipelineConfig()
    assert config.port == 47808 and config.mode == "m4" and config.k == 3
    assert config.token_budget == int(32768 * 0.7)
    assert PipelineConfig(budget=100).token_budget == 100


def test_config_paths_resolve_against_file(tmp_path):
    shutil.copy(FIXTURES / "config.json", tmp_path / "config.json")
    config = load_config(tmp_path / "config.json", mode="m3")
    assert config.registry_path == str(tmp_path / "registry.json")
    assert config.service_kb_path == "builtin" and config.mode == "m3"
    assert config.chunking.max_chunk_chars == 600


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigurationError, match="colour"):
        config_from_dict({"colour": "red"})
    with pytest.raises(ConfigurationError):
        config_from_dict({"chunking": {"max_chunk_chars": 10, "overlap_chars": 20}})
    with pytest.raises(ConfigurationError):
        config_from_dict({"embedding": {"kind": "http"}})


def test_config_unreadable(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text("[1]")
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "bad.json")


def test_config_hash_is_stable():
    assert PipelineConfig().sha256() == PipelineConfig().sha256()
    assert PipelineConfig().sha256() != PipelineConfig(mode="m1").sha256()


@pytest.mark.parametrize("kwargs, match", [
    ({"mode": "m2"}, "index_path"),
    ({"mode": "m3"}, "service_kb_path"),
    ({"mode": "m9"}, "mode"),
    ({"mode": "m1", "budget": 0}, "budget"),
])
def test_config_validation(kwargs, match):
    with pytest.raises(ConfigurationError, match=match):
        PipelineConfig(**kwargs).validate()


def test_decode_capture_records_failures(tmp_path):
    from scapy.layers.inet import IP, UDP
    from scapy.layers.l2 import Ether
    from scapy.utils import wrpcap

    good = (FIXTURES / "wpm_setpoint.pcap").read_bytes()
    wrpcap(str(tmp_path / "x.pcap"), [Ether() / IP() / UDP(sport=47808, dport=47808) / b"\x81\x0a\x00\x09\x02\x00\x10\x08\x00"])
    outcome = decode_capture((tmp_path / "x.pcap").read_bytes())
    assert outcome.packets == [] and outcome.status[0]["status"] == "error"
    assert "UnsupportedVersionError" in outcome.status[0]["error"]
    assert decode_capture(good).status == [{"frame": 0, "status": "ok"}]


def test_build_index_sources(tmp_path):
    index = build_index(FIXTURES / "corpus", HashedBagOfWords(64))
    assert {c.source for c in index.chunks} == {"objects.md", "services.md"}
    save_index(index, tmp_path / "i.psix")
    assert load_index(tmp_path / "i.psix").chunks == index.chunks


def test_build_index_empty_dir(tmp_path):
    with pytest.raises(ConfigurationError, match="no corpus"):
        build_index(tmp_path, HashedBagOfWords(8))


def test_build_index_names_failing_document(tmp_path):
    (tmp_path / "a.md").write_text("fine text")
    (tmp_path / "b.md").write_text("breaks here")

    class Picky(HashedBagOfWords):
        def embed_batch(self, texts):
            if any("breaks" in t for t in texts):
                raise EmbedError("endpoint down")
            return super().embed_batch(texts)

    with pytest.raises(EmbedError, match="b.md, chunk 0: endpoint down"):
        build_index(tmp_path, Picky(8))


@pytest.fixture
def workdir(tmp_path):
    for name in ("synthetic19.pcap", "config.json", "registry.json"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    save_index(build_index(FIXTURES / "corpus", HashedBagOfWords(384)), tmp_path / "corpus.psix")
    return tmp_path


def test_explain_m4_one_service_item_per_resolvable_service(workdir):
    config = load_config(workdir / "config.json")
    capture = (workdir / "synthetic19.pcap").read_bytes()
    result = run_explain(capture, config, EchoStubClient())
    audit = result.audit
    assert audit["status"] == "ok" and audit["failed_stage"] is None
    assert len(audit["decode_status"]) == 19
    services = [i for i in audit["bundle"]["items"] if i["kind"] == "service"]
    kb = load_service_kb()
    from bacsum.codec import decode_packet, read_capture
    from bacsum.services import lookup_service
    expected = []
    for frame in read_capture(capture):
        entry = lookup_service(kb, decode_packet(frame))
        if entry is not None:
            text = f"Service {entry.service_name} ({entry.pdu_class}, code {entry.service_code}): {entry.summary}"
            if text not in expected:
                expected.append(text)
    assert [i["text"] for i in services] == expected
    assert set(audit["timings"]) == {"load", "decode", "annotate", "gather_context", "dedupe",
                                      "enforce_budget", "build_prompt", "summarize"}
    assert audit["input"]["sha256"] and audit["prompt_sha256"] and audit["config_sha256"] == config.sha256()


def test_explain_m1_prompt_has_no_context(workdir):
    config = load_config(workdir / "config.json", mode="m1")
    result = run_explain((workdir / "synthetic19.pcap").read_bytes(), config, EchoStubClient(words=2))
    assert result.audit["bundle"]["items"] == []
    assert result.summary.text == "Context: (none)"


def test_explain_missing_index_fails_before_network(workdir):
    client = EchoStubClient()
    config = PipelineConfig(mode="m4", service_kb_path="builtin")
    with pytest.raises(StageError) as info:
        run_explain((workdir / "synthetic19.pcap").read_bytes(), config, client)
    assert info.value.stage == "config" and isinstance(info.value.cause, ConfigurationError)
    assert client.calls == 0
    assert info.value.audit["failed_stage"] == "config" and info.value.audit["status"] == "failed"


def test_explain_dimension_mismatch(workdir):
    config = load_config(workdir / "config.json", embedding={"kind": "hashed", "dim": 16})
    with pytest.raises(StageError, match="dimension") as info:
        run_explain((workdir / "synthetic19.pcap").read_bytes(), config, EchoStubClient())
    assert info.value.stage == "load"


def test_explain_bad_capture(workdir):
    config = load_config(workdir / "config.json")
    with pytest.raises(StageError) as info:
        run_explain(b"not a capture at all", config, EchoStubClient())
    assert info.value.stage == "decode"
    assert info.value.audit["error"].startswith("UnsupportedFormatError")
    json.dumps(info.value.audit)
