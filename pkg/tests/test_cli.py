import json
import shutil

import pytest

from bacsum import cli

from conftest import FIXTURES


def run(capsys, *argv):
    code = cli.main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


def test_decode_setpoint_write(capsys):
    code, out, err = run(capsys, "decode", FIXTURES / "wpm_setpoint.pcap")
    assert code == 0 and "writePropertyMultiple (16)" in out and err == ""


def test_decode_link_header(capsys):
    code, out, _ = run(capsys, "decode", FIXTURES / "wpm_setpoint.pcap", "--link-header")
    assert code == 0 and "OUI 00:1b:21" in out


def test_decode_empty(capsys):
    assert run(capsys, "decode", FIXTURES / "empty.pcap")[:2] == (0, "Packet:\n")


def test_decode_not_a_pcap(capsys, tmp_path):
    (tmp_path / "x.txt").write_text("hello world, not a capture")
    code, out, err = run(capsys, "decode", tmp_path / "x.txt")
    assert code == 2 and out == ""
    assert err.startswith("bacsum: read_capture: UnsupportedFormatError")


def test_decode_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "decode", tmp_path / "missing.pcap")
    assert code == 2 and "read_capture" in err


def test_usage_error(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys)[0] == 1


def test_kb_build(capsys, tmp_path):
    code, out, _ = run(capsys, "kb-build", FIXTURES / "corpus", "--out", tmp_path / "i.psix")
    assert code == 0
    assert out.splitlines()[1:] == ["dimension: 384", f"index: {tmp_path / 'i.psix'}"]
    assert (tmp_path / "i.psix").exists()


def test_kb_build_empty_dir(capsys, tmp_path):
    (tmp_path / "empty").mkdir()
    code, _, err = run(capsys, "kb-build", tmp_path / "empty", "--out", tmp_path / "i.psix")
    assert code == 1 and "no corpus" in err


def test_kb_build_needs_output(capsys):
    code, _, err = run(capsys, "kb-build", FIXTURES / "corpus")
    assert code == 1 and "--out" in err


def test_kb_build_provider_failure(capsys, tmp_path):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"embedding": {"kind": "http", "url": "http://127.0.0.1:9/embed", "dim": 8,
                                                "retries": 0, "timeout": 2}}))
    code, _, err = run(capsys, "kb-build", FIXTURES / "corpus", "--config", config, "--out", tmp_path / "i.psix")
    assert code == 3
    assert "kb_build: EmbedError: objects.md, chunk 0:" in err


@pytest.fixture
def workdir(tmp_path, capsys):
    for name in ("synthetic19.pcap", "config.json", "registry.json"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    assert cli.main(["kb-build", str(FIXTURES / "corpus"), "--config", str(tmp_path / "config.json")]) == 0
    capsys.readouterr()
    return tmp_path


def test_explain_writes_summary_and_audit(capsys, workdir):
    code, out, err = run(capsys, "explain", workdir / "synthetic19.pcap", "--config", workdir / "config.json", "--stub-llm")
    assert code == 0 and out.strip() and err == ""
    audit = json.loads((workdir / "synthetic19.pcap.audit.json").read_text())
    assert audit["schema"] == "bacsum.audit/1" and audit["summary"]["text"] == out.strip()


def test_explain_m4_without_index_is_config_error(capsys, workdir, tmp_path):
    config = tmp_path / "noindex.json"
    config.write_text(json.dumps({"service_kb_path": "builtin"}))
    code, out, err = run(capsys, "explain", workdir / "synthetic19.pcap", "--config", config, "--stub-llm")
    assert code == 1 and out == ""
    assert err.startswith("bacsum: config: ConfigurationError: mode m4 needs index_path")


def test_explain_unreachable_llm(capsys, workdir):
    data = json.loads((workdir / "config.json").read_text())
    data["llm"] = {"endpoint": "http://127.0.0.1:9/v1/chat/completions", "retries": 0, "timeout": 2}
    (workdir / "config.json").write_text(json.dumps(data))
    code, out, err = run(capsys, "explain", workdir / "synthetic19.pcap", "--config", workdir / "config.json",
                         "--out", workdir / "a.json")
    assert code == 3 and out == ""
    assert err.startswith("bacsum: summarize: LlmUnavailableError")
    audit = json.loads((workdir / "a.json").read_text())
    assert audit["failed_stage"] == "summarize" and audit["bundle"]["items"]


def test_eval_single_method(capsys, tmp_path):
    (tmp_path / "r.csv").write_text("packet_file_id,method,rater_id,ca,ci\np1,m2,r1,5,4\np2,m2,r1,4,4\n")
    code, out, _ = run(capsys, "eval", tmp_path / "r.csv")
    assert code == 0 and len(out.splitlines()) == 2


def test_eval_malformed(capsys, tmp_path):
    (tmp_path / "r.csv").write_text("packet_file_id,method,rater_id,ca,ci\np1,m2,r1,9,4\n")
    code, _, err = run(capsys, "eval", tmp_path / "r.csv")
    assert code == 2 and "row 2" in err
