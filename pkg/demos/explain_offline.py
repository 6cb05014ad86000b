"""
End-to-end explain run without a model server
=============================================

Runs the full pipeline on the 19-packet capture in each of the four modes
using the echo stub as the chat client, then compares what each mode put in
the context bundle.
"""

import json
import tempfile
from pathlib import Path

from bacsum import PipelineConfig, build_index, run_explain
from bacsum.retrieval import HashedBagOfWords, save_index
from bacsum.summarizer import EchoStubClient

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
capture = (FIXTURES / "synthetic19.pcap").read_bytes()

tmp = Path(tempfile.mkdtemp())
save_index(build_index(FIXTURES / "corpus", HashedBagOfWords(384)), tmp / "corpus.psix")

for mode in ("m1", "m2", "m3", "m4"):
    config = PipelineConfig(
        mode=mode,
        index_path=str(tmp / "corpus.psix"),
        service_kb_path="builtin",
        registry_path=str(FIXTURES / "registry.json"),
        budget=2000,
    )
    result = run_explain(capture, config, EchoStubClient(words=12))
    bundle = result.audit["bundle"]
    kinds = [i["kind"] for i in bundle["items"]]
    print(mode, {k: kinds.count(k) for k in sorted(set(kinds))}, "tokens", bundle["token_estimate"],
          "dropped", bundle["dropped"])
    print("   ", result.summary.text)

# the audit record is plain JSON
print(json.dumps({k: result.audit[k] for k in ("mode", "status", "timings")}, indent=2))
