"""Command-line entry point: ``bacsum decode | kb-build | explain | eval``.

Exit codes: 0 success, 1 usage or configuration, 2 input format, 3 external
service (embedding or chat endpoint).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from bacsum import evaluation
from bacsum.errors import BacsumError, ConfigurationError, EmbedError, LlmError
from bacsum.pipeline import (
    StageError,
    build_index,
    decode_capture,
    load_config,
    make_provider,
    run_explain,
)
from bacsum.codec import render_packet_text
from bacsum.retrieval.index import save_index
from bacsum.summarizer import EchoStubClient, HttpChatClient

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_SERVICE = 0, 1, 2, 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, (EmbedError, LlmError)):
        return EXIT_SERVICE
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    return EXIT_INPUT


def _fail(stage: str, exc: BaseException) -> int:
    print(f"bacsum: {stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
    return exit_code_for(exc)


def _config(args: argparse.Namespace):
    return load_config(args.config, mode=args.mode, port=args.port, budget=args.budget)


def cmd_decode(args: argparse.Namespace) -> int:
    stage = "config"
    try:
        config = _config(args)
        stage = "read_capture"
        data = Path(args.pcap).read_bytes()
        outcome = decode_capture(data, config.port)
    except (BacsumError, OSError) as exc:
        return _fail(stage, exc)
    for status in outcome.status:
        if status["status"] != "ok":
            print(f"bacsum: decode_packet: frame {status['frame']}: {status['error']}", file=sys.stderr)
    sys.stdout.write(render_packet_text(outcome.packets, link_header=args.link_header or config.link_header))
    return EXIT_OK


def cmd_kb_build(args: argparse.Namespace) -> int:
    stage = "config"
    try:
        config = _config(args)
        out = args.out or config.index_path
        if not out:
            raise ConfigurationError("no output path: pass --out or set index_path in the config")
        stage = "kb_build"
        index = build_index(args.corpus, make_provider(config.embedding), config.chunking)
        stage = "save_index"
        save_index(index, out)
    except (BacsumError, OSError) as exc:
        return _fail(stage, exc)
    print(f"chunks: {len(index)}")
    print(f"dimension: {index.dim}")
    print(f"index: {out}")
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    try:
        config = _config(args)
        config.validate()
        data = Path(args.pcap).read_bytes()
    except (BacsumError, OSError) as exc:
        return _fail("config", exc)
    client = EchoStubClient() if args.stub_llm else HttpChatClient()
    audit_path = Path(args.out) if args.out else Path(args.pcap).with_name(Path(args.pcap).name + ".audit.json")
    try:
        result = run_explain(data, config, client, input_name=str(args.pcap))
        audit = result.audit
        code = EXIT_OK
    except StageError as exc:
        audit = exc.audit
        code = _fail(exc.stage, exc.cause)
    audit_path.write_text(json.dumps(audit, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if code == EXIT_OK:
        sys.stdout.write(result.summary.text + "\n")
    return code


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        scores = evaluation.aggregate(evaluation.load_ratings(args.ratings))
    except (BacsumError, OSError) as exc:
        return _fail("eval", exc)
    sys.stdout.write(evaluation.render_table(scores))
    if args.out:
        Path(args.out).write_text(evaluation.render_json(scores), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="pipeline configuration (JSON)")
    common.add_argument("--mode", choices=["m1", "m2", "m3", "m4"], help="context mode")
    common.add_argument("--port", type=int, metavar="N", help="BACnet/IP UDP port (default 47808)")
    common.add_argument("--budget", type=int, metavar="N", help="context token budget")
    common.add_argument("--out", metavar="PATH", help="output file (index, audit record or JSON report)")
    common.add_argument("--stub-llm", action="store_true", help="use the offline echo stub instead of the chat endpoint")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bacsum", description="Summarize BACnet/IP packet captures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", parents=[common], help="print the formatted packet text of a capture")
    p.add_argument("pcap")
    p.add_argument("--link-header", action="store_true", help="include addresses, ports and OUIs per frame")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("kb-build", parents=[common], help="chunk and embed a corpus directory into an index")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_kb_build)

    p = sub.add_parser("explain", parents=[common], help="summarize a capture and write an audit record")
    p.add_argument("pcap")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("eval", parents=[common], help="aggregate CA/CI ratings per method")
    p.add_argument("ratings")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
