"""Run configuration, knowledge-base building and the end-to-end explain run."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
import uuid
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from bacsum.codec import decode_packet, filter_bacnet, render_packet_text, scan_capture
from bacsum.codec.pcap import BACNET_IP_PORT
from bacsum.codec.types import DecodedPacket
from bacsum.context import dedupe, enforce_budget, gather_context
from bacsum.errors import BacsumError, ConfigurationError, DecodeError, EmbedError
from bacsum.registry import Registry, annotate, load_registry
from bacsum.retrieval.chunking import ChunkingConfig, chunk_document
from bacsum.retrieval.embedding import EmbeddingProvider, HashedBagOfWords, HttpEmbeddingProvider
from bacsum.retrieval.index import VectorIndex, load_index
from bacsum.services import load_service_kb
from bacsum.summarizer import (
    MODE_KINDS,
    ChatClient,
    LlmConfig,
    Summary,
    build_prompt,
    load_template,
    summarize,
)

AUDIT_SCHEMA = "bacsum.audit/1"
CORPUS_SUFFIXES = (".md", ".markdown", ".txt")
DEFAULT_CONTEXT_WINDOW = 32768


@dataclass(frozen=True)
class EmbeddingConfig:
    kind: str = "hashed"
    dim: int = 384
    url: str | None = None
    model: str = "all-MiniLM-L12-v2"
    api_key_env: str | None = "BACSUM_EMBED_API_KEY"
    timeout: float = 30.0
    retries: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ("hashed", "http"):
            raise ValueError(f"embedding kind must be 'hashed' or 'http', got {self.kind!r}")
        if self.kind == "http" and not self.url:
            raise ValueError("http embedding provider needs a url")


@dataclass(frozen=True)
class PipelineConfig:
    port: int = BACNET_IP_PORT
    registry_path: str | None = None
    service_kb_path: str | None = None
    index_path: str | None = None
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    llm: LlmConfig = field(default_factory=LlmConfig)
    mode: str = "m4"
    k: int = 3
    context_window: int = DEFAULT_CONTEXT_WINDOW
    budget: int | None = None
    link_header: bool = False
    prompt_template: str | None = None

    @property
    def token_budget(self) -> int:
        return self.budget if self.budget is not None else int(self.context_window * 0.7)

    def validate(self) -> None:
        if self.mode not in MODE_KINDS:
            raise ConfigurationError(f"mode must be one of m1..m4, got {self.mode!r}")
        kinds = MODE_KINDS[self.mode]
        if "retrieved" in kinds and not self.index_path:
            raise ConfigurationError(f"mode {self.mode} needs index_path")
        if "service" in kinds and not self.service_kb_path:
            raise ConfigurationError(f"mode {self.mode} needs service_kb_path ('builtin' selects the shipped KB)")
        if self.token_budget <= 0:
            raise ConfigurationError("context token budget must be positive")
        if self.k < 1:
            raise ConfigurationError("k must be at least 1")
        if not 0 < self.port < 65536:
            raise ConfigurationError(f"invalid port {self.port}")

    def to_json(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def sha256(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_NESTED = {"chunking": ChunkingConfig, "embedding": EmbeddingConfig, "llm": LlmConfig}


def config_from_dict(data: dict[str, Any], base_dir: Path | None = None) -> PipelineConfig:
    """Build a config from parsed JSON; relative paths resolve against ``base_dir``."""
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = {}
    try:
        for key, value in data.items():
            if key in _NESTED:
                if not isinstance(value, dict):
                    raise ConfigurationError(f"{key} must be an object")
                kwargs[key] = _NESTED[key](**value)
            elif key in ("registry_path", "index_path", "service_kb_path", "prompt_template") and value:
                kwargs[key] = _resolve(value, base_dir)
            else:
                kwargs[key] = value
        return PipelineConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from None


def _resolve(value: str, base_dir: Path | None) -> str:
    if value == "builtin" or base_dir is None or Path(value).is_absolute():
        return value
    return str(base_dir / value)


def load_config(path: str | Path | None, **overrides: Any) -> PipelineConfig:
    """Read a JSON config file (or defaults when ``path`` is None) and apply non-None overrides."""
    data: dict[str, Any] = {}
    base = None
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must be a JSON object")
        base = Path(path).resolve().parent
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data, base)


def make_provider(cfg: EmbeddingConfig) -> EmbeddingProvider:
    if cfg.kind == "hashed":
        return HashedBagOfWords(cfg.dim)
    return HttpEmbeddingProvider(cfg.url, cfg.model, cfg.dim, cfg.api_key_env, cfg.timeout, cfg.retries)


# -- decode -------------------------------------------------------------------


@dataclass
class DecodeOutcome:
    packets: list[DecodedPacket]
    status: list[dict[str, Any]]


def decode_capture(data: bytes, port: int = BACNET_IP_PORT) -> DecodeOutcome:
    """Read, filter and decode a capture; per-frame failures are recorded, not raised."""
    frames, _ = scan_capture(data)
    packets, status = [], []
    for frame in filter_bacnet(frames, port):
        try:
            packets.append(decode_packet(frame))
            status.append({"frame": frame.index, "status": "ok"})
        except DecodeError as exc:
            status.append({"frame": frame.index, "status": "error", "error": f"{type(exc).__name__}: {exc}"})
    return DecodeOutcome(packets, status)


# -- kb-build -----------------------------------------------------------------


def corpus_files(corpus_dir: str | Path) -> list[Path]:
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    return sorted(p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in CORPUS_SUFFIXES)


def build_index(
    corpus_dir: str | Path,
    provider: EmbeddingProvider,
    chunking: ChunkingConfig | None = None,
    batch_size: int = 64,
) -> VectorIndex:
    """Chunk and embed every text/markdown document under ``corpus_dir``.

    Source names are paths relative to ``corpus_dir``. Embedding failures are
    re-raised naming the document and the first chunk of the failing batch.
    """
    files = corpus_files(corpus_dir)
    if not files:
        raise ConfigurationError(f"no corpus: {corpus_dir} has no {'/'.join(CORPUS_SUFFIXES)} documents")
    index = VectorIndex(dim=provider.dim, embedder_id=provider.id)
    root = Path(corpus_dir)
    for path in files:
        source = path.relative_to(root).as_posix()
        chunks = chunk_document(path.read_text(encoding="utf-8"), chunking, source)
        for start in range(0, len(chunks), batch_size):
            batch = chunks[start:start + batch_size]
            try:
                vectors = provider.embed_batch([c.text for c in batch])
            except EmbedError as exc:
                raise EmbedError(f"{source}, chunk {start}: {exc}") from exc
            index.add(batch, vectors)
    return index


# -- explain ------------------------------------------------------------------


class StageError(BacsumError):
    """A pipeline stage failed; ``audit`` holds the partial record."""

    def __init__(self, stage: str, cause: Exception, audit: dict[str, Any]) -> None:
        self.stage = stage
        self.cause = cause
        self.audit = audit
        super().__init__(f"{stage}: {cause}")


@dataclass
class ExplainResult:
    summary: Summary
    packet_text: str
    audit: dict[str, Any]


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_explain(
    capture: bytes,
    config: PipelineConfig,
    client: ChatClient,
    input_name: str = "<bytes>",
    provider: EmbeddingProvider | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> ExplainResult:
    """decode -> annotate -> gather -> dedupe -> budget -> prompt -> summarize, with an audit record."""
    audit: dict[str, Any] = {
        "schema": AUDIT_SCHEMA,
        "run_id": uuid.uuid4().hex,
        "started_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "input": {"name": input_name, "sha256": _sha256(capture)},
        "config_sha256": config.sha256(),
        "config": config.to_json(),
        "mode": config.mode,
        "prompt_template_sha256": None,
        "decode_status": [],
        "bundle": None,
        "prompt_sha256": None,
        "summary": None,
        "timings": {},
        "status": "running",
        "failed_stage": None,
        "error": None,
    }
    stage = "config"
    clock = time.perf_counter()

    def done(name: str) -> None:
        nonlocal clock
        now = time.perf_counter()
        audit["timings"][name] = round(now - clock, 6)
        clock = now

    try:
        config.validate()
        template = load_template(config.prompt_template)
        audit["prompt_template_sha256"] = template.sha256
        kinds = MODE_KINDS[config.mode]

        stage = "load"
        kb = load_service_kb(config.service_kb_path) if "service" in kinds else None
        index = None
        if "retrieved" in kinds:
            index = load_index(config.index_path)
            provider = provider or make_provider(config.embedding)
            if provider.dim != index.dim:
                raise ConfigurationError(
                    f"embedding provider dimension {provider.dim} does not match index dimension {index.dim}"
                )
        registry = load_registry(config.registry_path) if config.registry_path else Registry()
        done(stage)

        stage = "decode"
        outcome = decode_capture(capture, config.port)
        audit["decode_status"] = outcome.status
        done(stage)

        stage = "annotate"
        packets = [annotate(p, registry) for p in outcome.packets]
        packet_text = render_packet_text(packets, link_header=config.link_header)
        done(stage)

        stage = "gather_context"
        items = gather_context(packets, kb, index, provider, config.k, kinds) if kinds else []
        done(stage)

        stage = "dedupe"
        items = dedupe(items)
        done(stage)

        stage = "enforce_budget"
        bundle = enforce_budget(items, config.token_budget)
        audit["bundle"] = bundle.to_json()
        done(stage)

        stage = "build_prompt"
        prompt = build_prompt(bundle, packet_text, config.mode, template)
        audit["prompt_sha256"] = _sha256((prompt.system_text + "\0" + prompt.user_text).encode("utf-8"))
        done(stage)

        stage = "summarize"
        summary = summarize(prompt, config.llm, client, sleep=sleep)
        audit["summary"] = summary.to_json()
        done(stage)
    except (BacsumError, OSError) as exc:
        audit["status"] = "failed"
        audit["failed_stage"] = stage
        audit["error"] = f"{type(exc).__name__}: {exc}"
        raise StageError(stage, exc, audit) from exc

    audit["status"] = "ok"
    return ExplainResult(summary, packet_text, audit)
