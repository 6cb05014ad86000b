"""Prompt assembly and the chat-completion call that produces the summary."""

from __future__ import annotations

import hashlib
import json
import os
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from typing import Protocol

import httpx

from bacsum.context import ContextBundle
from bacsum.errors import (
    ChatTransportError,
    EmptyResponseError,
    LlmUnavailableError,
    PreconditionError,
    RequestRejectedError,
)

MODES = ("m1", "m2", "m3", "m4")
MODE_KINDS: dict[str, tuple[str, ...]] = {
    "m1": (),
    "m2": ("retrieved",),
    "m3": ("service",),
    "m4": ("service", "retrieved", "device"),
}
MODE_NAMES = {
    "m1": "no context",
    "m2": "retrieval only",
    "m3": "service database only",
    "m4": "service database + retrieval + devices",
}


@dataclass(frozen=True)
class PromptTemplate:
    version: int
    system: str
    task: str
    sha256: str


def load_template(path: str | None = None) -> PromptTemplate:
    if path is None:
        raw = resources.files("bacsum").joinpath("data/prompt_template.json").read_bytes()
    else:
        with open(path, "rb") as fh:
            raw = fh.read()
    data = json.loads(raw.decode("utf-8"))
    return PromptTemplate(int(data["version"]), data["system"], data["task"], hashlib.sha256(raw).hexdigest())


@dataclass(frozen=True)
class Prompt:
    system_text: str
    context_block: str
    query_block: str
    mode: str

    @property
    def user_text(self) -> str:
        return f"{self.context_block}\n\n{self.query_block}"


def build_prompt(bundle: ContextBundle, packet_text: str, mode: str, template: PromptTemplate | None = None) -> Prompt:
    if mode not in MODE_KINDS:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if not packet_text.strip():
        raise PreconditionError("packet text must not be empty")
    template = template or load_template()
    kinds = MODE_KINDS[mode]
    items = [item for item in bundle.items if item.kind in kinds]
    if items:
        context = "Context:\n" + "\n".join(f"[{n}] {item.text}" for n, item in enumerate(items, start=1))
    else:
        context = "Context: (none)"
    query = f"Packet file:\n{packet_text.rstrip()}\n\n{template.task}"
    return Prompt(template.system, context, query, mode)


# -- chat clients -------------------------------------------------------------


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str = "http://localhost:8000/v1/chat/completions"
    model: str = "mixtral-8x7b-instruct"
    temperature: float = 0.0
    max_tokens: int = 512
    timeout: float = 120.0
    retries: int = 2
    api_key_env: str = "BACSUM_LLM_API_KEY"

    def __post_init__(self) -> None:
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must lie in [0, 2]")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.max_tokens < 1 or self.timeout <= 0:
            raise ValueError("max_tokens and timeout must be positive")


@dataclass(frozen=True)
class ChatResponse:
    content: str
    model: str
    usage: dict | None = None


class ChatClient(Protocol):
    def complete(self, body: dict, config: LlmConfig) -> ChatResponse: ...


class HttpChatClient:
    """OpenAI-style ``/chat/completions`` over HTTP; bearer token read from ``config.api_key_env``."""

    def __init__(self, transport: httpx.BaseTransport | None = None) -> None:
        self._transport = transport

    def complete(self, body: dict, config: LlmConfig) -> ChatResponse:
        headers = {}
        key = os.environ.get(config.api_key_env, "") if config.api_key_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            with httpx.Client(timeout=config.timeout, transport=self._transport) as client:
                resp = client.post(config.endpoint, json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise ChatTransportError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code >= 500:
            raise ChatTransportError(f"endpoint returned {resp.status_code}")
        if resp.status_code >= 400:
            raise RequestRejectedError(resp.status_code, _error_message(resp))
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise EmptyResponseError("response has no choices[0].message.content") from None
        return ChatResponse(content or "", data.get("model", config.model), data.get("usage"))


def _error_message(resp: httpx.Response) -> str:
    try:
        err = resp.json().get("error", {})
        if isinstance(err, dict) and err.get("message"):
            return str(err["message"])
    except ValueError:
        pass
    return resp.text[:500]


class EchoStubClient:
    """Echoes the first ``words`` words of the user message. For offline, deterministic runs."""

    model = "echo-stub"

    def __init__(self, words: int = 20) -> None:
        self.words = words
        self.calls = 0

    def complete(self, body: dict, config: LlmConfig) -> ChatResponse:
        self.calls += 1
        user = next(m["content"] for m in body["messages"] if m["role"] == "user")
        return ChatResponse(" ".join(user.split()[:self.words]), self.model, None)


# -- summarize ----------------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    text: str
    model_id: str
    mode: str
    usage: dict | None = None
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    attempts: int = 1

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "model_id": self.model_id,
            "mode": self.mode,
            "usage": self.usage,
            "created_at": self.created_at,
            "attempts": self.attempts,
        }


def request_body(prompt: Prompt, config: LlmConfig) -> dict:
    return {
        "model": config.model,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
        "messages": [
            {"role": "system", "content": prompt.system_text},
            {"role": "user", "content": prompt.user_text},
        ],
    }


def summarize(
    prompt: Prompt,
    config: LlmConfig,
    client: ChatClient,
    sleep: Callable[[float], None] = time.sleep,
    backoff: float = 1.0,
) -> Summary:
    """One chat request, retried on transport errors up to ``config.retries`` times.

    Waits ``backoff * 2**n`` seconds before retry ``n + 1``.

    :raises LlmUnavailableError: every attempt failed in transport.
    :raises RequestRejectedError: the endpoint answered 4xx; never retried.
    :raises EmptyResponseError: the completion was blank.
    """
    body = request_body(prompt, config)
    last: Exception | None = None
    for attempt in range(config.retries + 1):
        if attempt:
            sleep(backoff * 2 ** (attempt - 1))
        try:
            response = client.complete(body, config)
        except ChatTransportError as exc:
            last = exc
            continue
        if not response.content.strip():
            raise EmptyResponseError("endpoint returned an empty completion")
        return Summary(response.content.strip(), response.model, prompt.mode, response.usage, attempts=attempt + 1)
    raise LlmUnavailableError(f"chat endpoint unavailable after {config.retries + 1} attempts: {last}")
