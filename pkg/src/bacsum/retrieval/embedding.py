"""Embedding providers.

A provider exposes ``id`` (a string recorded in the index), ``dim`` and
``embed_batch(texts) -> np.ndarray`` of shape ``(len(texts), dim)``. Two ship
here: a deterministic hashed bag-of-words model for tests and offline runs,
and an HTTP client for an OpenAI-style ``/embeddings`` endpoint.
"""

from __future__ import annotations

import hashlib
import os
import re
import time
from collections.abc import Callable, Sequence
from typing import Protocol

import httpx
import numpy as np

from bacsum.errors import ConfigurationError, EmbedError, PreconditionError

_WORD = re.compile(r"[a-z0-9]+")


class EmbeddingProvider(Protocol):
    id: str
    dim: int

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...


def normalize_text(text: str) -> str:
    return " ".join(text.split())


def _check_texts(texts: Sequence[str]) -> list[str]:
    cleaned = [normalize_text(t) for t in texts]
    for i, text in enumerate(cleaned):
        if not text:
            raise PreconditionError(f"text {i} is empty after whitespace normalization")
    return cleaned


class HashedBagOfWords:
    """Token counts hashed into ``dim`` buckets (blake2b, no signs).

    Texts with disjoint vocabularies have orthogonal vectors unless two tokens
    share a bucket. Text without alphanumeric tokens falls back to characters
    so the vector is never zero.
    """

    def __init__(self, dim: int = 384) -> None:
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.id = f"hashed-bow-v1/{dim}"

    def bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed_one(self, text: str) -> np.ndarray:
        lowered = text.lower()
        tokens = _WORD.findall(lowered) or list(lowered.replace(" ", ""))
        vec = np.zeros(self.dim, dtype=np.float32)
        for token in tokens:
            vec[self.bucket(token)] += 1.0
        return vec

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        cleaned = _check_texts(texts)
        out = np.zeros((len(cleaned), self.dim), dtype=np.float32)
        for i, text in enumerate(cleaned):
            out[i] = self.embed_one(text)
        return out


class HttpEmbeddingProvider:
    """Client for ``POST {"input": [...], "model": ...}`` -> ``{"data": [{"embedding": [...]}]}``.

    Transport failures and 5xx responses are retried with exponential
    backoff, then surface as :class:`EmbedError`.
    """

    def __init__(
        self,
        url: str,
        model: str,
        dim: int,
        api_key_env: str | None = None,
        timeout: float = 30.0,
        retries: int = 2,
        batch_size: int = 64,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.url = url
        self.model = model
        self.dim = dim
        self.id = f"http/{model}/{dim}"
        self.retries = retries
        self.batch_size = batch_size
        self._sleep = sleep
        headers = {}
        if api_key_env:
            key = os.environ.get(api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def _post(self, batch: list[str]) -> list[list[float]]:
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.url, json={"input": batch, "model": self.model})
            except httpx.HTTPError as exc:
                last = exc
                continue
            if resp.status_code >= 500:
                last = EmbedError(f"embedding endpoint returned {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise ConfigurationError(f"embedding endpoint rejected request ({resp.status_code}): {resp.text[:200]}")
            try:
                return [item["embedding"] for item in resp.json()["data"]]
            except (ValueError, KeyError, TypeError) as exc:
                raise EmbedError(f"malformed embedding response: {exc}") from None
        raise EmbedError(f"embedding endpoint unavailable after {self.retries + 1} attempts: {last}")

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        cleaned = _check_texts(texts)
        rows: list[list[float]] = []
        for i in range(0, len(cleaned), self.batch_size):
            batch = cleaned[i:i + self.batch_size]
            vectors = self._post(batch)
            if len(vectors) != len(batch):
                raise EmbedError(f"asked for {len(batch)} embeddings, got {len(vectors)}")
            rows.extend(vectors)
        out = np.asarray(rows, dtype=np.float32).reshape(len(rows), -1) if rows else np.zeros((0, self.dim), np.float32)
        if out.shape[1] != self.dim:
            raise ConfigurationError(f"provider returned dimension {out.shape[1]}, configured {self.dim}")
        if not np.isfinite(out).all():
            raise EmbedError("provider returned non-finite values")
        return out


def embed(provider: EmbeddingProvider, text: str) -> np.ndarray:
    """Embed one string; raises :class:`PreconditionError` for blank text."""
    return provider.embed_batch([text])[0]
