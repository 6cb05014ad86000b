import json

import httpx
import numpy as np
import pytest

from bacsum.errors import ConfigurationError, EmbedError, PreconditionError
from bacsum.retrieval.embedding import HashedBagOfWords, HttpEmbeddingProvider, embed
from bacsum.retrieval.index import cosine_similarity


def test_hashed_is_deterministic():
    provider = HashedBagOfWords(384)
    assert np.array_equal(embed(provider, "writeProperty"), embed(provider, "writeProperty"))
    assert provider.id == "hashed-bow-v1/384"
    assert HashedBagOfWords(384).bucket("damper") == provider.bucket("damper")


def test_hashed_empty_text():
    with pytest.raises(PreconditionError):
        embed(HashedBagOfWords(), "")
    with pytest.raises(PreconditionError):
        HashedBagOfWords().embed_batch(["ok", "  \n"])


def test_disjoint_vocabularies_are_orthogonal():
    provider = HashedBagOfWords(384)
    a, b = "damper actuator position", "chiller setpoint override"
    buckets_a = {provider.bucket(t) for t in a.split()}
    buckets_b = {provider.bucket(t) for t in b.split()}
    assert not buckets_a & buckets_b  # fixture vocabulary is collision-free
    assert cosine_similarity(embed(provider, a), embed(provider, b)) == 0.0


def test_punctuation_only_text_is_nonzero():
    assert embed(HashedBagOfWords(16), "!!").sum() == 2


def _transport(responses, seen):
    it = iter(responses)

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(json.loads(request.content))
        item = next(it)
        if isinstance(item, Exception):
            raise item
        return item

    return httpx.MockTransport(handler)


def _ok(n, dim=3):
    return httpx.Response(200, json={"data": [{"embedding": [float(i)] * dim} for i in range(n)]})


def test_http_provider_happy_path():
    seen = []
    provider = HttpEmbeddingProvider("http://e/v1/embeddings", "m", 3, transport=_transport([_ok(2)], seen))
    out = provider.embed_batch(["a", "b"])
    assert out.shape == (2, 3) and out.dtype == np.float32
    assert seen == [{"input": ["a", "b"], "model": "m"}]


def test_http_provider_batches():
    seen = []
    provider = HttpEmbeddingProvider("http://e", "m", 3, batch_size=2, transport=_transport([_ok(2), _ok(1)], seen))
    assert provider.embed_batch(["a", "b", "c"]).shape == (3, 3)
    assert [len(body["input"]) for body in seen] == [2, 1]


def test_http_provider_retries_then_fails():
    seen, sleeps = [], []
    responses = [httpx.Response(503), httpx.ConnectError("down"), httpx.Response(500)]
    provider = HttpEmbeddingProvider("http://e", "m", 3, retries=2, transport=_transport(responses, seen),
                                     sleep=sleeps.append)
    with pytest.raises(EmbedError, match="3 attempts"):
        provider.embed_batch(["a"])
    assert len(seen) == 3 and sleeps == [0.5, 1.0]


def test_http_provider_recovers():
    seen = []
    provider = HttpEmbeddingProvider("http://e", "m", 3, transport=_transport([httpx.Response(502), _ok(1)], seen),
                                     sleep=lambda s: None)
    assert provider.embed_batch(["a"]).shape == (1, 3)


def test_http_provider_client_error_and_dimension():
    provider = HttpEmbeddingProvider("http://e", "m", 3, transport=_transport([httpx.Response(401, text="no")], []))
    with pytest.raises(ConfigurationError, match="401"):
        provider.embed_batch(["a"])
    provider = HttpEmbeddingProvider("http://e", "m", 4, transport=_transport([_ok(1, dim=3)], []))
    with pytest.raises(ConfigurationError, match="dimension"):
        provider.embed_batch(["a"])


def test_http_provider_sends_bearer(monkeypatch):
    monkeypatch.setenv("EMBED_KEY", "s3cret")
    headers = []

    def handler(request):
        headers.append(request.headers.get("authorization"))
        return _ok(1)

    provider = HttpEmbeddingProvider("http://e", "m", 3, api_key_env="EMBED_KEY", transport=httpx.MockTransport(handler))
    provider.embed_batch(["a"])
    assert headers == ["Bearer s3cret"]
