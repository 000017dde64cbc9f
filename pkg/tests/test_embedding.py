from __future__ import annotations

import hashlib
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import httpx

from tmkqa.embedding import (
    HashEmbeddingProvider,
    RemoteEmbeddingProvider,
    tokenize,
)
from tmkqa.errors import EmbeddingTransportError
from tmkqa.retrying import RetryPolicy


def _oracle_embed(text: str, dim: int = 64) -> np.ndarray:
    """Independent reimplementation of the documented hashing algorithm."""
    tokens = re.findall(r"[a-z0-9]+", text.lower())
    if not tokens:
        tokens = [text.strip()]
    vec = np.zeros(dim)
    for token in tokens:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        vec[int.from_bytes(digest[:4], "big") % dim] += 1.0
    return vec / np.linalg.norm(vec)


def test_mock_embedding_deterministic():
    provider = HashEmbeddingProvider()
    a = provider.embed("the painting task orders actions")
    b = provider.embed("the painting task orders actions")
    assert np.array_equal(a, b)


def test_empty_text_rejected():
    provider = HashEmbeddingProvider()
    with pytest.raises(ValueError):
        provider.embed("")
    with pytest.raises(ValueError):
        provider.embed("   ")


def test_shared_tokens_raise_similarity():
    # Computed with the documented algorithm itself: overlapping token sets
    # must score above disjoint ones.
    provider = HashEmbeddingProvider()
    disjoint_a = "ladder ceiling paint robot"
    disjoint_b = "clause literal resolve negate"
    half_a = "ladder ceiling paint robot"
    half_b = "ladder ceiling prove negate"
    cos_disjoint = float(provider.embed(disjoint_a) @ provider.embed(disjoint_b))
    cos_half = float(provider.embed(half_a) @ provider.embed(half_b))
    oracle_disjoint = float(_oracle_embed(disjoint_a) @ _oracle_embed(disjoint_b))
    oracle_half = float(_oracle_embed(half_a) @ _oracle_embed(half_b))
    assert cos_disjoint == pytest.approx(oracle_disjoint, abs=1e-12)
    assert cos_half == pytest.approx(oracle_half, abs=1e-12)
    assert cos_half > cos_disjoint


def test_matches_documented_algorithm_exactly():
    provider = HashEmbeddingProvider()
    for text in ("a b c", "Painted(Ladder) & Painted(Ceiling)", "!!!", "x" * 100):
        assert np.allclose(provider.embed(text), _oracle_embed(text), atol=0)


@settings(max_examples=100, deadline=None)
@given(st.text(min_size=1).filter(lambda t: t.strip()))
def test_norm_positive_for_any_nonempty_text(text):
    vec = HashEmbeddingProvider().embed(text)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)


def test_order_insensitive_bag_of_tokens():
    provider = HashEmbeddingProvider()
    forward = provider.embed("compare the pair then swap it")
    reversed_ = provider.embed("it swap then pair the compare")
    assert np.allclose(forward, reversed_, atol=0)


def test_tokenizer_fallback_for_symbol_only_text():
    assert tokenize("!!!") == ["!!!"]
    assert tokenize("Paint It") == ["paint", "it"]


def test_dim_validation():
    with pytest.raises(ValueError):
        HashEmbeddingProvider(dim=0)


# --- remote provider ----------------------------------------------------------


def _transport_with(handler) -> httpx.Client:
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_remote_provider_round_trip():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"data": [{"embedding": [1.0, 0.0, 0.0]}]})

    provider = RemoteEmbeddingProvider(
        "http://embed.test/v1", model="m", dim=3, client=_transport_with(handler)
    )
    assert np.array_equal(provider.embed("x"), np.array([1.0, 0.0, 0.0]))


def test_remote_provider_failure_carries_retry_metadata():
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(1)
        return httpx.Response(503)

    provider = RemoteEmbeddingProvider(
        "http://embed.test/v1",
        model="m",
        dim=3,
        client=_transport_with(handler),
        retry=RetryPolicy(attempts=3, base_delay=0.0),
    )
    with pytest.raises(EmbeddingTransportError) as exc_info:
        provider.embed("x")
    assert exc_info.value.attempts == 3
    assert len(calls) == 3
