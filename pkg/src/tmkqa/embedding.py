"""Embedding providers: a deterministic local hasher and a remote client.

The hash provider exists so every retrieval test runs offline and
reproducibly.  Its algorithm, in full:

1. Lowercase the text and split it into alphanumeric token runs
   (``[a-z0-9]+``).  If that yields no tokens, treat the whole stripped
   text as a single token.
2. For each token, take ``sha256(token)`` and use the first four digest
   bytes (big-endian) modulo ``dim`` as a bucket index; add 1 to that
   bucket per occurrence.
3. L2-normalise the bucket counts.

Counts are unsigned, so any non-empty text maps to a vector with positive
norm, and token order never matters (bag-of-tokens).
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol, Sequence

import httpx
import numpy as np

from .errors import EmbeddingError, EmbeddingTransportError
from .retrying import RetryPolicy, run_with_retries

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EmbeddingProvider(Protocol):
    """Capability interface: fixed-dimension text embeddings."""

    provider_kind: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def tokenize(text: str) -> list[str]:
    tokens = _TOKEN_RE.findall(text.lower())
    return tokens if tokens else [text.strip()]


class HashEmbeddingProvider:
    """Deterministic bag-of-token embedder; identical output across sessions."""

    provider_kind = "deterministic-mock"

    def __init__(self, dim: int = 64):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dim
            vec[bucket] += 1.0
        return vec / np.linalg.norm(vec)


class RemoteEmbeddingProvider:
    """Client for an HTTP embedding endpoint.

    Expects ``POST base_url`` with ``{"model": ..., "input": [text]}`` and
    a response of ``{"data": [{"embedding": [...]}]}``.
    """

    provider_kind = "remote-api"

    def __init__(
        self,
        base_url: str,
        model: str,
        dim: int,
        api_key: str | None = None,
        timeout: float = 30.0,
        retry: RetryPolicy | None = None,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url
        self.model = model
        self.dim = dim
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout)
        self._retry = retry or RetryPolicy()

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")

        def call() -> np.ndarray:
            response = self._client.post(
                self.base_url,
                json={"model": self.model, "input": [text]},
                headers=self._headers,
            )
            if response.status_code >= 500 or response.status_code == 429:
                raise httpx.HTTPStatusError(
                    f"status {response.status_code}", request=response.request, response=response
                )
            response.raise_for_status()
            values = response.json()["data"][0]["embedding"]
            vec = np.asarray(values, dtype=np.float64)
            if vec.shape != (self.dim,):
                raise EmbeddingError(
                    f"endpoint returned dim {vec.shape}, expected ({self.dim},)"
                )
            return vec

        def retryable(exc: Exception) -> bool:
            return isinstance(exc, (httpx.TransportError, httpx.HTTPStatusError))

        try:
            return run_with_retries(call, self._retry, retryable)
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            raise EmbeddingTransportError(str(exc), attempts=self._retry.attempts) from exc


class SbertEmbeddingProvider:
    """Optional sentence-transformers evaluation embedder.

    Only usable in deployments where the model weights are present; never
    exercised by the offline test suite.
    """

    provider_kind = "remote-api"

    def __init__(self, model_name: str = "all-MiniLM-L6-v2"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:  # pragma: no cover
            raise EmbeddingError("sentence-transformers is not installed") from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:  # pragma: no cover - needs downloaded weights
            raise EmbeddingError(f"cannot load {model_name}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def embed(self, text: str) -> np.ndarray:  # pragma: no cover - weights-dependent
        if not text.strip():
            raise ValueError("cannot embed empty text")
        return np.asarray(self._model.encode(text), dtype=np.float64)


def embed_many(provider: EmbeddingProvider, texts: Sequence[str]) -> np.ndarray:
    """Stack per-text embeddings into an (n, dim) matrix."""
    if not texts:
        return np.zeros((0, provider.dim), dtype=np.float64)
    return np.stack([provider.embed(t) for t in texts])
