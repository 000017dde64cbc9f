"""Exact top-k cosine retrieval over a document corpus.

Corpora here are desk-scale (tens of documents per skill), so the index
is a flat matrix scanned exhaustively; exactness is the contract, and
there is nothing to approximate.  Ties are broken by corpus order, which
is deterministic, so retrieval is fully reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .documents import Corpus, load_corpus, save_corpus
from .embedding import EmbeddingProvider

FORMAT_VERSION = 1


@dataclass(frozen=True)
class VectorIndex:
    doc_ids: tuple[str, ...]
    vectors: np.ndarray  # (n, dim) float64, rows L2-normalised where possible
    dim: int
    provider_kind: str

    def __len__(self) -> int:
        return len(self.doc_ids)


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    return matrix / safe


def build_index(corpus: Corpus, provider: EmbeddingProvider) -> VectorIndex:
    """Embed every document body, order-preserving; empty corpora are valid."""
    if len(corpus) == 0:
        return VectorIndex(
            doc_ids=(), vectors=np.zeros((0, provider.dim)), dim=provider.dim,
            provider_kind=provider.provider_kind,
        )
    vectors = np.stack([provider.embed(doc.body) for doc in corpus.documents])
    return VectorIndex(
        doc_ids=tuple(d.doc_id for d in corpus.documents),
        vectors=_normalize_rows(vectors),
        dim=provider.dim,
        provider_kind=provider.provider_kind,
    )


def top_k(index: VectorIndex, query: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Exactly min(k, |index|) results by descending cosine similarity.

    Equal scores keep corpus order (stable sort).  Scores land in [-1, 1].
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (index.dim,):
        raise ValueError(f"query dim {query.shape} does not match index dim ({index.dim},)")
    if len(index) == 0:
        return []
    norm = np.linalg.norm(query)
    if norm == 0.0:
        scores = np.zeros(len(index))
    else:
        scores = np.clip(index.vectors @ (query / norm), -1.0, 1.0)
    order = np.argsort(-scores, kind="stable")[:k]
    return [(index.doc_ids[i], float(scores[i])) for i in order]


def save_index(index: VectorIndex, corpus: Corpus, directory: Path) -> None:
    """Persist the index beside its corpus in a versioned directory."""
    directory.mkdir(parents=True, exist_ok=True)
    header = {
        "format_version": FORMAT_VERSION,
        "dim": index.dim,
        "provider_kind": index.provider_kind,
        "entry_count": len(index),
        "skill_id": corpus.skill_id,
        "mode": corpus.mode,
    }
    (directory / "header.json").write_text(
        json.dumps(header, sort_keys=True) + "\n", encoding="utf-8"
    )
    np.save(directory / "vectors.npy", index.vectors)
    (directory / "doc_ids.json").write_text(
        json.dumps(list(index.doc_ids)) + "\n", encoding="utf-8"
    )
    save_corpus(corpus, directory)


def load_index(directory: Path) -> tuple[VectorIndex, Corpus]:
    header = json.loads((directory / "header.json").read_text(encoding="utf-8"))
    if header["format_version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported index format version {header['format_version']}")
    vectors = np.load(directory / "vectors.npy")
    doc_ids = tuple(json.loads((directory / "doc_ids.json").read_text(encoding="utf-8")))
    corpus = load_corpus(directory)
    index = VectorIndex(
        doc_ids=doc_ids,
        vectors=vectors,
        dim=header["dim"],
        provider_kind=header["provider_kind"],
    )
    if len(index.doc_ids) != header["entry_count"]:
        raise ValueError("index header entry_count does not match stored entries")
    return index, corpus
