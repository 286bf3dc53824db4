"""Chunk-level vector retrieval.

Chunks are embedded by a provider, stored in a flat matrix, and queried
with exact cosine search: at tens of thousands of chunks a matrix product
beats any approximate index and is perfectly reproducible. The built-in
provider is a deterministic hashed bag-of-tokens embedding, good enough to
exercise the full pipeline offline; a remote HTTP provider covers real
models. A file's score is the maximum over its chunks.
"""

from __future__ import annotations

import hashlib
import json
import urllib.error
import urllib.request
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_at_least
from .chunking import Chunk
from .config import EmbeddingConfig
from .errors import DataError, ProviderError
from .lexical import tokenize
from .ranking import RankedList

DEFAULT_DIMENSION = 256

_SIM_TOLERANCE = 1e-9


def _hash_token(token: str) -> tuple[int, float]:
    """Deterministic (bucket seed, sign) for one token."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9).digest()
    bucket = int.from_bytes(digest[:8], "big")
    sign = 1.0 if digest[8] & 1 else -1.0
    return bucket, sign


class HashingEmbedder(BaseEstimator):
    """Hashed bag-of-tokens embedding: deterministic, dependency-free.

    Each token hashes to one of ``dimension`` buckets with a hashed sign;
    occurrences accumulate and the vector is L2-normalized. Text with no
    tokens maps to the first basis vector so the result is still unit norm.
    """

    name = "hashing-v1"
    deterministic = True

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        check_at_least("dimension", self.dimension, 2)
        out = np.zeros((len(texts), self.dimension))
        for row, text in enumerate(texts):
            tokens = tokenize(text)
            if not tokens:
                out[row, 0] = 1.0
                continue
            for token in tokens:
                bucket, sign = _hash_token(token)
                out[row, bucket % self.dimension] += sign
            norm = np.linalg.norm(out[row])
            if norm == 0.0:
                out[row] = 0.0
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]


class RemoteEmbedder(BaseEstimator):
    """HTTP embedding provider: POST {"texts": [...]}, expect {"embeddings": [[...]]}.

    Every failure -- transport, malformed payload, wrong dimension or
    non-finite values -- raises ProviderError naming the batch position.
    Returned vectors are L2-normalized before use.
    """

    name = "remote"
    deterministic = False

    def __init__(self, endpoint: str, dimension: int, timeout: float = 30.0, batch_size: int = 64):
        self.endpoint = endpoint
        self.dimension = dimension
        self.timeout = timeout
        self.batch_size = batch_size

    def _post_batch(self, texts: list[str], offset: int) -> np.ndarray:
        payload = json.dumps({"texts": texts}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=payload, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                body = response.read()
        except (urllib.error.URLError, OSError) as exc:
            raise ProviderError(
                f"embedding request failed for batch at position {offset}: {exc}"
            ) from exc
        try:
            data = json.loads(body)
            vectors = data["embeddings"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ProviderError(
                f"malformed embedding response for batch at position {offset}: {exc}"
            ) from exc
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError(
                f"expected {len(texts)} embeddings for batch at position {offset}, "
                f"got {len(vectors) if isinstance(vectors, list) else type(vectors).__name__}"
            )
        out = np.zeros((len(texts), self.dimension))
        for row, vector in enumerate(vectors):
            position = offset + row
            arr = np.asarray(vector, dtype=np.float64)
            if arr.shape != (self.dimension,):
                raise ProviderError(
                    f"embedding at position {position} has dimension "
                    f"{arr.shape[0] if arr.ndim == 1 else arr.shape}, expected {self.dimension}"
                )
            if not np.all(np.isfinite(arr)):
                raise ProviderError(f"embedding at position {position} has non-finite values")
            norm = np.linalg.norm(arr)
            if norm == 0.0:
                raise ProviderError(f"embedding at position {position} is the zero vector")
            out[row] = arr / norm
        return out

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        check_at_least("dimension", self.dimension, 2)
        texts = list(texts)
        parts = []
        for offset in range(0, len(texts), self.batch_size):
            parts.append(self._post_batch(texts[offset : offset + self.batch_size], offset))
        if not parts:
            return np.zeros((0, self.dimension))
        return np.vstack(parts)

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]


def make_embedder(config: EmbeddingConfig):
    if config.provider == "builtin":
        return HashingEmbedder(dimension=config.dimension)
    if config.provider == "remote":
        return RemoteEmbedder(endpoint=config.endpoint, dimension=config.dimension)
    raise DataError(f"unknown embedding provider {config.provider!r}")


class ChunkHit(NamedTuple):
    chunk_id: str
    file_id: str
    similarity: float


class VectorIndex(BaseEstimator):
    """Exact cosine top-k over embedded chunks.

    Entries are stored sorted by chunk id, so a stable sort on descending
    similarity breaks ties by chunk id ascending.
    """

    def __init__(self, embedder=None):
        self.embedder = embedder

    def _active_embedder(self):
        return self.embedder if self.embedder is not None else HashingEmbedder()

    def fit(self, chunks: Sequence[Chunk]) -> "VectorIndex":
        chunks = sorted(chunks, key=lambda c: c.id)
        if not chunks:
            raise DataError("cannot index an empty chunk collection")
        ids = [c.id for c in chunks]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate chunk ids in input")
        matrix = self._active_embedder().embed([c.text for c in chunks])
        self._adopt(matrix, ids, [c.file_path for c in chunks])
        return self

    def _adopt(self, matrix: np.ndarray, chunk_ids: list[str], file_ids: list[str]):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(chunk_ids):
            raise DataError("embedding matrix shape does not match chunk count")
        if not np.all(np.isfinite(matrix)):
            raise DataError("embedding matrix has non-finite values")
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise DataError("chunk embeddings must be unit-norm")
        self.matrix_ = matrix
        self.chunk_ids_ = list(chunk_ids)
        self.file_ids_ = list(file_ids)
        self.dimension_ = matrix.shape[1]

    @classmethod
    def from_parts(cls, matrix, chunk_ids, file_ids, embedder=None) -> "VectorIndex":
        """Rebuild a fitted index from persisted parts (must be chunk-id sorted)."""
        order = sorted(range(len(chunk_ids)), key=lambda i: chunk_ids[i])
        index = cls(embedder=embedder)
        index._adopt(
            np.asarray(matrix)[order],
            [chunk_ids[i] for i in order],
            [file_ids[i] for i in order],
        )
        return index

    def _check_fitted(self):
        if not hasattr(self, "matrix_"):
            raise NotFittedError("VectorIndex is not fitted; call fit(chunks) first")

    def search(self, query: np.ndarray, top_k: int = 50) -> list[ChunkHit]:
        """Exact top-k chunks by cosine descending, ties by chunk id ascending."""
        self._check_fitted()
        if top_k < 1:
            raise DataError(f"top_k must be >= 1, got {top_k}")
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dimension_,):
            raise DataError(f"query has shape {q.shape}, index dimension is {self.dimension_}")
        if not np.all(np.isfinite(q)):
            raise DataError("query embedding has non-finite values")
        if abs(np.linalg.norm(q) - 1.0) > 1e-6:
            raise DataError("query embedding must be unit-norm")
        sims = self.matrix_ @ q
        if np.any(sims > 1.0 + _SIM_TOLERANCE) or np.any(sims < -1.0 - _SIM_TOLERANCE):
            raise DataError("cosine similarity left [-1, 1]; index state is corrupt")
        order = np.argsort(-sims, kind="stable")[:top_k]
        return [
            ChunkHit(self.chunk_ids_[i], self.file_ids_[i], float(sims[i])) for i in order
        ]

    def search_text(self, text: str, top_k: int = 50) -> list[ChunkHit]:
        return self.search(self._active_embedder().embed_one(text), top_k=top_k)


def aggregate_file_scores(hits: Sequence[ChunkHit], tag: str = "deep") -> RankedList:
    """File score = max over its retrieved chunks; ties order by file id."""
    best: dict[str, float] = {}
    for hit in hits:
        if hit.file_id not in best or hit.similarity > best[hit.file_id]:
            best[hit.file_id] = hit.similarity
    return RankedList.from_scores(tag, best)
