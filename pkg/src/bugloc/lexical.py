"""Whole-file lexical retrieval with Okapi BM25.

The tokenizer is deliberately code-aware: camelCase and snake_case
identifiers split into sub-tokens while the lowercased composite is kept,
so a stack trace mentioning ``FontController`` matches both the identifier
and the words inside it. File paths are indexed alongside body text for the
same reason. The tokenizer is versioned and the version is pinned in index
manifests; changing it invalidates persisted indices.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DataError
from .ranking import RankedList

TOKENIZER_VERSION = "1"

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+")
_CAMEL_BOUNDARY_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_PATH_SEP_RE = re.compile(r"[/\\.]+")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens with identifier splitting.

    ``FontController`` yields [font, controller, fontcontroller] and
    ``a_b`` yields [a, b, a_b]; plain words yield themselves once.
    """
    out: list[str] = []
    for raw in _TOKEN_RE.findall(text):
        subs: list[str] = []
        for part in raw.split("_"):
            if part:
                subs.extend(s.lower() for s in _CAMEL_BOUNDARY_RE.split(part) if s)
        out.extend(subs)
        composite = raw.lower()
        if len(subs) != 1 or subs[0] != composite:
            out.append(composite)
    return out


def tokenize_path(path: str) -> list[str]:
    """Tokenize a file path, splitting on separators and the extension dot."""
    out: list[str] = []
    for segment in _PATH_SEP_RE.split(path):
        out.extend(tokenize(segment))
    return out


class Bm25Index(BaseEstimator):
    """Okapi BM25 over whole files.

    IDF(q) = ln(1 + (N - n(q) + 0.5) / (n(q) + 0.5)), which is never
    negative. Query tokens are scored with multiplicity, zero-score
    documents are omitted, and score ties order by doc id ascending.
    """

    def __init__(self, k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b

    def fit(self, docs: Iterable[tuple[str, str, str | None]]) -> "Bm25Index":
        """Index (doc_id, text, path) triples; path may be None."""
        if not (self.k1 >= 0):
            raise DataError(f"k1 must be >= 0, got {self.k1}")
        if not (0.0 <= self.b <= 1.0):
            raise DataError(f"b must lie in [0, 1], got {self.b}")
        postings: dict[str, dict[str, int]] = {}
        doc_len: dict[str, int] = {}
        doc_path: dict[str, str | None] = {}
        for doc_id, text, path in docs:
            if doc_id in doc_len:
                raise DataError(f"duplicate document id {doc_id!r}")
            tokens = tokenize(text)
            if path:
                tokens.extend(tokenize_path(path))
            doc_len[doc_id] = len(tokens)
            doc_path[doc_id] = path
            for token, count in Counter(tokens).items():
                postings.setdefault(token, {})[doc_id] = count
        if not doc_len:
            raise DataError("cannot index an empty document collection")
        self.postings_ = postings
        self.doc_len_ = doc_len
        self.doc_path_ = doc_path
        self.n_docs_ = len(doc_len)
        self.avgdl_ = sum(doc_len.values()) / len(doc_len)
        return self

    def _check_fitted(self):
        if not hasattr(self, "postings_"):
            raise NotFittedError("Bm25Index is not fitted; call fit(docs) first")

    def _idf(self, token: str) -> float:
        n = len(self.postings_.get(token, ()))
        if n == 0:
            return 0.0
        return math.log(1.0 + (self.n_docs_ - n + 0.5) / (n + 0.5))

    def _term_weight(self, tf: int, length: int) -> float:
        norm = 1.0 - self.b + self.b * (length / self.avgdl_)
        return tf * (self.k1 + 1.0) / (tf + self.k1 * norm)

    def score(self, query_tokens: Sequence[str], doc_id: str) -> float:
        """BM25 score of one document; duplicate query tokens count twice."""
        self._check_fitted()
        if doc_id not in self.doc_len_:
            raise DataError(f"unknown document id {doc_id!r}")
        length = self.doc_len_[doc_id]
        total = 0.0
        for token in query_tokens:
            tf = self.postings_.get(token, {}).get(doc_id, 0)
            if tf == 0:
                continue
            total += self._idf(token) * self._term_weight(tf, length)
        return total

    def search(self, query_text: str, top_k: int = 50) -> RankedList:
        """Top documents by score descending; zero-score documents omitted."""
        self._check_fitted()
        if top_k < 1:
            raise DataError(f"top_k must be >= 1, got {top_k}")
        scores: dict[str, float] = {}
        for token in tokenize(query_text):
            hits = self.postings_.get(token)
            if not hits:
                continue
            idf = self._idf(token)
            for doc_id, tf in hits.items():
                scores[doc_id] = scores.get(doc_id, 0.0) + idf * self._term_weight(
                    tf, self.doc_len_[doc_id]
                )
        positive = {d: s for d, s in scores.items() if s > 0.0}
        return RankedList.from_scores("lexical", positive).truncated(top_k)

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "format": 1,
            "tokenizer_version": TOKENIZER_VERSION,
            "k1": self.k1,
            "b": self.b,
            "postings": {t: sorted(hits.items()) for t, hits in self.postings_.items()},
            "doc_len": self.doc_len_,
            "doc_path": self.doc_path_,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Bm25Index":
        if data.get("tokenizer_version") != TOKENIZER_VERSION:
            raise DataError(
                f"index built with tokenizer {data.get('tokenizer_version')!r}, "
                f"this build uses {TOKENIZER_VERSION!r}"
            )
        index = cls(k1=data["k1"], b=data["b"])
        index.postings_ = {t: dict(hits) for t, hits in data["postings"].items()}
        index.doc_len_ = dict(data["doc_len"])
        index.doc_path_ = dict(data["doc_path"])
        index.n_docs_ = len(index.doc_len_)
        if index.n_docs_ == 0:
            raise DataError("persisted index has no documents")
        index.avgdl_ = sum(index.doc_len_.values()) / index.n_docs_
        return index
