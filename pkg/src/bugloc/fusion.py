"""Reciprocal rank fusion and the end-to-end localization pipeline.

Each retriever contributes 1 / (k + rank) per file, ranks 1-based; files a
retriever did not return simply contribute nothing. Fusion needs no score
calibration between BM25 and cosine values, which is the point. The
localizer wires the whole flow: tokenize/index once, then per bug report
run both retrievers and fuse.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_positive
from .chunking import make_chunker
from .config import Config
from .corpus import BugReport, SnapshotFiles
from .errors import DataError, ProviderError
from .lexical import Bm25Index
from .ranking import RankedList
from .vector import VectorIndex, aggregate_file_scores, make_embedder

MODES = ("lexical", "deep", "hybrid")


def rrf_fuse(rankings: Sequence[RankedList], k: float = 60) -> RankedList:
    """Fuse rankings by summed reciprocal rank; ties order by file id."""
    check_positive("k", k, strict=False)
    if not rankings:
        raise DataError("rrf_fuse needs at least one ranking")
    scores: dict[str, float] = {}
    for ranking in rankings:
        for rank, (file_id, _) in enumerate(ranking.items, start=1):
            scores[file_id] = scores.get(file_id, 0.0) + 1.0 / (k + rank)
    return RankedList.from_scores("fused", scores)


@dataclass(frozen=True)
class LocalizationResult:
    report_id: str
    fused: RankedList
    per_retriever: dict[str, RankedList]
    timings: dict[str, float] = field(default_factory=dict)
    degraded: bool = False
    notes: tuple[str, ...] = ()


class BugLocalizer(BaseEstimator):
    """Rank snapshot files for a bug report.

    mode 'lexical' uses BM25 only, 'deep' the vector index only, 'hybrid'
    fuses both. In hybrid mode a provider failure degrades the result to
    lexical-only and flags it rather than failing the whole run.
    """

    def __init__(
        self,
        embedder=None,
        chunking: str = "dynamic",
        window_size: int = 40,
        kind_costs=None,
        default_cost: float = 100.0,
        k1: float = 1.2,
        b: float = 0.75,
        rrf_k: float = 60,
        candidate_depth: int = 500,
        mode: str = "hybrid",
    ):
        self.embedder = embedder
        self.chunking = chunking
        self.window_size = window_size
        self.kind_costs = kind_costs
        self.default_cost = default_cost
        self.k1 = k1
        self.b = b
        self.rrf_k = rrf_k
        self.candidate_depth = candidate_depth
        self.mode = mode

    def fit(self, snapshot: SnapshotFiles) -> "BugLocalizer":
        """Build the indices this mode needs from one snapshot."""
        if self.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}, got {self.mode!r}")
        docs = [(path, text, path) for path, text, _ in snapshot.iter_sources()]
        self.lexical_index_ = None
        self.vector_index_ = None
        if self.mode in ("lexical", "hybrid"):
            self.lexical_index_ = Bm25Index(k1=self.k1, b=self.b).fit(docs)
        if self.mode in ("deep", "hybrid"):
            chunker = make_chunker(
                self.chunking,
                window_size=self.window_size,
                kind_costs=self.kind_costs,
                default_cost=self.default_cost,
            )
            chunks = chunker.transform(snapshot)
            self.vector_index_ = VectorIndex(embedder=self.embedder).fit(chunks)
        return self

    @classmethod
    def from_indices(cls, lexical_index, vector_index, **params) -> "BugLocalizer":
        """Wrap already-built indices (the persisted-store path)."""
        localizer = cls(**params)
        if localizer.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}, got {localizer.mode!r}")
        localizer.lexical_index_ = lexical_index
        localizer.vector_index_ = vector_index
        needs = {
            "lexical": (lexical_index,),
            "deep": (vector_index,),
            "hybrid": (lexical_index, vector_index),
        }[localizer.mode]
        if any(index is None for index in needs):
            raise DataError(f"mode {localizer.mode!r} requires indices that were not provided")
        return localizer

    def _check_fitted(self):
        if not hasattr(self, "lexical_index_"):
            raise NotFittedError("BugLocalizer is not fitted; call fit(snapshot) first")

    def localize(self, report: BugReport | tuple[str, str, str]) -> LocalizationResult:
        """Rank files for one report; raises on an empty query."""
        self._check_fitted()
        if isinstance(report, BugReport):
            report_id, query = report.id, report.query_text()
        else:
            report_id, title, body = report
            query = f"{title}\n\n{body}"
        if not query.strip():
            raise DataError(f"report {report_id!r} has an empty query (no title or body)")

        per_retriever: dict[str, RankedList] = {}
        timings: dict[str, float] = {}
        notes: list[str] = []
        degraded = False

        if self.lexical_index_ is not None:
            start = time.perf_counter()
            per_retriever["lexical"] = self.lexical_index_.search(query, top_k=self.candidate_depth)
            timings["lexical"] = time.perf_counter() - start

        if self.vector_index_ is not None:
            start = time.perf_counter()
            try:
                hits = self.vector_index_.search_text(query, top_k=self.candidate_depth)
            except ProviderError as exc:
                if self.mode != "hybrid":
                    raise
                degraded = True
                notes.append(f"deep retriever unavailable, lexical-only result: {exc}")
            else:
                per_retriever["deep"] = aggregate_file_scores(hits)
            timings["deep"] = time.perf_counter() - start

        if self.mode == "hybrid" and not degraded:
            start = time.perf_counter()
            fused = rrf_fuse([per_retriever["lexical"], per_retriever["deep"]], k=self.rrf_k)
            timings["fuse"] = time.perf_counter() - start
        else:
            only = next(iter(per_retriever.values()))
            fused = RankedList(tag="fused", items=only.items)

        return LocalizationResult(
            report_id=report_id,
            fused=fused,
            per_retriever=per_retriever,
            timings=timings,
            degraded=degraded,
            notes=tuple(notes),
        )

    def predict(self, reports) -> list[str | None]:
        """Top-ranked file per report (None when nothing scored)."""
        out = []
        for report in reports:
            fused = self.localize(report).fused
            out.append(fused.items[0][0] if fused.items else None)
        return out


def build_localizer(config: Config, chunking: str = "dynamic", mode: str = "hybrid") -> BugLocalizer:
    """Construct an unfitted localizer from a validated config."""
    return BugLocalizer(
        embedder=make_embedder(config.embedding),
        chunking=chunking,
        window_size=config.window_size,
        kind_costs=config.kind_costs,
        default_cost=config.default_cost,
        k1=config.bm25.k1,
        b=config.bm25.b,
        rrf_k=config.rrf_k,
        candidate_depth=config.candidate_depth,
        mode=mode,
    )
