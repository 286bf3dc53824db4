"""Retrieval metrics and the benchmark runner.

Metrics operate on judged rankings: a 0/1 relevance list aligned with the
fused ranking of one report. Top-n asks whether the first relevant file
appears at rank <= n, reciprocal rank uses that same first hit, and
average precision averages precision at each relevant rank over the number
of relevant files actually retrieved. Reports whose ground truth is
entirely absent from the snapshot cannot be judged; they are excluded from
the denominators and reported, never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CorpusHandle, load_snapshot, validate_ground_truth
from .errors import DataError
from .fusion import MODES, build_localizer
from .lexical import tokenize
from .ranking import RankedList
from .chunking import CHUNKERS
from .config import Config
from .store import open_indices


@dataclass(frozen=True)
class JudgedRanking:
    """Relevance of one report's ranking, position r holds rank r+1's label."""

    report_id: str
    relevance: tuple[int, ...]
    truth_size: int

    def __post_init__(self):
        if any(r not in (0, 1) for r in self.relevance):
            raise DataError("relevance labels must be 0 or 1")
        if self.truth_size < 1:
            raise DataError("truth_size must be >= 1")
        if sum(self.relevance) > self.truth_size:
            raise DataError("more relevant results than ground-truth files")

    def first_relevant_rank(self) -> int | None:
        for position, label in enumerate(self.relevance, start=1):
            if label:
                return position
        return None


def judge(ranking: RankedList, truth: Iterable[str], depth: int) -> tuple[int, ...]:
    """0/1 labels for the top ``depth`` entries of a ranking."""
    truth = set(truth)
    if not truth:
        raise DataError("cannot judge against an empty truth set")
    return tuple(1 if file_id in truth else 0 for file_id, _ in ranking.items[:depth])


def average_precision(relevance: Sequence[int]) -> float:
    """Mean precision at relevant ranks, over the relevant retrieved count."""
    precisions = []
    hits = 0
    for rank, label in enumerate(relevance, start=1):
        if label:
            hits += 1
            precisions.append(hits / rank)
    if not precisions:
        return 0.0
    return sum(precisions) / len(precisions)


def top_n(judged: Sequence[JudgedRanking], n: int) -> float:
    """Fraction of reports whose first relevant file has rank <= n."""
    if not judged:
        raise DataError("top_n needs at least one judged ranking")
    if n < 1:
        raise DataError(f"n must be >= 1, got {n}")
    hits = 0
    for j in judged:
        rank = j.first_relevant_rank()
        if rank is not None and rank <= n:
            hits += 1
    return hits / len(judged)


def mean_reciprocal_rank(judged: Sequence[JudgedRanking]) -> float:
    """Mean of 1/first-relevant-rank; a miss contributes zero."""
    if not judged:
        raise DataError("mean_reciprocal_rank needs at least one judged ranking")
    total = 0.0
    for j in judged:
        rank = j.first_relevant_rank()
        if rank is not None:
            total += 1.0 / rank
    return total / len(judged)


def mean_average_precision(judged: Sequence[JudgedRanking]) -> float:
    if not judged:
        raise DataError("mean_average_precision needs at least one judged ranking")
    return sum(average_precision(j.relevance) for j in judged) / len(judged)


def token_overlap(source_texts: Iterable[str], target_texts: Iterable[str]) -> float:
    """|tokens(source) & tokens(target)| / |tokens(source)|.

    Directional on purpose: how much of the source vocabulary the target
    covers, which is not symmetric.
    """
    source = set()
    for text in source_texts:
        source.update(tokenize(text))
    target = set()
    for text in target_texts:
        target.update(tokenize(text))
    if not source:
        raise DataError("source side has no tokens")
    return len(source & target) / len(source)


@dataclass
class ReportOutcome:
    report_id: str
    first_relevant_rank: int | None
    average_precision: float
    truth_size: int


@dataclass
class MetricsReport:
    mode: str
    chunking: str
    top1: float
    top5: float
    top10: float
    mrr: float
    map: float
    n_reports: int
    excluded: tuple[str, ...]
    per_report: list[ReportOutcome] = field(default_factory=list)
    cache_hits: int = 0

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "mode": self.mode,
            "chunking": self.chunking,
            "metrics": {
                "top1": self.top1,
                "top5": self.top5,
                "top10": self.top10,
                "mrr": self.mrr,
                "map": self.map,
            },
            "n_reports": self.n_reports,
            "excluded": list(self.excluded),
            "per_report": [
                {
                    "report_id": r.report_id,
                    "first_relevant_rank": r.first_relevant_rank,
                    "average_precision": r.average_precision,
                    "truth_size": r.truth_size,
                }
                for r in self.per_report
            ],
        }


def summarize(judged: Sequence[JudgedRanking], mode: str, chunking: str,
              excluded: Sequence[str], cache_hits: int = 0) -> MetricsReport:
    if not judged:
        raise DataError("no usable reports were judged")
    per_report = [
        ReportOutcome(
            report_id=j.report_id,
            first_relevant_rank=j.first_relevant_rank(),
            average_precision=average_precision(j.relevance),
            truth_size=j.truth_size,
        )
        for j in judged
    ]
    return MetricsReport(
        mode=mode,
        chunking=chunking,
        top1=top_n(judged, 1),
        top5=top_n(judged, 5),
        top10=top_n(judged, 10),
        mrr=mean_reciprocal_rank(judged),
        map=mean_average_precision(judged),
        n_reports=len(judged),
        excluded=tuple(excluded),
        per_report=per_report,
        cache_hits=cache_hits,
    )


def _snapshot_dir(snapshots_root: Path, repo_name: str, version_id: str) -> Path:
    candidate = snapshots_root / repo_name / version_id
    if not candidate.is_dir():
        raise DataError(
            f"no snapshot for {repo_name}@{version_id}; expected directory {candidate}"
        )
    return candidate


def run_benchmark(
    corpus: CorpusHandle,
    snapshots_root: str | Path,
    config: Config,
    mode: str = "hybrid",
    chunking: str = "dynamic",
    store_root: str | Path | None = None,
) -> MetricsReport:
    """Localize every usable report and score the rankings.

    Snapshots live under ``snapshots_root/<repo_name>/<sha_before>/``.
    Reports sharing a snapshot are grouped so each index is built once;
    with ``store_root`` set, indices are persisted and reused across runs
    and across ablation cells whose configuration matches.
    """
    if mode not in MODES:
        raise DataError(f"mode must be one of {MODES}, got {mode!r}")
    if chunking not in CHUNKERS:
        raise DataError(f"chunking must be one of {sorted(CHUNKERS)}, got {chunking!r}")
    snapshots_root = Path(snapshots_root)
    groups: dict[tuple[str, str], list] = {}
    for report in corpus.reports:
        groups.setdefault((report.repo_name, report.sha_before), []).append(report)

    judged: list[JudgedRanking] = []
    excluded: list[str] = []
    cache_hits = 0
    for (repo_name, version_id), reports in sorted(groups.items()):
        snapshot = load_snapshot(
            _snapshot_dir(snapshots_root, repo_name, version_id), version_id
        )
        validations = {r.id: validate_ground_truth(r, snapshot) for r in reports}
        usable = [r for r in reports if validations[r.id].usable]
        excluded.extend(r.id for r in reports if not validations[r.id].usable)
        if not usable:
            continue

        if store_root is not None:
            localizer, hit = open_indices(
                snapshot, config, chunking, Path(store_root) / repo_name, mode=mode
            )
            cache_hits += hit
        else:
            localizer = build_localizer(config, chunking=chunking, mode=mode).fit(snapshot)

        for report in usable:
            result = localizer.localize(report)
            relevance = judge(result.fused, validations[report.id].present, config.judge_depth)
            judged.append(
                JudgedRanking(
                    report_id=report.id,
                    relevance=relevance,
                    truth_size=len(validations[report.id].present),
                )
            )
    return summarize(judged, mode=mode, chunking=chunking, excluded=excluded, cache_hits=cache_hits)


def run_ablation(
    corpus: CorpusHandle,
    snapshots_root: str | Path,
    config: Config,
    modes: Sequence[str] = ("deep", "hybrid"),
    chunkings: Sequence[str] = ("static", "sliding", "dynamic"),
    store_root: str | Path | None = None,
) -> dict[tuple[str, str], MetricsReport]:
    """Run every (mode, chunking) cell; judged report sets are identical."""
    results = {}
    for mode in modes:
        for chunking in chunkings:
            results[(mode, chunking)] = run_benchmark(
                corpus, snapshots_root, config, mode=mode, chunking=chunking,
                store_root=store_root,
            )
    return results
