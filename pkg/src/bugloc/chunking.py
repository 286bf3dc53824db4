"""Source file chunking: cost-based dynamic programming plus two baselines.

A file of n lines is cut into consecutive chunks of at most ``window_size``
lines. Cutting after line i costs ``split_cost(i)``: cheap at component
boundaries (a class or method ends there), expensive mid-component. The
dynamic program minimizes the total cost of all cuts, including the final
cut at the last line; ties prefer the earlier breakpoint. Static windows
and an overlapping sliding window serve as baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .components import ComponentSpan, extract_components, split_lines
from .config import DEFAULT_KIND_COSTS
from .corpus import SnapshotFiles
from .errors import DataError

DEFAULT_COST = 100.0


@dataclass(frozen=True)
class SplitCostMap:
    """Split cost per 1-based line; lines not listed cost ``default_cost``."""

    cost_at: Mapping[int, float]
    default_cost: float
    total_lines: int

    def __post_init__(self):
        if self.total_lines < 1:
            raise DataError(f"total_lines must be >= 1, got {self.total_lines}")
        if not (self.default_cost > 0 and math.isfinite(self.default_cost)):
            raise DataError(f"default_cost must be positive and finite, got {self.default_cost}")
        for line, cost in self.cost_at.items():
            if not (1 <= line <= self.total_lines):
                raise DataError(f"cost map line {line} outside [1, {self.total_lines}]")
            if cost < 0 or not math.isfinite(cost):
                raise DataError(f"cost at line {line} must be finite and >= 0, got {cost}")
        object.__setattr__(self, "cost_at", MappingProxyType(dict(self.cost_at)))

    def split_cost(self, line: int) -> float:
        return self.cost_at.get(line, self.default_cost)


@dataclass(frozen=True)
class ChunkPlan:
    """Breakpoints of one file: chunk ends, strictly increasing, last = n."""

    breakpoints: tuple[int, ...]
    window_size: int
    total_cost: float | None = None
    dp_table: tuple[tuple[float, int], ...] | None = None

    def __post_init__(self):
        if self.window_size < 1:
            raise DataError(f"window_size must be >= 1, got {self.window_size}")
        if not self.breakpoints:
            raise DataError("a chunk plan needs at least one breakpoint")
        prev = 0
        for bp in self.breakpoints:
            if bp <= prev:
                raise DataError("breakpoints must be strictly increasing")
            if bp - prev > self.window_size:
                raise DataError(
                    f"chunk ({prev + 1}..{bp}) exceeds window of {self.window_size} lines"
                )
            prev = bp

    @property
    def total_lines(self) -> int:
        return self.breakpoints[-1]

    def segments(self) -> list[tuple[int, int]]:
        """Inclusive (start, end) line pairs covering 1..total_lines."""
        out = []
        prev = 0
        for bp in self.breakpoints:
            out.append((prev + 1, bp))
            prev = bp
        return out


@dataclass(frozen=True)
class Chunk:
    file_path: str
    start_line: int
    end_line: int
    text: str

    @property
    def id(self) -> str:
        return f"{self.file_path}:{self.start_line}-{self.end_line}"


def build_cost_map(
    spans: Iterable[ComponentSpan],
    total_lines: int,
    kind_costs: Mapping[str, float] | None = None,
    default_cost: float = DEFAULT_COST,
) -> SplitCostMap:
    """Map each component's end line to its kind cost; keep the minimum on collision."""
    costs = DEFAULT_KIND_COSTS if kind_costs is None else kind_costs
    cost_at: dict[int, float] = {}
    for span in spans:
        if span.end_line > total_lines:
            raise DataError(
                f"span {span.name!r} ends at line {span.end_line}, file has {total_lines}"
            )
        cost = costs.get(span.kind, default_cost)
        line = span.end_line
        if line not in cost_at or cost < cost_at[line]:
            cost_at[line] = cost
    return SplitCostMap(cost_at=cost_at, default_cost=default_cost, total_lines=total_lines)


def dynamic_chunk(cost_map: SplitCostMap, window_size: int) -> ChunkPlan:
    """Minimum-cost chunking by dynamic programming.

    dp[i] is the cheapest way to cut lines 1..i into chunks of at most
    ``window_size`` lines, where every chunk ending at line e pays
    ``split_cost(e)``. Scanning candidate predecessors in ascending order
    with a strict improvement test breaks ties toward the earlier one.
    """
    if window_size < 1:
        raise DataError(f"window_size must be >= 1, got {window_size}")
    n = cost_map.total_lines
    inf = math.inf
    dp_cost = [0.0] + [inf] * n
    dp_prev = [-1] * (n + 1)
    for i in range(1, n + 1):
        end_cost = cost_map.split_cost(i)
        best = inf
        best_j = -1
        for j in range(max(i - window_size, 0), i):
            candidate = dp_cost[j] + end_cost
            if candidate < best:
                best = candidate
                best_j = j
        dp_cost[i] = best
        dp_prev[i] = best_j

    breakpoints = []
    i = n
    while i > 0:
        breakpoints.append(i)
        i = dp_prev[i]
    breakpoints.reverse()
    table = tuple((dp_cost[i], dp_prev[i]) for i in range(1, n + 1))
    return ChunkPlan(
        breakpoints=tuple(breakpoints),
        window_size=window_size,
        total_cost=dp_cost[n],
        dp_table=table,
    )


def static_chunk(total_lines: int, window_size: int) -> ChunkPlan:
    """Fixed windows: breakpoints at window multiples, last at total_lines."""
    if total_lines < 1:
        raise DataError(f"total_lines must be >= 1, got {total_lines}")
    if window_size < 1:
        raise DataError(f"window_size must be >= 1, got {window_size}")
    breakpoints = list(range(window_size, total_lines + 1, window_size))
    if not breakpoints or breakpoints[-1] != total_lines:
        breakpoints.append(total_lines)
    return ChunkPlan(breakpoints=tuple(breakpoints), window_size=window_size)


def sliding_spans(total_lines: int, window_size: int, stride: int) -> list[tuple[int, int]]:
    """Overlapping (start, end) windows advancing by ``stride`` lines."""
    if total_lines < 1:
        raise DataError(f"total_lines must be >= 1, got {total_lines}")
    if window_size < 1:
        raise DataError(f"window_size must be >= 1, got {window_size}")
    if not (1 <= stride <= window_size):
        raise DataError(f"stride must lie in [1, window_size], got {stride}")
    spans = []
    start = 1
    while True:
        end = min(start + window_size - 1, total_lines)
        spans.append((start, end))
        if end >= total_lines:
            return spans
        start += stride


def _materialize(source: str, file_path: str, segments: Sequence[tuple[int, int]]) -> list[Chunk]:
    lines = split_lines(source)
    return [
        Chunk(
            file_path=file_path,
            start_line=start,
            end_line=end,
            text="\n".join(lines[start - 1 : end]),
        )
        for start, end in segments
    ]


def apply_plan(source: str, plan: ChunkPlan, file_path: str = "") -> list[Chunk]:
    """Cut the source according to the plan; chunk texts rejoin to the source."""
    lines = split_lines(source)
    if plan.total_lines != len(lines):
        raise DataError(
            f"plan covers {plan.total_lines} lines but source has {len(lines)}"
        )
    return _materialize(source, file_path, plan.segments())


def sliding_chunk(source: str, window_size: int, stride: int, file_path: str = "") -> list[Chunk]:
    """Overlapping chunks over the source text."""
    lines = split_lines(source)
    return _materialize(source, file_path, sliding_spans(len(lines), window_size, stride))


def _iter_sources(X):
    if isinstance(X, SnapshotFiles):
        yield from X.iter_sources()
    else:
        for path, text, language in X:
            yield path, text, language


class _ChunkerBase(BaseEstimator, TransformerMixin):
    """Chunkers are stateless transformers over (path, text, language) triples."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> list[Chunk]:
        chunks = []
        for path, text, language in _iter_sources(X):
            chunks.extend(self.chunk_file(text, path, language))
        return chunks

    def chunk_file(self, source: str, file_path: str, language: str) -> list[Chunk]:
        raise NotImplementedError


class DynamicChunker(_ChunkerBase):
    """Cost-based chunking along component boundaries.

    ``span_loader`` overrides component extraction; it receives
    (source, file_path, language) and returns ComponentSpan objects.
    """

    def __init__(self, window_size=40, kind_costs=None, default_cost=DEFAULT_COST, span_loader=None):
        self.window_size = window_size
        self.kind_costs = kind_costs
        self.default_cost = default_cost
        self.span_loader = span_loader

    def plan_file(self, source: str, file_path: str = "", language: str = "unknown") -> ChunkPlan:
        lines = split_lines(source)
        if self.span_loader is not None:
            spans = self.span_loader(source, file_path, language)
        else:
            spans = extract_components(source, language)
        cost_map = build_cost_map(
            spans, len(lines), kind_costs=self.kind_costs, default_cost=self.default_cost
        )
        return dynamic_chunk(cost_map, self.window_size)

    def chunk_file(self, source: str, file_path: str, language: str) -> list[Chunk]:
        plan = self.plan_file(source, file_path, language)
        return apply_plan(source, plan, file_path)


class StaticChunker(_ChunkerBase):
    """Fixed non-overlapping windows."""

    def __init__(self, window_size=40):
        self.window_size = window_size

    def chunk_file(self, source: str, file_path: str, language: str) -> list[Chunk]:
        plan = static_chunk(len(split_lines(source)), self.window_size)
        return apply_plan(source, plan, file_path)


class SlidingChunker(_ChunkerBase):
    """Overlapping windows; stride defaults to half the window."""

    def __init__(self, window_size=40, stride=None):
        self.window_size = window_size
        self.stride = stride

    def chunk_file(self, source: str, file_path: str, language: str) -> list[Chunk]:
        stride = self.stride if self.stride is not None else max(1, self.window_size // 2)
        return sliding_chunk(source, self.window_size, stride, file_path)


CHUNKERS = {"dynamic": DynamicChunker, "static": StaticChunker, "sliding": SlidingChunker}


def make_chunker(mode: str, window_size: int, kind_costs=None, default_cost=DEFAULT_COST, stride=None):
    if mode == "dynamic":
        return DynamicChunker(window_size=window_size, kind_costs=kind_costs, default_cost=default_cost)
    if mode == "static":
        return StaticChunker(window_size=window_size)
    if mode == "sliding":
        return SlidingChunker(window_size=window_size, stride=stride)
    raise DataError(f"unknown chunking mode {mode!r}; expected one of {sorted(CHUNKERS)}")
