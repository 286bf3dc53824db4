"""Ranked result lists shared by the lexical, vector, and fusion stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


@dataclass(frozen=True)
class RankedList:
    """An ordered list of (item id, score) pairs produced by one retriever.

    Scores are non-increasing and ids unique; ranks are 1-based. Equal
    scores are ordered by id ascending so every ranking is deterministic.
    """

    tag: str
    items: tuple[tuple[str, float], ...]
    _rank_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        prev = None
        for item_id, score in self.items:
            if item_id in seen:
                raise ValueError(f"duplicate id in ranked list: {item_id!r}")
            seen.add(item_id)
            if prev is not None and score > prev:
                raise ValueError("ranked list scores must be non-increasing")
            prev = score
        index = {item_id: pos for pos, (item_id, _) in enumerate(self.items, start=1)}
        object.__setattr__(self, "_rank_index", index)

    @classmethod
    def from_scores(cls, tag: str, scores: Mapping[str, float] | Iterable[tuple[str, float]]) -> "RankedList":
        """Build a ranking sorted by score descending, ties by id ascending."""
        pairs = scores.items() if isinstance(scores, Mapping) else scores
        ordered = sorted(pairs, key=lambda kv: (-kv[1], kv[0]))
        return cls(tag=tag, items=tuple(ordered))

    def __len__(self) -> int:
        return len(self.items)

    def ids(self) -> list[str]:
        return [item_id for item_id, _ in self.items]

    def rank_of(self, item_id: str) -> int | None:
        """1-based rank of ``item_id``, or None when absent."""
        return self._rank_index.get(item_id)

    def score_of(self, item_id: str) -> float | None:
        rank = self._rank_index.get(item_id)
        return None if rank is None else self.items[rank - 1][1]

    def truncated(self, depth: int) -> "RankedList":
        if depth < 0:
            raise ValueError("depth must be >= 0")
        return RankedList(tag=self.tag, items=self.items[:depth])
