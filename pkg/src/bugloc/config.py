"""Run configuration: one JSON document with full defaults.

Every tunable lives here so a single file (plus one seed) pins an entire
run. ``Config.digest()`` hashes the canonical JSON form; index manifests
store the digest so caches invalidate exactly when any field changes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ._validation import check_at_least, check_in_range, check_positive
from .errors import DataError

DEFAULT_KIND_COSTS = {
    "class": 1.0,
    "interface": 1.0,
    "method": 2.0,
    "function": 2.0,
    "block": 5.0,
    "other": 5.0,
}

SPAN_KINDS = frozenset(DEFAULT_KIND_COSTS)


@dataclass
class Bm25Config:
    k1: float = 1.2
    b: float = 0.75


@dataclass
class EmbeddingConfig:
    provider: str = "builtin"
    endpoint: str | None = None
    dimension: int = 256


@dataclass
class LossConfig:
    tau: float = 0.07
    alpha: float = 2.0
    beta: float = 2.0


@dataclass
class Config:
    window_size: int = 40
    tokens_per_line: int = 12
    kind_costs: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_KIND_COSTS))
    default_cost: float = 100.0
    bm25: Bm25Config = field(default_factory=Bm25Config)
    rrf_k: float = 60
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    candidate_depth: int = 500
    judge_depth: int = 100
    seed: int = 7

    def validate(self) -> "Config":
        check_at_least("window_size", self.window_size, 1)
        check_at_least("tokens_per_line", self.tokens_per_line, 1)
        for kind, cost in self.kind_costs.items():
            if kind not in SPAN_KINDS:
                raise DataError(f"kind_costs has unknown kind {kind!r}")
            check_positive(f"kind_costs[{kind}]", cost, strict=False)
        check_positive("default_cost", self.default_cost)
        check_positive("bm25.k1", self.bm25.k1, strict=False)
        check_in_range("bm25.b", self.bm25.b, 0.0, 1.0)
        check_positive("rrf_k", self.rrf_k, strict=False)
        if self.embedding.provider not in ("builtin", "remote"):
            raise DataError(
                f"embedding.provider must be 'builtin' or 'remote', got {self.embedding.provider!r}"
            )
        if self.embedding.provider == "remote" and not self.embedding.endpoint:
            raise DataError("embedding.provider 'remote' requires embedding.endpoint")
        check_at_least("embedding.dimension", self.embedding.dimension, 2)
        check_positive("loss.tau", self.loss.tau)
        check_at_least("loss.alpha", self.loss.alpha, 1.0)
        check_at_least("loss.beta", self.loss.beta, 1.0)
        check_at_least("candidate_depth", self.candidate_depth, 1)
        check_at_least("judge_depth", self.judge_depth, 1)
        if not isinstance(self.seed, int) or self.seed < 0:
            raise DataError(f"seed must be a non-negative integer, got {self.seed!r}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        if not isinstance(data, dict):
            raise DataError("config must be a JSON object")
        return _build_dataclass(cls, data, path="").validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read config file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def digest(self) -> str:
        """Hash of the canonical JSON form; changes iff any field changes."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _build_dataclass(cls, data: dict, path: str):
    """Recursively construct a config dataclass, rejecting unknown keys."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        key = sorted(unknown)[0]
        where = f"{path}{key}" if path else key
        raise DataError(f"unknown config key: {where}")
    kwargs = {}
    for name, value in data.items():
        nested = _NESTED.get(name)
        if nested is not None:
            if not isinstance(value, dict):
                raise DataError(f"config key {path}{name} must be an object")
            kwargs[name] = _build_dataclass(nested, value, path=f"{path}{name}.")
        else:
            kwargs[name] = value
    return cls(**kwargs)


_NESTED = {"bm25": Bm25Config, "embedding": EmbeddingConfig, "loss": LossConfig}


def window_from_token_budget(token_budget: int, tokens_per_line: int = 12) -> int:
    """Convert a model token budget into a conservative line window."""
    check_at_least("token_budget", token_budget, 1)
    check_at_least("tokens_per_line", tokens_per_line, 1)
    return max(1, token_budget // tokens_per_line)
