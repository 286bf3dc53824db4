"""Input validation helpers used by the estimators and numeric kernels."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import DataError


def check_positive(name: str, value, strict: bool = True) -> None:
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise DataError(f"{name} must be a finite number, got {value!r}")
    if strict and value <= 0:
        raise DataError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise DataError(f"{name} must be >= 0, got {value}")


def check_in_range(name: str, value, lo, hi) -> None:
    if not isinstance(value, numbers.Real) or not (lo <= value <= hi):
        raise DataError(f"{name} must lie in [{lo}, {hi}], got {value!r}")


def check_at_least(name: str, value, lo) -> None:
    if not isinstance(value, numbers.Real) or value < lo:
        raise DataError(f"{name} must be >= {lo}, got {value!r}")


def as_float_matrix(X, name: str = "array") -> np.ndarray:
    """Coerce to a 2-D float64 array and require finite entries."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise DataError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DataError(f"{name} contains non-finite values")
    return A


def check_unit_rows(X, name: str = "embeddings", atol: float = 1e-6) -> np.ndarray:
    """Validate that every row of ``X`` has unit L2 norm."""
    A = as_float_matrix(X, name)
    norms = np.linalg.norm(A, axis=1)
    bad = np.nonzero(np.abs(norms - 1.0) > atol)[0]
    if bad.size:
        raise DataError(
            f"{name} rows must be unit-norm; row {bad[0]} has norm {norms[bad[0]]:.6g}"
        )
    return A


def check_square(S, name: str = "similarity matrix") -> np.ndarray:
    A = as_float_matrix(S, name)
    if A.shape[0] != A.shape[1]:
        raise DataError(f"{name} must be square, got shape {A.shape}")
    return A
