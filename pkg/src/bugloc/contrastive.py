"""Contrastive losses over in-batch similarities, with hard-example weighting.

A batch is one list of N embeddings; ``positives`` maps each anchor row i
to the column j of its positive partner, every other column being a
negative for that anchor. The plain loss for anchor i is

    L_i = -log( exp(S[i,j]/tau) / sum_{k != i} exp(S[i,k]/tau) )

The hard-example variant multiplies each term by a mask entry: negatives
more similar than the batch median get weight alpha, positives less
similar than the median get beta, everything else stays 1. The median is
taken over the labeled (anchor, candidate) pair similarities, positives
and negatives together; comparisons are strict, so a pair sitting exactly
at the median keeps weight 1. With alpha = beta = 1 the masked loss is
exactly the plain one.

Gradients are taken with respect to the raw (pre-normalization)
embeddings: cosine normalization happens inside, so scaling all raw
vectors leaves the similarities, the mask, and the loss unchanged. The
mask is piecewise constant in the similarities, so away from median ties
the analytic gradient below is the exact derivative, which is what the
finite-difference checks in the test suite verify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._validation import as_float_matrix, check_positive, check_square, check_unit_rows
from .errors import DataError


def _check_positive_pairs(n: int, positives: Mapping[int, int]) -> dict[int, int]:
    if not positives:
        raise DataError("positives must map at least one anchor row to its positive column")
    clean = {}
    for i, j in positives.items():
        if not (0 <= i < n and 0 <= j < n):
            raise DataError(f"positive pair ({i}, {j}) outside batch of size {n}")
        if i == j:
            raise DataError(f"anchor {i} cannot be its own positive")
        clean[int(i)] = int(j)
    return clean


def similarity_matrix(embeddings) -> np.ndarray:
    """Pairwise dot products of unit-norm embeddings: symmetric, diagonal 1."""
    Z = check_unit_rows(embeddings, name="batch embeddings")
    if Z.shape[0] < 2:
        raise DataError("a batch needs at least two embeddings")
    return Z @ Z.T


def _row_logsumexp(values: np.ndarray) -> float:
    peak = values.max()
    return peak + np.log(np.exp(values - peak).sum())


def ntxent_loss(S, positives: Mapping[int, int], tau: float = 0.07) -> tuple[dict[int, float], float]:
    """Plain normalized-temperature cross entropy on a similarity matrix.

    Returns (per-anchor losses, mean). The denominator for anchor i sums
    over every column except i itself, so the positive term appears in
    both numerator and denominator and the loss is non-negative.
    """
    S = check_square(S)
    check_positive("tau", tau)
    pairs = _check_positive_pairs(S.shape[0], positives)
    per_anchor: dict[int, float] = {}
    for i, j in pairs.items():
        row = S[i] / tau
        others = np.delete(row, i)
        per_anchor[i] = float(_row_logsumexp(others) - row[j])
    mean = float(np.mean(list(per_anchor.values())))
    return per_anchor, mean


def pair_median(S, positives: Mapping[int, int]) -> float:
    """Median similarity over all labeled (anchor, candidate) pairs."""
    S = check_square(S)
    pairs = _check_positive_pairs(S.shape[0], positives)
    values = [S[i, k] for i in pairs for k in range(S.shape[0]) if k != i]
    return float(np.median(values))


def hard_mask(S, positives: Mapping[int, int], alpha: float = 2.0, beta: float = 2.0) -> np.ndarray:
    """Per-pair weights: alpha for hard negatives, beta for hard positives.

    A negative is hard when its similarity is strictly above the batch
    median; a positive is hard when strictly below. Everything else,
    including the diagonal and pairs tied with the median, stays 1.
    """
    S = check_square(S)
    if not (alpha >= 1.0 and beta >= 1.0):
        raise DataError(f"alpha and beta must be >= 1, got alpha={alpha}, beta={beta}")
    pairs = _check_positive_pairs(S.shape[0], positives)
    mu = pair_median(S, pairs)
    n = S.shape[0]
    M = np.ones((n, n))
    for i, j in pairs.items():
        for k in range(n):
            if k == i:
                continue
            if k == j:
                if S[i, k] < mu:
                    M[i, k] = beta
            elif S[i, k] > mu:
                M[i, k] = alpha
    return M


@dataclass(frozen=True)
class LossReport:
    """Hard-example loss with everything a training step needs."""

    loss: float
    anchor_losses: dict[int, float]
    gradients: np.ndarray  # d loss / d raw embedding, one row per batch row
    mask: np.ndarray
    median: float
    hard_negatives: int
    hard_positives: int


def hard_ntxent_loss(
    embeddings,
    positives: Mapping[int, int],
    tau: float = 0.07,
    alpha: float = 2.0,
    beta: float = 2.0,
) -> LossReport:
    """Hard-example-weighted contrastive loss with analytic gradients.

    ``embeddings`` are raw vectors; they are L2-normalized internally, and
    the returned gradients are with respect to the raw inputs (the chain
    rule through the normalization is included).
    """
    V = as_float_matrix(embeddings, name="embeddings")
    if V.shape[0] < 2:
        raise DataError("a batch needs at least two embeddings")
    check_positive("tau", tau)
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise DataError("embedding norms must be non-zero and finite")
    Z = V / norms[:, None]
    S = Z @ Z.T
    pairs = _check_positive_pairs(V.shape[0], positives)
    mu = pair_median(S, pairs)
    M = hard_mask(S, pairs, alpha=alpha, beta=beta)

    n = V.shape[0]
    n_anchors = len(pairs)
    log_mask = np.log(M)
    anchor_losses: dict[int, float] = {}
    grad_S = np.zeros((n, n))
    for i, j in pairs.items():
        logits = S[i] / tau + log_mask[i]
        keep = np.arange(n) != i
        lse = _row_logsumexp(logits[keep])
        anchor_losses[i] = float(lse - logits[j])
        probs = np.exp(logits[keep] - lse)
        grad_S[i, keep] += probs / (tau * n_anchors)
        grad_S[i, j] -= 1.0 / (tau * n_anchors)

    loss = float(np.mean(list(anchor_losses.values())))
    if not np.isfinite(loss):
        raise DataError("contrastive loss is not finite")

    # back through S = Z Z^T, then through z = v / |v|
    grad_Z = (grad_S + grad_S.T) @ Z
    radial = np.sum(grad_Z * Z, axis=1, keepdims=True)
    grad_V = (grad_Z - Z * radial) / norms[:, None]

    hard_negatives = 0
    hard_positives = 0
    for i, j in pairs.items():
        for k in range(n):
            if k == i:
                continue
            if k == j:
                hard_positives += S[i, k] < mu
            else:
                hard_negatives += S[i, k] > mu

    return LossReport(
        loss=loss,
        anchor_losses=anchor_losses,
        gradients=grad_V,
        mask=M,
        median=mu,
        hard_negatives=int(hard_negatives),
        hard_positives=int(hard_positives),
    )


@dataclass(frozen=True)
class ContrastiveBatch:
    """One training batch: raw embeddings plus anchor -> positive pairing."""

    embeddings: np.ndarray
    positives: dict[int, int]
    tau: float = 0.07
    alpha: float = 2.0
    beta: float = 2.0

    @classmethod
    def from_pairs(cls, anchor_vectors, partner_vectors, tau=0.07, alpha=2.0, beta=2.0):
        """Interleave (anchor, partner) rows; anchors at even rows."""
        A = as_float_matrix(anchor_vectors, name="anchor vectors")
        B = as_float_matrix(partner_vectors, name="partner vectors")
        if A.shape != B.shape:
            raise DataError("anchor and partner vector arrays must have equal shape")
        stacked = np.empty((2 * A.shape[0], A.shape[1]))
        stacked[0::2] = A
        stacked[1::2] = B
        positives = {2 * t: 2 * t + 1 for t in range(A.shape[0])}
        return cls(embeddings=stacked, positives=positives, tau=tau, alpha=alpha, beta=beta)

    def loss_report(self) -> LossReport:
        return hard_ntxent_loss(
            self.embeddings, self.positives, tau=self.tau, alpha=self.alpha, beta=self.beta
        )
