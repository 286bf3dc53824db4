"""A small trainable embedder demonstrating the hard-example loss end to end.

The model is deliberately tiny: a square linear map over hashed
bag-of-tokens features, trained by full gradient descent on the
hard-example contrastive loss. It exists to show the loss working --
report/file pairs pulled together, mismatched pairs pushed apart -- on a
synthetic dataset with planted classes, not to replace a real encoder.

Batches are formed once from a seeded shuffle and reused every epoch, so
a zero learning rate provably yields a constant history. All randomness
flows from the single ``seed`` parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_at_least, check_positive
from .contrastive import ContrastiveBatch
from .errors import DataError, TrainingDiverged
from .vector import HashingEmbedder

_SHARED_WORDS = (
    "error", "bug", "crash", "fix", "issue", "report", "update", "value",
    "data", "handler", "process", "result", "trace", "log", "state", "check",
)
_CLASS_STEMS = (
    "render", "glyph", "socket", "packet", "cache", "evict", "parser",
    "grammar", "cursor", "scroll", "theme", "palette", "quota", "billing",
)
_CODE_WORDS = ("public", "void", "return", "class", "static", "final", "int", "string")


@dataclass(frozen=True)
class TextPair:
    """One positive (bug report, source file) pair from a planted class."""

    report: str
    file: str
    label: int


def synthetic_pairs(
    n_classes: int = 6,
    pairs_per_class: int = 20,
    seed: int = 7,
    class_words: int = 8,
    shared_words: int = 4,
) -> list[TextPair]:
    """Linearly separable report/file pairs: each class has its own vocabulary.

    Shared filler words appear on both sides of every class, so raw hashed
    features start entangled and training has something to do.
    """
    if n_classes < 2:
        raise DataError("need at least two classes for contrastive training")
    check_at_least("pairs_per_class", pairs_per_class, 1)
    rng = np.random.default_rng(seed)
    vocab = [
        [f"{stem}{c}" for stem in _CLASS_STEMS[: max(class_words, 2)]]
        for c in range(n_classes)
    ]
    pairs = []
    for c in range(n_classes):
        for _ in range(pairs_per_class):
            topic = list(rng.choice(vocab[c], size=class_words, replace=True))
            noise = list(rng.choice(_SHARED_WORDS, size=shared_words, replace=True))
            report = " ".join(topic[: class_words // 2 + 2] + noise)
            body_words = topic[class_words // 2 - 1 :] + list(
                rng.choice(_SHARED_WORDS, size=shared_words, replace=True)
            )
            file_lines = [
                f"{rng.choice(_CODE_WORDS)} {word}" for word in body_words
            ]
            pairs.append(TextPair(report=report, file="\n".join(file_lines), label=c))
    order = rng.permutation(len(pairs))
    return [pairs[i] for i in order]


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    median_pos_sim: float
    median_neg_sim: float


class HardExampleEmbedder(BaseEstimator):
    """Linear map over hashed token features, trained with the hard loss.

    ``fit`` accepts (report_text, file_text) pairs (TextPair works too);
    anchors are the report rows and every non-partner row in a batch is a
    negative. ``batch_pairs`` counts pairs, so a batch holds twice that
    many embeddings.
    """

    def __init__(
        self,
        dimension: int = 128,
        tau: float = 0.07,
        alpha: float = 2.0,
        beta: float = 2.0,
        epochs: int = 15,
        batch_pairs: int = 16,
        learning_rate: float = 0.5,
        lr_decay: float = 0.9,
        seed: int = 7,
    ):
        self.dimension = dimension
        self.tau = tau
        self.alpha = alpha
        self.beta = beta
        self.epochs = epochs
        self.batch_pairs = batch_pairs
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.seed = seed

    def _features(self, texts: Sequence[str]) -> np.ndarray:
        return HashingEmbedder(dimension=self.dimension).embed(texts)

    @staticmethod
    def _as_texts(pairs) -> list[tuple[str, str]]:
        out = []
        for pair in pairs:
            if isinstance(pair, TextPair):
                out.append((pair.report, pair.file))
            else:
                report, file_text = pair
                out.append((report, file_text))
        return out

    def fit(self, pairs) -> "HardExampleEmbedder":
        check_positive("tau", self.tau)
        check_at_least("alpha", self.alpha, 1.0)
        check_at_least("beta", self.beta, 1.0)
        check_at_least("epochs", self.epochs, 1)
        check_at_least("batch_pairs", self.batch_pairs, 2)
        check_positive("learning_rate", self.learning_rate, strict=False)
        check_positive("lr_decay", self.lr_decay)
        texts = self._as_texts(pairs)
        if len(texts) < 2:
            raise DataError("need at least two pairs to form negatives")

        report_feats = self._features([r for r, _ in texts])
        file_feats = self._features([f for _, f in texts])

        rng = np.random.default_rng(self.seed)
        order = rng.permutation(len(texts))
        batches = [
            order[i : i + self.batch_pairs]
            for i in range(0, len(order), self.batch_pairs)
        ]
        # a trailing singleton cannot form a negative; fold it into its neighbor
        if len(batches) > 1 and len(batches[-1]) < 2:
            batches[-2] = np.concatenate([batches[-2], batches[-1]])
            batches.pop()

        W = np.eye(self.dimension)
        history: list[EpochStats] = []
        for epoch in range(self.epochs):
            lr = self.learning_rate * self.lr_decay**epoch
            epoch_losses = []
            for batch_index, batch in enumerate(batches):
                phi_r = report_feats[batch]
                phi_f = file_feats[batch]
                contrastive = ContrastiveBatch.from_pairs(
                    phi_r @ W.T, phi_f @ W.T, tau=self.tau, alpha=self.alpha, beta=self.beta
                )
                try:
                    report = contrastive.loss_report()
                except DataError as exc:
                    raise TrainingDiverged(
                        f"loss became non-finite at epoch {epoch + 1}, batch {batch_index}: {exc}",
                        epoch=epoch + 1,
                        batch_index=batch_index,
                    ) from exc
                epoch_losses.append(report.loss)
                phi = np.empty_like(report.gradients)
                phi[0::2] = phi_r
                phi[1::2] = phi_f
                grad_W = report.gradients.T @ phi
                W = W - lr * grad_W
                if not np.all(np.isfinite(W)):
                    raise TrainingDiverged(
                        f"weights became non-finite at epoch {epoch + 1}, batch {batch_index}",
                        epoch=epoch + 1,
                        batch_index=batch_index,
                    )
            self.weights_ = W
            pos_med, neg_med = self._similarity_medians(report_feats, file_feats)
            history.append(
                EpochStats(
                    epoch=epoch + 1,
                    loss=float(np.mean(epoch_losses)),
                    median_pos_sim=pos_med,
                    median_neg_sim=neg_med,
                )
            )
        self.history_ = history
        return self

    def _transform_features(self, feats: np.ndarray) -> np.ndarray:
        raw = feats @ self.weights_.T
        norms = np.linalg.norm(raw, axis=1)
        if np.any(norms == 0.0):
            raise DataError("trained map produced a zero embedding")
        return raw / norms[:, None]

    def _similarity_medians(self, report_feats, file_feats) -> tuple[float, float]:
        zr = self._transform_features(report_feats)
        zf = self._transform_features(file_feats)
        sims = zr @ zf.T
        pos = np.diag(sims)
        neg = sims[~np.eye(sims.shape[0], dtype=bool)]
        return float(np.median(pos)), float(np.median(neg))

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("HardExampleEmbedder is not fitted; call fit(pairs) first")

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        self._check_fitted()
        return self._transform_features(self._features(texts))

    def transform(self, texts: Sequence[str]) -> np.ndarray:
        return self.embed(texts)

    def separation(self, pairs) -> float:
        """Median positive minus median negative similarity on given pairs."""
        self._check_fitted()
        texts = self._as_texts(pairs)
        if len(texts) < 2:
            raise DataError("need at least two pairs to measure separation")
        pos_med, neg_med = self._similarity_medians(
            self._features([r for r, _ in texts]),
            self._features([f for _, f in texts]),
        )
        return pos_med - neg_med


def train_history_rows(embedder: HardExampleEmbedder) -> list[dict]:
    """History as plain dicts in CSV column order."""
    embedder._check_fitted()
    return [
        {
            "epoch": h.epoch,
            "loss": h.loss,
            "median_pos_sim": h.median_pos_sim,
            "median_neg_sim": h.median_neg_sim,
        }
        for h in embedder.history_
    ]
