import numpy as np
import pytest

from bugloc.errors import DataError, TrainingDiverged
from bugloc.training import (
    HardExampleEmbedder,
    TextPair,
    synthetic_pairs,
    train_history_rows,
)


def split_pairs(pairs, seed=0, train_fraction=0.8):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    shuffled = [pairs[i] for i in order]
    cut = int(len(shuffled) * train_fraction)
    return shuffled[:cut], shuffled[cut:]


def test_synthetic_pairs_shape_and_determinism():
    pairs = synthetic_pairs(n_classes=3, pairs_per_class=5, seed=11)
    assert len(pairs) == 15
    assert sorted({p.label for p in pairs}) == [0, 1, 2]
    again = synthetic_pairs(n_classes=3, pairs_per_class=5, seed=11)
    assert pairs == again
    assert pairs != synthetic_pairs(n_classes=3, pairs_per_class=5, seed=12)
    for p in pairs:
        assert isinstance(p, TextPair)
        assert p.report and p.file


def test_fit_produces_history_and_weights():
    pairs = synthetic_pairs(n_classes=3, pairs_per_class=8, seed=1)
    est = HardExampleEmbedder(dimension=64, epochs=4, batch_pairs=8, seed=1).fit(pairs)
    assert est.weights_.shape == (64, 64)
    assert len(est.history_) == 4
    assert [h.epoch for h in est.history_] == [1, 2, 3, 4]
    for h in est.history_:
        assert np.isfinite(h.loss)
        assert -1.0 <= h.median_neg_sim <= h.median_pos_sim <= 1.0


def test_loss_decreases_and_separation_clears_margin():
    pairs = synthetic_pairs(seed=7)
    train, held = split_pairs(pairs, seed=7)
    est = HardExampleEmbedder(seed=7).fit(train)
    assert est.history_[-1].loss < est.history_[0].loss
    assert est.separation(held) >= 0.2


def test_zero_learning_rate_freezes_training():
    # batches are fixed up front, so lr=0 must repeat the same epoch stats
    pairs = synthetic_pairs(n_classes=3, pairs_per_class=8, seed=5)
    est = HardExampleEmbedder(dimension=32, epochs=3, batch_pairs=4, learning_rate=0.0, seed=5).fit(pairs)
    first = est.history_[0]
    for h in est.history_[1:]:
        assert h.loss == pytest.approx(first.loss, abs=1e-12)
        assert h.median_pos_sim == pytest.approx(first.median_pos_sim, abs=1e-12)
        assert h.median_neg_sim == pytest.approx(first.median_neg_sim, abs=1e-12)
    assert np.array_equal(est.weights_, np.eye(32))


def test_embed_rows_are_unit_norm():
    pairs = synthetic_pairs(n_classes=2, pairs_per_class=6, seed=2)
    est = HardExampleEmbedder(dimension=32, epochs=2, batch_pairs=4, seed=2).fit(pairs)
    vecs = est.embed(["font controller crash", "render loop"])
    assert vecs.shape == (2, 32)
    assert np.allclose(np.linalg.norm(vecs, axis=1), 1.0)
    assert np.array_equal(vecs, est.transform(["font controller crash", "render loop"]))


def test_fit_validates_parameters():
    pairs = synthetic_pairs(n_classes=2, pairs_per_class=4, seed=0)
    with pytest.raises(DataError):
        HardExampleEmbedder(epochs=0).fit(pairs)
    with pytest.raises(DataError):
        HardExampleEmbedder(batch_pairs=1).fit(pairs)
    with pytest.raises(DataError):
        HardExampleEmbedder(tau=0.0).fit(pairs)
    with pytest.raises(DataError):
        HardExampleEmbedder().fit([])


def test_divergence_reports_epoch_and_batch():
    pairs = synthetic_pairs(n_classes=2, pairs_per_class=8, seed=3)
    est = HardExampleEmbedder(dimension=16, epochs=3, batch_pairs=4, learning_rate=1e200, seed=3)
    with np.errstate(over="ignore"), pytest.raises(TrainingDiverged) as err:
        est.fit(pairs)
    assert err.value.epoch >= 1
    assert err.value.batch_index >= 0


def test_separation_is_median_gap():
    pairs = [
        TextPair(report="alpha alpha", file="alpha alpha", label=0),
        TextPair(report="beta beta", file="beta beta", label=1),
    ]
    est = HardExampleEmbedder(dimension=32, epochs=1, batch_pairs=2, learning_rate=0.0, seed=0)
    est.fit(synthetic_pairs(n_classes=2, pairs_per_class=4, seed=0))
    # identical texts embed identically: pos sim 1, cross-pair sim < 1
    assert est.separation(pairs) > 0.0
    with pytest.raises(DataError):
        est.separation([pairs[0]])


def test_train_history_rows_are_serializable():
    pairs = synthetic_pairs(n_classes=2, pairs_per_class=6, seed=4)
    est = HardExampleEmbedder(dimension=32, epochs=2, batch_pairs=4, seed=4).fit(pairs)
    rows = train_history_rows(est)
    assert len(rows) == 2
    assert set(rows[0]) == {"epoch", "loss", "median_pos_sim", "median_neg_sim"}
