import pytest
from hypothesis import given
from hypothesis import strategies as st

from bugloc.ranking import RankedList


def test_from_scores_orders_by_score_then_id():
    ranked = RankedList.from_scores("t", {"b": 1.0, "a": 1.0, "c": 2.0})
    assert ranked.ids() == ["c", "a", "b"]
    assert ranked.rank_of("c") == 1
    assert ranked.rank_of("a") == 2
    assert ranked.rank_of("b") == 3


def test_rank_and_score_lookup():
    ranked = RankedList.from_scores("t", [("x", 3.0), ("y", 1.5)])
    assert ranked.score_of("x") == 3.0
    assert ranked.score_of("y") == 1.5
    assert ranked.rank_of("missing") is None
    assert ranked.score_of("missing") is None


def test_truncated_keeps_prefix():
    ranked = RankedList.from_scores("t", {"a": 3.0, "b": 2.0, "c": 1.0})
    cut = ranked.truncated(2)
    assert cut.ids() == ["a", "b"]
    assert cut.tag == ranked.tag
    assert ranked.truncated(10).ids() == ["a", "b", "c"]


def test_rejects_increasing_scores():
    with pytest.raises(ValueError):
        RankedList(tag="t", items=(("a", 1.0), ("b", 2.0)))


def test_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        RankedList(tag="t", items=(("a", 2.0), ("a", 1.0)))


@given(st.dictionaries(st.text(min_size=1, max_size=6), st.floats(-100, 100), min_size=1, max_size=20))
def test_from_scores_ranks_are_dense_and_one_based(scores):
    ranked = RankedList.from_scores("t", scores)
    assert sorted(ranked.rank_of(i) for i in scores) == list(range(1, len(scores) + 1))
    pairs = ranked.items
    assert all(pairs[i][1] >= pairs[i + 1][1] for i in range(len(pairs) - 1))
