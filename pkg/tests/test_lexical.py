import math
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bugloc.errors import DataError
from bugloc.lexical import TOKENIZER_VERSION, Bm25Index, tokenize, tokenize_path


def naive_bm25(docs, query_tokens, doc_id, k1=1.2, b=0.75):
    """Straight transcription of the scoring formula, one term at a time."""
    n_docs = len(docs)
    lengths = {d: len(toks) for d, toks in docs.items()}
    avgdl = sum(lengths.values()) / n_docs
    score = 0.0
    for term in query_tokens:
        containing = sum(1 for toks in docs.values() if term in toks)
        idf = math.log(1 + (n_docs - containing + 0.5) / (containing + 0.5))
        f = docs[doc_id].count(term)
        denom = f + k1 * (1 - b + b * lengths[doc_id] / avgdl)
        score += idf * f * (k1 + 1) / denom
    return score


def test_tokenize_splits_identifier_styles():
    assert tokenize("FontController a_b hello") == [
        "font", "controller", "fontcontroller", "a", "b", "a_b", "hello",
    ]


def test_tokenize_keeps_digits_and_lowercases():
    assert tokenize("HTTPServer2") == ["http", "server2", "httpserver2"]
    assert tokenize("Weird MIX_of3 Things") == ["weird", "mix", "of3", "mix_of3", "things"]


def test_tokenize_path_includes_segments_and_extension():
    assert tokenize_path("src/FontController.java") == [
        "src", "font", "controller", "fontcontroller", "java",
    ]


@given(st.text(max_size=200))
@settings(max_examples=100, deadline=None)
def test_tokenize_output_is_normalized(text):
    tokens = tokenize(text)
    assert tokens == tokenize(text)
    for token in tokens:
        assert re.fullmatch(r"[a-z0-9_]+", token)


def test_single_doc_score_is_exact_idf():
    index = Bm25Index().fit([("d1", "a", None)])
    assert index.score(["a"], "d1") == pytest.approx(math.log(4 / 3), abs=1e-12)


def test_scores_match_naive_reference():
    texts = {
        "d1": "the font controller resizes glyph tables",
        "d2": "controller of font caching and font hints",
        "d3": "network retry loop with backoff",
        "d4": "font",
    }
    index = Bm25Index().fit([(d, t, None) for d, t in texts.items()])
    docs = {d: tokenize(t) for d, t in texts.items()}
    for query in ("font controller", "font font", "backoff", "missing"):
        q = tokenize(query)
        for doc_id in texts:
            assert index.score(q, doc_id) == pytest.approx(naive_bm25(docs, q, doc_id), abs=1e-9)


def test_duplicate_query_terms_accumulate():
    index = Bm25Index().fit([("d1", "alpha beta", None), ("d2", "beta gamma", None)])
    single = index.score(["alpha"], "d1")
    double = index.score(["alpha", "alpha"], "d1")
    assert double == pytest.approx(2 * single, abs=1e-12)


def test_search_omits_zero_scores_and_breaks_ties_by_id():
    index = Bm25Index().fit([("b", "same text", None), ("a", "same text", None), ("c", "other", None)])
    ranked = index.search("same")
    assert ranked.ids() == ["a", "b"]
    assert ranked.tag == "lexical"
    assert index.search("nowhere").ids() == []


def test_search_respects_top_k():
    docs = [(f"d{i}", "token " * (i + 1), None) for i in range(10)]
    ranked = Bm25Index().fit(docs).search("token", top_k=3)
    assert len(ranked.items) == 3


def test_path_tokens_count_toward_match():
    index = Bm25Index().fit([("d1", "body text", "src/FontController.java")])
    assert index.score(["fontcontroller"], "d1") > 0


def test_fit_rejects_duplicates_and_empty():
    with pytest.raises(DataError):
        Bm25Index().fit([("d1", "a", None), ("d1", "b", None)])
    with pytest.raises(DataError):
        Bm25Index().fit([])


def test_score_unknown_doc():
    index = Bm25Index().fit([("d1", "a", None)])
    with pytest.raises(DataError):
        index.score(["a"], "ghost")


def test_unfitted_index_refuses_queries():
    with pytest.raises(Exception):
        Bm25Index().search("a")


def test_serialization_round_trip():
    index = Bm25Index(k1=1.4, b=0.6).fit(
        [("d1", "font controller bug", "src/A.java"), ("d2", "render loop", "src/B.java")]
    )
    clone = Bm25Index.from_dict(index.to_dict())
    query = tokenize("font render loop")
    for doc_id in ("d1", "d2"):
        assert clone.score(query, doc_id) == pytest.approx(index.score(query, doc_id), abs=1e-12)
    assert clone.search("font").ids() == index.search("font").ids()


def test_serialization_rejects_other_tokenizer_version():
    payload = Bm25Index().fit([("d1", "a", None)]).to_dict()
    payload["tokenizer_version"] = "999"
    with pytest.raises(DataError, match="tokenizer"):
        Bm25Index.from_dict(payload)
    assert TOKENIZER_VERSION == "1"


def test_tf_monotonic_at_fixed_length():
    # more query-term mass at equal length should never score lower
    index = Bm25Index().fit(
        [("low", "font aaa bbb ccc", None), ("high", "font font bbb ccc", None)]
    )
    assert index.score(["font"], "high") > index.score(["font"], "low")
