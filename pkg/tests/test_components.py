import json
import logging

import pytest

from bugloc.components import (
    ComponentSpan,
    extract_components,
    load_external_spans,
    split_lines,
)
from bugloc.errors import DataError
from conftest import JAVA_SAMPLE, PYTHON_SAMPLE


def spans_by_kind(spans):
    out = {}
    for s in spans:
        out.setdefault(s.kind, []).append(s)
    return out


def test_split_lines_round_trip():
    text = "a\nb\n\nc"
    assert "\n".join(split_lines(text)) == text
    assert split_lines("") == [""]


def test_java_class_and_methods():
    spans = extract_components(JAVA_SAMPLE, "java")
    kinds = spans_by_kind(spans)
    [cls] = kinds["class"]
    assert cls.name == "FontController"
    assert (cls.start_line, cls.end_line) == (1, 12)
    methods = {m.name: (m.start_line, m.end_line) for m in kinds["method"]}
    assert methods == {"resize": (4, 7), "redraw": (9, 11)}


def test_bare_function_is_method_shaped():
    source = "void f() {\n  int x = 1;\n  g(x);\n  h(x);\n}\n"
    spans = extract_components(source, "java")
    assert len(spans) == 1
    span = spans[0]
    assert span.kind == "method"
    assert span.name == "f"
    assert (span.start_line, span.end_line) == (1, 5)


def test_braces_in_comments_and_strings_ignored():
    source = (
        'class A {\n'
        '  // fake open {\n'
        '  /* closed } here */\n'
        '  String s = "{{}}";\n'
        '}\n'
    )
    spans = extract_components(source, "java")
    assert len(spans) == 1
    assert (spans[0].start_line, spans[0].end_line) == (1, 5)


def test_unbalanced_braces_close_at_eof():
    source = "class A {\n  void f() {\n    x();\n"
    spans = extract_components(source, "java")
    ends = {s.name: s.end_line for s in spans}
    total = len(split_lines(source))
    assert ends["A"] == total
    assert ends["f"] == total


def test_go_receiver_and_interface():
    source = (
        "type Shape interface {\n"
        "    Area() float64\n"
        "}\n"
        "\n"
        "func (s *Square) Area() float64 {\n"
        "    return s.side * s.side\n"
        "}\n"
        "\n"
        "func NewSquare(side float64) *Square {\n"
        "    return &Square{side: side}\n"
        "}\n"
    )
    spans = extract_components(source, "go")
    kinds = spans_by_kind(spans)
    assert kinds["interface"][0].name == "Shape"
    assert [m.name for m in kinds["method"]] == ["Area"]
    assert [f.name for f in kinds["function"]] == ["NewSquare"]


def test_control_keyword_is_block_not_method():
    source = "if (ready()) {\n  launch();\n}\n"
    spans = extract_components(source, "java")
    assert [s.kind for s in spans] == ["block"]


def test_python_indent_scanner():
    spans = extract_components(PYTHON_SAMPLE, "python")
    kinds = spans_by_kind(spans)
    [cls] = kinds["class"]
    assert cls.name == "Renderer"
    # class body ends at last non-blank nested line
    assert (cls.start_line, cls.end_line) == (1, 6)
    methods = {m.name: (m.start_line, m.end_line) for m in kinds["method"]}
    assert methods == {"draw": (2, 3), "clear": (5, 6)}
    [fn] = kinds["function"]
    assert fn.name == "helper"
    assert (fn.start_line, fn.end_line) == (9, 10)


def test_python_async_def():
    source = "async def fetch():\n    return 1\n"
    spans = extract_components(source, "python")
    assert [(s.kind, s.name) for s in spans] == [("function", "fetch")]


def test_unsupported_language_warns_and_returns_nothing(caplog):
    with caplog.at_level(logging.WARNING):
        spans = extract_components("whatever", "brainfuck")
    assert spans == []
    assert any("brainfuck" in rec.message for rec in caplog.records)


def test_component_span_validation():
    with pytest.raises(DataError):
        ComponentSpan(kind="widget", name="x", start_line=1, end_line=2)
    with pytest.raises(DataError):
        ComponentSpan(kind="class", name="x", start_line=0, end_line=2)
    with pytest.raises(DataError):
        ComponentSpan(kind="class", name="x", start_line=5, end_line=4)


def test_load_external_spans(tmp_path):
    path = tmp_path / "spans.json"
    path.write_text(
        json.dumps(
            [
                {"kind": "method", "name": "b", "start_line": 10, "end_line": 12},
                {"kind": "class", "name": "a", "start_line": 1, "end_line": 20},
            ]
        ),
        encoding="utf-8",
    )
    spans = load_external_spans(path)
    assert [s.name for s in spans] == ["a", "b"]


def test_load_external_spans_reports_bad_entry(tmp_path):
    path = tmp_path / "spans.json"
    path.write_text(json.dumps([{"kind": "method"}]), encoding="utf-8")
    with pytest.raises(DataError, match="0"):
        load_external_spans(path)


def test_spans_stay_within_file():
    for language, source in (("java", JAVA_SAMPLE), ("python", PYTHON_SAMPLE)):
        total = len(split_lines(source))
        for span in extract_components(source, language):
            assert 1 <= span.start_line <= span.end_line <= total
