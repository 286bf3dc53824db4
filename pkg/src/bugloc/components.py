"""Structural component extraction without a full parser.

Brace-family languages (java, cpp, go, javascript) are scanned with a
small state machine that tracks strings and comments while matching
delimiters; block headers are classified with regexes. Python uses the
indentation rule. The output is only used to place chunk boundaries, so
a lightweight scan is enough: malformed input must never crash, and
unbalanced delimiters simply close at end of file.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .config import SPAN_KINDS
from .errors import DataError

log = logging.getLogger(__name__)

BRACE_LANGUAGES = frozenset({"java", "cpp", "go", "javascript"})
INDENT_LANGUAGES = frozenset({"python"})
SUPPORTED_LANGUAGES = BRACE_LANGUAGES | INDENT_LANGUAGES


def split_lines(source: str) -> list[str]:
    """Split on newlines only, so joining chunks reproduces the source exactly."""
    return source.split("\n")


@dataclass(frozen=True)
class ComponentSpan:
    """One structural component, 1-based inclusive line span."""

    kind: str
    name: str
    start_line: int
    end_line: int

    def __post_init__(self):
        if self.kind not in SPAN_KINDS:
            raise DataError(f"unknown span kind {self.kind!r}")
        if self.start_line < 1:
            raise DataError(f"span start_line must be >= 1, got {self.start_line}")
        if self.end_line < self.start_line:
            raise DataError(
                f"span end_line {self.end_line} precedes start_line {self.start_line}"
            )


_CLASS_RE = re.compile(r"\b(?:class|struct)\s+([A-Za-z_]\w*)")
_INTERFACE_RE = re.compile(r"\binterface\s+([A-Za-z_]\w*)")
_GO_FUNC_RE = re.compile(r"\bfunc\b\s*(\([^)]*\))?\s*([A-Za-z_]\w*)?")
_JS_FUNCTION_RE = re.compile(r"\bfunction\s*\*?\s*([A-Za-z_]\w*)?")
_JS_ARROW_RE = re.compile(
    r"\b(?:const|let|var)?\s*([A-Za-z_]\w*)\s*=\s*(?:async\s+)?(?:\([^)]*\)|[A-Za-z_]\w*)\s*=>\s*$"
)
_CALLABLE_RE = re.compile(
    r"([A-Za-z_~]\w*)\s*\(.*\)[\s\w]*?(?:const|noexcept|final|override|throws\s+[\w.,\s<>]+)?\s*$",
    re.DOTALL,
)
_MISC_RE = re.compile(r"\b(enum|namespace|union)\b")
_CONTROL_KEYWORDS = frozenset(
    {"if", "for", "while", "switch", "catch", "do", "else", "try", "finally", "synchronized", "select", "return"}
)


def _classify_header(text: str, language: str) -> tuple[str, str]:
    """Map the text before an opening brace to a (kind, name) pair."""
    text = text.strip()
    if not text:
        return "block", ""
    m = _INTERFACE_RE.search(text)
    if m:
        return "interface", m.group(1)
    if language == "go":
        m = re.search(r"\btype\s+([A-Za-z_]\w*)\s+interface\b", text)
        if m:
            return "interface", m.group(1)
        m = re.search(r"\btype\s+([A-Za-z_]\w*)\s+struct\b", text)
        if m:
            return "class", m.group(1)
        m = _GO_FUNC_RE.search(text)
        if m:
            kind = "method" if m.group(1) else "function"
            return kind, m.group(2) or ""
    m = _CLASS_RE.search(text)
    if m:
        return "class", m.group(1)
    if _MISC_RE.search(text):
        return "other", ""
    if language == "javascript":
        m = _JS_ARROW_RE.search(text)
        if m:
            return "function", m.group(1)
        m = _JS_FUNCTION_RE.search(text)
        if m:
            return "function", m.group(1) or ""
    m = _CALLABLE_RE.search(text)
    if m and m.group(1) not in _CONTROL_KEYWORDS and not text.startswith("="):
        return "method", m.group(1)
    return "block", ""


def _scan_brace_family(source: str, language: str) -> list[ComponentSpan]:
    lines = split_lines(source)
    total = len(lines)
    spans: list[ComponentSpan] = []
    # (kind, name, start_line) of every currently open brace
    stack: list[tuple[str, str, int]] = []
    header_parts: list[str] = []
    header_line: int | None = None

    state = "code"  # or: line_comment, block_comment, string
    quote = ""
    i = 0
    line_no = 1
    text = source
    n = len(text)
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "\n":
            line_no += 1
            if state == "line_comment":
                state = "code"
            i += 1
            continue
        if state == "line_comment":
            i += 1
            continue
        if state == "block_comment":
            if ch == "*" and nxt == "/":
                state = "code"
                i += 2
                continue
            i += 1
            continue
        if state == "string":
            if ch == "\\" and quote != "`":
                i += 2
                continue
            if ch == quote:
                state = "code"
            i += 1
            continue
        # state == "code"
        if ch == "/" and nxt == "/":
            state = "line_comment"
            i += 2
            continue
        if ch == "/" and nxt == "*":
            state = "block_comment"
            i += 2
            continue
        if ch in "\"'`":
            state = "string"
            quote = ch
            i += 1
            continue
        if ch == "{":
            header = "".join(header_parts)
            kind, name = _classify_header(header, language)
            start = header_line if header.strip() and header_line is not None else line_no
            stack.append((kind, name, start))
            header_parts = []
            header_line = None
            i += 1
            continue
        if ch == "}":
            if stack:
                kind, name, start = stack.pop()
                spans.append(ComponentSpan(kind, name, start, line_no))
            header_parts = []
            header_line = None
            i += 1
            continue
        if ch == ";":
            header_parts = []
            header_line = None
            i += 1
            continue
        if not ch.isspace() and header_line is None:
            header_line = line_no
        header_parts.append(ch)
        i += 1

    # unbalanced input: close remaining spans at end of file
    while stack:
        kind, name, start = stack.pop()
        spans.append(ComponentSpan(kind, name, start, total))
    spans.sort(key=lambda s: s.start_line)
    return spans


_INDENT_HEADER_RE = re.compile(r"^([ \t]*)(?:async\s+)?(def|class)\s+([A-Za-z_]\w*)")


def _indent_width(prefix: str) -> int:
    return len(prefix.expandtabs(8))


def _scan_indent_family(source: str) -> list[ComponentSpan]:
    lines = split_lines(source)
    spans: list[ComponentSpan] = []
    # open headers as (indent, kind) so nested defs classify as methods
    open_headers: list[tuple[int, str]] = []
    for idx, line in enumerate(lines):
        if not line.strip():
            continue
        indent = _indent_width(line[: len(line) - len(line.lstrip())])
        while open_headers and indent <= open_headers[-1][0]:
            open_headers.pop()
        m = _INDENT_HEADER_RE.match(line)
        if not m:
            continue
        keyword, name = m.group(2), m.group(3)
        if keyword == "class":
            kind = "class"
        else:
            inside_class = any(k == "class" for _, k in open_headers)
            kind = "method" if inside_class else "function"
        start = idx + 1
        end = start
        for j in range(idx + 1, len(lines)):
            body_line = lines[j]
            if not body_line.strip():
                continue
            body_indent = _indent_width(body_line[: len(body_line) - len(body_line.lstrip())])
            if body_indent <= indent:
                break
            end = j + 1
        spans.append(ComponentSpan(kind, name, start, end))
        open_headers.append((indent, kind))
    spans.sort(key=lambda s: s.start_line)
    return spans


def extract_components(source: str, language: str) -> list[ComponentSpan]:
    """Extract structural spans; unsupported languages yield an empty list.

    Spans are ordered by start line, may nest, and never exceed the file's
    line count. Files of unsupported languages stay chunkable, just at the
    default split cost everywhere.
    """
    if language in BRACE_LANGUAGES:
        return _scan_brace_family(source, language)
    if language in INDENT_LANGUAGES:
        return _scan_indent_family(source)
    log.warning("no component scanner for language %r; returning no spans", language)
    return []


def load_external_spans(path: str | Path) -> list[ComponentSpan]:
    """Load spans from a JSON file: a list of {kind, name, start_line, end_line}.

    This is the escape hatch for callers who already have a real parse.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read span file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"span file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DataError("span file must contain a JSON array")
    spans = []
    for index, item in enumerate(data):
        if not isinstance(item, dict):
            raise DataError(f"span {index} must be an object")
        missing = {"kind", "name", "start_line", "end_line"} - set(item)
        if missing:
            raise DataError(f"span {index} missing fields: {', '.join(sorted(missing))}")
        if not isinstance(item["start_line"], int) or not isinstance(item["end_line"], int):
            raise DataError(f"span {index} line numbers must be integers")
        try:
            spans.append(
                ComponentSpan(
                    kind=item["kind"],
                    name=str(item["name"]),
                    start_line=item["start_line"],
                    end_line=item["end_line"],
                )
            )
        except DataError as exc:
            raise DataError(f"span {index}: {exc}") from exc
    spans.sort(key=lambda s: s.start_line)
    return spans
