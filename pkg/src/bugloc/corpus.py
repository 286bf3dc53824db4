"""Bug report corpus ingestion and repository snapshot loading.

A corpus is a JSONL file of bug report records; a snapshot is the source
tree of one repository at the commit the bug was reported against. Records
that fail schema validation are reported with their line number rather
than silently dropped, because ground-truth quality decides whether a
report can be judged at all.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path, PurePosixPath

from .errors import DataError

log = logging.getLogger(__name__)

LANGUAGE_BY_EXTENSION = {
    ".java": "java",
    ".py": "python",
    ".cc": "cpp",
    ".cpp": "cpp",
    ".cxx": "cpp",
    ".c": "cpp",
    ".h": "cpp",
    ".hh": "cpp",
    ".hpp": "cpp",
    ".go": "go",
    ".js": "javascript",
    ".jsx": "javascript",
    ".ts": "javascript",
    ".tsx": "javascript",
}

DEFAULT_INCLUDE_GLOBS = tuple(f"**/*{ext}" for ext in LANGUAGE_BY_EXTENSION)

_REQUIRED_FIELDS = ("id", "repo_name", "title", "body", "fixed_files", "sha_before", "sha_after", "status")
_OPTIONAL_FIELDS = ("reported_at", "fixed_at", "repo_url", "issue_url", "pr_url")
_STATUSES = ("open", "closed")


def language_for_path(path: str) -> str:
    return LANGUAGE_BY_EXTENSION.get(PurePosixPath(path).suffix.lower(), "unknown")


@dataclass(frozen=True)
class BugReport:
    id: str
    repo_name: str
    title: str
    body: str
    fixed_files: tuple[str, ...]
    sha_before: str
    sha_after: str
    status: str
    reported_at: datetime | None = None
    fixed_at: datetime | None = None
    repo_url: str | None = None
    issue_url: str | None = None
    pr_url: str | None = None

    def query_text(self) -> str:
        """The retrieval query: title, blank line, body."""
        return f"{self.title}\n\n{self.body}"


@dataclass(frozen=True)
class IngestDiagnostic:
    line_number: int
    message: str


@dataclass
class CorpusHandle:
    """An ingested corpus plus per-language stats and skipped-line diagnostics."""

    reports: list[BugReport]
    root: Path
    stats: dict[str, int]
    diagnostics: list[IngestDiagnostic] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.reports)

    def by_id(self, report_id: str) -> BugReport:
        for report in self.reports:
            if report.id == report_id:
                return report
        raise DataError(f"no report with id {report_id!r} in corpus")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorpusHandle):
            return NotImplemented
        return self.reports == other.reports and self.stats == other.stats


@dataclass
class SnapshotFiles:
    """One repository version: repo-relative posix paths mapped to text."""

    version_id: str
    files: dict[str, str]
    language_of: dict[str, str]
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.files)

    def iter_sources(self):
        """Yield (path, text, language) in deterministic path order."""
        for path in sorted(self.files):
            yield path, self.files[path], self.language_of[path]


@dataclass(frozen=True)
class ValidationReport:
    report_id: str
    present: tuple[str, ...]
    missing: tuple[str, ...]

    @property
    def usable(self) -> bool:
        return len(self.present) > 0


def _parse_timestamp(value, field_name: str) -> datetime:
    if not isinstance(value, str):
        raise ValueError(f"{field_name} must be an ISO-8601 string")
    parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def parse_report(record: dict) -> BugReport:
    """Validate one raw record; raises DataError listing every problem."""
    if not isinstance(record, dict):
        raise DataError("record must be a JSON object")
    problems = []
    missing = [name for name in _REQUIRED_FIELDS if name not in record]
    if missing:
        problems.append(f"missing fields: {', '.join(missing)}")
    unknown = set(record) - set(_REQUIRED_FIELDS) - set(_OPTIONAL_FIELDS)
    if unknown:
        problems.append(f"unknown fields: {', '.join(sorted(unknown))}")

    report_id = record.get("id")
    if isinstance(report_id, int):
        report_id = str(report_id)
    if "id" in record and not isinstance(report_id, str):
        problems.append("id must be a string")

    for name in ("repo_name", "title", "body", "sha_before", "sha_after"):
        if name in record and not isinstance(record[name], str):
            problems.append(f"{name} must be a string")

    fixed_files = record.get("fixed_files")
    if "fixed_files" in record:
        if not isinstance(fixed_files, list) or not all(isinstance(f, str) for f in fixed_files):
            problems.append("fixed_files must be a list of strings")
        elif not fixed_files:
            problems.append("fixed_files must be non-empty")

    status = record.get("status")
    if "status" in record and status not in _STATUSES:
        problems.append(f"status must be one of {_STATUSES}")

    if (
        isinstance(record.get("sha_before"), str)
        and isinstance(record.get("sha_after"), str)
        and record["sha_before"] == record["sha_after"]
    ):
        problems.append("sha_before and sha_after must differ")

    timestamps = {}
    for name in ("reported_at", "fixed_at"):
        if record.get(name) is not None:
            try:
                timestamps[name] = _parse_timestamp(record[name], name)
            except ValueError as exc:
                problems.append(str(exc) if "ISO-8601" in str(exc) else f"{name}: {exc}")
    if "reported_at" in timestamps and "fixed_at" in timestamps:
        if timestamps["reported_at"] > timestamps["fixed_at"]:
            problems.append("reported_at must not be after fixed_at")

    for name in ("repo_url", "issue_url", "pr_url"):
        if record.get(name) is not None and not isinstance(record[name], str):
            problems.append(f"{name} must be a string")

    if problems:
        raise DataError("; ".join(problems))

    return BugReport(
        id=report_id,
        repo_name=record["repo_name"],
        title=record["title"],
        body=record["body"],
        fixed_files=tuple(fixed_files),
        sha_before=record["sha_before"],
        sha_after=record["sha_after"],
        status=status,
        reported_at=timestamps.get("reported_at"),
        fixed_at=timestamps.get("fixed_at"),
        repo_url=record.get("repo_url"),
        issue_url=record.get("issue_url"),
        pr_url=record.get("pr_url"),
    )


def ingest_dataset(path: str | Path, fmt: str = "jsonl") -> CorpusHandle:
    """Load a JSONL bug report corpus.

    Schema failures become line-numbered diagnostics; an unreadable file,
    a duplicate report id, or zero valid records raise DataError.
    """
    if fmt != "jsonl":
        raise DataError(f"unsupported corpus format {fmt!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc

    reports: list[BugReport] = []
    diagnostics: list[IngestDiagnostic] = []
    seen_ids: dict[str, int] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(IngestDiagnostic(line_number, f"invalid JSON: {exc}"))
            continue
        try:
            report = parse_report(record)
        except DataError as exc:
            diagnostics.append(IngestDiagnostic(line_number, str(exc)))
            continue
        if report.id in seen_ids:
            raise DataError(
                f"duplicate report id {report.id!r} at line {line_number}"
                f" (first seen at line {seen_ids[report.id]})"
            )
        seen_ids[report.id] = line_number
        reports.append(report)

    if not reports:
        raise DataError(f"corpus {path} contains no valid records")

    stats = Counter(language_for_path(f) for report in reports for f in report.fixed_files)
    return CorpusHandle(reports=reports, root=path.resolve().parent, stats=dict(stats), diagnostics=diagnostics)


def load_snapshot(
    repo_root: str | Path,
    version_id: str,
    include_globs: tuple[str, ...] | None = None,
) -> SnapshotFiles:
    """Load one repository version from a directory tree.

    Paths are repo-relative posix strings; files resolving outside the root
    (symlink escapes) are skipped with a warning, never returned. Bytes that
    are not valid UTF-8 are decoded lossily.
    """
    root = Path(repo_root).resolve()
    if not root.is_dir():
        raise DataError(f"snapshot root {repo_root} is not a directory")
    globs = include_globs if include_globs is not None else DEFAULT_INCLUDE_GLOBS

    warnings: list[str] = []
    selected: set[Path] = set()
    for pattern in globs:
        for match in root.glob(pattern):
            if not match.is_file():
                continue
            resolved = match.resolve()
            if not resolved.is_relative_to(root):
                warnings.append(f"skipped {match}: resolves outside snapshot root")
                continue
            selected.add(match)

    files: dict[str, str] = {}
    language_of: dict[str, str] = {}
    for match in sorted(selected):
        rel = match.relative_to(root).as_posix()
        try:
            data = match.read_bytes()
        except OSError as exc:
            warnings.append(f"unreadable {rel}: {exc}")
            continue
        files[rel] = data.decode("utf-8", errors="replace")
        language_of[rel] = language_for_path(rel)

    if not files:
        raise DataError(f"no files matched {globs} under {root}")
    for warning in warnings:
        log.warning("%s", warning)
    return SnapshotFiles(version_id=version_id, files=files, language_of=language_of, warnings=warnings)


def validate_ground_truth(bug: BugReport, snapshot: SnapshotFiles) -> ValidationReport:
    """Split the fixed files into present/missing; usable iff any is present."""
    present = tuple(f for f in bug.fixed_files if f in snapshot.files)
    missing = tuple(f for f in bug.fixed_files if f not in snapshot.files)
    return ValidationReport(report_id=bug.id, present=present, missing=missing)
