"""Deterministic synthetic corpus with planted retrieval signals.

Ten bug reports, one repository snapshot. Every report names a marker
token and a handful of topic words that occur in exactly one source file,
so the true file is findable lexically (exact marker match) and by
bag-of-tokens similarity (topic vocabulary). Two distractor files contain
only boilerplate. Everything derives from one seed; regenerating with the
same seed reproduces the corpus byte for byte.

Run ``python -m bugloc.synthetic OUTDIR`` to materialize it on disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

REPO_NAME = "plantedapp"
SHA_BEFORE = "c0ffee1"
SHA_AFTER = "c0ffee2"

_TOPICS = [
    ("FontRenderer", "FNT4821", ["glyph", "kerning", "baseline", "ligature", "hinting", "typeface"]),
    ("SocketGateway", "SCK9034", ["handshake", "keepalive", "backlog", "datagram", "loopback", "teardown"]),
    ("CacheEvictor", "CCH2210", ["eviction", "freshness", "warmup", "occupancy", "stale", "prefetch"]),
    ("GrammarParser", "PRS7745", ["lookahead", "terminal", "production", "reduction", "ambiguity", "derivation"]),
    ("ScrollPhysics", "SCR1287", ["momentum", "overscroll", "flick", "damping", "snapback", "viewport"]),
    ("ThemePalette", "THM6602", ["swatch", "contrast", "tint", "luminance", "accent", "gradient"]),
    ("QuotaLedger", "QTA3358", ["allocation", "overage", "replenish", "metering", "ceiling", "rollover"]),
    ("AudioMixer", "AUD8190", ["waveform", "resample", "attenuation", "crossfade", "latency", "clipping"]),
    ("ImageDecoder", "IMG5473", ["chroma", "subsampling", "quantization", "progressive", "thumbnail", "interlace"]),
    ("RoutePlanner", "RTE0921", ["waypoint", "detour", "congestion", "heuristic", "traversal", "reroute"]),
]

_DISTRACTORS = ["AppConfig", "MainWindow"]

_BUG_VERBS = ["crashes", "hangs", "fails", "misbehaves", "throws"]
_SHARED_BUG_WORDS = ["error", "exception", "stack", "trace", "reproduce", "regression"]


def _file_text(class_name: str, marker: str, words: list[str], rng: np.random.Generator) -> str:
    lines = [f"package app.{class_name.lower()};", ""]
    lines.append(f"// subsystem tag {marker}")
    lines.append(f"public class {class_name} {{")
    lines.append(f'    private static final String TAG = "{marker}";')
    lines.append("")
    for method_index in range(4):
        verb = ["update", "apply", "compute", "flush"][method_index]
        subject = words[method_index % len(words)]
        lines.append(f"    public void {verb}{subject.capitalize()}() {{")
        for _ in range(rng.integers(8, 13)):
            a, b, c = rng.choice(words, size=3)
            lines.append(f"        this.{a} = registry.{b}(state.{c});")
        lines.append(f'        log.debug(TAG, "{subject} pass complete");')
        lines.append("    }")
        lines.append("")
    lines.append("    private void resetInternal() {")
    lines.append("        state.clear();")
    lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _distractor_text(class_name: str, rng: np.random.Generator) -> str:
    lines = [f"package app.{class_name.lower()};", "", f"public class {class_name} {{"]
    for i in range(3):
        lines.append(f"    public void setup{i}() {{")
        for _ in range(rng.integers(6, 10)):
            lines.append("        registry.register(state.next());")
        lines.append("    }")
        lines.append("")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _report_record(index: int, class_name: str, marker: str, words: list[str],
                   rng: np.random.Generator) -> dict:
    verb = _BUG_VERBS[index % len(_BUG_VERBS)]
    w = list(rng.choice(words, size=4, replace=False))
    shared = list(rng.choice(_SHARED_BUG_WORDS, size=3, replace=False))
    title = f"App {verb} in {marker} during {w[0]} handling"
    body = (
        f"After the last update the {w[0]} step {verb}. The {shared[0]} mentions "
        f"{marker} and the {w[1]} value looks wrong. Happens whenever {w[2]} or "
        f"{w[3]} is active; easy to {shared[1]}, see attached {shared[2]}."
    )
    return {
        "id": f"BUG-{1000 + index}",
        "repo_name": REPO_NAME,
        "title": title,
        "body": body,
        "fixed_files": [f"src/{class_name}.java"],
        "sha_before": SHA_BEFORE,
        "sha_after": SHA_AFTER,
        "status": "closed",
        "reported_at": f"2024-03-{10 + index:02d}T09:00:00Z",
        "fixed_at": f"2024-03-{12 + index:02d}T17:30:00Z",
        "issue_url": f"https://example.test/{REPO_NAME}/issues/{1000 + index}",
    }


@dataclass(frozen=True)
class PlantedCorpus:
    root: Path
    corpus_path: Path
    snapshots_root: Path
    repo_name: str
    version_id: str


def write_planted_corpus(root: str | Path, seed: int = 7) -> PlantedCorpus:
    """Write the corpus under ``root``; returns the paths a benchmark needs."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    snapshot_dir = root / "snapshots" / REPO_NAME / SHA_BEFORE / "src"
    snapshot_dir.mkdir(parents=True, exist_ok=True)

    records = []
    for index, (class_name, marker, words) in enumerate(_TOPICS):
        (snapshot_dir / f"{class_name}.java").write_text(
            _file_text(class_name, marker, words, rng), encoding="utf-8"
        )
        records.append(_report_record(index, class_name, marker, words, rng))
    for class_name in _DISTRACTORS:
        (snapshot_dir / f"{class_name}.java").write_text(
            _distractor_text(class_name, rng), encoding="utf-8"
        )

    corpus_path = root / "bugs.jsonl"
    corpus_path.write_text(
        "".join(json.dumps(r) + "\n" for r in records), encoding="utf-8"
    )
    return PlantedCorpus(
        root=root,
        corpus_path=corpus_path,
        snapshots_root=root / "snapshots",
        repo_name=REPO_NAME,
        version_id=SHA_BEFORE,
    )


if __name__ == "__main__":
    import sys

    if len(sys.argv) != 2:
        print("usage: python -m bugloc.synthetic OUTDIR", file=sys.stderr)
        raise SystemExit(2)
    planted = write_planted_corpus(sys.argv[1])
    print(json.dumps({
        "corpus": str(planted.corpus_path),
        "snapshots": str(planted.snapshots_root),
        "repo_name": planted.repo_name,
        "version_id": planted.version_id,
    }, indent=2))
