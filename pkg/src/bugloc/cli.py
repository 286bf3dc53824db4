"""Command line interface.

Exit codes: 0 success, 2 usage errors (click), 3 bad input data, 4
embedding provider failures. On failure a machine-readable JSON error
object is printed to stderr.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click

from .chunking import CHUNKERS, make_chunker
from .components import load_external_spans
from .config import Config
from .corpus import ingest_dataset, language_for_path, load_snapshot
from .errors import BuglocError, ProviderError
from .evaluation import run_benchmark, token_overlap
from .fusion import MODES, BugLocalizer, build_localizer
from .ranking import RankedList
from .store import build_or_load, index_dir, load_indices
from .training import HardExampleEmbedder, synthetic_pairs, train_history_rows

_EMPTY = RankedList(tag="empty", items=())


def _fail(exc: BuglocError, code: int):
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ProviderError as exc:
            _fail(exc, 4)
        except BuglocError as exc:
            _fail(exc, 3)

    return wrapper


def _load_config(path: str | None) -> Config:
    if path is None:
        return Config().validate()
    return Config.from_file(path)


@click.group()
def main():
    """Bug localization: dual retrieval over chunked source, fused by rank."""


@main.group()
def config():
    """Configuration helpers."""


@config.command("init")
@click.option("--out", type=click.Path(dir_okay=False), default="bugloc.json", show_default=True)
@handle_errors
def config_init(out):
    """Write a config file with every default filled in."""
    Config().validate().to_file(out)
    click.echo(f"wrote {out}")


@main.command()
@click.argument("snapshot_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--version-id", required=True, help="Snapshot version (e.g. the commit sha).")
@click.option("--store", "store_root", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--chunking", type=click.Choice(sorted(CHUNKERS)), default="dynamic", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the manifest as JSON.")
@handle_errors
def index(snapshot_dir, version_id, store_root, config_path, chunking, as_json):
    """Build (or reuse) the lexical and vector indices for one snapshot."""
    cfg = _load_config(config_path)
    snapshot = load_snapshot(snapshot_dir, version_id)
    built, cache_hit = build_or_load(snapshot, cfg, chunking, store_root)
    if as_json:
        click.echo(json.dumps({"cache_hit": cache_hit, "manifest": built.manifest}, indent=2))
    else:
        state = "cache hit, reused" if cache_hit else "built"
        click.echo(
            f"{state}: {built.manifest['n_docs']} files, {built.manifest['n_chunks']} chunks "
            f"-> {index_dir(store_root, version_id, chunking)}"
        )


@main.command()
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(sorted(CHUNKERS)), default="dynamic", show_default=True)
@click.option("--window", type=int, default=40, show_default=True, help="Max chunk size in lines.")
@click.option("--stride", type=int, default=None, help="Sliding stride (defaults to window/2).")
@click.option("--spans", "spans_path", type=click.Path(exists=True, dir_okay=False),
              help="External component spans (JSON) instead of built-in extraction.")
@click.option("--language", default=None, help="Override language detection.")
@handle_errors
def chunk(source_file, mode, window, stride, spans_path, language):
    """Chunk one source file; prints a JSON list of chunks."""
    if spans_path and mode != "dynamic":
        raise click.UsageError("--spans only applies to dynamic chunking")
    source = Path(source_file).read_text(encoding="utf-8", errors="replace")
    lang = language if language else language_for_path(source_file)
    chunker = make_chunker(mode, window_size=window, stride=stride)
    if spans_path:
        spans = load_external_spans(spans_path)
        chunker.set_params(span_loader=lambda *_: spans)
    chunks = chunker.chunk_file(source, Path(source_file).name, lang)
    click.echo(json.dumps(
        [
            {"start_line": c.start_line, "end_line": c.end_line, "text": c.text}
            for c in chunks
        ],
        indent=2,
    ))


@main.command()
@click.option("--store", "store_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--version-id", required=True)
@click.option("--chunking", type=click.Choice(sorted(CHUNKERS)), default="dynamic", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report-file", type=click.Path(exists=True, dir_okay=False),
              help='JSON file with {"title": ..., "body": ...}.')
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report-id", help="Report id inside --corpus.")
@click.option("--mode", type=click.Choice(MODES), default="hybrid", show_default=True)
@click.option("--k", "rrf_k", type=float, default=None, help="Override fusion constant k.")
@click.option("--top", type=int, default=10, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def locate(store_root, version_id, chunking, config_path, report_file, corpus_path,
           report_id, mode, rrf_k, top, as_json):
    """Rank files for one bug report against a previously built index."""
    cfg = _load_config(config_path)
    if rrf_k is not None:
        cfg.rrf_k = rrf_k
        cfg.validate()
    if report_file:
        data = json.loads(Path(report_file).read_text(encoding="utf-8"))
        report = (data.get("id", "adhoc"), data.get("title", ""), data.get("body", ""))
    elif corpus_path and report_id:
        report = ingest_dataset(corpus_path).by_id(report_id)
    else:
        raise click.UsageError("provide --report-file, or --corpus with --report-id")

    built = load_indices(index_dir(store_root, version_id, chunking), cfg)
    template = build_localizer(cfg, chunking=chunking, mode=mode)
    localizer = BugLocalizer.from_indices(built.lexical, built.vector, **template.get_params(deep=False))
    result = localizer.localize(report)

    if as_json:
        click.echo(json.dumps({
            "report_id": result.report_id,
            "degraded": result.degraded,
            "notes": list(result.notes),
            "ranking": [
                {
                    "rank": rank,
                    "file": file_id,
                    "score": score,
                    "lexical_rank": result.per_retriever.get("lexical", _EMPTY).rank_of(file_id),
                    "deep_rank": result.per_retriever.get("deep", _EMPTY).rank_of(file_id),
                }
                for rank, (file_id, score) in enumerate(result.fused.items[:top], start=1)
            ],
        }, indent=2))
        return
    if result.degraded:
        click.echo("warning: deep retriever unavailable, lexical-only ranking", err=True)
    for rank, (file_id, score) in enumerate(result.fused.items[:top], start=1):
        lex = result.per_retriever.get("lexical", _EMPTY).rank_of(file_id)
        deep = result.per_retriever.get("deep", _EMPTY).rank_of(file_id)
        click.echo(f"{rank:>3}  {score:.6f}  lex={lex or '-':>4}  deep={deep or '-':>4}  {file_id}")


@main.command("eval")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--snapshots", "snapshots_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="hybrid", show_default=True)
@click.option("--chunking", type=click.Choice(sorted(CHUNKERS)), default="dynamic", show_default=True)
@click.option("--k", "rrf_k", type=float, default=None, help="Override fusion constant k.")
@click.option("--depth", type=int, default=None, help="Override judged ranking depth.")
@click.option("--store", "store_root", type=click.Path(file_okay=False),
              help="Persist and reuse indices under this directory.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@handle_errors
def eval_cmd(corpus_path, snapshots_root, config_path, mode, chunking, rrf_k, depth,
             store_root, out_path):
    """Run the benchmark: localize every usable report and score the rankings."""
    cfg = _load_config(config_path)
    if rrf_k is not None:
        cfg.rrf_k = rrf_k
    if depth is not None:
        cfg.judge_depth = depth
    cfg.validate()
    corpus = ingest_dataset(corpus_path)
    for diagnostic in corpus.diagnostics:
        click.echo(f"corpus line {diagnostic.line_number}: {diagnostic.message}", err=True)
    report = run_benchmark(corpus, snapshots_root, cfg, mode=mode, chunking=chunking,
                           store_root=store_root)
    payload = report.to_dict()
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(json.dumps(payload, indent=2))


@main.command("train-demo")
@click.option("--epochs", type=int, default=15, show_default=True)
@click.option("--batch", "batch_pairs", type=int, default=16, show_default=True)
@click.option("--tau", type=float, default=0.07, show_default=True)
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--beta", type=float, default=2.0, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Write history CSV here instead of stdout.")
@handle_errors
def train_demo(epochs, batch_pairs, tau, alpha, beta, seed, out_path):
    """Train the toy embedder on synthetic pairs; emits per-epoch history CSV."""
    pairs = synthetic_pairs(seed=seed)
    embedder = HardExampleEmbedder(
        tau=tau, alpha=alpha, beta=beta, epochs=epochs, batch_pairs=batch_pairs, seed=seed
    ).fit(pairs)
    rows = train_history_rows(embedder)
    target = open(out_path, "w", newline="", encoding="utf-8") if out_path else sys.stdout
    try:
        writer = csv.DictWriter(target, fieldnames=["epoch", "loss", "median_pos_sim", "median_neg_sim"])
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out_path:
            target.close()
    if out_path:
        click.echo(f"wrote {out_path}")


@main.command()
@click.option("--source-project", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL corpus whose report vocabulary is the reference.")
@click.option("--target-project", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def overlap(source_project, target_project, as_json):
    """Directional token overlap between two projects' bug report vocabularies."""
    source = ingest_dataset(source_project)
    target = ingest_dataset(target_project)
    value = token_overlap(
        [r.query_text() for r in source.reports],
        [r.query_text() for r in target.reports],
    )
    if as_json:
        click.echo(json.dumps({
            "source": str(source_project), "target": str(target_project), "overlap": value,
        }))
    else:
        click.echo(f"{value:.4f}")


if __name__ == "__main__":
    main()
