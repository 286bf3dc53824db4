"""Index persistence: one directory per (snapshot, chunking mode).

The manifest records the config digest, tokenizer version, provider name
and build timestamp; a later open with the same digest loads from disk
without touching the files, so cache hits leave timestamps unchanged and
any config change forces a rebuild.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .chunking import make_chunker
from .config import Config
from .corpus import SnapshotFiles
from .errors import DataError
from .fusion import BugLocalizer, build_localizer
from .lexical import TOKENIZER_VERSION, Bm25Index
from .vector import VectorIndex, make_embedder

MANIFEST_NAME = "manifest.json"
LEXICAL_NAME = "lexical.json"
VECTORS_NAME = "vectors.npz"
VECTOR_META_NAME = "vectors_meta.json"

_UNSAFE_RE = re.compile(r"[^A-Za-z0-9._-]+")


def _safe_name(value: str) -> str:
    return _UNSAFE_RE.sub("_", value) or "_"


def index_dir(store_root: str | Path, version_id: str, chunking: str) -> Path:
    return Path(store_root) / f"{_safe_name(version_id)}__{chunking}"


@dataclass
class BuiltIndices:
    lexical: Bm25Index
    vector: VectorIndex
    manifest: dict


def build_indices(snapshot: SnapshotFiles, config: Config, chunking: str) -> BuiltIndices:
    """Build both indices for one snapshot."""
    docs = [(path, text, path) for path, text, _ in snapshot.iter_sources()]
    lexical = Bm25Index(k1=config.bm25.k1, b=config.bm25.b).fit(docs)
    embedder = make_embedder(config.embedding)
    chunker = make_chunker(
        chunking,
        window_size=config.window_size,
        kind_costs=config.kind_costs,
        default_cost=config.default_cost,
    )
    chunks = chunker.transform(snapshot)
    vector = VectorIndex(embedder=embedder).fit(chunks)
    manifest = {
        "format": 1,
        "version_id": snapshot.version_id,
        "chunking": chunking,
        "config_digest": config.digest(),
        "created_at": datetime.now(timezone.utc).isoformat(),
        "tokenizer_version": TOKENIZER_VERSION,
        "embedder": embedder.name,
        "dimension": config.embedding.dimension,
        "n_docs": len(docs),
        "n_chunks": len(vector.chunk_ids_),
    }
    return BuiltIndices(lexical=lexical, vector=vector, manifest=manifest)


def save_indices(built: BuiltIndices, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / LEXICAL_NAME).write_text(
        json.dumps(built.lexical.to_dict()), encoding="utf-8"
    )
    np.savez_compressed(directory / VECTORS_NAME, matrix=built.vector.matrix_)
    (directory / VECTOR_META_NAME).write_text(
        json.dumps(
            {
                "chunk_ids": built.vector.chunk_ids_,
                "file_ids": built.vector.file_ids_,
                "dimension": built.vector.dimension_,
                "embedder": built.manifest["embedder"],
            }
        ),
        encoding="utf-8",
    )
    (directory / MANIFEST_NAME).write_text(
        json.dumps(built.manifest, indent=2), encoding="utf-8"
    )
    return directory


def load_manifest(directory: str | Path) -> dict | None:
    path = Path(directory) / MANIFEST_NAME
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"unreadable manifest {path}: {exc}") from exc


def load_indices(directory: str | Path, config: Config) -> BuiltIndices:
    directory = Path(directory)
    manifest = load_manifest(directory)
    if manifest is None:
        raise DataError(f"no manifest in {directory}")
    try:
        lexical = Bm25Index.from_dict(
            json.loads((directory / LEXICAL_NAME).read_text(encoding="utf-8"))
        )
        with np.load(directory / VECTORS_NAME) as archive:
            matrix = archive["matrix"]
        meta = json.loads((directory / VECTOR_META_NAME).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"corrupt index store in {directory}: {exc}") from exc
    vector = VectorIndex.from_parts(
        matrix, meta["chunk_ids"], meta["file_ids"], embedder=make_embedder(config.embedding)
    )
    return BuiltIndices(lexical=lexical, vector=vector, manifest=manifest)


def build_or_load(
    snapshot: SnapshotFiles,
    config: Config,
    chunking: str,
    store_root: str | Path,
) -> tuple[BuiltIndices, bool]:
    """Load when the stored config digest matches; otherwise build and save.

    Returns (indices, cache_hit).
    """
    directory = index_dir(store_root, snapshot.version_id, chunking)
    manifest = load_manifest(directory)
    if manifest is not None and manifest.get("config_digest") == config.digest():
        return load_indices(directory, config), True
    built = build_indices(snapshot, config, chunking)
    save_indices(built, directory)
    return built, False


def open_indices(
    snapshot: SnapshotFiles,
    config: Config,
    chunking: str,
    store_root: str | Path,
    mode: str = "hybrid",
) -> tuple[BugLocalizer, bool]:
    """Build-or-load indices and wrap them in a ready localizer."""
    built, hit = build_or_load(snapshot, config, chunking, store_root)
    template = build_localizer(config, chunking=chunking, mode=mode)
    localizer = BugLocalizer.from_indices(
        built.lexical, built.vector, **template.get_params(deep=False)
    )
    return localizer, hit
