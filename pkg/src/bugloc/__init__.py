"""Bug localization from bug reports.

Two retrievers over one snapshot -- whole-file BM25 and exact cosine
search over dynamically chunked, embedded source -- fused by reciprocal
rank. Includes the evaluation harness, a hard-example contrastive loss
with a toy trainable embedder, and a CLI.
"""

from .chunking import (
    Chunk,
    ChunkPlan,
    DynamicChunker,
    SlidingChunker,
    SplitCostMap,
    StaticChunker,
    apply_plan,
    build_cost_map,
    dynamic_chunk,
    sliding_chunk,
    static_chunk,
)
from .components import ComponentSpan, extract_components, load_external_spans
from .config import Config
from .contrastive import (
    ContrastiveBatch,
    LossReport,
    hard_mask,
    hard_ntxent_loss,
    ntxent_loss,
    pair_median,
    similarity_matrix,
)
from .corpus import (
    BugReport,
    CorpusHandle,
    SnapshotFiles,
    ingest_dataset,
    load_snapshot,
    validate_ground_truth,
)
from .errors import BuglocError, DataError, ProviderError, TrainingDiverged
from .evaluation import (
    JudgedRanking,
    MetricsReport,
    average_precision,
    mean_average_precision,
    mean_reciprocal_rank,
    run_ablation,
    run_benchmark,
    token_overlap,
    top_n,
)
from .fusion import BugLocalizer, LocalizationResult, build_localizer, rrf_fuse
from .lexical import Bm25Index, tokenize, tokenize_path
from .ranking import RankedList
from .training import HardExampleEmbedder, TextPair, synthetic_pairs
from .vector import HashingEmbedder, RemoteEmbedder, VectorIndex, aggregate_file_scores

__version__ = "0.1.0"

__all__ = [
    "BugLocalizer",
    "BugReport",
    "BuglocError",
    "Bm25Index",
    "Chunk",
    "ChunkPlan",
    "ComponentSpan",
    "Config",
    "ContrastiveBatch",
    "CorpusHandle",
    "DataError",
    "DynamicChunker",
    "HardExampleEmbedder",
    "HashingEmbedder",
    "JudgedRanking",
    "LocalizationResult",
    "LossReport",
    "MetricsReport",
    "ProviderError",
    "RankedList",
    "RemoteEmbedder",
    "SlidingChunker",
    "SnapshotFiles",
    "SplitCostMap",
    "StaticChunker",
    "TextPair",
    "TrainingDiverged",
    "VectorIndex",
    "aggregate_file_scores",
    "apply_plan",
    "average_precision",
    "build_cost_map",
    "build_localizer",
    "dynamic_chunk",
    "extract_components",
    "hard_mask",
    "hard_ntxent_loss",
    "ingest_dataset",
    "load_external_spans",
    "load_snapshot",
    "mean_average_precision",
    "mean_reciprocal_rank",
    "ntxent_loss",
    "pair_median",
    "rrf_fuse",
    "run_ablation",
    "run_benchmark",
    "similarity_matrix",
    "sliding_chunk",
    "static_chunk",
    "synthetic_pairs",
    "token_overlap",
    "tokenize",
    "tokenize_path",
    "top_n",
    "validate_ground_truth",
]
