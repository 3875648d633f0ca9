"""Cross-modal query suggestion engine and evaluation harness."""

from .benchmark import Benchmark, BenchmarkEntry, load_benchmark, load_release
from .clustering import Cluster, ClusterPartition, kmeans_partition
from .embeddings import EmbeddingStore, build_store, cosine, load_store, normalize, save_store
from .evaluation import EvalConfig, EvalResult, emit_report, evaluate_suggestions
from .metrics import (
    average_precision,
    jaccard_similarity,
    macro_average,
    ndcg,
    query_embedding_similarity,
    recall_cluster,
    representativeness_recall,
)
from .orchestrator import SuggestionRecord, suggest_all
from .prototypes import centroid_prototype, representative_prototype, top_m_representatives
from .retrieval import RankedResultSet, search, search_within

__version__ = "0.1.0"

__all__ = [
    "Benchmark",
    "BenchmarkEntry",
    "Cluster",
    "ClusterPartition",
    "EmbeddingStore",
    "EvalConfig",
    "EvalResult",
    "RankedResultSet",
    "SuggestionRecord",
    "average_precision",
    "build_store",
    "centroid_prototype",
    "cosine",
    "emit_report",
    "evaluate_suggestions",
    "jaccard_similarity",
    "kmeans_partition",
    "load_benchmark",
    "load_release",
    "load_store",
    "macro_average",
    "ndcg",
    "normalize",
    "query_embedding_similarity",
    "recall_cluster",
    "representative_prototype",
    "representativeness_recall",
    "save_store",
    "search",
    "search_within",
    "suggest_all",
    "top_m_representatives",
]
