"""Evaluation measures: cluster specificity, representativeness, query similarity."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .clustering import Cluster
from .embeddings import cosine
from .retrieval import RankedResultSet

METRIC_NAMES = (
    "query_embedding_sim",
    "jaccard",
    "recall_cluster",
    "repr_recall",
    "repr_ndcg",
    "repr_map",
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# 1/log2(p+1) discounts and their prefix sums, grown on demand; position p is 1-based.
_DISCOUNT: list[float] = [1.0]
_IDEAL_PREFIX: list[float] = [0.0, 1.0]


def _discount(position: int) -> float:
    while len(_DISCOUNT) < position:
        p = len(_DISCOUNT) + 1
        _DISCOUNT.append(1.0 / math.log2(p + 1))
        _IDEAL_PREFIX.append(_IDEAL_PREFIX[-1] + _DISCOUNT[-1])
    return _DISCOUNT[position - 1]


def recall_cluster(cluster: Cluster, ranking_within_resultset: RankedResultSet) -> float:
    """Fraction of the cluster found in the top-|cluster| of the restricted ranking.

    The ranking must cover the initial result set; the cluster acts as the
    relevant set and the cut-off k equals the cluster size. Reaches 1 exactly
    when every member outranks every non-member.
    """
    k = len(cluster.image_ids)
    if k > len(ranking_within_resultset):
        raise ValueError(
            f"cluster {cluster.cluster_id!r} has {k} members but the ranking "
            f"universe holds only {len(ranking_within_resultset)}"
        )
    top_k = set(ranking_within_resultset.ids[:k])
    return len(top_k.intersection(cluster.image_ids)) / k


def representativeness_recall(
    cluster: Cluster, ranking_over_collection: RankedResultSet, cutoff: int = 100
) -> float:
    """Fraction of the cluster retrieved within the top-`cutoff` of the collection."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    top = set(ranking_over_collection.ids[:cutoff])
    return len(top.intersection(cluster.image_ids)) / len(cluster.image_ids)


def average_precision(
    relevant: Iterable[str], ranking: RankedResultSet | Sequence[str], cutoff: int = 100
) -> float:
    """Average precision at `cutoff` with binary relevance.

    Precision is accumulated at each relevant hit within the cutoff and
    divided by min(|relevant|, cutoff), the best achievable hit count, so a
    perfect ranking scores 1 even when the relevant set exceeds the cutoff.
    """
    if not isinstance(relevant, (set, frozenset)):
        relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    ids = ranking.ids if isinstance(ranking, RankedResultSet) else ranking
    hits = 0
    total = 0.0
    for position, image_id in enumerate(ids[:cutoff], start=1):
        if image_id in relevant:
            hits += 1
            total += hits / position
    return total / min(len(relevant), cutoff)


def ndcg(
    relevant: Iterable[str], ranking: RankedResultSet | Sequence[str], rank: int = 10
) -> float:
    """Normalized discounted cumulative gain at `rank` with binary gains.

    DCG uses gain 1 and discount 1/log2(position + 1); the normalizer is the
    ideal DCG of min(|relevant|, rank) relevant items.
    """
    if not isinstance(relevant, (set, frozenset)):
        relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    ids = ranking.ids if isinstance(ranking, RankedResultSet) else ranking
    dcg = 0.0
    for position, image_id in enumerate(ids[:rank], start=1):
        if image_id in relevant:
            dcg += _discount(position)
    _discount(rank)  # make sure the prefix table covers the ideal window
    ideal = _IDEAL_PREFIX[min(len(relevant), rank)]
    return dcg / ideal


def tokenize(text: str) -> set[str]:
    """Lowercased token set: alphanumeric runs, everything else a separator."""
    return set(_TOKEN_RE.findall(text.lower()))


def jaccard_similarity(q0: str, q_hat: str) -> float:
    """Token-set Jaccard similarity between two query strings.

    Two empty token sets count as identical, so blank-vs-blank scores 1.
    """
    a = tokenize(q0)
    b = tokenize(q_hat)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def query_embedding_similarity(q0_vec: np.ndarray, q_hat_vec: np.ndarray) -> float:
    """Cosine between the embedding of the suggestion and of the initial query."""
    return cosine(q0_vec, q_hat_vec)


@dataclass(frozen=True)
class ClusterScore:
    """All six measures for one (query, cluster, suggestion) triple."""

    query_id: str
    cluster_id: str
    query_embedding_sim: float
    jaccard: float
    recall_cluster: float
    repr_recall: float
    repr_ndcg: float
    repr_map: float

    def value(self, metric: str) -> float:
        if metric not in METRIC_NAMES:
            raise KeyError(f"unknown metric {metric!r}")
        return getattr(self, metric)


@dataclass(frozen=True)
class MetricReport:
    """Per-cluster scores with per-query means and the macro mean ± std."""

    per_cluster: tuple[ClusterScore, ...]
    per_query: dict[str, dict[str, float]]
    macro: dict[str, tuple[float, float]]

    def macro_mean(self, metric: str) -> float:
        return self.macro[metric][0]

    def macro_std(self, metric: str) -> float:
        return self.macro[metric][1]


def macro_average(per_cluster: Sequence[ClusterScore]) -> MetricReport:
    """Aggregate cluster scores: mean within each query, then mean ± std across queries.

    The standard deviation is the population form over query-level means.
    Queries and clusters are processed in sorted id order so aggregation is
    deterministic regardless of input order.
    """
    if not per_cluster:
        raise ValueError("no cluster scores to aggregate")
    ordered = sorted(per_cluster, key=lambda s: (s.query_id, s.cluster_id))
    by_query: dict[str, list[ClusterScore]] = {}
    for score in ordered:
        by_query.setdefault(score.query_id, []).append(score)
    per_query: dict[str, dict[str, float]] = {}
    for query_id, scores in by_query.items():
        per_query[query_id] = {
            metric: sum(s.value(metric) for s in scores) / len(scores)
            for metric in METRIC_NAMES
        }
    macro: dict[str, tuple[float, float]] = {}
    for metric in METRIC_NAMES:
        means = np.array([per_query[q][metric] for q in sorted(per_query)])
        if means.max() == means.min():
            macro[metric] = (float(means[0]), 0.0)
        else:
            macro[metric] = (float(means.mean()), float(means.std()))
    return MetricReport(per_cluster=tuple(ordered), per_query=per_query, macro=macro)
