"""Partition a result set into disjoint semantic groups by spherical k-means."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingStore
from .retrieval import RankedResultSet

MAX_ITERATIONS = 100


@dataclass(frozen=True)
class Cluster:
    """A non-empty group of image ids, optionally carrying a human suggestion."""

    cluster_id: str
    image_ids: tuple[str, ...]
    human_suggestion: str | None = None

    def __post_init__(self) -> None:
        if not self.image_ids:
            raise ValueError(f"cluster {self.cluster_id!r} must be non-empty")
        if len(set(self.image_ids)) != len(self.image_ids):
            raise ValueError(f"cluster {self.cluster_id!r} has duplicate image ids")

    def __len__(self) -> int:
        return len(self.image_ids)


@dataclass(frozen=True)
class ClusterPartition:
    """Pairwise-disjoint clusters drawn from one result set."""

    clusters: tuple[Cluster, ...]
    source: str  # "benchmark" or "computed"

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for cluster in self.clusters:
            overlap = seen.intersection(cluster.image_ids)
            if overlap:
                raise ValueError(
                    f"cluster {cluster.cluster_id!r} overlaps earlier clusters "
                    f"on {sorted(overlap)}"
                )
            seen.update(cluster.image_ids)

    def __len__(self) -> int:
        return len(self.clusters)


@dataclass
class KMeansTrace:
    """Internals of one spherical k-means run, kept for diagnostics and tests."""

    labels: np.ndarray
    centroids: np.ndarray
    objective_history: list[float] = field(default_factory=list)
    iterations: int = 0


def kmeans_partition(
    result: RankedResultSet,
    store: EmbeddingStore,
    m: int,
    seed: int,
) -> ClusterPartition:
    """Cluster a result set into m groups by cosine similarity.

    Spherical k-means: k-means++ seeding from the given seed, assignment by
    maximum cosine to the centroid, centroids re-normalized each iteration.
    Deterministic for a fixed seed. Cluster members keep result-set order.
    """
    n = len(result)
    if not 2 <= m <= n:
        raise ValueError(f"m must be in [2, {n}], got {m}")
    ids = result.ids
    points = store.rows(ids)
    trace = spherical_kmeans(points, m, np.random.default_rng(seed))
    clusters = []
    for j in range(m):
        member_ids = tuple(ids[i] for i in range(n) if trace.labels[i] == j)
        clusters.append(Cluster(cluster_id=f"c{j}", image_ids=member_ids))
    return ClusterPartition(clusters=tuple(clusters), source="computed")


def spherical_kmeans(
    points: np.ndarray, m: int, rng: np.random.Generator
) -> KMeansTrace:
    """Run spherical k-means on unit-norm rows; every cluster ends non-empty."""
    centroids = _kmeans_plus_plus(points, m, rng)
    labels = np.argmax(points @ centroids.T, axis=1)
    trace = KMeansTrace(labels=labels, centroids=centroids)
    for iteration in range(MAX_ITERATIONS):
        repaired = _repair_empty(points, labels, centroids, m)
        centroids = _update_centroids(points, labels, centroids, m)
        trace.objective_history.append(float((points * centroids[labels]).sum(1).mean()))
        new_labels = np.argmax(points @ centroids.T, axis=1)
        trace.iterations = iteration + 1
        if not repaired and np.array_equal(new_labels, labels):
            break
        labels = new_labels
    _repair_empty(points, labels, centroids, m)
    trace.labels = labels
    trace.centroids = centroids
    return trace


def _kmeans_plus_plus(points: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding with squared Euclidean weights (2 - 2 cos on the sphere)."""
    n = points.shape[0]
    centroids = np.empty((m, points.shape[1]))
    chosen = int(rng.integers(n))
    centroids[0] = points[chosen]
    d2 = np.maximum(2.0 - 2.0 * (points @ centroids[0]), 0.0)
    for j in range(1, m):
        total = float(d2.sum())
        if total <= 1e-12:
            chosen = int(rng.integers(n))
        else:
            r = rng.random() * total
            chosen = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            chosen = min(chosen, n - 1)
        centroids[j] = points[chosen]
        d2 = np.minimum(d2, np.maximum(2.0 - 2.0 * (points @ centroids[j]), 0.0))
    return centroids


def _update_centroids(
    points: np.ndarray, labels: np.ndarray, previous: np.ndarray, m: int
) -> np.ndarray:
    centroids = previous.copy()
    for j in range(m):
        members = points[labels == j]
        if members.shape[0] == 0:
            continue
        mean = members.mean(axis=0)
        norm = float(np.linalg.norm(mean))
        if norm > 0.0:
            centroids[j] = mean / norm
    return centroids


def _repair_empty(
    points: np.ndarray, labels: np.ndarray, centroids: np.ndarray, m: int
) -> bool:
    """Reseed each empty cluster from the worst-assigned point.

    The donor is the point with the lowest cosine to its centroid, restricted
    to clusters that can spare a member. Mutates labels and centroids.
    """
    repaired = False
    sizes = np.bincount(labels, minlength=m)
    for j in range(m):
        if sizes[j] > 0:
            continue
        sims = (points * centroids[labels]).sum(axis=1)
        candidates = [i for i in range(points.shape[0]) if sizes[labels[i]] > 1]
        if not candidates:
            raise ValueError("cannot repair empty cluster: no donor points")
        donor = min(candidates, key=lambda i: (sims[i], i))
        sizes[labels[donor]] -= 1
        labels[donor] = j
        sizes[j] = 1
        centroids[j] = points[donor]
        repaired = True
    return repaired
