"""Cluster prototypes: the normalized centroid or the most representative member."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import Cluster
from .embeddings import EmbeddingStore, normalize


@dataclass(frozen=True)
class Prototype:
    """A single embedding-space point standing for a whole cluster."""

    vector: np.ndarray
    kind: str  # "centroid" or "representative"
    source_cluster_id: str


def centroid_prototype(cluster: Cluster, store: EmbeddingStore) -> Prototype:
    """Arithmetic mean of the member embeddings, re-normalized to the sphere."""
    if not cluster.image_ids:
        raise ValueError(f"cluster {cluster.cluster_id!r} is empty")
    members = _member_matrix(cluster, store)
    mean = members.mean(axis=0)
    if float(np.linalg.norm(mean)) == 0.0:
        raise ValueError(
            f"cluster {cluster.cluster_id!r} members cancel out; centroid undefined"
        )
    return Prototype(
        vector=normalize(mean), kind="centroid", source_cluster_id=cluster.cluster_id
    )


def representative_ranking(
    cluster: Cluster, store: EmbeddingStore
) -> list[tuple[str, float]]:
    """Members ordered by total cosine similarity to the whole cluster.

    The sum runs over every member including the point itself; the self term
    adds a constant 1 to each score and leaves the ordering unchanged.
    Ties are broken by ascending image id.
    """
    if not cluster.image_ids:
        raise ValueError(f"cluster {cluster.cluster_id!r} is empty")
    members = _member_matrix(cluster, store)
    gram = members @ members.T
    # Pin cos(v, v) at its exact value and enforce symmetry so mathematically
    # tied members stay tied and fall through to the id tie-break.
    gram = (gram + gram.T) / 2.0
    np.fill_diagonal(gram, 1.0)
    scores = gram.sum(axis=1)
    order = sorted(
        range(len(cluster.image_ids)),
        key=lambda i: (-scores[i], cluster.image_ids[i]),
    )
    return [(cluster.image_ids[i], float(scores[i])) for i in order]


def representative_prototype(cluster: Cluster, store: EmbeddingStore) -> Prototype:
    """The member with the highest mean similarity to the rest of the cluster."""
    best_id, _ = representative_ranking(cluster, store)[0]
    return Prototype(
        vector=store.vector(best_id),
        kind="representative",
        source_cluster_id=cluster.cluster_id,
    )


def top_m_representatives(
    cluster: Cluster, store: EmbeddingStore, m: int
) -> list[str]:
    """The min(m, |cluster|) most representative member ids, best first."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return [image_id for image_id, _ in representative_ranking(cluster, store)[:m]]


def _member_matrix(cluster: Cluster, store: EmbeddingStore) -> np.ndarray:
    try:
        return store.rows(cluster.image_ids)
    except KeyError as exc:
        raise ValueError(
            f"cluster {cluster.cluster_id!r} references {exc.args[0]}"
        ) from None
