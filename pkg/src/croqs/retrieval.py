"""Exact top-k retrieval by descending cosine over a store or a subset of it."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingStore, as_vector, normalize


@dataclass(frozen=True)
class RankedResultSet:
    """Ordered retrieval result: (image id, score) pairs, best first.

    `universe` is "collection" when the whole store was searched, otherwise
    the tuple of ids the search was restricted to.
    """

    query_id: str
    items: tuple[tuple[str, float], ...]
    universe: str | tuple[str, ...] = "collection"

    def __post_init__(self) -> None:
        scores = [s for _, s in self.items]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("result scores must be non-increasing")
        ids = [i for i, _ in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("result ids must be unique")

    @classmethod
    def from_ids(cls, ids: Sequence[str], query_id: str = "q", universe: str | tuple[str, ...] = "collection") -> "RankedResultSet":
        """Build a ranking from ids alone; useful for handcrafted rankings."""
        return cls(query_id=query_id, items=tuple((i, 0.0) for i in ids), universe=universe)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.items)

    def __len__(self) -> int:
        return len(self.items)


def search(
    query_vec: np.ndarray,
    store: EmbeddingStore,
    k: int,
    query_id: str = "q",
) -> RankedResultSet:
    """Top-k ids of the whole store by descending cosine to the query.

    Ties are broken by ascending image id so results are reproducible.
    Returns min(k, len(store)) items.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(store) == 0:
        raise ValueError("cannot search an empty store")
    q = normalize(as_vector(query_vec, store.dimension))
    scores = store.matrix @ q
    top = _top_indices(scores, store.ids, k)
    items = tuple((store.ids[i], float(scores[i])) for i in top)
    return RankedResultSet(query_id=query_id, items=items, universe="collection")


def search_within(
    query_vec: np.ndarray,
    store: EmbeddingStore,
    subset: Sequence[str],
    k: int,
    query_id: str = "q",
) -> RankedResultSet:
    """Top-k of `subset` by descending cosine; same ordering rule as search()."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not subset:
        raise ValueError("subset must be non-empty")
    for image_id in subset:
        if image_id not in store:
            raise ValueError(f"subset id {image_id!r} not in store")
    q = normalize(as_vector(query_vec, store.dimension))
    subset = tuple(subset)
    scores = store.rows(subset) @ q
    top = _top_indices(scores, subset, k)
    items = tuple((subset[i], float(scores[i])) for i in top)
    return RankedResultSet(query_id=query_id, items=items, universe=subset)


def _top_indices(scores: np.ndarray, ids: Sequence[str], k: int) -> list[int]:
    """Indices of the k best scores, ties resolved by ascending id."""
    n = scores.shape[0]
    k = min(k, n)
    if k < n:
        # argpartition may split a tie group arbitrarily, so collect every
        # index at or above the k-th score before applying the full ordering.
        part = np.argpartition(-scores, k - 1)[:k]
        threshold = scores[part].min()
        candidates = np.flatnonzero(scores >= threshold)
    else:
        candidates = np.arange(n)
    ordered = sorted(candidates, key=lambda i: (-scores[i], ids[i]))
    return ordered[:k]
