import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from croqs.embeddings import build_store, normalize
from croqs.retrieval import RankedResultSet, search, search_within


def brute_force_ranking(store, query_vec, ids=None):
    """Oracle: score every candidate, full sort by (-score, id)."""
    ids = list(ids if ids is not None else store.ids)
    q = normalize(np.asarray(query_vec, dtype=np.float64))
    scored = [(i, float(store.vector(i) @ q)) for i in ids]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [i for i, _ in scored]


def random_store(seed, n, d):
    rng = np.random.default_rng(seed)
    return build_store({f"img{i:04d}": rng.normal(size=d) for i in range(n)})


class TestRankedResultSet:
    def test_scores_must_not_increase(self):
        with pytest.raises(ValueError, match="non-increasing"):
            RankedResultSet("q", (("a", 0.1), ("b", 0.5)))

    def test_ids_must_be_unique(self):
        with pytest.raises(ValueError, match="unique"):
            RankedResultSet("q", (("a", 0.5), ("a", 0.1)))

    def test_from_ids(self):
        rs = RankedResultSet.from_ids(["c", "a", "b"])
        assert rs.ids == ("c", "a", "b")


class TestSearch:
    def test_self_retrieval_scores_one(self):
        store = build_store({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        result = search(store.vector("a"), store, k=1)
        assert result.items[0][0] == "a"
        assert result.items[0][1] == pytest.approx(1.0, abs=1e-12)

    def test_two_vector_ordering(self):
        # cosines: a = 2/sqrt(5) = 0.894, b = 1/sqrt(5) = 0.447
        store = build_store({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        result = search(normalize([2.0, 1.0]), store, k=2)
        assert result.ids == ("a", "b")
        assert result.items[0][1] == pytest.approx(0.8944271909999159, abs=1e-9)
        assert result.items[1][1] == pytest.approx(0.4472135954999579, abs=1e-9)

    def test_k_exceeding_store_size(self):
        store = random_store(0, n=5, d=4)
        result = search(np.ones(4), store, k=50)
        assert len(result) == 5

    def test_k_zero_rejected(self):
        store = random_store(0, n=3, d=4)
        with pytest.raises(ValueError, match="k must be"):
            search(np.ones(4), store, k=0)

    def test_tie_break_by_id(self):
        store = build_store({"z": [1.0, 0.0], "a": [1.0, 0.0], "m": [0.0, 1.0]})
        result = search(np.array([1.0, 0.0]), store, k=3)
        assert result.ids == ("a", "z", "m")

    def test_planted_duplicate_ranks_first(self):
        store = random_store(3, n=50, d=8)
        query = store.vector("img0042")
        result = search(query, store, k=5)
        assert result.ids[0] == "img0042"

    @settings(deadline=None, max_examples=30)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(1, 200),
        d=st.integers(2, 64),
        k=st.integers(1, 250),
    )
    def test_exactness_against_brute_force(self, seed, n, d, k):
        store = random_store(seed, n, d)
        rng = np.random.default_rng(seed + 1)
        query = rng.normal(size=d)
        expected = brute_force_ranking(store, query)[: min(k, n)]
        assert list(search(query, store, k).ids) == expected

    @settings(deadline=None, max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 30))
    def test_monotone_prefix(self, seed, k):
        store = random_store(seed, n=40, d=8)
        query = np.random.default_rng(seed).normal(size=8)
        small = search(query, store, k)
        large = search(query, store, k + 1)
        assert large.ids[: len(small)] == small.ids


class TestSearchWithin:
    def test_whole_store_matches_search(self):
        store = random_store(11, n=30, d=6)
        query = np.random.default_rng(5).normal(size=6)
        full = search(query, store, k=30)
        restricted = search_within(query, store, list(store.ids), k=30)
        assert restricted.ids == full.ids

    def test_singleton_subset(self):
        store = random_store(1, n=10, d=4)
        result = search_within(np.ones(4), store, ["img0007"], k=3)
        assert result.ids == ("img0007",)

    def test_four_id_subset_matches_oracle(self):
        store = build_store(
            {
                "a": [1.0, 0.0, 0.0],
                "b": [0.0, 1.0, 0.0],
                "c": [0.7, 0.7, 0.0],
                "d": [0.0, 0.0, 1.0],
                "e": [0.5, 0.5, 0.5],
            }
        )
        subset = ["a", "b", "c", "d"]
        query = normalize([1.0, 0.5, 0.0])
        expected = brute_force_ranking(store, query, ids=subset)
        result = search_within(query, store, subset, k=4)
        assert list(result.ids) == expected
        assert result.universe == tuple(subset)

    def test_unknown_subset_id_named(self):
        store = random_store(2, n=5, d=4)
        with pytest.raises(ValueError, match="'ghost'"):
            search_within(np.ones(4), store, ["img0001", "ghost"], k=2)
