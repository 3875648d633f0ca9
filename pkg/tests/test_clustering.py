import numpy as np
import pytest

from croqs.clustering import (
    Cluster,
    ClusterPartition,
    kmeans_partition,
    spherical_kmeans,
)
from croqs.embeddings import build_store
from croqs.retrieval import RankedResultSet
from croqs.synthetic import orthonormal_directions, points_in_cone


def planted_store(n_dirs, per_dir, dim, cone_deg=5.0, seed=0):
    rng = np.random.default_rng(seed)
    directions = orthonormal_directions(n_dirs, dim, rng)
    entries = {}
    labels = {}
    for d in range(n_dirs):
        for p, vec in enumerate(points_in_cone(directions[d], per_dir, cone_deg, rng)):
            image_id = f"d{d}-p{p:02d}"
            entries[image_id] = vec
            labels[image_id] = d
    return build_store(entries), labels


class TestClusterTypes:
    def test_empty_cluster_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            Cluster(cluster_id="c0", image_ids=())

    def test_duplicate_members_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Cluster(cluster_id="c0", image_ids=("a", "a"))

    def test_partition_overlap_rejected(self):
        a = Cluster(cluster_id="c0", image_ids=("x", "y"))
        b = Cluster(cluster_id="c1", image_ids=("y", "z"))
        with pytest.raises(ValueError, match="overlaps"):
            ClusterPartition(clusters=(a, b), source="computed")


class TestKMeansPartition:
    def test_planted_two_cones_recovered_exactly(self):
        store, truth = planted_store(n_dirs=2, per_dir=12, dim=8, seed=5)
        result = RankedResultSet.from_ids(sorted(store.ids))
        partition = kmeans_partition(result, store, m=2, seed=17)
        assert len(partition) == 2
        recovered = [set(c.image_ids) for c in partition.clusters]
        expected = [
            {i for i, lab in truth.items() if lab == 0},
            {i for i, lab in truth.items() if lab == 1},
        ]
        assert recovered == expected or recovered == expected[::-1]

    def test_m_equal_to_result_size_gives_singletons(self):
        rng = np.random.default_rng(2)
        store = build_store({f"v{i}": rng.normal(size=6) for i in range(8)})
        result = RankedResultSet.from_ids(sorted(store.ids))
        partition = kmeans_partition(result, store, m=8, seed=0)
        assert sorted(len(c) for c in partition.clusters) == [1] * 8

    def test_same_seed_is_deterministic(self):
        store, _ = planted_store(n_dirs=3, per_dir=10, dim=16, seed=9)
        result = RankedResultSet.from_ids(sorted(store.ids))
        first = kmeans_partition(result, store, m=3, seed=4)
        second = kmeans_partition(result, store, m=3, seed=4)
        assert first == second

    def test_m_out_of_range(self):
        rng = np.random.default_rng(0)
        store = build_store({f"v{i}": rng.normal(size=4) for i in range(5)})
        result = RankedResultSet.from_ids(sorted(store.ids))
        with pytest.raises(ValueError, match="m must be"):
            kmeans_partition(result, store, m=1, seed=0)
        with pytest.raises(ValueError, match="m must be"):
            kmeans_partition(result, store, m=6, seed=0)

    @pytest.mark.parametrize("seed", range(8))
    def test_disjoint_and_covering_on_random_input(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 40))
        store = build_store({f"v{i:02d}": rng.normal(size=5) for i in range(n)})
        result = RankedResultSet.from_ids(sorted(store.ids))
        m = int(rng.integers(2, min(10, n) + 1))
        partition = kmeans_partition(result, store, m=m, seed=seed)
        all_members = [i for c in partition.clusters for i in c.image_ids]
        assert len(all_members) == len(set(all_members)) == n
        assert set(all_members) == set(store.ids)
        assert all(len(c) >= 1 for c in partition.clusters)

    def test_members_keep_result_order(self):
        store, _ = planted_store(n_dirs=2, per_dir=5, dim=4, seed=1)
        order = sorted(store.ids, reverse=True)
        result = RankedResultSet.from_ids(order)
        partition = kmeans_partition(result, store, m=2, seed=0)
        rank = {image_id: i for i, image_id in enumerate(order)}
        for cluster in partition.clusters:
            positions = [rank[i] for i in cluster.image_ids]
            assert positions == sorted(positions)


class TestSphericalKMeans:
    @pytest.mark.parametrize("seed", range(6))
    def test_objective_non_decreasing(self, seed):
        rng = np.random.default_rng(seed)
        n, d, m = 60, 8, 5
        points = rng.normal(size=(n, d))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        trace = spherical_kmeans(points, m, np.random.default_rng(seed + 100))
        history = trace.objective_history
        assert all(b >= a - 1e-12 for a, b in zip(history, history[1:]))

    def test_duplicate_points_never_yield_empty_cluster(self):
        # 4 distinct points, many duplicates, m close to n
        base = np.eye(4)
        points = np.vstack([base, base, base[:2]])
        trace = spherical_kmeans(points, 6, np.random.default_rng(0))
        counts = np.bincount(trace.labels, minlength=6)
        assert (counts > 0).all()

    def test_converges_before_iteration_cap(self):
        rng = np.random.default_rng(1)
        points = rng.normal(size=(50, 6))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        trace = spherical_kmeans(points, 4, np.random.default_rng(2))
        assert trace.iterations < 100
