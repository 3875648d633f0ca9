"""Planted synthetic worlds: stores, benchmarks, and mock registries with known structure."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .benchmark import Benchmark, BenchmarkEntry, save_benchmark
from .clustering import Cluster
from .embeddings import EmbeddingStore, build_store, normalize, save_store


def orthonormal_directions(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """`count` exactly orthonormal rows in `dim` dimensions."""
    if count > dim:
        raise ValueError(f"cannot fit {count} orthonormal directions in dimension {dim}")
    q, _ = np.linalg.qr(rng.normal(size=(dim, count)))
    return q.T


def points_in_cone(
    direction: np.ndarray, count: int, max_angle_deg: float, rng: np.random.Generator
) -> np.ndarray:
    """Unit vectors at most `max_angle_deg` degrees away from `direction`."""
    direction = normalize(direction)
    dim = direction.shape[0]
    points = np.empty((count, dim))
    for i in range(count):
        angle = math.radians(rng.uniform(0.0, max_angle_deg))
        tangent = rng.normal(size=dim)
        tangent -= (tangent @ direction) * direction
        tangent /= np.linalg.norm(tangent)
        points[i] = math.cos(angle) * direction + math.sin(angle) * tangent
    return points


@dataclass(frozen=True)
class PlantedWorld:
    """A synthetic store plus benchmark where every cluster has a known direction."""

    store: EmbeddingStore
    benchmark: Benchmark
    cluster_directions: dict[tuple[str, str], np.ndarray]
    query_directions: dict[str, np.ndarray]
    oracle_suggestions: dict[tuple[str, str], str]
    mock_spec: dict[str, Any]


def make_planted(
    n_queries: int = 5,
    clusters_per_query: int = 3,
    points_per_cluster: int = 10,
    dim: int = 32,
    cone_deg: float = 5.0,
    seed: int = 0,
) -> PlantedWorld:
    """Build a world of orthogonal concept cones.

    Each query owns `clusters_per_query` mutually orthogonal directions; its
    members are sampled inside a `cone_deg` cone around their direction. The
    mock registry maps each query text to the normalized sum of its cluster
    directions and each oracle suggestion (plus its captioned form) to the
    exact cluster direction.
    """
    rng = np.random.default_rng(seed)
    total_dirs = n_queries * clusters_per_query
    directions = orthonormal_directions(total_dirs, dim, rng)

    entries: list[BenchmarkEntry] = []
    store_entries: list[tuple[str, np.ndarray]] = []
    cluster_directions: dict[tuple[str, str], np.ndarray] = {}
    query_directions: dict[str, np.ndarray] = {}
    oracle: dict[tuple[str, str], str] = {}
    registry: dict[str, list[float]] = {}
    concepts: dict[str, list[float]] = {}
    completions: dict[str, str] = {}

    for qi in range(n_queries):
        query_id = f"q{qi:02d}"
        query_text = f"planted query {qi:02d}"
        clusters = []
        own_dirs = []
        for ci in range(clusters_per_query):
            cluster_id = f"c{ci:02d}"
            direction = directions[qi * clusters_per_query + ci]
            own_dirs.append(direction)
            phrase = f"planted query {qi:02d} concept {ci:02d}"
            members = points_in_cone(direction, points_per_cluster, cone_deg, rng)
            image_ids = tuple(
                f"img-{query_id}-{cluster_id}-p{p:02d}" for p in range(points_per_cluster)
            )
            store_entries.extend(zip(image_ids, members))
            clusters.append(
                Cluster(cluster_id=cluster_id, image_ids=image_ids, human_suggestion=phrase)
            )
            cluster_directions[(query_id, cluster_id)] = direction
            oracle[(query_id, cluster_id)] = phrase
            registry[phrase] = direction.tolist()
            registry[f"a {phrase}"] = direction.tolist()
            concepts[phrase] = direction.tolist()
            completions[f"a {phrase}"] = phrase
        query_direction = normalize(np.sum(own_dirs, axis=0))
        query_directions[query_id] = query_direction
        registry[query_text] = query_direction.tolist()
        entries.append(
            BenchmarkEntry(query_id=query_id, text=query_text, clusters=tuple(clusters))
        )

    store = build_store(store_entries, model_name=f"planted-seed{seed}")
    benchmark = Benchmark(entries=tuple(entries), image_namespace="planted")
    mock_spec = {
        "name": "mock",
        "dimension": dim,
        "registry": registry,
        "concepts": concepts,
        "completions": completions,
    }
    return PlantedWorld(
        store=store,
        benchmark=benchmark,
        cluster_directions=cluster_directions,
        query_directions=query_directions,
        oracle_suggestions=oracle,
        mock_spec=mock_spec,
    )


def write_planted(
    world: PlantedWorld, out_dir: str | Path, store_format: str = "binary"
) -> dict[str, Path]:
    """Write store, benchmark, and mock spec files; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    suffix = "bin" if store_format == "binary" else "jsonl"
    paths = {
        "store": out / f"store.{suffix}",
        "benchmark": out / "benchmark.json",
        "mock": out / "mock.json",
    }
    save_store(world.store, paths["store"], format=store_format)
    save_benchmark(world.benchmark, paths["benchmark"])
    with paths["mock"].open("w", encoding="utf-8") as fh:
        json.dump(world.mock_spec, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
