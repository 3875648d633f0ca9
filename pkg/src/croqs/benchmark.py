"""Benchmark data model: initial queries, image clusters, human suggestions."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .clustering import Cluster
from .embeddings import EmbeddingStore

SCHEMA_VERSION = 1


class BenchmarkFormatError(ValueError):
    """Schema violation; `pointer` locates the offending JSON node."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


@dataclass(frozen=True)
class BenchmarkEntry:
    """One initial query with its human-validated clusters."""

    query_id: str
    text: str
    clusters: tuple[Cluster, ...]

    def __post_init__(self) -> None:
        if len(self.clusters) < 2:
            raise ValueError(
                f"query {self.query_id!r} needs at least 2 clusters, "
                f"got {len(self.clusters)}"
            )
        seen: dict[str, str] = {}
        for cluster in self.clusters:
            if not (cluster.human_suggestion or "").strip():
                raise ValueError(
                    f"cluster {cluster.cluster_id!r} of query {self.query_id!r} "
                    "lacks a human suggestion"
                )
            for image_id in cluster.image_ids:
                if image_id in seen:
                    raise ValueError(
                        f"image {image_id!r} appears in clusters "
                        f"{seen[image_id]!r} and {cluster.cluster_id!r} "
                        f"of query {self.query_id!r}"
                    )
                seen[image_id] = cluster.cluster_id


@dataclass(frozen=True)
class BenchmarkStats:
    query_count: int
    cluster_count: int
    mean_clusters_per_query: float


@dataclass(frozen=True)
class Benchmark:
    entries: tuple[BenchmarkEntry, ...]
    image_namespace: str = "local"

    def __post_init__(self) -> None:
        ids = [e.query_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate query ids: {dupes}")

    def stats(self) -> BenchmarkStats:
        clusters = sum(len(e.clusters) for e in self.entries)
        return BenchmarkStats(
            query_count=len(self.entries),
            cluster_count=clusters,
            mean_clusters_per_query=clusters / len(self.entries) if self.entries else 0.0,
        )

    def entry(self, query_id: str) -> BenchmarkEntry:
        for e in self.entries:
            if e.query_id == query_id:
                return e
        raise KeyError(f"unknown query id {query_id!r}")


def load_benchmark(path: str | Path) -> Benchmark:
    """Load and validate a benchmark file in the canonical JSON schema."""
    with Path(path).open("r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return benchmark_from_dict(obj)


def save_benchmark(bench: Benchmark, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(benchmark_to_dict(bench), fh, indent=2, sort_keys=True)
        fh.write("\n")


def benchmark_to_dict(bench: Benchmark) -> dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "image_namespace": bench.image_namespace,
        "queries": [
            {
                "id": e.query_id,
                "text": e.text,
                "clusters": [
                    {
                        "id": c.cluster_id,
                        "human_suggestion": c.human_suggestion,
                        "image_ids": list(c.image_ids),
                    }
                    for c in e.clusters
                ],
            }
            for e in bench.entries
        ],
    }


def benchmark_from_dict(obj: Any) -> Benchmark:
    """Validate a canonical-schema object; errors carry a JSON-pointer path."""
    if not isinstance(obj, dict):
        raise BenchmarkFormatError("", "top level must be an object")
    if obj.get("version") != SCHEMA_VERSION:
        raise BenchmarkFormatError("/version", f"expected {SCHEMA_VERSION}")
    namespace = obj.get("image_namespace", "local")
    if not isinstance(namespace, str):
        raise BenchmarkFormatError("/image_namespace", "must be a string")
    queries = obj.get("queries")
    if not isinstance(queries, list) or not queries:
        raise BenchmarkFormatError("/queries", "must be a non-empty array")
    entries = []
    for qi, query in enumerate(queries):
        entries.append(_parse_entry(query, f"/queries/{qi}"))
    try:
        return Benchmark(entries=tuple(entries), image_namespace=namespace)
    except ValueError as exc:
        raise BenchmarkFormatError("/queries", str(exc)) from None


def _parse_entry(query: Any, pointer: str) -> BenchmarkEntry:
    if not isinstance(query, dict):
        raise BenchmarkFormatError(pointer, "must be an object")
    query_id = _require_str(query, "id", pointer)
    text = _require_str(query, "text", pointer)
    raw_clusters = query.get("clusters")
    if not isinstance(raw_clusters, list):
        raise BenchmarkFormatError(f"{pointer}/clusters", "must be an array")
    clusters = []
    for ci, raw in enumerate(raw_clusters):
        cpointer = f"{pointer}/clusters/{ci}"
        if not isinstance(raw, dict):
            raise BenchmarkFormatError(cpointer, "must be an object")
        cluster_id = _require_str(raw, "id", cpointer)
        suggestion = _require_str(raw, "human_suggestion", cpointer)
        image_ids = raw.get("image_ids")
        if not isinstance(image_ids, list) or not image_ids:
            raise BenchmarkFormatError(f"{cpointer}/image_ids", "must be a non-empty array")
        if not all(isinstance(i, str) for i in image_ids):
            raise BenchmarkFormatError(f"{cpointer}/image_ids", "ids must be strings")
        try:
            clusters.append(
                Cluster(
                    cluster_id=cluster_id,
                    image_ids=tuple(image_ids),
                    human_suggestion=suggestion,
                )
            )
        except ValueError as exc:
            raise BenchmarkFormatError(cpointer, str(exc)) from None
    try:
        return BenchmarkEntry(query_id=query_id, text=text, clusters=tuple(clusters))
    except ValueError as exc:
        raise BenchmarkFormatError(pointer, str(exc)) from None


def _require_str(obj: dict, key: str, pointer: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise BenchmarkFormatError(f"{pointer}/{key}", "must be a non-empty string")
    return value


def validate_against_store(bench: Benchmark, store: EmbeddingStore) -> list[str]:
    """Ids referenced by the benchmark but absent from the store.

    One entry per missing reference, in benchmark order, so the length equals
    the number of unresolvable references.
    """
    missing = []
    for entry in bench.entries:
        for cluster in entry.clusters:
            for image_id in cluster.image_ids:
                if image_id not in store:
                    missing.append(image_id)
    return missing


def convert_release(obj: Any) -> dict[str, Any]:
    """Adapt the published benchmark release layout to the canonical schema.

    The release maps each initial query string to named clusters holding
    numeric image ids and a suggestion:

        {"a sport race": {"clusters": {"skiing": {
            "suggestion": "a skiing race", "images": [139, 285]}}}}

    Image ids are stringified; query and cluster ids are assigned from
    insertion order so the conversion is deterministic.
    """
    if not isinstance(obj, dict) or not obj:
        raise BenchmarkFormatError("", "release file must be a non-empty object")
    queries = []
    for qi, (query_text, body) in enumerate(obj.items()):
        pointer = f"/{query_text}"
        if not isinstance(body, dict) or not isinstance(body.get("clusters"), dict):
            raise BenchmarkFormatError(pointer, "expected an object with 'clusters'")
        clusters = []
        for ci, (name, cluster) in enumerate(body["clusters"].items()):
            cpointer = f"{pointer}/clusters/{name}"
            if not isinstance(cluster, dict):
                raise BenchmarkFormatError(cpointer, "must be an object")
            suggestion = cluster.get("suggestion")
            images = cluster.get("images")
            if not isinstance(suggestion, str) or not suggestion:
                raise BenchmarkFormatError(f"{cpointer}/suggestion", "must be a non-empty string")
            if not isinstance(images, list) or not images:
                raise BenchmarkFormatError(f"{cpointer}/images", "must be a non-empty array")
            clusters.append(
                {
                    "id": f"q{qi:03d}-c{ci:02d}-{name}",
                    "human_suggestion": suggestion,
                    "image_ids": [str(i) for i in images],
                }
            )
        queries.append({"id": f"q{qi:03d}", "text": query_text, "clusters": clusters})
    return {
        "version": SCHEMA_VERSION,
        "image_namespace": "coco-train",
        "queries": queries,
    }


def load_release(path: str | Path) -> Benchmark:
    """Load a published-release benchmark file through the adapter."""
    with Path(path).open("r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return benchmark_from_dict(convert_release(obj))
