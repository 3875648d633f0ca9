"""Benchmark evaluation: embed, retrieve, score, and macro-average every suggestion."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .backends.protocol import Backend, CAPABILITY_EMBED_TEXT, verify_backend
from .benchmark import Benchmark
from .embeddings import EmbeddingStore
from .metrics import (
    ClusterScore,
    METRIC_NAMES,
    MetricReport,
    average_precision,
    jaccard_similarity,
    macro_average,
    ndcg,
    query_embedding_similarity,
    recall_cluster,
    representativeness_recall,
)
from .orchestrator import SuggestionRecord
from .retrieval import search, search_within

logger = logging.getLogger(__name__)

# Markdown column order mirrors the benchmark's summary-table layout.
_TABLE_COLUMNS = (
    ("CLIP", "query_embedding_sim"),
    ("Jaccard", "jaccard"),
    ("Recall Cluster", "recall_cluster"),
    ("Recall", "repr_recall"),
    ("NDCG", "repr_ndcg"),
    ("MAP", "repr_map"),
)


@dataclass(frozen=True)
class EvalConfig:
    """Pinned evaluation parameters.

    result_set_size is the size of the initial result set the cluster
    ranking is restricted to; representativeness metrics are computed over
    the whole collection at their own cutoffs.
    """

    result_set_size: int = 100
    repr_cutoff: int = 100
    ndcg_rank: int = 10
    map_cutoff: int = 100

    def __post_init__(self) -> None:
        for name in ("result_set_size", "repr_cutoff", "ndcg_rank", "map_cutoff"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class EvalResult:
    """A metric report plus the provenance needed to reproduce it."""

    method: str
    config: EvalConfig
    report: MetricReport
    forced_inclusions: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def method_label(records: Sequence[SuggestionRecord]) -> str:
    """Human-readable row label derived from record provenance."""
    methods = {r.method for r in records}
    if len(methods) != 1:
        raise ValueError(f"records mix methods: {sorted(methods)}")
    method = methods.pop()
    if method == "identity":
        return "q0"
    if method == "human":
        return "human"
    if method == "groupcap":
        return "groupcap"
    kinds = {r.prototype_kind for r in records}
    aware = {r.query_aware for r in records}
    label = f"caption_{kinds.pop() if len(kinds) == 1 else 'mixed'}"
    if aware == {True}:
        label += "_q0"
    return label


def evaluate_suggestions(
    bench: Benchmark,
    store: EmbeddingStore,
    suggestions: Sequence[SuggestionRecord],
    text_embedder: Backend,
    config: EvalConfig = EvalConfig(),
    label: str | None = None,
) -> EvalResult:
    """Score one method's suggestions over a benchmark.

    Per cluster: the cluster-specificity recall re-ranks the initial result
    set of the original query (cluster members missing from it are force
    included and reported); representativeness metrics rank the whole
    collection; similarity metrics compare the suggestion text and embedding
    to the original query's.
    """
    by_key: dict[tuple[str, str], SuggestionRecord] = {}
    for record in suggestions:
        key = (record.query_id, record.cluster_id)
        if key in by_key:
            raise ValueError(f"duplicate suggestion for {key}")
        by_key[key] = record
    for entry in bench.entries:
        for cluster in entry.clusters:
            if (entry.query_id, cluster.cluster_id) not in by_key:
                raise ValueError(
                    f"missing suggestion for query {entry.query_id!r} "
                    f"cluster {cluster.cluster_id!r}"
                )

    verify_backend(text_embedder, {CAPABILITY_EMBED_TEXT}, store.dimension)

    entries = sorted(bench.entries, key=lambda e: e.query_id)
    q0_vectors = dict(
        zip((e.query_id for e in entries),
            text_embedder.embed_text([e.text for e in entries]))
    )
    suggestion_keys = sorted(
        (e.query_id, c.cluster_id) for e in entries for c in e.clusters
    )
    q_hat_vectors = dict(
        zip(suggestion_keys,
            text_embedder.embed_text([by_key[k].q_hat for k in suggestion_keys]))
    )

    collection_depth = max(config.repr_cutoff, config.ndcg_rank, config.map_cutoff)
    scores: list[ClusterScore] = []
    forced: list[tuple[str, str]] = []
    for entry in entries:
        q0_vec = q0_vectors[entry.query_id]
        initial = search(q0_vec, store, config.result_set_size, query_id=entry.query_id)
        universe = list(initial.ids)
        present = set(universe)
        for cluster in entry.clusters:
            for image_id in cluster.image_ids:
                if image_id not in present:
                    universe.append(image_id)
                    present.add(image_id)
                    forced.append((entry.query_id, image_id))
                    logger.info(
                        "query %s: cluster member %s missing from the top-%d "
                        "result set; force-included",
                        entry.query_id, image_id, config.result_set_size,
                    )
        for cluster in entry.clusters:
            record = by_key[(entry.query_id, cluster.cluster_id)]
            q_hat_vec = q_hat_vectors[(entry.query_id, cluster.cluster_id)]
            within = search_within(q_hat_vec, store, universe, k=len(universe))
            over_collection = search(q_hat_vec, store, collection_depth)
            scores.append(
                ClusterScore(
                    query_id=entry.query_id,
                    cluster_id=cluster.cluster_id,
                    query_embedding_sim=query_embedding_similarity(q0_vec, q_hat_vec),
                    jaccard=jaccard_similarity(entry.text, record.q_hat),
                    recall_cluster=recall_cluster(cluster, within),
                    repr_recall=representativeness_recall(
                        cluster, over_collection, config.repr_cutoff
                    ),
                    repr_ndcg=ndcg(cluster.image_ids, over_collection, config.ndcg_rank),
                    repr_map=average_precision(
                        cluster.image_ids, over_collection, config.map_cutoff
                    ),
                )
            )
    return EvalResult(
        method=label or method_label(list(by_key.values())),
        config=config,
        report=macro_average(scores),
        forced_inclusions=tuple(forced),
    )


def result_to_dict(result: EvalResult) -> dict:
    return {
        "method": result.method,
        "config": {
            "result_set_size": result.config.result_set_size,
            "repr_cutoff": result.config.repr_cutoff,
            "ndcg_rank": result.config.ndcg_rank,
            "map_cutoff": result.config.map_cutoff,
        },
        "forced_inclusions": [list(pair) for pair in result.forced_inclusions],
        "per_cluster": [
            {
                "query_id": s.query_id,
                "cluster_id": s.cluster_id,
                **{metric: s.value(metric) for metric in METRIC_NAMES},
            }
            for s in result.report.per_cluster
        ],
        "per_query": result.report.per_query,
        "macro": {
            metric: {"mean": mean, "std": std}
            for metric, (mean, std) in result.report.macro.items()
        },
    }


def result_from_dict(obj: dict) -> EvalResult:
    report = MetricReport(
        per_cluster=tuple(
            ClusterScore(**cluster_score) for cluster_score in obj["per_cluster"]
        ),
        per_query={q: dict(v) for q, v in obj["per_query"].items()},
        macro={m: (v["mean"], v["std"]) for m, v in obj["macro"].items()},
    )
    return EvalResult(
        method=obj["method"],
        config=EvalConfig(**obj["config"]),
        report=report,
        forced_inclusions=tuple((q, i) for q, i in obj["forced_inclusions"]),
    )


def emit_report(
    result: EvalResult | Sequence[EvalResult],
    format: str,
    path: str | Path | None = None,
) -> str:
    """Render one or more evaluation results as json, csv, or markdown.

    json and csv accept a single result; markdown renders one table row per
    result, mirroring the benchmark's summary-table layout.
    """
    results = [result] if isinstance(result, EvalResult) else list(result)
    if format == "json":
        if len(results) != 1:
            raise ValueError("json format renders a single result")
        text = json.dumps(result_to_dict(results[0]), indent=2, sort_keys=True) + "\n"
    elif format == "csv":
        if len(results) != 1:
            raise ValueError("csv format renders a single result")
        text = _to_csv(results[0])
    elif format == "markdown":
        text = _to_markdown(results)
    else:
        raise ValueError(f"unknown report format {format!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _to_csv(result: EvalResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["query_id", "cluster_id", *METRIC_NAMES])
    for s in result.report.per_cluster:
        writer.writerow(
            [s.query_id, s.cluster_id]
            + [f"{s.value(metric):.6f}" for metric in METRIC_NAMES]
        )
    macro = result.report.macro
    writer.writerow(
        ["(all)", "macro_mean"] + [f"{macro[m][0]:.6f}" for m in METRIC_NAMES]
    )
    writer.writerow(
        ["(all)", "macro_std"] + [f"{macro[m][1]:.6f}" for m in METRIC_NAMES]
    )
    return buffer.getvalue()


def _to_markdown(results: Sequence[EvalResult]) -> str:
    header = "| Method | " + " | ".join(name for name, _ in _TABLE_COLUMNS) + " |"
    rule = "|" + " --- |" * (len(_TABLE_COLUMNS) + 1)
    lines = [header, rule]
    for result in results:
        cells = [
            "{:.2f} ± {:.2f}".format(*result.report.macro[metric])
            for _, metric in _TABLE_COLUMNS
        ]
        lines.append("| " + " | ".join([result.method, *cells]) + " |")
    return "\n".join(lines) + "\n"


def verify_table_orderings(results: Mapping[str, EvalResult]) -> list[str]:
    """Check the expected relative orderings between method rows.

    Every non-q0 method should beat the q0 row on cluster-specificity recall,
    and the LLM summarization row should beat both captioning rows on Jaccard.
    Returns human-readable violations; empty means all expectations hold.
    """
    problems = []
    q0 = results.get("q0")
    if q0 is None:
        return ["no q0 row to compare against"]
    q0_recall = q0.report.macro_mean("recall_cluster")
    for label, result in sorted(results.items()):
        if label == "q0":
            continue
        value = result.report.macro_mean("recall_cluster")
        if value <= q0_recall:
            problems.append(
                f"{label} recall_cluster {value:.4f} does not beat q0 {q0_recall:.4f}"
            )
    groupcap = [r for l, r in results.items() if "groupcap" in l.lower()]
    captioners = [
        (l, r) for l, r in results.items()
        if "clipcap" in l.lower() or "decap" in l.lower() or l.startswith("caption")
    ]
    for g in groupcap:
        g_jaccard = g.report.macro_mean("jaccard")
        for label, c in captioners:
            c_jaccard = c.report.macro_mean("jaccard")
            if g_jaccard <= c_jaccard:
                problems.append(
                    f"{g.method} jaccard {g_jaccard:.4f} does not beat "
                    f"{label} {c_jaccard:.4f}"
                )
    return problems
