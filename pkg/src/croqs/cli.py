"""Command-line interface: validate, suggest, eval, report, synth, serve."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backends import (
    CAPABILITY_CAPTION,
    CAPABILITY_COMPLETE,
    resolve_backend,
    verify_backend,
    write_protocol_schema,
)
from .benchmark import load_benchmark, load_release, validate_against_store
from .clustering import ClusterPartition
from .embeddings import load_store
from .evaluation import (
    EvalConfig,
    emit_report,
    evaluate_suggestions,
    result_from_dict,
    verify_table_orderings,
)
from .orchestrator import read_suggestions, suggest_all, write_suggestions
from .prompts import load_template
from .synthetic import make_planted, write_planted

CLI_METHODS = ("identity", "human", "clipcap", "decap", "groupcap")


@click.group()
def main():
    """Cross-modal query suggestion engine and evaluation harness."""


def _load_bench(path: str, release: bool):
    return load_release(path) if release else load_benchmark(path)


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--embeddings", type=click.Path(exists=True))
@click.option("--release", is_flag=True, help="Read the published release layout.")
def validate(dataset, embeddings, release):
    """Validate a benchmark file and optionally resolve its ids against a store."""
    bench = _load_bench(dataset, release)
    stats = bench.stats()
    click.echo(
        f"queries: {stats.query_count}  clusters: {stats.cluster_count}  "
        f"mean clusters/query: {stats.mean_clusters_per_query:.2f}"
    )
    if embeddings:
        store = load_store(embeddings)
        missing = validate_against_store(bench, store)
        click.echo(f"missing image ids: {len(missing)}")
        if missing:
            for image_id in missing[:20]:
                click.echo(f"  {image_id}")
            sys.exit(1)


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_spec", help="mock:<path> or http(s)://…")
@click.option("--method", required=True, type=click.Choice(CLI_METHODS))
@click.option("--out", required=True, type=click.Path())
@click.option("--prototype-kind", type=click.Choice(["centroid", "representative"]),
              default="centroid", show_default=True)
@click.option("--query-aware", is_flag=True,
              help="Condition captions on the initial query (clipcap only).")
@click.option("--m", default=5, show_default=True,
              help="Representative images per cluster for groupcap.")
@click.option("--template", type=click.Path(exists=True),
              help="Prompt template file for groupcap.")
@click.option("--max-tokens", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--release", is_flag=True)
def suggest(dataset, embeddings, backend_spec, method, out, prototype_kind,
            query_aware, m, template, max_tokens, seed, release):
    """Generate one suggested query per benchmark cluster."""
    if query_aware and method != "clipcap":
        raise click.UsageError("--query-aware applies to the clipcap method only")
    bench = _load_bench(dataset, release)
    store = load_store(embeddings)
    backend = None
    if method in ("clipcap", "decap", "groupcap"):
        if not backend_spec:
            raise click.UsageError(f"method {method} requires --backend")
        backend = resolve_backend(backend_spec)
        required = {CAPABILITY_CAPTION}
        if method == "groupcap":
            required.add(CAPABILITY_COMPLETE)
        verify_backend(backend, required, expected_dimension=store.dimension)
    engine_method = {
        "identity": "identity",
        "human": "human",
        "clipcap": "prototype_caption",
        "decap": "prototype_caption",
        "groupcap": "groupcap",
    }[method]
    prompt_template = load_template(template) if template else None

    records = []
    failed = 0
    for entry in sorted(bench.entries, key=lambda e: e.query_id):
        partition = ClusterPartition(clusters=entry.clusters, source="benchmark")
        run = suggest_all(
            query_id=entry.query_id,
            q0=entry.text,
            partition=partition,
            store=store,
            backend=backend,
            method=engine_method,
            kind=prototype_kind,
            query_aware=query_aware,
            m=m,
            template=prompt_template,
            max_tokens=max_tokens,
            seed=seed,
        )
        records.extend(run.records)
        for failure in run.failures:
            failed += 1
            click.echo(
                f"error: {entry.query_id}/{failure.cluster_id} "
                f"stage={failure.stage}: {failure.message}",
                err=True,
            )
    records.sort(key=lambda r: (r.query_id, r.cluster_id))
    write_suggestions(records, out)
    click.echo(f"wrote {len(records)} suggestions to {out}")
    if failed:
        sys.exit(2)


@main.command("eval")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--suggestions", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_spec", required=True,
              help="Text embedder: mock:<path> or http(s)://…")
@click.option("--out", required=True, type=click.Path())
@click.option("--format", "format_", type=click.Choice(["json", "csv", "markdown"]),
              default="json", show_default=True)
@click.option("--n", default=100, show_default=True,
              help="Initial result set size for cluster-specificity recall.")
@click.option("--repr-cutoff", default=100, show_default=True)
@click.option("--ndcg-rank", default=10, show_default=True)
@click.option("--map-cutoff", default=100, show_default=True)
@click.option("--label", help="Row label; defaults to one derived from the records.")
@click.option("--release", is_flag=True)
def eval_cmd(dataset, embeddings, suggestions, backend_spec, out, format_,
             n, repr_cutoff, ndcg_rank, map_cutoff, label, release):
    """Score a suggestion file over a benchmark and write the report."""
    bench = _load_bench(dataset, release)
    store = load_store(embeddings)
    backend = resolve_backend(backend_spec)
    records = read_suggestions(suggestions)
    config = EvalConfig(
        result_set_size=n,
        repr_cutoff=repr_cutoff,
        ndcg_rank=ndcg_rank,
        map_cutoff=map_cutoff,
    )
    result = evaluate_suggestions(bench, store, records, backend, config, label=label)
    emit_report(result, format_, path=out)
    click.echo(f"wrote {format_} report to {out}")
    for metric, (mean, std) in result.report.macro.items():
        click.echo(f"  {metric}: {mean:.4f} ± {std:.4f}")
    if result.forced_inclusions:
        click.echo(
            f"  note: {len(result.forced_inclusions)} cluster members were "
            f"force-included in their initial result sets"
        )


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path())
@click.option("--format", "format_", type=click.Choice(["markdown", "csv"]),
              default="markdown", show_default=True)
@click.option("--check-orderings", is_flag=True,
              help="Verify expected orderings between method rows.")
def report(inputs, out, format_, check_orderings):
    """Merge per-method JSON reports into one summary table."""
    results = []
    for path in inputs:
        with open(path, "r", encoding="utf-8") as fh:
            results.append(result_from_dict(json.load(fh)))
    if format_ == "csv" and len(results) != 1:
        raise click.UsageError("csv output supports a single report")
    text = emit_report(results if len(results) > 1 else results[0], format_, path=out)
    click.echo(text, nl=False)
    if check_orderings:
        problems = verify_table_orderings({r.method: r for r in results})
        if problems:
            for problem in problems:
                click.echo(f"ordering violation: {problem}", err=True)
            sys.exit(1)
        click.echo("orderings ok", err=True)


@main.command()
@click.option("--out", required=True, type=click.Path())
@click.option("--queries", default=5, show_default=True)
@click.option("--clusters", default=3, show_default=True)
@click.option("--points", default=10, show_default=True)
@click.option("--dim", default=32, show_default=True)
@click.option("--cone-deg", default=5.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--store-format", type=click.Choice(["binary", "jsonl"]),
              default="binary", show_default=True)
def synth(out, queries, clusters, points, dim, cone_deg, seed, store_format):
    """Generate a planted synthetic store, benchmark, and mock backend spec."""
    world = make_planted(
        n_queries=queries,
        clusters_per_query=clusters,
        points_per_cluster=points,
        dim=dim,
        cone_deg=cone_deg,
        seed=seed,
    )
    paths = write_planted(world, out, store_format=store_format)
    for name, path in sorted(paths.items()):
        click.echo(f"{name}: {path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def serve(config_path):
    """Run the exploration API server (search, suggest, media)."""
    import uvicorn

    from .service import app_from_config, load_config

    config = load_config(config_path)
    app = app_from_config(config)
    uvicorn.run(app, host=config.host, port=config.port)


@main.command("protocol-schema")
@click.option("--out", required=True, type=click.Path())
def protocol_schema(out):
    """Write the backend wire-protocol JSON schemas to a file."""
    write_protocol_schema(out)
    click.echo(f"wrote protocol schema to {out}")


if __name__ == "__main__":
    main()
