"""Turn (initial query, cluster) pairs into suggested queries via a backend."""
from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable

from .backends.protocol import Backend, CaptionRequest
from .clustering import Cluster, ClusterPartition
from .embeddings import EmbeddingStore
from .prompts import PromptTemplate, default_template
from .prototypes import centroid_prototype, representative_prototype, top_m_representatives

METHODS = ("prototype_caption", "groupcap", "human", "identity")
PROTOTYPE_KINDS = ("centroid", "representative")

_WHITESPACE_RE = re.compile(r"\s+")


class SuggestionStageError(RuntimeError):
    """A pipeline stage failed; `stage` names it for error isolation."""

    def __init__(self, stage: str, cluster_id: str, cause: Exception | str):
        super().__init__(f"stage {stage!r} failed for cluster {cluster_id!r}: {cause}")
        self.stage = stage
        self.cluster_id = cluster_id


@dataclass(frozen=True)
class SuggestionRecord:
    """One generated suggestion with enough provenance to replay it."""

    query_id: str
    cluster_id: str
    method: str
    q_hat: str
    backend_name: str
    prototype_kind: str | None = None
    query_aware: bool | None = None
    prompt: str | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.q_hat:
            raise ValueError("q_hat must be non-empty")
        if self.method == "groupcap" and self.prompt is None:
            raise ValueError("groupcap records must carry their prompt")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "SuggestionRecord":
        return cls(**obj)


@dataclass(frozen=True)
class SuggestionFailure:
    cluster_id: str
    stage: str
    message: str


@dataclass(frozen=True)
class SuggestionRun:
    """Per-cluster outcomes: successful records plus isolated failures."""

    records: tuple[SuggestionRecord, ...]
    failures: tuple[SuggestionFailure, ...] = ()


def clean_suggestion(text: str) -> str:
    """Trim, strip one layer of surrounding quotes, collapse inner whitespace."""
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1].strip()
    return _WHITESPACE_RE.sub(" ", text)


def suggest_prototype_caption(
    query_id: str,
    q0: str,
    cluster: Cluster,
    store: EmbeddingStore,
    backend: Backend,
    kind: str = "centroid",
    query_aware: bool = False,
    seed: int = 0,
    temperature: float = 0.0,
) -> SuggestionRecord:
    """Caption the cluster prototype, optionally conditioned on the initial query."""
    if kind not in PROTOTYPE_KINDS:
        raise ValueError(f"unknown prototype kind {kind!r}")
    try:
        if kind == "centroid":
            prototype = centroid_prototype(cluster, store)
        else:
            prototype = representative_prototype(cluster, store)
    except ValueError as exc:
        raise SuggestionStageError("prototype", cluster.cluster_id, exc) from exc
    request = CaptionRequest(
        vector=prototype.vector,
        initial_query=q0 if query_aware else None,
        seed=seed,
        temperature=temperature,
    )
    try:
        caption = backend.caption_vector(request)
    except Exception as exc:
        raise SuggestionStageError("caption", cluster.cluster_id, exc) from exc
    q_hat = clean_suggestion(caption)
    if not q_hat:
        raise SuggestionStageError("caption", cluster.cluster_id, "empty caption")
    return SuggestionRecord(
        query_id=query_id,
        cluster_id=cluster.cluster_id,
        method="prototype_caption",
        q_hat=q_hat,
        backend_name=backend.name,
        prototype_kind=kind,
        query_aware=query_aware,
    )


def suggest_groupcap(
    query_id: str,
    q0: str,
    cluster: Cluster,
    store: EmbeddingStore,
    backend: Backend,
    m: int = 5,
    template: PromptTemplate | None = None,
    max_tokens: int = 64,
    seed: int = 0,
    temperature: float = 0.0,
) -> SuggestionRecord:
    """Caption the m most representative members, then ask the LLM for one query.

    Captions come from each selected image's own embedding, not the cluster
    prototype; the rendered prompt is recorded verbatim on the result.
    """
    template = template or default_template()
    try:
        selected = top_m_representatives(cluster, store, m)
    except ValueError as exc:
        raise SuggestionStageError("select", cluster.cluster_id, exc) from exc
    captions = []
    for image_id in selected:
        request = CaptionRequest(
            vector=store.vector(image_id), seed=seed, temperature=temperature
        )
        try:
            captions.append(backend.caption_vector(request))
        except Exception as exc:
            raise SuggestionStageError("caption", cluster.cluster_id, exc) from exc
    if not captions:
        raise SuggestionStageError("caption", cluster.cluster_id, "no captions produced")
    try:
        prompt = template.render(q0=q0, captions=captions)
    except ValueError as exc:
        raise SuggestionStageError("render", cluster.cluster_id, exc) from exc
    try:
        completion = backend.complete(prompt, max_tokens, seed=seed, temperature=temperature)
    except Exception as exc:
        raise SuggestionStageError("complete", cluster.cluster_id, exc) from exc
    first_line = next((line for line in completion.splitlines() if line.strip()), "")
    q_hat = clean_suggestion(first_line)
    if not q_hat:
        raise SuggestionStageError("complete", cluster.cluster_id, "empty completion")
    return SuggestionRecord(
        query_id=query_id,
        cluster_id=cluster.cluster_id,
        method="groupcap",
        q_hat=q_hat,
        backend_name=backend.name,
        prompt=prompt,
    )


def suggest_all(
    query_id: str,
    q0: str,
    partition: ClusterPartition,
    store: EmbeddingStore,
    backend: Backend | None,
    method: str,
    kind: str = "centroid",
    query_aware: bool = False,
    m: int = 5,
    template: PromptTemplate | None = None,
    max_tokens: int = 64,
    seed: int = 0,
    temperature: float = 0.0,
    max_workers: int = 4,
) -> SuggestionRun:
    """One suggestion per cluster; failures are isolated and reported.

    Clusters run concurrently up to `max_workers`; output order is always
    sorted by cluster id, so results do not depend on completion order.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")

    def one(cluster: Cluster) -> SuggestionRecord:
        if method == "identity":
            return SuggestionRecord(
                query_id=query_id,
                cluster_id=cluster.cluster_id,
                method="identity",
                q_hat=q0,
                backend_name="none",
            )
        if method == "human":
            if not cluster.human_suggestion:
                raise SuggestionStageError(
                    "human", cluster.cluster_id, "cluster has no human suggestion"
                )
            return SuggestionRecord(
                query_id=query_id,
                cluster_id=cluster.cluster_id,
                method="human",
                q_hat=cluster.human_suggestion,
                backend_name="none",
            )
        if backend is None:
            raise SuggestionStageError(
                "backend", cluster.cluster_id, f"method {method!r} needs a backend"
            )
        if method == "prototype_caption":
            return suggest_prototype_caption(
                query_id, q0, cluster, store, backend,
                kind=kind, query_aware=query_aware, seed=seed, temperature=temperature,
            )
        return suggest_groupcap(
            query_id, q0, cluster, store, backend,
            m=m, template=template, max_tokens=max_tokens, seed=seed, temperature=temperature,
        )

    records: list[SuggestionRecord] = []
    failures: list[SuggestionFailure] = []
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(one, c): c for c in partition.clusters}
        for future, cluster in futures.items():
            try:
                records.append(future.result())
            except SuggestionStageError as exc:
                failures.append(
                    SuggestionFailure(
                        cluster_id=cluster.cluster_id, stage=exc.stage, message=str(exc)
                    )
                )
    records.sort(key=lambda r: r.cluster_id)
    failures.sort(key=lambda f: f.cluster_id)
    return SuggestionRun(records=tuple(records), failures=tuple(failures))


def write_suggestions(records: Iterable[SuggestionRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def read_suggestions(path: str | Path) -> list[SuggestionRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(SuggestionRecord.from_dict(json.loads(line)))
    return records
