"""HTTP service for the live exploration loop: search, cluster, suggest, media."""
from __future__ import annotations

import hashlib
import json
import sys
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .backends import BackendError, resolve_backend
from .backends.protocol import Backend
from .clustering import kmeans_partition
from .embeddings import EmbeddingStore, load_store
from .orchestrator import suggest_all
from .retrieval import RankedResultSet, search

API_METHODS = ("clipcap", "decap", "groupcap", "identity")


@dataclass
class ServiceConfig:
    store_path: str
    backend: str
    media_root: str | None = None
    media_url_template: str | None = None
    cache_size: int = 256
    token_ttl_seconds: float = 900.0
    static_dir: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000


def load_config(path: str | Path) -> ServiceConfig:
    """Read a TOML or JSON service configuration file."""
    path = Path(path)
    if path.suffix == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    else:
        with path.open("r", encoding="utf-8") as fh:
            raw = json.load(fh)
    return ServiceConfig(**raw)


class _TokenCache:
    """LRU + TTL cache of (query text, embedding, result set) per session token."""

    def __init__(self, max_size: int, ttl_seconds: float, clock=time.monotonic):
        self.max_size = max_size
        self.ttl = ttl_seconds
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, tuple[float, Any]] = OrderedDict()

    def put(self, token: str, value: Any) -> None:
        with self._lock:
            self._entries[token] = (self.clock(), value)
            self._entries.move_to_end(token)
            while len(self._entries) > self.max_size:
                self._entries.popitem(last=False)

    def get(self, token: str) -> Any | None:
        with self._lock:
            hit = self._entries.get(token)
            if hit is None:
                return None
            created, value = hit
            if self.clock() - created > self.ttl:
                del self._entries[token]
                return None
            self._entries.move_to_end(token)
            return value


class SearchBody(BaseModel):
    query: str = Field(min_length=1)
    k: int = Field(ge=1, le=10000)


class SuggestBody(BaseModel):
    query_token: str = Field(min_length=1)
    m: int = Field(ge=2)
    method: str = Field(default="clipcap")
    seed: int = Field(default=0)
    prototype_kind: str = Field(default="centroid")
    query_aware: bool = Field(default=False)


@dataclass
class _Session:
    query: str
    vector: Any
    result: RankedResultSet


def create_app(
    store: EmbeddingStore,
    backend: Backend,
    media_root: str | None = None,
    media_url_template: str | None = None,
    cache_size: int = 256,
    token_ttl_seconds: float = 900.0,
    static_dir: str | None = None,
    clock=time.monotonic,
) -> FastAPI:
    """Build the exploration API around a loaded store and backend."""
    app = FastAPI(title="croqs", version="0.1.0")
    cache = _TokenCache(cache_size, token_ttl_seconds, clock=clock)

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"cause": "invalid_request", "errors": exc.errors()}},
        )

    @app.post("/api/search")
    def api_search(body: SearchBody):
        try:
            (vector,) = backend.embed_text([body.query])
        except BackendError as exc:
            raise HTTPException(
                status_code=503,
                detail={"cause": "backend_unavailable", "message": str(exc)},
            )
        result = search(vector, store, body.k, query_id=body.query)
        token = hashlib.sha256(f"{body.k}\x00{body.query}".encode()).hexdigest()[:16]
        cache.put(token, _Session(query=body.query, vector=vector, result=result))
        return {
            "results": [
                {"image_id": image_id, "score": score} for image_id, score in result.items
            ],
            "query_token": token,
        }

    @app.post("/api/suggest")
    def api_suggest(body: SuggestBody):
        if body.method not in API_METHODS:
            raise HTTPException(
                status_code=400,
                detail={"cause": "invalid_request", "message": f"unknown method {body.method!r}"},
            )
        session = cache.get(body.query_token)
        if session is None:
            raise HTTPException(
                status_code=404,
                detail={"cause": "unknown_token", "message": "token unknown or expired"},
            )
        if body.m > len(session.result):
            raise HTTPException(
                status_code=400,
                detail={
                    "cause": "invalid_request",
                    "message": f"m={body.m} exceeds result set size {len(session.result)}",
                },
            )
        partition = kmeans_partition(session.result, store, body.m, body.seed)
        method = "groupcap" if body.method == "groupcap" else (
            "identity" if body.method == "identity" else "prototype_caption"
        )
        run = suggest_all(
            query_id=body.query_token,
            q0=session.query,
            partition=partition,
            store=store,
            backend=backend,
            method=method,
            kind=body.prototype_kind,
            query_aware=body.query_aware,
            seed=body.seed,
        )
        members = {c.cluster_id: list(c.image_ids) for c in partition.clusters}
        clusters = [
            {
                "cluster_id": r.cluster_id,
                "image_ids": members[r.cluster_id],
                "suggestion": r.q_hat,
                "prototype_kind": r.prototype_kind,
            }
            for r in run.records
        ]
        clusters.extend(
            {
                "cluster_id": f.cluster_id,
                "image_ids": members[f.cluster_id],
                "suggestion": None,
                "prototype_kind": None,
                "error": f.message,
            }
            for f in run.failures
        )
        clusters.sort(key=lambda c: c["cluster_id"])
        return {"clusters": clusters}

    @app.get("/api/image/{image_id}")
    def api_image(image_id: str):
        if "/" in image_id or ".." in image_id:
            raise HTTPException(status_code=404, detail={"cause": "unknown_image"})
        if media_url_template:
            return RedirectResponse(
                media_url_template.format(id=image_id), status_code=307
            )
        if media_root:
            root = Path(media_root)
            for candidate in (image_id, f"{image_id}.jpg", f"{image_id}.png"):
                file = root / candidate
                if file.is_file():
                    return FileResponse(file)
        raise HTTPException(status_code=404, detail={"cause": "unknown_image"})

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def app_from_config(config: ServiceConfig) -> FastAPI:
    store = load_store(config.store_path)
    backend = resolve_backend(config.backend)
    return create_app(
        store=store,
        backend=backend,
        media_root=config.media_root,
        media_url_template=config.media_url_template,
        cache_size=config.cache_size,
        token_ttl_seconds=config.token_ttl_seconds,
        static_dir=config.static_dir,
    )
