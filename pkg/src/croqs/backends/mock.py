"""Deterministic in-process backend for tests and offline runs."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..embeddings import as_vector, normalize
from .protocol import (
    ALL_CAPABILITIES,
    Capabilities,
    CaptionRequest,
    BackendProtocolError,
)

COMPLETION_MARKER = "Suggestion:"


class MockBackend:
    """Pure function of (registry, completions, request); byte-stable across runs.

    Embedding: registered phrases map to their registered unit vector, any
    other text to a sha256-seeded random unit vector. Captioning: the nearest
    registered concept by cosine becomes "a {concept}", prefixed by the
    initial query when one is supplied; concepts default to the embedding
    registry. Completion: scripted lookup by substring of the prompt; the
    prompt must carry the completion marker.
    """

    def __init__(
        self,
        dimension: int,
        registry: Mapping[str, Sequence[float]] | None = None,
        completions: Mapping[str, str] | None = None,
        concepts: Mapping[str, Sequence[float]] | None = None,
        name: str = "mock",
    ):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.name = name
        self.dimension = dimension
        self._registry = {
            phrase: normalize(as_vector(values, dimension))
            for phrase, values in (registry or {}).items()
        }
        self._concepts = (
            {
                phrase: normalize(as_vector(values, dimension))
                for phrase, values in concepts.items()
            }
            if concepts is not None
            else self._registry
        )
        self._completions = dict(completions or {})

    @classmethod
    def from_spec(cls, spec: Mapping) -> "MockBackend":
        return cls(
            dimension=spec["dimension"],
            registry=spec.get("registry"),
            completions=spec.get("completions"),
            concepts=spec.get("concepts"),
            name=spec.get("name", "mock"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        with Path(path).open("r", encoding="utf-8") as fh:
            return cls.from_spec(json.load(fh))

    def capabilities(self) -> Capabilities:
        return Capabilities(
            capabilities=frozenset(ALL_CAPABILITIES),
            dimension=self.dimension,
            model_name=self.name,
        )

    def embed_text(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._embed_one(t) for t in texts]

    def embed_image(self, ids: Sequence[str]) -> list[np.ndarray]:
        return [self._embed_one(i) for i in ids]

    def _embed_one(self, text: str) -> np.ndarray:
        hit = self._registry.get(text)
        if hit is not None:
            return hit
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "big")
        rng = np.random.default_rng(seed)
        return normalize(rng.standard_normal(self.dimension))

    def caption_vector(self, request: CaptionRequest) -> str:
        if not self._concepts:
            raise BackendProtocolError("mock captioner has no registered concepts")
        vector = normalize(as_vector(request.vector, self.dimension))
        best = min(
            self._concepts.items(),
            key=lambda item: (-float(item[1] @ vector), item[0]),
        )[0]
        if request.initial_query is not None:
            return f"{request.initial_query}, {best}"
        return f"a {best}"

    def complete(
        self, prompt: str, max_tokens: int, seed: int = 0, temperature: float = 0.0
    ) -> str:
        if max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
        if COMPLETION_MARKER not in prompt:
            raise BackendProtocolError(
                f"prompt lacks the {COMPLETION_MARKER!r} marker"
            )
        matches = [
            (prompt.rfind(key), key)
            for key in self._completions
            if key in prompt
        ]
        if matches:
            # latest occurrence wins; lexicographically smaller key on ties
            _, key = min(matches, key=lambda m: (-m[0], m[1]))
            return self._completions[key].strip()
        tail = prompt.rsplit(COMPLETION_MARKER, 1)[1].strip()
        if not tail:
            raise BackendProtocolError(
                "no scripted completion matches the prompt and the marker is empty"
            )
        return tail
