"""Transcript recording: wrap a backend and log every exchange as JSONL."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .protocol import Backend, Capabilities, CaptionRequest


class RecordingBackend:
    """Delegates to `inner`, keeping wire-shaped request/response records."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.records: list[dict] = []

    @property
    def name(self) -> str:
        return self.inner.name

    def capabilities(self) -> Capabilities:
        caps = self.inner.capabilities()
        self._record("capabilities", {}, caps.payload())
        return caps

    def embed_text(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors = self.inner.embed_text(texts)
        self._record(
            "embed_text",
            {"texts": list(texts)},
            {"vectors": [[float(x) for x in v] for v in vectors]},
        )
        return vectors

    def embed_image(self, ids: Sequence[str]) -> list[np.ndarray]:
        vectors = self.inner.embed_image(ids)
        self._record(
            "embed_image",
            {"ids": list(ids)},
            {"vectors": [[float(x) for x in v] for v in vectors]},
        )
        return vectors

    def caption_vector(self, request: CaptionRequest) -> str:
        caption = self.inner.caption_vector(request)
        self._record("caption", request.payload(), {"caption": caption})
        return caption

    def complete(
        self, prompt: str, max_tokens: int, seed: int = 0, temperature: float = 0.0
    ) -> str:
        completion = self.inner.complete(prompt, max_tokens, seed=seed, temperature=temperature)
        self._record(
            "complete",
            {"prompt": prompt, "max_tokens": max_tokens, "seed": seed, "temperature": temperature},
            {"completion": completion},
        )
        return completion

    def _record(self, endpoint: str, request: dict, response: dict) -> None:
        self.records.append({"endpoint": endpoint, "request": request, "response": response})

    def dump_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
