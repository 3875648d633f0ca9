"""HTTP binding of the model-service protocol, with retries and validation."""
from __future__ import annotations

import time
from typing import Sequence

import numpy as np
import requests

from ..embeddings import normalize
from .protocol import (
    Capabilities,
    CaptionRequest,
    BackendProtocolError,
    BackendTimeoutError,
    ENDPOINT_PATHS,
    validate_message,
)


class HttpBackend:
    """Client for a sidecar speaking the JSON protocol.

    Requests are retried with exponential backoff; every exchange is checked
    against the protocol schemas on both sides. All protocol requests are
    idempotent (generation carries seed and temperature), so retrying is safe.
    """

    def __init__(
        self,
        base_url: str,
        timeout_ms: int = 30000,
        max_retries: int = 2,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_ms / 1000.0
        self.max_retries = max_retries
        self._session = session or requests.Session()
        self.name = base_url

    def capabilities(self) -> Capabilities:
        body = self._call("capabilities", None)
        caps = Capabilities(
            capabilities=frozenset(body["capabilities"]),
            dimension=body["dimension"],
            model_name=body["model_name"],
        )
        self.name = caps.model_name
        return caps

    def embed_text(self, texts: Sequence[str]) -> list[np.ndarray]:
        body = self._call("embed_text", {"texts": list(texts)})
        return self._vectors(body, expected=len(texts), endpoint="embed_text")

    def embed_image(self, ids: Sequence[str]) -> list[np.ndarray]:
        body = self._call("embed_image", {"ids": list(ids)})
        return self._vectors(body, expected=len(ids), endpoint="embed_image")

    def caption_vector(self, request: CaptionRequest) -> str:
        body = self._call("caption", request.payload())
        return body["caption"]

    def complete(
        self, prompt: str, max_tokens: int, seed: int = 0, temperature: float = 0.0
    ) -> str:
        body = self._call(
            "complete",
            {
                "prompt": prompt,
                "max_tokens": max_tokens,
                "seed": seed,
                "temperature": temperature,
            },
        )
        completion = body["completion"].strip()
        if not completion:
            raise BackendProtocolError("backend returned a blank completion")
        return completion

    def _vectors(self, body: dict, expected: int, endpoint: str) -> list[np.ndarray]:
        vectors = [normalize(np.asarray(v, dtype=np.float64)) for v in body["vectors"]]
        if len(vectors) != expected:
            raise BackendProtocolError(
                f"{endpoint} returned {len(vectors)} vectors for {expected} inputs"
            )
        dims = {v.shape[0] for v in vectors}
        if len(dims) > 1:
            raise BackendProtocolError(f"{endpoint} returned mixed dimensions {sorted(dims)}")
        return vectors

    def _call(self, endpoint: str, payload: dict | None) -> dict:
        if payload is not None:
            validate_message(endpoint, "request", payload)
        url = self.base_url + ENDPOINT_PATHS[endpoint]
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(0.1 * 2 ** (attempt - 1))
            try:
                if payload is None:
                    response = self._session.get(url, timeout=self.timeout_s)
                else:
                    response = self._session.post(url, json=payload, timeout=self.timeout_s)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                raise BackendProtocolError(
                    f"{endpoint} returned HTTP {response.status_code}: {response.text[:200]}"
                )
            try:
                body = response.json()
            except ValueError:
                raise BackendProtocolError(f"{endpoint} returned non-JSON body") from None
            validate_message(endpoint, "response", body)
            return body
        raise BackendTimeoutError(
            f"{endpoint} failed after {self.max_retries + 1} attempts: {last_error}"
        )
