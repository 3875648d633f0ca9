"""Wire protocol to model services: endpoints, JSON schemas, handshake."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import jsonschema
import numpy as np

PROTOCOL_VERSION = "v1"

CAPABILITY_EMBED_TEXT = "embed_text"
CAPABILITY_EMBED_IMAGE = "embed_image"
CAPABILITY_CAPTION = "caption_vector"
CAPABILITY_COMPLETE = "complete"
ALL_CAPABILITIES = frozenset(
    {CAPABILITY_EMBED_TEXT, CAPABILITY_EMBED_IMAGE, CAPABILITY_CAPTION, CAPABILITY_COMPLETE}
)


class BackendError(Exception):
    """Base class for model-backend failures."""


class BackendTimeoutError(BackendError):
    """The backend did not answer within the allotted retries."""


class BackendProtocolError(BackendError):
    """The exchange violated the wire protocol (shape, emptiness, status)."""


class BackendCapabilityError(BackendError):
    """Handshake found the backend missing a required capability."""


_VECTOR = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_VECTORS = {"type": "array", "items": _VECTOR, "minItems": 1}

PROTOCOL_SCHEMAS: dict[str, dict[str, dict]] = {
    "embed_text": {
        "request": {
            "type": "object",
            "properties": {"texts": {"type": "array", "items": {"type": "string"}, "minItems": 1}},
            "required": ["texts"],
            "additionalProperties": False,
        },
        "response": {
            "type": "object",
            "properties": {"vectors": _VECTORS},
            "required": ["vectors"],
            "additionalProperties": False,
        },
    },
    "embed_image": {
        "request": {
            "type": "object",
            "properties": {
                "ids": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "paths": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            },
            "oneOf": [{"required": ["ids"]}, {"required": ["paths"]}],
            "additionalProperties": False,
        },
        "response": {
            "type": "object",
            "properties": {"vectors": _VECTORS},
            "required": ["vectors"],
            "additionalProperties": False,
        },
    },
    "caption": {
        "request": {
            "type": "object",
            "properties": {
                "vector": _VECTOR,
                "initial_query": {"type": ["string", "null"]},
                "seed": {"type": "integer"},
                "temperature": {"type": "number"},
            },
            "required": ["vector", "initial_query"],
            "additionalProperties": False,
        },
        "response": {
            "type": "object",
            "properties": {"caption": {"type": "string", "minLength": 1}},
            "required": ["caption"],
            "additionalProperties": False,
        },
    },
    "complete": {
        "request": {
            "type": "object",
            "properties": {
                "prompt": {"type": "string", "minLength": 1},
                "max_tokens": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "temperature": {"type": "number"},
            },
            "required": ["prompt", "max_tokens"],
            "additionalProperties": False,
        },
        "response": {
            "type": "object",
            "properties": {"completion": {"type": "string", "minLength": 1}},
            "required": ["completion"],
            "additionalProperties": False,
        },
    },
    "capabilities": {
        "request": {"type": "object", "additionalProperties": False},
        "response": {
            "type": "object",
            "properties": {
                "capabilities": {
                    "type": "array",
                    "items": {"type": "string", "enum": sorted(ALL_CAPABILITIES)},
                },
                "dimension": {"type": "integer", "minimum": 1},
                "model_name": {"type": "string"},
            },
            "required": ["capabilities", "dimension", "model_name"],
            "additionalProperties": False,
        },
    },
}

ENDPOINT_PATHS = {
    "embed_text": f"/{PROTOCOL_VERSION}/embed_text",
    "embed_image": f"/{PROTOCOL_VERSION}/embed_image",
    "caption": f"/{PROTOCOL_VERSION}/caption",
    "complete": f"/{PROTOCOL_VERSION}/complete",
    "capabilities": f"/{PROTOCOL_VERSION}/capabilities",
}


def validate_message(endpoint: str, kind: str, payload: object) -> None:
    """Check a request or response body against the protocol schema.

    Raises BackendProtocolError with the schema path on violation.
    """
    try:
        schema = PROTOCOL_SCHEMAS[endpoint][kind]
    except KeyError:
        raise ValueError(f"unknown protocol message {endpoint}/{kind}") from None
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise BackendProtocolError(
            f"{endpoint} {kind} violates protocol: {exc.message}"
        ) from None


def write_protocol_schema(path: str | Path) -> None:
    """Publish the wire contract as one JSON document for other implementations."""
    document = {
        "protocol": PROTOCOL_VERSION,
        "endpoints": {
            name: {"path": ENDPOINT_PATHS[name], **schemas}
            for name, schemas in PROTOCOL_SCHEMAS.items()
        },
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class CaptionRequest:
    """Input to caption-from-vector; initial_query conditions the decoder when set."""

    vector: np.ndarray
    initial_query: str | None = None
    seed: int = 0
    temperature: float = 0.0

    def payload(self) -> dict:
        return {
            "vector": [float(x) for x in self.vector],
            "initial_query": self.initial_query,
            "seed": self.seed,
            "temperature": self.temperature,
        }


@dataclass(frozen=True)
class Capabilities:
    capabilities: frozenset[str]
    dimension: int
    model_name: str

    def payload(self) -> dict:
        return {
            "capabilities": sorted(self.capabilities),
            "dimension": self.dimension,
            "model_name": self.model_name,
        }


@runtime_checkable
class Backend(Protocol):
    """What the engine needs from any model service binding."""

    name: str

    def capabilities(self) -> Capabilities: ...

    def embed_text(self, texts: Sequence[str]) -> list[np.ndarray]: ...

    def embed_image(self, ids: Sequence[str]) -> list[np.ndarray]: ...

    def caption_vector(self, request: CaptionRequest) -> str: ...

    def complete(
        self, prompt: str, max_tokens: int, seed: int = 0, temperature: float = 0.0
    ) -> str: ...


def verify_backend(
    backend: Backend,
    required: set[str] | frozenset[str],
    expected_dimension: int | None = None,
) -> Capabilities:
    """Handshake: confirm capabilities (and dimension) before any run starts."""
    caps = backend.capabilities()
    missing = set(required) - set(caps.capabilities)
    if missing:
        raise BackendCapabilityError(
            f"backend {backend.name!r} lacks required capabilities: {sorted(missing)}"
        )
    if expected_dimension is not None and caps.dimension != expected_dimension:
        raise BackendCapabilityError(
            f"backend {backend.name!r} embeds into dimension {caps.dimension}, "
            f"store expects {expected_dimension}"
        )
    return caps
