"""Model-service bindings: wire protocol, deterministic mock, HTTP client."""
from __future__ import annotations

from .http import HttpBackend
from .mock import MockBackend
from .protocol import (
    ALL_CAPABILITIES,
    Backend,
    BackendCapabilityError,
    BackendError,
    BackendProtocolError,
    BackendTimeoutError,
    Capabilities,
    CaptionRequest,
    CAPABILITY_CAPTION,
    CAPABILITY_COMPLETE,
    CAPABILITY_EMBED_IMAGE,
    CAPABILITY_EMBED_TEXT,
    validate_message,
    verify_backend,
    write_protocol_schema,
)
from .recorder import RecordingBackend

__all__ = [
    "ALL_CAPABILITIES",
    "Backend",
    "BackendCapabilityError",
    "BackendError",
    "BackendProtocolError",
    "BackendTimeoutError",
    "Capabilities",
    "CaptionRequest",
    "CAPABILITY_CAPTION",
    "CAPABILITY_COMPLETE",
    "CAPABILITY_EMBED_IMAGE",
    "CAPABILITY_EMBED_TEXT",
    "HttpBackend",
    "MockBackend",
    "RecordingBackend",
    "resolve_backend",
    "validate_message",
    "verify_backend",
    "write_protocol_schema",
]


def resolve_backend(spec: str) -> Backend:
    """Turn a CLI/backend locator into a backend instance.

    "mock:<path>" loads a mock spec file; anything starting with http(s)://
    becomes an HTTP client.
    """
    if spec.startswith("mock:"):
        return MockBackend.from_file(spec[len("mock:"):])
    if spec.startswith(("http://", "https://")):
        return HttpBackend(spec)
    raise ValueError(
        f"cannot resolve backend {spec!r}: expected mock:<path> or an http(s) URL"
    )
