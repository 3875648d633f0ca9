"""Model sidecar: serves embedding, captioning, and completion over the wire protocol."""

__version__ = "0.1.0"
