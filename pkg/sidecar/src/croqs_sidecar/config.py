"""Sidecar configuration: which models to load and how to serve them."""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .models import (
    ClipCapCaptioner,
    ClipEmbedder,
    EchoLlm,
    HashEmbedder,
    HfLlm,
    SidecarStartupError,
    TemplateCaptioner,
)


@dataclass
class SidecarConfig:
    embedder: dict = field(default_factory=lambda: {"type": "hash", "dimension": 64})
    captioner: dict | None = None
    llm: dict | None = None
    model_name: str = "sidecar"
    media_root: str | None = None
    host: str = "127.0.0.1"
    port: int = 9100


def load_config(path: str | Path) -> SidecarConfig:
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
    return SidecarConfig(**raw)


def build_embedder(config: SidecarConfig):
    spec = dict(config.embedder)
    kind = spec.pop("type", "hash")
    if kind == "hash":
        return HashEmbedder(**spec)
    if kind == "clip":
        return ClipEmbedder(media_root=config.media_root, **spec)
    raise SidecarStartupError(f"unknown embedder type {kind!r}")


def build_captioner(config: SidecarConfig):
    if config.captioner is None:
        return None
    spec = dict(config.captioner)
    kind = spec.pop("type")
    if kind == "template":
        return TemplateCaptioner(**spec)
    if kind == "clipcap":
        return ClipCapCaptioner(**spec)
    raise SidecarStartupError(f"unknown captioner type {kind!r}")


def build_llm(config: SidecarConfig):
    if config.llm is None:
        return None
    spec = dict(config.llm)
    kind = spec.pop("type")
    if kind == "echo":
        return EchoLlm(**spec)
    if kind == "hf":
        return HfLlm(**spec)
    raise SidecarStartupError(f"unknown llm type {kind!r}")
