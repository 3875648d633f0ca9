"""FastAPI application implementing the /v1/* backend wire protocol."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import SidecarConfig, build_captioner, build_embedder, build_llm


class EmbedTextBody(BaseModel):
    texts: list[str] = Field(min_length=1)


class EmbedImageBody(BaseModel):
    ids: list[str] | None = Field(default=None, min_length=1)
    paths: list[str] | None = Field(default=None, min_length=1)


class CaptionBody(BaseModel):
    vector: list[float] = Field(min_length=1)
    initial_query: str | None
    seed: int = 0
    temperature: float = 0.0


class CompleteBody(BaseModel):
    prompt: str = Field(min_length=1)
    max_tokens: int = Field(ge=1)
    seed: int = 0
    temperature: float = 0.0


def create_app(config: SidecarConfig) -> FastAPI:
    """Load the configured models and expose them; load failures propagate."""
    embedder = build_embedder(config)
    captioner = build_captioner(config)
    llm = build_llm(config)

    capabilities = ["embed_text"]
    if getattr(embedder, "supports_images", False):
        capabilities.append("embed_image")
    if captioner is not None:
        capabilities.append("caption_vector")
    if llm is not None:
        capabilities.append("complete")

    app = FastAPI(title="croqs-sidecar", version="0.1.0")

    @app.get("/v1/capabilities")
    def get_capabilities():
        return {
            "capabilities": sorted(capabilities),
            "dimension": embedder.dimension,
            "model_name": config.model_name,
        }

    @app.post("/v1/embed_text")
    def embed_text(body: EmbedTextBody):
        vectors = embedder.embed_texts(body.texts)
        return {"vectors": [[float(x) for x in v] for v in vectors]}

    @app.post("/v1/embed_image")
    def embed_image(body: EmbedImageBody):
        if "embed_image" not in capabilities:
            raise HTTPException(status_code=404, detail="embed_image not configured")
        if (body.ids is None) == (body.paths is None):
            raise HTTPException(status_code=422, detail="provide exactly one of ids/paths")
        keys = body.ids if body.ids is not None else body.paths
        vectors = embedder.embed_images(keys)
        return {"vectors": [[float(x) for x in v] for v in vectors]}

    @app.post("/v1/caption")
    def caption(body: CaptionBody):
        if captioner is None:
            raise HTTPException(status_code=404, detail="caption_vector not configured")
        text = captioner.caption(
            body.vector, body.initial_query, seed=body.seed, temperature=body.temperature
        )
        return {"caption": text}

    @app.post("/v1/complete")
    def complete(body: CompleteBody):
        if llm is None:
            raise HTTPException(status_code=404, detail="complete not configured")
        text = llm.complete(
            body.prompt, body.max_tokens, seed=body.seed, temperature=body.temperature
        )
        return {"completion": text}

    return app
