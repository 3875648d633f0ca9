"""Model adapters behind the sidecar endpoints.

Two families: deterministic stand-ins (hash embedder, template captioner,
echo LLM) that need no weights and keep the protocol testable offline, and
real-model adapters (CLIP, ClipCap-style captioning, HF causal LM) that load
lazily and refuse to start with a diagnostic when their weights are missing.
"""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Sequence

import numpy as np

COMPLETION_MARKER = "Suggestion:"


class SidecarStartupError(RuntimeError):
    """A configured model could not be loaded; the server must not start."""


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return v / norm


class HashEmbedder:
    """Deterministic text/image-id embedder: sha256-seeded unit vectors."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise SidecarStartupError(f"embedder dimension must be >= 1, got {dimension}")
        self.dimension = dimension
        self.supports_images = True

    def _one(self, text: str) -> np.ndarray:
        seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        return _unit(rng.standard_normal(self.dimension))

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._one(t) for t in texts]

    def embed_images(self, ids: Sequence[str]) -> list[np.ndarray]:
        return [self._one(f"image::{i}") for i in ids]


class ClipEmbedder:
    """CLIP text/image embedder via sentence-transformers."""

    def __init__(self, model_name: str, device: str = "cpu", media_root: str | None = None):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise SidecarStartupError(
                f"sentence-transformers is not installed: {exc}"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name, device=device)
        except Exception as exc:
            raise SidecarStartupError(
                f"could not load CLIP model {model_name!r}: {exc}"
            ) from exc
        self.dimension = int(self._model.get_sentence_embedding_dimension())
        self.media_root = Path(media_root) if media_root else None
        self.supports_images = self.media_root is not None

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors = self._model.encode(list(texts), convert_to_numpy=True)
        return [_unit(np.asarray(v, dtype=np.float64)) for v in vectors]

    def embed_images(self, ids: Sequence[str]) -> list[np.ndarray]:
        if self.media_root is None:
            raise ValueError("image embedding needs a configured media_root")
        from PIL import Image

        images = []
        for image_id in ids:
            path = self.media_root / f"{image_id}.jpg"
            if not path.is_file():
                path = self.media_root / f"{image_id}.png"
            images.append(Image.open(path).convert("RGB"))
        vectors = self._model.encode(images, convert_to_numpy=True)
        return [_unit(np.asarray(v, dtype=np.float64)) for v in vectors]


class TemplateCaptioner:
    """Deterministic caption-from-vector: a digest phrase of the input point.

    Query-aware conditioning is modeled the same way the real captioner does
    it, by prefixing the initial query to the decoding context; here that
    reduces to prefixing the text.
    """

    def caption(self, vector: Sequence[float], initial_query: str | None,
                seed: int = 0, temperature: float = 0.0) -> str:
        digest = hashlib.sha256(np.asarray(vector, dtype=np.float64).tobytes())
        phrase = f"scene {digest.hexdigest()[:8]}"
        if initial_query:
            return f"{initial_query}, {phrase}"
        return f"a {phrase}"


class ClipCapCaptioner:
    """ClipCap-style decoding: a mapping network feeds prefix embeddings to GPT-2.

    The checkpoint must hold the mapping network weights (clip dim to
    prefix_length x gpt2 embedding dim). Query-aware captions prepend the
    initial query's token embeddings to the decoder context ahead of the
    mapped prefix, then decode greedily.
    """

    def __init__(self, checkpoint: str, gpt2_name: str = "gpt2",
                 prefix_length: int = 10, device: str = "cpu"):
        path = Path(checkpoint)
        if not path.is_file():
            raise SidecarStartupError(f"captioner checkpoint not found: {checkpoint}")
        try:
            import torch
            from transformers import GPT2LMHeadModel, GPT2Tokenizer
        except ImportError as exc:
            raise SidecarStartupError(f"torch/transformers not installed: {exc}") from exc
        try:
            self._torch = torch
            self.device = device
            self.prefix_length = prefix_length
            self.tokenizer = GPT2Tokenizer.from_pretrained(gpt2_name)
            self.gpt2 = GPT2LMHeadModel.from_pretrained(gpt2_name).to(device).eval()
            state = torch.load(path, map_location=device)
            embed_dim = self.gpt2.transformer.wte.weight.shape[1]
            self.mapper = torch.nn.Sequential(
                torch.nn.Linear(state["input_dim"], embed_dim * prefix_length // 2),
                torch.nn.Tanh(),
                torch.nn.Linear(embed_dim * prefix_length // 2, embed_dim * prefix_length),
            )
            self.mapper.load_state_dict(state["mapper"])
            self.mapper.to(device).eval()
        except SidecarStartupError:
            raise
        except Exception as exc:
            raise SidecarStartupError(f"could not load captioner: {exc}") from exc

    def caption(self, vector: Sequence[float], initial_query: str | None,
                seed: int = 0, temperature: float = 0.0, max_tokens: int = 32) -> str:
        torch = self._torch
        with torch.no_grad():
            clip_vec = torch.tensor(list(vector), dtype=torch.float32, device=self.device)
            prefix = self.mapper(clip_vec).view(1, self.prefix_length, -1)
            context = prefix
            if initial_query:
                query_ids = self.tokenizer.encode(initial_query, return_tensors="pt").to(self.device)
                query_embeds = self.gpt2.transformer.wte(query_ids)
                context = torch.cat([query_embeds, prefix], dim=1)
            generated = []
            embeds = context
            for _ in range(max_tokens):
                logits = self.gpt2(inputs_embeds=embeds).logits[:, -1, :]
                token = int(logits.argmax(dim=-1))
                if token == self.tokenizer.eos_token_id:
                    break
                generated.append(token)
                next_embed = self.gpt2.transformer.wte(
                    torch.tensor([[token]], device=self.device)
                )
                embeds = torch.cat([embeds, next_embed], dim=1)
        text = self.tokenizer.decode(generated).strip()
        return text or "an image"


class EchoLlm:
    """Deterministic completion: echo the text after the prompt's last marker."""

    def complete(self, prompt: str, max_tokens: int, seed: int = 0,
                 temperature: float = 0.0) -> str:
        tail = prompt.rsplit(COMPLETION_MARKER, 1)[-1].strip()
        text = tail if tail else "a refined query"
        return " ".join(text.split()[:max_tokens])


class HfLlm:
    """Causal-LM completion through transformers, greedy at temperature 0."""

    def __init__(self, model_name: str, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:
            raise SidecarStartupError(f"torch/transformers not installed: {exc}") from exc
        try:
            self._torch = torch
            self.device = device
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModelForCausalLM.from_pretrained(model_name).to(device).eval()
        except Exception as exc:
            raise SidecarStartupError(f"could not load LLM {model_name!r}: {exc}") from exc

    def complete(self, prompt: str, max_tokens: int, seed: int = 0,
                 temperature: float = 0.0) -> str:
        torch = self._torch
        torch.manual_seed(seed)
        inputs = self.tokenizer(prompt, return_tensors="pt").to(self.device)
        with torch.no_grad():
            output = self.model.generate(
                **inputs,
                max_new_tokens=max_tokens,
                do_sample=temperature > 0,
                temperature=temperature if temperature > 0 else None,
            )
        text = self.tokenizer.decode(
            output[0][inputs["input_ids"].shape[1]:], skip_special_tokens=True
        ).strip()
        return text or "a refined query"
