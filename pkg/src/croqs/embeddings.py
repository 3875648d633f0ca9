"""Unit-norm embedding vectors and the read-only store that serves them."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

# Norm within this tolerance counts as already normalized; normalize() then
# returns the input unchanged, which makes it bitwise idempotent.
NORM_TOLERANCE = 1e-6

_MAGIC = b"CRQSEMB\x01"
_HEADER = struct.Struct("<II")  # dimension, entry count


def as_vector(values: Sequence[float] | np.ndarray, dimension: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking its length."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"embedding vector must be 1-D, got shape {v.shape}")
    if dimension is not None and v.shape[0] != dimension:
        raise ValueError(f"expected dimension {dimension}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("embedding vector contains non-finite values")
    return v


def normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm.

    Vectors whose norm is already within NORM_TOLERANCE of 1 are returned
    unchanged so that repeated normalization is bitwise stable.
    """
    v = as_vector(values)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    if abs(norm - 1.0) <= NORM_TOLERANCE:
        return v
    return v / norm


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity of two vectors, clipped to [-1, 1].

    Inputs are normalized before the dot product, so pre-normalized and raw
    vectors give the same answer.
    """
    a = as_vector(u)
    b = as_vector(v)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if np.array_equal(a, b):
        return 1.0
    value = float(np.dot(normalize(a), normalize(b)))
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable map of image id to unit-norm embedding.

    Rows of `matrix` align with `ids`; all access after construction is
    read-only, so the store is safe to share across threads.
    """

    dimension: int
    ids: tuple[str, ...]
    matrix: np.ndarray
    model_name: str = "unknown"
    normalized: bool = True
    _row_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.matrix.shape != (len(self.ids), self.dimension):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{len(self.ids)} ids of dimension {self.dimension}"
            )
        object.__setattr__(self, "_row_of", {i: r for r, i in enumerate(self.ids)})
        self.matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._row_of

    def vector(self, image_id: str) -> np.ndarray:
        try:
            return self.matrix[self._row_of[image_id]]
        except KeyError:
            raise KeyError(f"unknown image id {image_id!r}") from None

    def rows(self, image_ids: Iterable[str]) -> np.ndarray:
        """Matrix restricted to the given ids, in the given order."""
        return self.matrix[[self.row_index(i) for i in image_ids]]

    def row_index(self, image_id: str) -> int:
        try:
            return self._row_of[image_id]
        except KeyError:
            raise KeyError(f"unknown image id {image_id!r}") from None


def build_store(
    entries: Mapping[str, Sequence[float]] | Iterable[tuple[str, Sequence[float]]],
    model_name: str = "unknown",
) -> EmbeddingStore:
    """Validate and normalize (id, vector) pairs into an EmbeddingStore.

    Rejects the whole input on the first duplicate id, dimension mismatch,
    or non-finite component, naming the offending id.
    """
    pairs = entries.items() if isinstance(entries, Mapping) else entries
    ids: list[str] = []
    vectors: list[np.ndarray] = []
    seen: set[str] = set()
    dimension: int | None = None
    for image_id, values in pairs:
        if image_id in seen:
            raise ValueError(f"duplicate image id {image_id!r}")
        seen.add(image_id)
        try:
            v = normalize(as_vector(values, dimension))
        except ValueError as exc:
            raise ValueError(f"invalid vector for id {image_id!r}: {exc}") from None
        if dimension is None:
            dimension = v.shape[0]
        ids.append(image_id)
        vectors.append(v)
    if dimension is None:
        raise ValueError("store must contain at least one embedding")
    return EmbeddingStore(
        dimension=dimension,
        ids=tuple(ids),
        matrix=np.vstack(vectors),
        model_name=model_name,
    )


def load_store(path: str | Path, format: str = "auto") -> EmbeddingStore:
    """Load a store from a binary or JSONL embedding file.

    Args:
        path: file to read.
        format: "binary", "jsonl", or "auto" to sniff the binary magic.
    """
    path = Path(path)
    if format == "auto":
        with path.open("rb") as fh:
            format = "binary" if fh.read(len(_MAGIC)) == _MAGIC else "jsonl"
    if format == "binary":
        return _load_binary(path)
    if format == "jsonl":
        return _load_jsonl(path)
    raise ValueError(f"unknown store format {format!r}")


def save_store(store: EmbeddingStore, path: str | Path, format: str = "binary") -> None:
    path = Path(path)
    if format == "binary":
        _save_binary(store, path)
    elif format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for image_id in store.ids:
                record = {"id": image_id, "v": store.vector(image_id).tolist()}
                fh.write(json.dumps(record) + "\n")
    else:
        raise ValueError(f"unknown store format {format!r}")


def _load_binary(path: Path) -> EmbeddingStore:
    data = path.read_bytes()
    if data[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path}: bad magic, not a binary embedding file")
    offset = len(_MAGIC)
    dimension, count = _HEADER.unpack_from(data, offset)
    offset += _HEADER.size
    entries: list[tuple[str, np.ndarray]] = []
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        image_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        v = np.frombuffer(data, dtype="<f4", count=dimension, offset=offset)
        offset += 4 * dimension
        entries.append((image_id, v.astype(np.float64)))
    return build_store(entries)


def _save_binary(store: EmbeddingStore, path: Path) -> None:
    chunks = [_MAGIC, _HEADER.pack(store.dimension, len(store))]
    for image_id in store.ids:
        raw = image_id.encode("utf-8")
        chunks.append(struct.pack("<H", len(raw)))
        chunks.append(raw)
        chunks.append(store.vector(image_id).astype("<f4").tobytes())
    path.write_bytes(b"".join(chunks))


def _load_jsonl(path: Path) -> EmbeddingStore:
    def entries() -> Iterable[tuple[str, Sequence[float]]]:
        with path.open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    yield record["id"], record["v"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}:{line_no}: malformed entry: {exc}") from None

    return build_store(entries())
