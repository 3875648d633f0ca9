import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from croqs.embeddings import (
    EmbeddingStore,
    build_store,
    cosine,
    load_store,
    normalize,
    save_store,
)


def unit_vectors(dim: int):
    return (
        st.lists(st.floats(-1e3, 1e3), min_size=dim, max_size=dim)
        .map(np.array)
        .filter(lambda v: np.linalg.norm(v) > 1e-3)
    )


class TestNormalize:
    def test_three_four_five(self):
        assert np.allclose(normalize([3.0, 4.0]), [0.6, 0.8])

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            normalize([0.0, 0.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            normalize([1.0, float("nan")])

    @given(unit_vectors(5))
    def test_idempotent_bitwise(self, v):
        once = normalize(v)
        twice = normalize(once)
        assert once.tobytes() == twice.tobytes()

    @given(unit_vectors(4))
    def test_unit_norm(self, v):
        assert math.isclose(float(np.linalg.norm(normalize(v))), 1.0, abs_tol=1e-6)


class TestCosine:
    def test_identity(self):
        v = normalize([0.3, -0.5, 2.0])
        assert cosine(v, v) == 1.0

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_45_degrees(self):
        # hand computed: (1,0) . (1,1)/|(1,1)| = sqrt(2)/2
        assert cosine([1.0, 0.0], normalize([1.0, 1.0])) == pytest.approx(
            0.7071067811865476, abs=1e-9
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            cosine([1.0, 0.0], [1.0, 0.0, 0.0])

    @given(unit_vectors(6), unit_vectors(6))
    def test_symmetric(self, u, v):
        assert cosine(u, v) == cosine(v, u)

    @given(unit_vectors(3), unit_vectors(3))
    def test_bounded(self, u, v):
        assert -1.0 <= cosine(u, v) <= 1.0


class TestBuildStore:
    def test_count_and_dimension(self):
        store = build_store({"a": [1, 0, 0, 0], "b": [0, 1, 0, 0], "c": [0, 0, 1, 0]})
        assert len(store) == 3
        assert store.dimension == 4

    def test_vectors_are_normalized(self):
        store = build_store({"a": [3.0, 4.0]})
        assert np.allclose(store.vector("a"), [0.6, 0.8])

    def test_duplicate_id_rejected(self):
        with pytest.raises(ValueError, match="'a'"):
            build_store([("a", [1.0, 0.0]), ("a", [0.0, 1.0])])

    def test_dimension_mismatch_names_id(self):
        with pytest.raises(ValueError, match="'b'"):
            build_store([("a", [1.0, 0.0]), ("b", [1.0, 0.0, 0.0])])

    def test_non_finite_names_id(self):
        with pytest.raises(ValueError, match="'bad'"):
            build_store([("a", [1.0, 0.0]), ("bad", [float("inf"), 0.0])])

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            build_store({})

    def test_unknown_id_lookup(self):
        store = build_store({"a": [1.0, 0.0]})
        with pytest.raises(KeyError, match="'missing'"):
            store.vector("missing")

    def test_matrix_is_read_only(self):
        store = build_store({"a": [1.0, 0.0]})
        with pytest.raises(ValueError):
            store.matrix[0, 0] = 5.0


class TestFileFormats:
    def test_jsonl_load(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        rows = [
            {"id": "a", "v": [1.0, 0.0, 0.0, 0.0]},
            {"id": "b", "v": [0.0, 2.0, 0.0, 0.0]},
            {"id": "c", "v": [0.0, 0.0, 3.0, 0.0]},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        store = load_store(path, format="jsonl")
        assert len(store) == 3
        assert store.dimension == 4
        assert np.allclose(store.vector("b"), [0.0, 1.0, 0.0, 0.0])

    def test_jsonl_duplicate_id(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        path.write_text(
            json.dumps({"id": "a", "v": [1.0, 0.0]})
            + "\n"
            + json.dumps({"id": "a", "v": [0.0, 1.0]})
            + "\n"
        )
        with pytest.raises(ValueError, match="'a'"):
            load_store(path, format="jsonl")

    def test_jsonl_malformed_line_reports_position(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "v": [1.0, 0.0]}\nnot json\n')
        with pytest.raises(ValueError, match=":2"):
            load_store(path, format="jsonl")

    def test_binary_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(7)
        store = build_store(
            {f"img{i:03d}": rng.normal(size=16) for i in range(25)}
        )
        path = tmp_path / "emb.bin"
        save_store(store, path, format="binary")
        loaded = load_store(path, format="binary")
        save_store(loaded, tmp_path / "emb2.bin", format="binary")
        assert path.read_bytes() == (tmp_path / "emb2.bin").read_bytes()
        assert loaded.ids == store.ids

    def test_auto_detection(self, tmp_path):
        store = build_store({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        bin_path = tmp_path / "emb.bin"
        jsonl_path = tmp_path / "emb.jsonl"
        save_store(store, bin_path, format="binary")
        save_store(store, jsonl_path, format="jsonl")
        assert load_store(bin_path).ids == store.ids
        assert load_store(jsonl_path).ids == store.ids

    def test_jsonl_round_trip_values(self, tmp_path):
        store = build_store({"x": [0.6, 0.8], "y": [1.0, 0.0]})
        path = tmp_path / "emb.jsonl"
        save_store(store, path, format="jsonl")
        loaded = load_store(path, format="jsonl")
        assert np.array_equal(loaded.matrix, store.matrix)
