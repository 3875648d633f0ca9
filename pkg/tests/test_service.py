import json

import pytest
from fastapi.testclient import TestClient

from croqs.backends import MockBackend
from croqs.service import ServiceConfig, create_app, load_config


class FakeClock:
    def __init__(self):
        self.now = 1000.0

    def __call__(self):
        return self.now


@pytest.fixture()
def world(planted):
    return planted


@pytest.fixture()
def clock():
    return FakeClock()


@pytest.fixture()
def client(world, clock, tmp_path):
    media = tmp_path / "media"
    media.mkdir()
    (media / "img-q00-c00-p00.jpg").write_bytes(b"\xff\xd8\xd9fake")
    backend = MockBackend.from_spec(world.mock_spec)
    app = create_app(
        store=world.store,
        backend=backend,
        media_root=str(media),
        token_ttl_seconds=900.0,
        clock=clock,
    )
    return TestClient(app)


class TestSearch:
    def test_known_phrase_ranks_its_points_first(self, client):
        body = {"query": "planted query 00", "k": 30}
        response = client.post("/api/search", json=body)
        assert response.status_code == 200
        payload = response.json()
        assert len(payload["results"]) == 30
        assert all(r["image_id"].startswith("img-q00-") for r in payload["results"])
        assert payload["query_token"]

    def test_k_zero_is_400(self, client):
        response = client.post("/api/search", json={"query": "x", "k": 0})
        assert response.status_code == 400
        assert response.json()["detail"]["cause"] == "invalid_request"

    def test_repeated_call_is_byte_identical(self, client):
        body = {"query": "planted query 01", "k": 12}
        first = client.post("/api/search", json=body)
        second = client.post("/api/search", json=body)
        assert first.content == second.content

    def test_backend_down_is_503_with_cause(self, world, clock):
        class DownBackend(MockBackend):
            def embed_text(self, texts):
                from croqs.backends import BackendTimeoutError

                raise BackendTimeoutError("no route to model")

        app = create_app(world.store, DownBackend(dimension=32), clock=clock)
        client = TestClient(app)
        response = client.post("/api/search", json={"query": "x", "k": 3})
        assert response.status_code == 503
        assert response.json()["detail"]["cause"] == "backend_unavailable"


class TestSuggest:
    def search_token(self, client, query="planted query 00", k=30):
        return client.post("/api/search", json={"query": query, "k": k}).json()[
            "query_token"
        ]

    def test_planted_clusters_with_oracle_suggestions(self, client):
        token = self.search_token(client)
        response = client.post(
            "/api/suggest",
            json={"query_token": token, "m": 3, "method": "clipcap", "seed": 7},
        )
        assert response.status_code == 200
        clusters = response.json()["clusters"]
        assert len(clusters) == 3
        suggestions = {c["suggestion"] for c in clusters}
        assert suggestions == {
            "a planted query 00 concept 00",
            "a planted query 00 concept 01",
            "a planted query 00 concept 02",
        }
        for cluster in clusters:
            assert len(cluster["image_ids"]) == 10
            assert cluster["prototype_kind"] == "centroid"

    def test_unknown_token_is_404(self, client):
        response = client.post(
            "/api/suggest", json={"query_token": "nope", "m": 2}
        )
        assert response.status_code == 404
        assert response.json()["detail"]["cause"] == "unknown_token"

    def test_m_exceeding_result_size_is_400(self, client):
        token = self.search_token(client, k=5)
        response = client.post("/api/suggest", json={"query_token": token, "m": 6})
        assert response.status_code == 400

    def test_same_seed_same_response(self, client):
        token = self.search_token(client)
        body = {"query_token": token, "m": 3, "method": "clipcap", "seed": 3}
        first = client.post("/api/suggest", json=body)
        second = client.post("/api/suggest", json=body)
        assert first.content == second.content

    def test_identity_method(self, client):
        token = self.search_token(client, query="planted query 02")
        response = client.post(
            "/api/suggest",
            json={"query_token": token, "m": 2, "method": "identity"},
        )
        assert {c["suggestion"] for c in response.json()["clusters"]} == {
            "planted query 02"
        }

    def test_unknown_method_is_400(self, client):
        token = self.search_token(client)
        response = client.post(
            "/api/suggest", json={"query_token": token, "m": 2, "method": "wizard"}
        )
        assert response.status_code == 400

    def test_expired_token_is_404(self, client, clock):
        token = self.search_token(client)
        clock.now += 901.0
        response = client.post("/api/suggest", json={"query_token": token, "m": 2})
        assert response.status_code == 404


class TestImage:
    def test_existing_file_served_with_content_type(self, client):
        response = client.get("/api/image/img-q00-c00-p00")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/jpeg"

    def test_missing_file_is_404(self, client):
        assert client.get("/api/image/never-heard-of-it").status_code == 404

    def test_url_template_redirects(self, world, clock):
        app = create_app(
            world.store,
            MockBackend.from_spec(world.mock_spec),
            media_url_template="https://img.example/{id}.jpg",
            clock=clock,
        )
        client = TestClient(app)
        response = client.get(
            "/api/image/img-q01-c00-p02", follow_redirects=False
        )
        assert response.status_code == 307
        assert response.headers["location"] == "https://img.example/img-q01-c00-p02.jpg"

    def test_traversal_rejected(self, client):
        assert client.get("/api/image/..%2fsecrets").status_code == 404


class TestStaticAssets:
    def test_ui_build_is_served_when_configured(self, world, clock, tmp_path):
        static = tmp_path / "dist"
        (static / "assets").mkdir(parents=True)
        (static / "index.html").write_text("<html><body id='app'>ui</body></html>")
        (static / "assets" / "main.js").write_text("console.log('ui');")
        app = create_app(
            world.store,
            MockBackend.from_spec(world.mock_spec),
            static_dir=str(static),
            clock=clock,
        )
        client = TestClient(app)
        assert client.get("/").status_code == 200
        assert "ui" in client.get("/").text
        assert client.get("/assets/main.js").status_code == 200
        # API routes keep precedence over the static mount
        assert client.post("/api/search", json={"query": "planted query 00", "k": 3}).status_code == 200


class TestConfig:
    def test_json_config(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({"store_path": "s.bin", "backend": "mock:m.json"}))
        config = load_config(path)
        assert config == ServiceConfig(store_path="s.bin", backend="mock:m.json")

    def test_app_from_config_files(self, world, tmp_path):
        from croqs.service import app_from_config
        from croqs.synthetic import write_planted

        paths = write_planted(world, tmp_path / "w")
        config = ServiceConfig(
            store_path=str(paths["store"]), backend=f"mock:{paths['mock']}"
        )
        client = TestClient(app_from_config(config))
        response = client.post(
            "/api/search", json={"query": "planted query 00", "k": 5}
        )
        assert response.status_code == 200
        assert len(response.json()["results"]) == 5

    def test_toml_config(self, tmp_path):
        path = tmp_path / "svc.toml"
        path.write_text(
            'store_path = "s.bin"\nbackend = "http://localhost:9000"\nport = 9100\n'
        )
        config = load_config(path)
        assert config.backend == "http://localhost:9000"
        assert config.port == 9100
