import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from croqs.cli import main
from croqs.synthetic import make_planted, write_planted


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthworld")
    world = make_planted(n_queries=3, clusters_per_query=3, points_per_cluster=8,
                         dim=16, seed=4)
    write_planted(world, out)
    return out


@pytest.fixture()
def runner():
    return CliRunner()


class TestSynthAndValidate:
    def test_synth_writes_world(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["synth", "--out", str(tmp_path / "w"), "--queries", "2",
             "--clusters", "2", "--points", "4", "--dim", "8"],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "w" / "store.bin").exists()
        assert (tmp_path / "w" / "benchmark.json").exists()
        assert (tmp_path / "w" / "mock.json").exists()

    def test_validate_reports_stats(self, runner, synth_dir):
        result = runner.invoke(
            main,
            ["validate", "--dataset", str(synth_dir / "benchmark.json"),
             "--embeddings", str(synth_dir / "store.bin")],
        )
        assert result.exit_code == 0, result.output
        assert "queries: 3  clusters: 9" in result.output
        assert "missing image ids: 0" in result.output

    def test_validate_missing_ids_fails(self, runner, synth_dir, tmp_path):
        bench = json.loads((synth_dir / "benchmark.json").read_text())
        bench["queries"][0]["clusters"][0]["image_ids"].append("ghost-image")
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(bench))
        result = runner.invoke(
            main,
            ["validate", "--dataset", str(broken),
             "--embeddings", str(synth_dir / "store.bin")],
        )
        assert result.exit_code == 1
        assert "ghost-image" in result.output


class TestSuggestEval:
    def suggest(self, runner, synth_dir, out, method, extra=()):
        args = [
            "suggest",
            "--dataset", str(synth_dir / "benchmark.json"),
            "--embeddings", str(synth_dir / "store.bin"),
            "--method", method,
            "--out", str(out),
            *extra,
        ]
        if method not in ("identity", "human"):
            args += ["--backend", f"mock:{synth_dir / 'mock.json'}"]
        return runner.invoke(main, args)

    def test_identity_suggestions(self, runner, synth_dir, tmp_path):
        out = tmp_path / "s.jsonl"
        result = self.suggest(runner, synth_dir, out, "identity")
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 9
        first = json.loads(lines[0])
        assert first["method"] == "identity"
        assert first["q_hat"] == "planted query 00"

    def test_clipcap_query_aware(self, runner, synth_dir, tmp_path):
        out = tmp_path / "s.jsonl"
        result = self.suggest(
            runner, synth_dir, out, "clipcap", extra=["--query-aware"]
        )
        assert result.exit_code == 0, result.output
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["query_aware"] for r in records)
        assert records[0]["q_hat"].startswith("planted query 00, ")

    def test_query_aware_rejected_for_decap(self, runner, synth_dir, tmp_path):
        result = self.suggest(
            runner, synth_dir, tmp_path / "s.jsonl", "decap", extra=["--query-aware"]
        )
        assert result.exit_code != 0
        assert "clipcap" in result.output

    def test_groupcap_records_prompt(self, runner, synth_dir, tmp_path):
        out = tmp_path / "s.jsonl"
        result = self.suggest(runner, synth_dir, out, "groupcap", extra=["--m", "3"])
        assert result.exit_code == 0, result.output
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["prompt"] for r in records)
        assert all(r["q_hat"].startswith("planted query") for r in records)

    def test_eval_writes_report(self, runner, synth_dir, tmp_path):
        suggestions = tmp_path / "s.jsonl"
        assert self.suggest(runner, synth_dir, suggestions, "human").exit_code == 0
        report_path = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["eval",
             "--dataset", str(synth_dir / "benchmark.json"),
             "--embeddings", str(synth_dir / "store.bin"),
             "--suggestions", str(suggestions),
             "--backend", f"mock:{synth_dir / 'mock.json'}",
             "--out", str(report_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(report_path.read_text())
        assert report["method"] == "human"
        assert report["macro"]["recall_cluster"]["mean"] >= 0.99

    def test_missing_backend_for_model_method(self, runner, synth_dir, tmp_path):
        result = runner.invoke(
            main,
            ["suggest",
             "--dataset", str(synth_dir / "benchmark.json"),
             "--embeddings", str(synth_dir / "store.bin"),
             "--method", "clipcap",
             "--out", str(tmp_path / "s.jsonl")],
        )
        assert result.exit_code != 0
        assert "requires --backend" in result.output


class TestReportCommand:
    def make_report(self, runner, synth_dir, tmp_path, method, label):
        suggestions = tmp_path / f"{label}.jsonl"
        args = [
            "suggest",
            "--dataset", str(synth_dir / "benchmark.json"),
            "--embeddings", str(synth_dir / "store.bin"),
            "--method", method,
            "--out", str(suggestions),
        ]
        if method not in ("identity", "human"):
            args += ["--backend", f"mock:{synth_dir / 'mock.json'}"]
        assert runner.invoke(main, args).exit_code == 0
        report_path = tmp_path / f"{label}.json"
        assert (
            runner.invoke(
                main,
                ["eval",
                 "--dataset", str(synth_dir / "benchmark.json"),
                 "--embeddings", str(synth_dir / "store.bin"),
                 "--suggestions", str(suggestions),
                 "--backend", f"mock:{synth_dir / 'mock.json'}",
                 "--label", label,
                 "--out", str(report_path)],
            ).exit_code
            == 0
        )
        return report_path

    def test_multi_method_table_and_orderings(self, runner, synth_dir, tmp_path):
        q0 = self.make_report(runner, synth_dir, tmp_path, "identity", "q0")
        clipcap = self.make_report(runner, synth_dir, tmp_path, "clipcap", "clipcap")
        groupcap = self.make_report(runner, synth_dir, tmp_path, "groupcap", "groupcap")
        result = runner.invoke(
            main,
            ["report", str(q0), str(clipcap), str(groupcap),
             "--out", str(tmp_path / "table.md"), "--check-orderings"],
        )
        assert result.exit_code == 0, result.output
        table = (tmp_path / "table.md").read_text()
        assert table.splitlines()[0].startswith("| Method | CLIP | Jaccard |")
        assert "| q0 |" in table and "| clipcap |" in table and "| groupcap |" in table
        assert "orderings ok" in result.output


class TestProtocolSchema:
    def test_written_schema_is_valid_json(self, runner, tmp_path):
        out = tmp_path / "protocol.json"
        result = runner.invoke(main, ["protocol-schema", "--out", str(out)])
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["protocol"] == "v1"
        assert set(doc["endpoints"]) == {
            "embed_text", "embed_image", "caption", "complete", "capabilities"
        }
        assert doc["endpoints"]["caption"]["path"] == "/v1/caption"
