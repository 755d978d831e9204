import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from newsflow.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Synth corpus generated and ingested entirely through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    synth_toml = root / "synth.toml"
    synth_toml.write_text("\n".join([
        "n_users = 50",
        "n_posts = 500",
        "seed = 19",
        "link_rate = 0.9",
        "unregistered_rate = 0.1",
        "malformed_rate = 0.02",
        "homophily = 0.8",
        'cluster_centers = [[0.2, 0.5], [0.8, 0.5]]',
    ]) + "\n", encoding="utf-8")
    result = runner.invoke(main, ["synth", "--config", str(synth_toml),
                                  "--out", str(root / "synth")])
    assert result.exit_code == 0, result.output

    for kind, name in (("posts", "posts.jsonl"), ("comments", "comments.jsonl"),
                       ("edges", "edges.jsonl")):
        result = runner.invoke(main, [
            "ingest", "--kind", kind,
            "--map", str(root / "synth" / "fieldmap.toml"),
            "--hashtags", "covid,covid19,corona,coronavirus",
            "--window", "2020-01-01..2020-09-30",
            "--out", str(root / "corpus"),
            "--platform", "synthetic",
            str(root / "synth" / name),
        ])
        assert result.exit_code == 0, result.output
    return root


class TestIngestCli:
    def test_report_printed_and_tally(self, workspace):
        manifest = json.loads((workspace / "synth" / "manifest.json").read_text())
        corpus_manifest = json.loads((workspace / "corpus" / "manifest.json").read_text())
        assert corpus_manifest["counts"]["posts"] == manifest["counts"]["retained_posts"]
        assert corpus_manifest["counts"]["comments"] == manifest["counts"]["comments"]
        assert corpus_manifest["counts"]["edges"] == manifest["counts"]["edges"]
        reports = corpus_manifest["reports"]
        assert [r["kind"] for r in reports] == ["posts", "comments", "edges"]
        posts_report = reports[0]
        total = (posts_report["accepted"] + posts_report["duplicates"]
                 + sum(posts_report["dropped"].values())
                 + sum(posts_report["malformed"].values()))
        assert total == posts_report["total_lines"]

    def test_unreadable_source_is_fatal(self, workspace):
        runner = CliRunner()
        result = runner.invoke(main, ["ingest", "--kind", "posts",
                                      "--out", str(workspace / "corpus2"),
                                      str(workspace / "missing.jsonl")])
        assert result.exit_code != 0

    def test_window_conflict_rejected(self, workspace):
        runner = CliRunner()
        result = runner.invoke(main, [
            "ingest", "--kind", "posts",
            "--window", "2021-01-01..2021-02-01",
            "--out", str(workspace / "corpus"),
            str(workspace / "synth" / "posts.jsonl"),
        ])
        assert result.exit_code != 0
        assert "window" in result.output.lower()


class TestAnalysisCli:
    def test_classify_then_analyses(self, workspace):
        runner = CliRunner()
        labels = workspace / "labels.json"
        result = runner.invoke(main, ["classify",
                                      "--registry", str(workspace / "synth" / "registry.csv"),
                                      "--corpus", str(workspace / "corpus"),
                                      "--out", str(labels)])
        assert result.exit_code == 0, result.output
        payload = json.loads(labels.read_text())
        assert payload["kind"] == "labels"
        assert payload["coverage"]["categorized"] > 0

        result = runner.invoke(main, ["engagement",
                                      "--corpus", str(workspace / "corpus"),
                                      "--labels", str(labels),
                                      "--kind", "likes", "--unit", "post",
                                      "--out", str(workspace / "fits.json")])
        assert result.exit_code == 0, result.output
        fits = json.loads((workspace / "fits.json").read_text())
        for label in ("overall", "questionable", "reliable"):
            assert fits["fits"][label]["x_min"] == 1
            assert fits["fits"][label]["alpha_hat"] > 1.0
        assert fits["comparisons"][0]["p_value"] <= 1.0

        result = runner.invoke(main, ["survival",
                                      "--corpus", str(workspace / "corpus"),
                                      "--labels", str(labels),
                                      "--unit", "post",
                                      "--out", str(workspace / "km.json")])
        assert result.exit_code == 0, result.output
        km = json.loads((workspace / "km.json").read_text())
        assert set(km["groups"]) == {"questionable", "reliable"}
        assert km["peto_peto"] is not None

        result = runner.invoke(main, ["echo-chamber",
                                      "--corpus", str(workspace / "corpus"),
                                      "--labels", str(labels),
                                      "--min-posts", "3", "--bins", "50",
                                      "--out", str(workspace / "joint.json")])
        assert result.exit_code == 0, result.output
        joint = json.loads((workspace / "joint.json").read_text())
        assert len(joint["grid"]) == 50
        assert joint["correlation"]["r"] > 0.5  # homophily 0.8 was planted
        total = sum(sum(row) for row in joint["grid"])
        assert abs(total - 1.0) < 1e-9


class TestReportCli:
    def test_report_and_json_logs(self, workspace):
        runner = CliRunner()
        run_toml = workspace / "run.toml"
        run_toml.write_text("\n".join([
            'corpus = "corpus"',
            'registry = "synth/registry.csv"',
            'out = "bundle"',
        ]) + "\n", encoding="utf-8")
        result = runner.invoke(main, ["--json-logs", "report",
                                      "--config", str(run_toml)])
        assert result.exit_code == 0, result.output
        assert (workspace / "bundle" / "bundle.json").exists()
        assert (workspace / "bundle" / "breakdown.csv").exists()
        index = json.loads((workspace / "bundle" / "bundle.json").read_text())
        assert index["errors"] == []

    def test_report_fails_nonzero_on_bad_registry(self, workspace, tmp_path):
        runner = CliRunner()
        bad = tmp_path / "bad.csv"
        bad.write_text("domain,provider,mbfc_bias,mbfc_bias_score,ng_score,ng_special\n")
        run_toml = tmp_path / "run.toml"
        run_toml.write_text("\n".join([
            f'corpus = "{workspace / "corpus"}"',
            f'registry = "{bad}"',
            'out = "bundle_bad"',
        ]) + "\n", encoding="utf-8")
        result = runner.invoke(main, ["report", "--config", str(run_toml)])
        assert result.exit_code == 1
        assert (tmp_path / "bundle_bad" / "breakdown.json").exists()


class TestSynthCli:
    def test_rejects_unknown_keys(self, tmp_path):
        runner = CliRunner()
        bad = tmp_path / "synth.toml"
        bad.write_text("n_users = 5\nunknown_knob = 3\n")
        result = runner.invoke(main, ["synth", "--config", str(bad),
                                      "--out", str(tmp_path / "x")])
        assert result.exit_code != 0
