"""Command-line interface: ingest, classify, analyze, synthesize, report."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from ._jsonio import config_hash, dump_json, file_hash, load_json
from .corpus.ingest import FieldMap, IngestFilter, IngestReport, ingest, iter_lines
from .corpus.model import Window
from .corpus.stats import corpus_stats, links_only
from .corpus.store import corpus_fingerprint, load_corpus, save_corpus
from .errors import NewsflowError, UsageError
from .report import (SCHEMA_VERSION, RunConfig, _echo_chamber_artifact,
                     _engagement_artifact, _survival_artifact, run_pipeline)
from .sources import label_posts, load_registry
from .synth import SynthConfig, generate

logger = logging.getLogger("newsflow")


class _JsonLogFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({
            "level": record.levelname.lower(),
            "logger": record.name,
            "event": record.getMessage(),
        }, sort_keys=True)


def _setup_logging(json_logs: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(_JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO)


def _parse_window(window: str | None) -> Window | None:
    if not window:
        return None
    try:
        start, end = window.split("..", 1)
        return Window.from_dates(start.strip(), end.strip())
    except (ValueError, UsageError) as exc:
        raise click.UsageError(f"bad --window (expected YYYY-MM-DD..YYYY-MM-DD): {exc}")


def _load_labels(path) -> dict[str, str]:
    data = load_json(path)
    return data["labels"] if isinstance(data, dict) and "labels" in data else data


@click.group()
@click.option("--json-logs", is_flag=True, help="Emit machine-readable progress logs.")
def main(json_logs: bool) -> None:
    """Analytics over social-media corpora: source credibility, engagement
    heavy tails, commenting lifetimes, and echo-chamber structure."""
    _setup_logging(json_logs)


@main.command("ingest")
@click.option("--kind", type=click.Choice(["posts", "comments", "edges"]), required=True)
@click.option("--map", "field_map_path", type=click.Path(exists=True), default=None,
              help="TOML field map translating export keys to the canonical schema.")
@click.option("--hashtags", default="", help="Comma-separated hashtag filter (case-insensitive).")
@click.option("--window", default=None, help="Analysis window, YYYY-MM-DD..YYYY-MM-DD (UTC).")
@click.option("--links-only", is_flag=True, help="Drop posts without an extractable domain.")
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Corpus directory (created or extended).")
@click.option("--platform", default="", help="Free-form platform tag stored in the manifest.")
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
def ingest_cmd(kind, field_map_path, hashtags, window, links_only, out_dir, platform, paths):
    """Ingest newline-delimited export files into a corpus directory."""
    field_map = FieldMap.from_toml(field_map_path) if field_map_path else FieldMap()
    tags = frozenset(t.strip().lower() for t in hashtags.split(",") if t.strip())
    win = _parse_window(window)
    flt = IngestFilter(hashtags=tags, window=win, links_only=links_only)

    out = Path(out_dir)
    corpus = None
    prior_reports: list[dict] = []
    if (out / "manifest.json").exists():
        corpus = load_corpus(out)
        prior_reports = load_json(out / "manifest.json").get("reports", [])
        if win is not None and win != corpus.window:
            raise click.UsageError("--window conflicts with the existing corpus window")
    report = IngestReport(kind=kind)
    try:
        for path in paths:
            corpus, shard_report = ingest(iter_lines(path), kind, flt,
                                          field_map=field_map, corpus=corpus)
            report.merge(shard_report)
    except OSError as exc:
        raise click.ClickException(f"cannot read input: {exc}")
    if platform:
        corpus.platform_tag = platform
    report.quarantined = corpus.quarantined_count()

    config = {
        "hashtags": sorted(tags),
        "window": corpus.window.to_dict(),
        "links_only": links_only,
        "field_map_digest": file_hash(field_map_path) if field_map_path else None,
    }
    save_corpus(corpus, out, reports=None, config=config)
    # manifest keeps the full ingest history
    manifest = load_json(out / "manifest.json")
    manifest["reports"] = prior_reports + [report.to_dict()]
    dump_json(manifest, out / "manifest.json")

    if not report.tally_ok():
        raise click.ClickException("internal tally mismatch in the ingest report")
    logger.info("ingested %s: %s", kind, json.dumps(report.to_dict(), sort_keys=True))
    click.echo(json.dumps(report.to_dict(), sort_keys=True, indent=2))


@main.command("classify")
@click.option("--registry", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--ng-lenient", is_flag=True,
              help="Treat an NG score of exactly 60 as reliable instead of questionable.")
def classify_cmd(registry, corpus_dir, out, ng_lenient):
    """Label corpus posts questionable/reliable/unknown from an outlet registry."""
    reg = load_registry(registry, ng_reliable_strict=not ng_lenient)
    corpus = load_corpus(corpus_dir)
    linked, links_report = links_only(corpus)
    labels, coverage = label_posts(linked, reg)
    params = {"ng_reliable_strict": not ng_lenient}
    artifact = {
        "schema_version": SCHEMA_VERSION,
        "kind": "labels",
        "config_hash": config_hash(params),
        "corpus_hash": corpus_fingerprint(corpus_dir),
        "labels": {pid: str(lab) for pid, lab in sorted(labels.items())},
        "coverage": coverage,
        "links_only": links_report,
        "registry_counts": reg.counts(),
    }
    dump_json(artifact, out)
    logger.info("classified %d posts (%d categorized)", coverage["posts"],
                coverage["categorized"])
    click.echo(json.dumps({"coverage": coverage, "registry": reg.counts()},
                          sort_keys=True, indent=2))


@main.command("engagement")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True), required=True)
@click.option("--kind", type=click.Choice(["likes", "reshares", "replies"]), default="likes")
@click.option("--unit", type=click.Choice(["post", "user"]), default="post")
@click.option("--x-min", default="1", help='Lower fit cutoff: integer or "auto".')
@click.option("--out", type=click.Path(), required=True)
def engagement_cmd(corpus_dir, labels_path, kind, unit, x_min, out):
    """Fit discrete power laws per label and compare scaling exponents."""
    corpus = load_corpus(corpus_dir)
    labels = _load_labels(labels_path)
    x_min_value = x_min if x_min == "auto" else int(x_min)
    params = {"kind": kind, "unit": unit, "x_min": x_min_value}
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash(params),
        "corpus_hash": corpus_fingerprint(corpus_dir),
    }
    artifact = _engagement_artifact(corpus, labels, kind, unit, x_min_value, meta)
    dump_json(artifact, out)
    click.echo(json.dumps({"fits": artifact["fits"],
                           "comparisons": artifact["comparisons"]},
                          sort_keys=True, indent=2))


@main.command("survival")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True), required=True)
@click.option("--unit", type=click.Choice(["post", "user"]), default="post")
@click.option("--no-censoring", is_flag=True,
              help="Treat every lifetime as observed (no window-end censoring).")
@click.option("--out", type=click.Path(), required=True)
def survival_cmd(corpus_dir, labels_path, unit, no_censoring, out):
    """Kaplan-Meier curves per label group plus the Peto-Peto comparison."""
    corpus = load_corpus(corpus_dir)
    labels = _load_labels(labels_path)
    params = {"unit": unit, "censoring": not no_censoring}
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash(params),
        "corpus_hash": corpus_fingerprint(corpus_dir),
    }
    artifact = _survival_artifact(corpus, labels, unit, not no_censoring, meta)
    dump_json(artifact, out)
    click.echo(json.dumps({"peto_peto": artifact["peto_peto"],
                           "warning": artifact["warning"]}, sort_keys=True, indent=2))


@main.command("echo-chamber")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True), required=True)
@click.option("--edges", "edges_path", type=click.Path(exists=True), default=None,
              help="Edge file overriding the corpus follow edges (JSONL).")
@click.option("--min-posts", default=3, show_default=True)
@click.option("--bins", default=50, show_default=True)
@click.option("--smoothing", default=None, type=float,
              help="Gaussian bandwidth in leaning units; omit for raw bins.")
@click.option("--out", type=click.Path(), required=True)
def echo_chamber_cmd(corpus_dir, labels_path, edges_path, min_posts, bins, smoothing, out):
    """Joint individual/neighborhood leaning density and its correlation."""
    corpus = load_corpus(corpus_dir)
    labels = _load_labels(labels_path)
    if edges_path:
        corpus.edges.clear()
        from .corpus.model import FollowEdge
        with open(edges_path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                follower = row.get("follower_id", row.get("source"))
                followee = row.get("followee_id", row.get("target"))
                if follower and followee and follower != followee:
                    corpus.edges.add(FollowEdge(follower, followee))
    params = {"min_posts": min_posts, "bins": bins, "smoothing": smoothing}
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash(params),
        "corpus_hash": corpus_fingerprint(corpus_dir),
    }
    artifact = _echo_chamber_artifact(corpus, labels, min_posts, bins, smoothing, meta)
    dump_json(artifact, out)
    click.echo(json.dumps({"correlation": artifact["correlation"],
                           "n_users": artifact["n_users"]}, sort_keys=True, indent=2))


@main.command("synth")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def synth_cmd(config_path, out_dir):
    """Generate a synthetic corpus with a planted-truth manifest."""
    config = SynthConfig.from_toml(config_path)
    manifest = generate(config, out_dir)
    click.echo(json.dumps(manifest["counts"], sort_keys=True, indent=2))


@main.command("report")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
def report_cmd(config_path):
    """Run the full pipeline per a TOML run config (env overrides: NEWSFLOW_*)."""
    config = RunConfig.from_toml(config_path)
    bundle = run_pipeline(config)
    click.echo(json.dumps({
        "out": str(bundle.out_dir),
        "artifacts": sorted(bundle.artifacts),
        "errors": [{"stage": s, "error": e} for s, e in bundle.errors],
    }, sort_keys=True, indent=2))
    if not bundle.ok:
        raise SystemExit(1)


def run() -> None:
    """Console entry point translating package errors into exit codes."""
    try:
        main(standalone_mode=True)
    except NewsflowError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(2 if isinstance(exc, UsageError) else 1)


if __name__ == "__main__":
    run()
