from pathlib import Path

import pytest

from newsflow.corpus import (FieldMap, IngestFilter, Window, ingest,
                             iter_lines, save_corpus)
from newsflow.synth import SynthConfig, generate

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


def golden_synth_config() -> SynthConfig:
    return SynthConfig.from_toml(DATA_DIR / "golden_synth.toml")


def build_corpus_dir(synth_dir: Path, corpus_dir: Path, config: SynthConfig) -> Path:
    """Ingest a synth export into a corpus store, path-free config for
    byte-reproducible manifests."""
    fmap = FieldMap.from_toml(synth_dir / "fieldmap.toml")
    window = Window.from_dates(config.window_start, config.window_end)
    flt = IngestFilter(hashtags=frozenset(config.hashtags), window=window)
    corpus = None
    reports = []
    for kind, name in (("posts", "posts.jsonl"), ("comments", "comments.jsonl"),
                       ("edges", "edges.jsonl")):
        corpus, report = ingest(iter_lines(synth_dir / name), kind, flt,
                                field_map=fmap, corpus=corpus)
        reports.append(report)
    corpus.platform_tag = config.platform_tag
    save_corpus(corpus, corpus_dir, reports=reports, config={
        "hashtags": sorted(config.hashtags),
        "window": window.to_dict(),
        "links_only": False,
    })
    return corpus_dir


@pytest.fixture(scope="session")
def golden_corpus(tmp_path_factory):
    """(corpus_dir, registry_path, manifest) for the bundled golden config."""
    root = tmp_path_factory.mktemp("golden_corpus")
    config = golden_synth_config()
    manifest = generate(config, root / "synth")
    corpus_dir = build_corpus_dir(root / "synth", root / "corpus", config)
    return corpus_dir, root / "synth" / "registry.csv", manifest
