"""Corpus data model, ingestion, persistence, and basic reductions."""

from .domains import extract_domain, normalize_host, registered_domain
from .ingest import FieldMap, IngestFilter, IngestReport, ingest, iter_lines
from .model import (Comment, Corpus, FollowEdge, Post, Window, day_of,
                    format_timestamp, parse_timestamp)
from .stats import BreakdownTable, corpus_stats, links_only
from .store import corpus_fingerprint, load_corpus, save_corpus

__all__ = [
    "Comment", "Corpus", "FollowEdge", "Post", "Window",
    "parse_timestamp", "format_timestamp", "day_of",
    "extract_domain", "registered_domain", "normalize_host",
    "FieldMap", "IngestFilter", "IngestReport", "ingest", "iter_lines",
    "BreakdownTable", "corpus_stats", "links_only",
    "save_corpus", "load_corpus", "corpus_fingerprint",
]
