"""Streaming ingestion of newline-delimited records into a corpus.

Each platform export maps onto the canonical schema through a field map, so
differences between sources stay out of the analysis code. Malformed records
never abort a run: they are counted per reason and skipped.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from ..errors import UsageError
from .domains import extract_domain
from .model import Comment, Corpus, FollowEdge, Post, Window, parse_timestamp

__all__ = ["FieldMap", "IngestFilter", "IngestReport", "ingest", "iter_lines"]

KINDS = ("posts", "comments", "edges")

_HASHTAG_RE = re.compile(r"#(\w+)")
_URL_RE = re.compile(r"https?://\S+")

_CANONICAL_FIELDS = {
    "posts": ("post_id", "author_id", "created_at", "text", "hashtags",
              "urls", "likes", "reshares", "replies"),
    "comments": ("comment_id", "parent_post_id", "author_id", "created_at"),
    "edges": ("follower_id", "followee_id"),
}
_REQUIRED_FIELDS = {
    "posts": ("post_id", "author_id", "created_at"),
    "comments": ("comment_id", "parent_post_id", "author_id", "created_at"),
    "edges": ("follower_id", "followee_id"),
}


@dataclass(frozen=True)
class FieldMap:
    """Canonical-field -> source-key mapping per record kind.

    Source keys may use dots for nested lookups ("author.id"). A missing
    section or field falls back to the canonical name itself.
    """

    posts: dict = field(default_factory=dict)
    comments: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)
    timestamp_format: Optional[str] = None  # strptime pattern; None = auto

    @classmethod
    def from_toml(cls, path) -> "FieldMap":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib
        data = tomllib.loads(Path(path).read_text("utf-8"))
        return cls(
            posts=dict(data.get("posts", {})),
            comments=dict(data.get("comments", {})),
            edges=dict(data.get("edges", {})),
            timestamp_format=data.get("timestamps", {}).get("format"),
        )

    def source_key(self, kind: str, canonical: str) -> str:
        return getattr(self, kind).get(canonical, canonical)

    def lookup(self, kind: str, record: dict, canonical: str):
        key = self.source_key(kind, canonical)
        value = record
        for part in key.split("."):
            if not isinstance(value, dict) or part not in value:
                return None
            value = value[part]
        return value

    def parse_time(self, value) -> int:
        if self.timestamp_format:
            dt = datetime.strptime(str(value), self.timestamp_format)
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            return int(dt.timestamp())
        return parse_timestamp(value)


@dataclass(frozen=True)
class IngestFilter:
    hashtags: frozenset[str] = frozenset()
    window: Optional[Window] = None
    links_only: bool = False
    substring_match: bool = False  # off by default: exact hashtag tokens

    def hashtag_ok(self, tags: frozenset[str]) -> bool:
        if not self.hashtags:
            return True
        if self.substring_match:
            return any(h in t for h in self.hashtags for t in tags)
        return bool(self.hashtags & tags)

    def window_ok(self, epoch: int) -> bool:
        return self.window is None or self.window.contains(epoch)


@dataclass
class IngestReport:
    kind: str
    total_lines: int = 0
    accepted: int = 0
    duplicates: int = 0
    dropped: Counter = field(default_factory=Counter)
    malformed: Counter = field(default_factory=Counter)
    url_failures: int = 0
    quarantined: int = 0

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())

    @property
    def total_malformed(self) -> int:
        return sum(self.malformed.values())

    def tally_ok(self) -> bool:
        return (self.accepted + self.total_dropped + self.total_malformed
                + self.duplicates == self.total_lines)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "total_lines": self.total_lines,
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "dropped": dict(sorted(self.dropped.items())),
            "malformed": dict(sorted(self.malformed.items())),
            "url_failures": self.url_failures,
            "quarantined": self.quarantined,
        }

    def merge(self, other: "IngestReport") -> None:
        self.total_lines += other.total_lines
        self.accepted += other.accepted
        self.duplicates += other.duplicates
        self.dropped.update(other.dropped)
        self.malformed.update(other.malformed)
        self.url_failures += other.url_failures
        self.quarantined += other.quarantined


def iter_lines(path) -> Iterable[str]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            yield line


def ingest(lines: Iterable[str], kind: str, flt: IngestFilter,
           field_map: Optional[FieldMap] = None,
           corpus: Optional[Corpus] = None) -> tuple[Corpus, IngestReport]:
    """Fold a record stream into a corpus; returns it with the tally report.

    ``accepted + dropped + malformed + duplicates == lines read`` always
    holds. Re-ingesting a stream is idempotent: repeats count as duplicates.
    """
    if kind not in KINDS:
        raise UsageError(f"unknown record kind {kind!r}; expected one of {KINDS}")
    fmap = field_map or FieldMap()
    if corpus is None:
        corpus = Corpus(window=flt.window or Window(0, 2 ** 62))
    report = IngestReport(kind=kind)

    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        report.total_lines += 1
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            report.malformed["json"] += 1
            continue
        if not isinstance(record, dict):
            report.malformed["json"] += 1
            continue
        if kind == "posts":
            _ingest_post(record, fmap, flt, corpus, report)
        elif kind == "comments":
            _ingest_comment(record, fmap, flt, corpus, report)
        else:
            _ingest_edge(record, fmap, corpus, report)
    return corpus, report


def _missing(report: IngestReport) -> None:
    report.malformed["missing_field"] += 1


def _ingest_post(record: dict, fmap: FieldMap, flt: IngestFilter,
                 corpus: Corpus, report: IngestReport) -> None:
    values = {name: fmap.lookup("posts", record, name)
              for name in _CANONICAL_FIELDS["posts"]}
    if any(values[name] is None for name in _REQUIRED_FIELDS["posts"]):
        return _missing(report)
    try:
        created = fmap.parse_time(values["created_at"])
    except ValueError:
        report.malformed["bad_timestamp"] += 1
        return

    text = str(values["text"]) if values["text"] is not None else ""
    tags = values["hashtags"]
    if tags is None:
        tags = _HASHTAG_RE.findall(text)
    elif isinstance(tags, str):
        tags = [tags]
    hashtags = frozenset(str(t).lstrip("#").lower() for t in tags if str(t).strip("#"))

    urls = values["urls"]
    if urls is None:
        urls = _URL_RE.findall(text)
    elif isinstance(urls, str):
        urls = [urls]
    urls = tuple(str(u) for u in urls)

    counts = {}
    for name in ("likes", "reshares"):
        v = values[name]
        try:
            counts[name] = 0 if v is None else int(v)
        except (TypeError, ValueError):
            report.malformed["bad_value"] += 1
            return
        if counts[name] < 0:
            report.malformed["bad_value"] += 1
            return
    replies = values["replies"]
    if replies is not None:
        try:
            replies = int(replies)
        except (TypeError, ValueError):
            report.malformed["bad_value"] += 1
            return
        if replies < 0:
            report.malformed["bad_value"] += 1
            return

    if not flt.window_ok(created):
        report.dropped["window"] += 1
        return
    if not flt.hashtag_ok(hashtags):
        report.dropped["hashtag"] += 1
        return
    domains = []
    for u in urls:
        d = extract_domain(u)
        if d is None:
            report.url_failures += 1
        else:
            domains.append(d)
    if flt.links_only and not domains:
        report.dropped["no_link"] += 1
        return

    post = Post(
        post_id=str(values["post_id"]),
        author_id=str(values["author_id"]),
        created_at=created,
        text=text,
        hashtags=hashtags,
        urls=urls,
        likes=counts["likes"],
        reshares=counts["reshares"],
        replies=replies,
    )
    if post.post_id in corpus.posts:
        report.duplicates += 1
        return
    corpus.posts[post.post_id] = post
    report.accepted += 1


def _ingest_comment(record: dict, fmap: FieldMap, flt: IngestFilter,
                    corpus: Corpus, report: IngestReport) -> None:
    values = {name: fmap.lookup("comments", record, name)
              for name in _CANONICAL_FIELDS["comments"]}
    if any(values[name] is None for name in _REQUIRED_FIELDS["comments"]):
        return _missing(report)
    try:
        created = fmap.parse_time(values["created_at"])
    except ValueError:
        report.malformed["bad_timestamp"] += 1
        return
    if not flt.window_ok(created):
        report.dropped["window"] += 1
        return
    comment = Comment(
        comment_id=str(values["comment_id"]),
        parent_post_id=str(values["parent_post_id"]),
        author_id=str(values["author_id"]),
        created_at=created,
    )
    if comment.comment_id in corpus.comments:
        report.duplicates += 1
        return
    corpus.comments[comment.comment_id] = comment
    report.accepted += 1


def _ingest_edge(record: dict, fmap: FieldMap, corpus: Corpus,
                 report: IngestReport) -> None:
    values = {name: fmap.lookup("edges", record, name)
              for name in _CANONICAL_FIELDS["edges"]}
    if any(values[name] is None for name in _REQUIRED_FIELDS["edges"]):
        return _missing(report)
    follower, followee = str(values["follower_id"]), str(values["followee_id"])
    if follower == followee:
        report.malformed["self_loop"] += 1
        return
    edge = FollowEdge(follower_id=follower, followee_id=followee)
    if edge in corpus.edges:
        report.duplicates += 1
        return
    corpus.edges.add(edge)
    report.accepted += 1
