"""Core corpus records: posts, comments, follow edges, and the container."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterator, Optional

from ..errors import UsageError

__all__ = ["Post", "Comment", "FollowEdge", "Window", "Corpus",
           "parse_timestamp", "format_timestamp", "day_of"]


def parse_timestamp(value) -> int:
    """UTC epoch seconds from epoch numbers or ISO-8601 strings."""
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError:
            try:
                return int(text)
            except ValueError:
                raise ValueError(f"not a timestamp: {value!r}") from None
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"not a timestamp: {value!r}")


def format_timestamp(epoch: int) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def day_of(epoch: int) -> str:
    """UTC calendar day, ISO format."""
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%d")


@dataclass(frozen=True)
class Post:
    post_id: str
    author_id: str
    created_at: int
    text: str = ""
    hashtags: frozenset[str] = field(default_factory=frozenset)
    urls: tuple[str, ...] = ()
    likes: int = 0
    reshares: int = 0
    replies: Optional[int] = None  # absent on platforms that do not export it


@dataclass(frozen=True)
class Comment:
    comment_id: str
    parent_post_id: str
    author_id: str
    created_at: int


@dataclass(frozen=True)
class FollowEdge:
    follower_id: str
    followee_id: str


@dataclass(frozen=True)
class Window:
    start: int
    end: int

    def __post_init__(self):
        if self.start >= self.end:
            raise UsageError("window start must precede window end")

    def contains(self, epoch: int) -> bool:
        return self.start <= epoch <= self.end

    @classmethod
    def from_dates(cls, start_date: str, end_date: str) -> "Window":
        """Inclusive day range: start 00:00:00 through end 23:59:59 UTC."""
        start = parse_timestamp(start_date + "T00:00:00Z")
        end = parse_timestamp(end_date + "T23:59:59Z")
        return cls(start=start, end=end)

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end}


class Corpus:
    """Single-writer container for ingested records.

    Comments whose parent post is missing, or that predate their parent, are
    quarantined: kept and counted but excluded from every analysis view.
    """

    def __init__(self, window: Window, platform_tag: str = ""):
        self.window = window
        self.platform_tag = platform_tag
        self.posts: dict[str, Post] = {}
        self.comments: dict[str, Comment] = {}
        self.edges: set[FollowEdge] = set()

    def __repr__(self) -> str:
        return (f"Corpus(posts={len(self.posts)}, comments={len(self.comments)}, "
                f"edges={len(self.edges)}, platform={self.platform_tag!r})")

    def is_quarantined(self, comment: Comment) -> bool:
        parent = self.posts.get(comment.parent_post_id)
        return parent is None or comment.created_at < parent.created_at

    def active_comments(self) -> Iterator[Comment]:
        for comment in self.comments.values():
            if not self.is_quarantined(comment):
                yield comment

    def quarantined_count(self) -> int:
        return sum(1 for c in self.comments.values() if self.is_quarantined(c))

    def merge(self, other: "Corpus") -> dict[str, int]:
        """Fold another corpus in; returns duplicate counts per record kind."""
        dups = {"posts": 0, "comments": 0, "edges": 0}
        for post_id, post in other.posts.items():
            if post_id in self.posts:
                dups["posts"] += 1
            else:
                self.posts[post_id] = post
        for comment_id, comment in other.comments.items():
            if comment_id in self.comments:
                dups["comments"] += 1
            else:
                self.comments[comment_id] = comment
        for edge in other.edges:
            if edge in self.edges:
                dups["edges"] += 1
            else:
                self.edges.add(edge)
        return dups
