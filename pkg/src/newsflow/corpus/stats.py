"""Corpus-level reductions: the links-only view and the breakdown table."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

from .domains import extract_domain
from .model import Corpus

__all__ = ["links_only", "BreakdownTable", "corpus_stats"]

logger = logging.getLogger(__name__)

ROWS = ("posts", "users", "likes", "reshares", "comments")
COLUMNS = ("overall", "categorized", "questionable", "reliable")


def links_only(corpus: Corpus) -> tuple[Corpus, dict]:
    """Sub-corpus of posts with at least one extractable domain.

    Comments of removed posts go with them; edges are kept. Idempotent.
    """
    sub = Corpus(window=corpus.window, platform_tag=corpus.platform_tag)
    for post_id, post in corpus.posts.items():
        if any(extract_domain(u) is not None for u in post.urls):
            sub.posts[post_id] = post
    for comment_id, comment in corpus.comments.items():
        if comment.parent_post_id in sub.posts:
            sub.comments[comment_id] = comment
    sub.edges = set(corpus.edges)
    report = {
        "posts_before": len(corpus.posts),
        "posts_after": len(sub.posts),
        "comments_before": len(corpus.comments),
        "comments_after": len(sub.comments),
    }
    if not sub.posts:
        logger.warning("links-only view is empty: no post carries an extractable domain")
    return sub, report


@dataclass(frozen=True)
class BreakdownTable:
    """Counts of posts/users/likes/reshares/comments per label column."""

    rows: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        return {
            "columns": list(COLUMNS),
            "rows": {row: dict(self.rows[row]) for row in ROWS},
        }

    def csv_lines(self) -> list[str]:
        lines = ["category," + ",".join(COLUMNS)]
        for row in ROWS:
            lines.append(row + "," + ",".join(str(self.rows[row][c]) for c in COLUMNS))
        return lines


def corpus_stats(corpus: Corpus,
                 labels: Optional[Mapping[str, str]] = None) -> BreakdownTable:
    """Breakdown table over the label columns.

    "categorized" covers posts labeled questionable or reliable; without a
    label mapping only the overall column is populated.
    """
    labels = labels or {}

    def column_of(post_id: str) -> Optional[str]:
        label = labels.get(post_id)
        return label if label in ("questionable", "reliable") else None

    counts = {row: {col: 0 for col in COLUMNS} for row in ROWS}
    users: dict[str, set] = {col: set() for col in COLUMNS}

    for post in corpus.posts.values():
        cols = ["overall"]
        label_col = column_of(post.post_id)
        if label_col:
            cols += ["categorized", label_col]
        for col in cols:
            counts["posts"][col] += 1
            counts["likes"][col] += post.likes
            counts["reshares"][col] += post.reshares
            users[col].add(post.author_id)

    for comment in corpus.active_comments():
        if comment.parent_post_id not in corpus.posts:
            continue
        cols = ["overall"]
        label_col = column_of(comment.parent_post_id)
        if label_col:
            cols += ["categorized", label_col]
        for col in cols:
            counts["comments"][col] += 1

    for col in COLUMNS:
        counts["users"][col] = len(users[col])
    return BreakdownTable(rows=counts)
