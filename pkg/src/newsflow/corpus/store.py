"""Corpus persistence: a directory of newline-delimited files plus a manifest."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .._jsonio import dump_json, file_hash, load_json, config_hash
from ..errors import UsageError
from .ingest import IngestReport
from .model import Comment, Corpus, FollowEdge, Post, Window

__all__ = ["save_corpus", "load_corpus", "corpus_fingerprint"]

STORE_SCHEMA_VERSION = "1"


def _post_row(post: Post) -> dict:
    return {
        "post_id": post.post_id,
        "author_id": post.author_id,
        "created_at": post.created_at,
        "text": post.text,
        "hashtags": sorted(post.hashtags),
        "urls": list(post.urls),
        "likes": post.likes,
        "reshares": post.reshares,
        "replies": post.replies,
    }


def save_corpus(corpus: Corpus, out_dir,
                reports: Optional[list[IngestReport]] = None,
                config: Optional[dict] = None) -> Path:
    """Write the corpus as sorted JSONL files plus manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "posts.jsonl", "w", encoding="utf-8") as handle:
        for post_id in sorted(corpus.posts):
            handle.write(json.dumps(_post_row(corpus.posts[post_id]), sort_keys=True) + "\n")
    with open(out / "comments.jsonl", "w", encoding="utf-8") as handle:
        for comment_id in sorted(corpus.comments):
            c = corpus.comments[comment_id]
            row = {"comment_id": c.comment_id, "parent_post_id": c.parent_post_id,
                   "author_id": c.author_id, "created_at": c.created_at}
            handle.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "edges.jsonl", "w", encoding="utf-8") as handle:
        for edge in sorted(corpus.edges, key=lambda e: (e.follower_id, e.followee_id)):
            row = {"follower_id": edge.follower_id, "followee_id": edge.followee_id}
            handle.write(json.dumps(row, sort_keys=True) + "\n")

    cfg = dict(config or {})
    manifest = {
        "schema_version": STORE_SCHEMA_VERSION,
        "platform_tag": corpus.platform_tag,
        "window": corpus.window.to_dict(),
        "counts": {
            "posts": len(corpus.posts),
            "comments": len(corpus.comments),
            "edges": len(corpus.edges),
            "quarantined_comments": corpus.quarantined_count(),
        },
        "reports": [r.to_dict() for r in (reports or [])],
        "config": cfg,
        "config_hash": config_hash(cfg),
    }
    dump_json(manifest, out / "manifest.json")
    return out


def load_corpus(path) -> Corpus:
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise UsageError(f"not a corpus directory (no manifest.json): {root}")
    manifest = load_json(manifest_path)
    window = Window(**manifest["window"])
    corpus = Corpus(window=window, platform_tag=manifest.get("platform_tag", ""))

    posts_path = root / "posts.jsonl"
    if posts_path.exists():
        with open(posts_path, "r", encoding="utf-8") as handle:
            for line in handle:
                row = json.loads(line)
                post = Post(
                    post_id=row["post_id"],
                    author_id=row["author_id"],
                    created_at=row["created_at"],
                    text=row.get("text", ""),
                    hashtags=frozenset(row.get("hashtags", [])),
                    urls=tuple(row.get("urls", [])),
                    likes=row.get("likes", 0),
                    reshares=row.get("reshares", 0),
                    replies=row.get("replies"),
                )
                corpus.posts[post.post_id] = post
    comments_path = root / "comments.jsonl"
    if comments_path.exists():
        with open(comments_path, "r", encoding="utf-8") as handle:
            for line in handle:
                row = json.loads(line)
                comment = Comment(
                    comment_id=row["comment_id"],
                    parent_post_id=row["parent_post_id"],
                    author_id=row["author_id"],
                    created_at=row["created_at"],
                )
                corpus.comments[comment.comment_id] = comment
    edges_path = root / "edges.jsonl"
    if edges_path.exists():
        with open(edges_path, "r", encoding="utf-8") as handle:
            for line in handle:
                row = json.loads(line)
                corpus.edges.add(FollowEdge(follower_id=row["follower_id"],
                                            followee_id=row["followee_id"]))
    return corpus


def corpus_fingerprint(path) -> str:
    """Digest of the store manifest; embedded in derived artifacts."""
    return file_hash(Path(path) / "manifest.json")
