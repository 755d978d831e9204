"""Synthetic corpus and follow-graph generator with a planted-truth manifest.

Every quantity the generator plants (per-post labels, per-user leanings,
commenting lifetimes, engagement exponents, counts) is recorded in a
machine-readable manifest so analysis results can be checked against known
ground truth. Generation is single-threaded and all randomness is derived
from the raw uniform stream of one seeded PCG64 generator, which keeps
exports byte-identical across runs.

Comment streams are Poisson processes truncated at the window end: the
exponential inter-comment gaps make lifetime distributions analytically
known, and the truncation produces genuinely right-censored lifetimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Mapping, Optional, Sequence

import json

import numpy as np

from ._jsonio import config_hash, dump_json
from .corpus.model import Window, day_of, format_timestamp
from .errors import UsageError
from .heavytail import PowerLawInverter

__all__ = [
    "SynthConfig",
    "generate",
    "generate_follow_graph",
    "rewire_edges",
    "draw_cluster_leanings",
    "load_manifest",
    "EXPORT_FIELD_MAP_TOML",
]

SECONDS_PER_DAY = 86_400

# Export files mimic a platform dump; this map is written next to them so
# ingestion exercises the field-translation layer.
EXPORT_FIELD_MAP_TOML = """\
[posts]
post_id = "id"
author_id = "account.id"
created_at = "created_at"
text = "content"
hashtags = "tags"
urls = "links"
likes = "favourites"
reshares = "reblogs"
replies = "replies"

[comments]
comment_id = "id"
parent_post_id = "in_reply_to"
author_id = "account.id"
created_at = "created_at"

[edges]
follower_id = "source"
followee_id = "target"
"""


# ---------------------------------------------------------------------------
# deterministic draws built on the raw uniform stream

def _randint(rng, n: int) -> int:
    return int(rng.random() * n)


def _shuffled(rng, n: int) -> list[int]:
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = _randint(rng, i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def _normal(rng) -> float:
    u1 = 1.0 - rng.random()
    u2 = rng.random()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def _exponential(rng, rate: float) -> float:
    return -math.log1p(-rng.random()) / rate


def _weighted_index(rng, cumulative: Sequence[float]) -> int:
    u = rng.random()
    for i, c in enumerate(cumulative):
        if u < c:
            return i
    return len(cumulative) - 1


# ---------------------------------------------------------------------------


@dataclass
class SynthConfig:
    n_users: int = 200
    n_posts: int = 2000
    seed: int = 0
    window_start: str = "2020-01-01"
    window_end: str = "2020-09-30"
    platform_tag: str = "synthetic"
    hashtags: tuple = ("covid",)
    questionable_share: float = 0.5
    cluster_centers: tuple = ()  # ((q, weight), ...); empty = one cluster at questionable_share
    cluster_sd: float = 0.05
    engagement_alpha: dict = field(default_factory=lambda: {
        "likes": 1.5, "reshares": 1.8, "replies": 2.2})
    zero_engagement_rate: float = 0.1
    replies_present: bool = True
    lifetime_hazards: dict = field(default_factory=lambda: {
        "questionable": 0.06, "reliable": 0.03, "unknown": 0.04})
    link_rate: float = 1.0
    unregistered_rate: float = 0.0
    malformed_rate: float = 0.0
    offtopic_rate: float = 0.0
    n_domains: int = 40
    n_unknown_domains: int = 2
    mean_degree: float = 8.0
    homophily: float = 0.5
    homophily_window: float = 0.2

    def effective_centers(self) -> tuple[tuple[float, float], ...]:
        if self.cluster_centers:
            return tuple((float(q), float(w)) for q, w in self.cluster_centers)
        return ((float(self.questionable_share), 1.0),)

    def validate(self) -> None:
        if self.n_users < 1:
            raise UsageError("n_users must be >= 1")
        if self.n_posts < 1:
            raise UsageError("n_posts must be >= 1")
        for name in ("questionable_share", "link_rate", "unregistered_rate",
                     "malformed_rate", "offtopic_rate", "zero_engagement_rate",
                     "homophily", "homophily_window"):
            v = getattr(self, name)
            if not 0.0 <= float(v) <= 1.0:
                raise UsageError(f"{name} must lie in [0, 1], got {v!r}")
        centers = self.effective_centers()
        weight = math.fsum(w for _, w in centers)
        if abs(weight - 1.0) > 1e-9:
            raise UsageError(f"cluster weights must sum to 1, got {weight}")
        if any(not 0.0 <= q <= 1.0 for q, _ in centers):
            raise UsageError("cluster centers must lie in [0, 1]")
        if self.questionable_share == 0.0 and any(q > 0.0 for q, _ in centers):
            raise UsageError("no questionable outlets exist but cluster leanings are > 0")
        if self.questionable_share == 1.0 and any(q < 1.0 for q, _ in centers):
            raise UsageError("no reliable outlets exist but cluster leanings are < 1")
        for kind, alpha in self.engagement_alpha.items():
            if not float(alpha) > 1.0:
                raise UsageError(f"engagement_alpha[{kind}] must be > 1")
        for group, hazard in self.lifetime_hazards.items():
            if not float(hazard) > 0.0:
                raise UsageError(f"lifetime_hazards[{group}] must be > 0")
        if not self.hashtags:
            raise UsageError("at least one hashtag is required")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["hashtags"] = list(self.hashtags)
        data["cluster_centers"] = [list(c) for c in self.cluster_centers]
        return data

    @classmethod
    def from_toml(cls, path) -> "SynthConfig":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(Path(path).read_text("utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown synth config keys: {sorted(unknown)}")
        if "hashtags" in data:
            data["hashtags"] = tuple(data["hashtags"])
        if "cluster_centers" in data:
            data["cluster_centers"] = tuple(tuple(c) for c in data["cluster_centers"])
        return cls(**data)


def draw_cluster_leanings(centers: Sequence[tuple[float, float]], n: int, rng,
                          sd: float = 0.05) -> list[float]:
    """Per-user leanings from a clipped Gaussian mixture over [0, 1]."""
    cumulative = list(np.cumsum([w for _, w in centers]))
    out = []
    for _ in range(n):
        center = centers[_weighted_index(rng, cumulative)][0]
        q = center + sd * _normal(rng) if sd > 0 else center
        out.append(min(1.0, max(0.0, q)))
    return out


def generate_follow_graph(user_ids: Sequence[str], homophily: float,
                          leanings: Mapping[str, float], mean_degree: float,
                          seed: Optional[int] = None, rng=None,
                          window: float = 0.2) -> list[tuple[str, str]]:
    """Directed follow edges with tunable leaning homophily.

    Each user draws a Poisson(mean_degree) number of followees; each followee
    is sampled from the users within ``window`` of the follower's leaning
    with probability ``homophily`` and uniformly otherwise. Self-loops are
    forbidden and duplicates collapse. A user whose near pool is empty falls
    back to a uniform pick.
    """
    if len(user_ids) < 2:
        raise UsageError("need at least 2 users for a follow graph")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(seed or 0))
    users = list(user_ids)
    n = len(users)
    q = np.array([leanings[u] for u in users], dtype=np.float64)
    order = np.argsort(q, kind="stable")
    sorted_q = q[order]

    p_exit = math.exp(-mean_degree)
    edges: list[tuple[str, str]] = []
    for i, user in enumerate(users):
        # Poisson degree via Knuth's product-of-uniforms
        degree, prod = 0, rng.random()
        while prod >= p_exit:
            degree += 1
            prod *= rng.random()
        lo = int(np.searchsorted(sorted_q, q[i] - window, side="right"))
        hi = int(np.searchsorted(sorted_q, q[i] + window, side="left"))
        near = [int(order[j]) for j in range(lo, hi) if int(order[j]) != i]
        chosen: set[int] = set()
        for _ in range(degree):
            if rng.random() < homophily and near:
                j = near[_randint(rng, len(near))]
            else:
                j = _randint(rng, n - 1)
                if j >= i:
                    j += 1
            chosen.add(j)
        edges.extend((user, users[j]) for j in sorted(chosen))
    return edges


def rewire_edges(edges: Sequence[tuple[str, str]], seed: int,
                 max_passes: int = 200) -> list[tuple[str, str]]:
    """Degree-preserving null model: shuffle the followee column.

    Out-degrees are preserved exactly and the in-degree multiset up to the
    (rare) conflicting edges that cannot be placed and are dropped.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    sources = [a for a, _ in edges]
    targets = [b for _, b in edges]
    n = len(targets)
    for i in range(n - 1, 0, -1):
        j = _randint(rng, i + 1)
        targets[i], targets[j] = targets[j], targets[i]
    for _ in range(max_passes):
        seen: set[tuple[str, str]] = set()
        bad = []
        for i in range(n):
            pair = (sources[i], targets[i])
            if sources[i] == targets[i] or pair in seen:
                bad.append(i)
            else:
                seen.add(pair)
        if not bad:
            break
        for i in bad:
            j = _randint(rng, n)
            targets[i], targets[j] = targets[j], targets[i]
    seen = set()
    out = []
    for a, b in zip(sources, targets):
        if a != b and (a, b) not in seen:
            out.append((a, b))
            seen.add((a, b))
    return out


# ---------------------------------------------------------------------------


def _registry_rows(config: SynthConfig) -> tuple[list[dict], list[str], list[str], list[str]]:
    """Synthetic outlet registry; every 5th outlet is an NG row for variety."""
    n_q = round(config.questionable_share * config.n_domains)
    questionable, reliable, rows = [], [], []
    for i in range(config.n_domains):
        is_q = i < n_q
        domain = f"{'qnews' if is_q else 'rnews'}{i:03d}.example"
        (questionable if is_q else reliable).append(domain)
        if i % 5 == 4:
            rows.append({"domain": domain, "provider": "NG", "mbfc_bias": "",
                         "mbfc_bias_score": "", "ng_score": "30" if is_q else "85",
                         "ng_special": ""})
        else:
            bias = "Questionable" if is_q else "Least-Biased"
            score = f"{(7.5 if is_q else 2.5):.1f}"
            rows.append({"domain": domain, "provider": "MBFC", "mbfc_bias": bias,
                         "mbfc_bias_score": score, "ng_score": "", "ng_special": ""})
    unknown = []
    for i in range(config.n_unknown_domains):
        domain = f"humor{i:03d}.example"
        unknown.append(domain)
        rows.append({"domain": domain, "provider": "NG", "mbfc_bias": "",
                     "mbfc_bias_score": "", "ng_score": "", "ng_special": "humor"})
    return rows, questionable, reliable, unknown


def generate(config: SynthConfig, out_dir) -> dict:
    """Write export files plus manifest.json; returns the manifest."""
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    window = Window.from_dates(config.window_start, config.window_end)

    users = [f"u{i:05d}" for i in range(config.n_users)]
    centers = config.effective_centers()
    leanings = draw_cluster_leanings(centers, config.n_users, rng, sd=config.cluster_sd)
    leaning_of = dict(zip(users, leanings))

    registry_rows, q_domains, r_domains, unknown_domains = _registry_rows(config)
    with open(out / "registry.csv", "w", encoding="utf-8") as handle:
        handle.write("domain,provider,mbfc_bias,mbfc_bias_score,ng_score,ng_special\n")
        for row in registry_rows:
            handle.write(",".join(row[k] for k in (
                "domain", "provider", "mbfc_bias", "mbfc_bias_score",
                "ng_score", "ng_special")) + "\n")

    n_posts = config.n_posts
    n_malformed = round(config.malformed_rate * n_posts)
    order = _shuffled(rng, n_posts)
    malformed_positions = set(order[:n_malformed])
    valid_positions = [i for i in range(n_posts) if i not in malformed_positions]
    n_valid = len(valid_positions)

    flags = _shuffled(rng, n_valid)
    n_offtopic = round(config.offtopic_rate * n_valid)
    offtopic = {valid_positions[i] for i in flags[:n_offtopic]}
    retained_positions = [p for p in valid_positions if p not in offtopic]

    link_order = _shuffled(rng, len(retained_positions))
    n_linked = round(config.link_rate * len(retained_positions))
    linked = {retained_positions[i] for i in link_order[:n_linked]}

    # engagement draws: per kind, one pass of zero-gates then one of values,
    # so the draw count (and the uniform stream) never depends on outcomes
    kinds = ["likes", "reshares"] + (["replies"] if config.replies_present else [])
    by_kind = {}
    for kind in kinds:
        inverter = PowerLawInverter(float(config.engagement_alpha[kind]), 1,
                                    cache_size=200_000)
        gates = rng.random(n_valid)
        values = inverter.invert(rng.random(n_valid))
        values = np.minimum(values, 2.0 ** 62)  # keep export counts in int64
        by_kind[kind] = np.where(gates < config.zero_engagement_rate,
                                 0, values.astype(np.int64))
    engagement: dict[int, dict[str, int]] = {
        position: {kind: int(by_kind[kind][idx]) for kind in kinds}
        for idx, position in enumerate(valid_positions)
    }

    # per-post placement: author, time, label, domain
    span = window.end - window.start
    posts: dict[int, dict] = {}
    per_post_manifest: dict[str, dict] = {}
    label_counts = {"questionable": 0, "reliable": 0, "unknown": 0}
    for position in valid_positions:
        post_id = f"p{position:06d}"
        author = users[_randint(rng, config.n_users)]
        created = window.start + _randint(rng, span + 1)
        if position in offtopic:
            tag, label, url = "weather", None, None
        else:
            tag = config.hashtags[_randint(rng, len(config.hashtags))]
            if position not in linked:
                label, url = None, None
            elif config.unregistered_rate and rng.random() < config.unregistered_rate:
                label = "unknown"
                url = f"https://blog{_randint(rng, 50):03d}.example/{post_id}"
            else:
                questionable = rng.random() < leaning_of[author]
                pool = q_domains if questionable else r_domains
                if not pool:
                    questionable = not questionable
                    pool = q_domains if questionable else r_domains
                label = "questionable" if questionable else "reliable"
                url = f"https://{pool[_randint(rng, len(pool))]}/{post_id}"
        posts[position] = {
            "post_id": post_id, "author": author, "created": created,
            "tag": tag, "url": url, "label": label,
            "engagement": engagement[position],
            "offtopic": position in offtopic,
        }
        if position not in offtopic:
            row = {"author": author, "label": label, "created_day": day_of(created),
                   "likes": engagement[position]["likes"],
                   "reshares": engagement[position]["reshares"]}
            per_post_manifest[post_id] = row
            if label is not None:
                label_counts[label] += 1

    # Poisson comment streams per retained post, truncated at window end
    comments: list[dict] = []
    censor_cutoff = window.end - SECONDS_PER_DAY
    seq = 0
    for position in retained_positions:
        post = posts[position]
        group = post["label"] or "unknown"
        hazard = float(config.lifetime_hazards.get(group,
                       config.lifetime_hazards.get("unknown", 0.04)))
        t = float(post["created"])
        times: list[int] = []
        while True:
            t += _exponential(rng, hazard) * SECONDS_PER_DAY
            if t > window.end:
                break
            times.append(int(t))
        for ts in times:
            commenter = users[_randint(rng, config.n_users)]
            comments.append({"id": f"c{seq:07d}", "in_reply_to": post["post_id"],
                             "account": {"id": commenter}, "created_at": ts})
            seq += 1
        row = per_post_manifest[post["post_id"]]
        row["n_comments"] = len(times)
        if times:
            row["duration_days"] = (times[-1] - times[0]) // SECONDS_PER_DAY
            row["observed"] = times[-1] < censor_cutoff
        else:
            row["duration_days"] = None
            row["observed"] = None

    edges = generate_follow_graph(users, config.homophily, leaning_of,
                                  config.mean_degree, rng=rng,
                                  window=config.homophily_window)

    _write_exports(out, config, posts, comments, edges, malformed_positions)

    manifest = _build_manifest(config, window, users, leaning_of, posts, comments,
                               per_post_manifest, label_counts, edges,
                               n_valid, n_malformed, n_offtopic, n_linked,
                               censor_cutoff)
    dump_json(manifest, out / "manifest.json")
    (out / "fieldmap.toml").write_text(EXPORT_FIELD_MAP_TOML, encoding="utf-8")
    return manifest


def _malformed_line(position: int, kind_index: int) -> str:
    kind = kind_index % 3
    if kind == 0:
        return '{"id": "m%d", "content": "#covid broken' % position
    if kind == 1:
        return json.dumps({"content": f"#covid orphan record {position}"})
    return json.dumps({"id": f"m{position}", "account": {"id": "u00000"},
                       "created_at": "not-a-timestamp", "content": "#covid",
                       "tags": ["covid"]})


def _write_exports(out: Path, config: SynthConfig, posts: dict, comments: list,
                   edges: list, malformed_positions: set) -> None:
    malformed_seq = 0
    with open(out / "posts.jsonl", "w", encoding="utf-8") as handle:
        for position in range(config.n_posts):
            if position in malformed_positions:
                handle.write(_malformed_line(position, malformed_seq) + "\n")
                malformed_seq += 1
                continue
            post = posts[position]
            row = {
                "id": post["post_id"],
                "account": {"id": post["author"]},
                "created_at": format_timestamp(post["created"]),
                "content": f"synthetic post {post['post_id']} #{post['tag']}",
                "tags": [post["tag"]],
                "links": [post["url"]] if post["url"] else [],
                "favourites": post["engagement"]["likes"],
                "reblogs": post["engagement"]["reshares"],
            }
            if config.replies_present:
                row["replies"] = post["engagement"]["replies"]
            handle.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "comments.jsonl", "w", encoding="utf-8") as handle:
        for comment in comments:
            row = dict(comment)
            row["created_at"] = format_timestamp(row["created_at"])
            handle.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "edges.jsonl", "w", encoding="utf-8") as handle:
        for a, b in edges:
            handle.write(json.dumps({"source": a, "target": b}, sort_keys=True) + "\n")


def _build_manifest(config: SynthConfig, window: Window, users: list,
                    leaning_of: dict, posts: dict, comments: list,
                    per_post: dict, label_counts: dict, edges: list,
                    n_valid: int, n_malformed: int, n_offtopic: int,
                    n_linked: int, censor_cutoff: int) -> dict:
    # per-user leaning over categorized posts, computed by counting
    per_user: dict[str, dict] = {}
    for row in per_post.values():
        if row["label"] in ("questionable", "reliable"):
            entry = per_user.setdefault(row["author"], {"questionable": 0, "k": 0})
            entry["k"] += 1
            entry["questionable"] += row["label"] == "questionable"
    user_leaning = {
        user: {"q": entry["questionable"] / entry["k"], "k": entry["k"]}
        for user, entry in sorted(per_user.items())
    }

    # breakdown table over retained posts (matches corpus_stats columns)
    rows = {r: {c: 0 for c in ("overall", "categorized", "questionable", "reliable")}
            for r in ("posts", "users", "likes", "reshares", "comments")}
    col_users: dict[str, set] = {c: set() for c in rows["posts"]}
    for post_id, row in per_post.items():
        cols = ["overall"]
        if row["label"] in ("questionable", "reliable"):
            cols += ["categorized", row["label"]]
        for col in cols:
            rows["posts"][col] += 1
            rows["likes"][col] += row["likes"]
            rows["reshares"][col] += row["reshares"]
            rows["comments"][col] += row.get("n_comments", 0)
            col_users[col].add(row["author"])
    for col, seen in col_users.items():
        rows["users"][col] = len(seen)

    # user lifetimes per (commenter, parent label group)
    spans: dict[tuple[str, str], tuple[int, int]] = {}
    for comment in comments:
        label = per_post[comment["in_reply_to"]]["label"] or "unknown"
        key = (comment["account"]["id"], label)
        ts = comment["created_at"]
        span = spans.get(key)
        spans[key] = (ts, ts) if span is None else (min(span[0], ts), max(span[1], ts))
    user_lifetimes = [
        {"user": user, "group": group,
         "duration_days": (last - first) // SECONDS_PER_DAY,
         "observed": last < censor_cutoff}
        for (user, group), (first, last) in sorted(spans.items())
    ]

    # daily time series over retained posts
    posts_daily: dict[str, dict[str, int]] = {"overall": {}, "questionable": {}, "reliable": {}}
    first_day_by_user: dict[str, dict[str, str]] = {"overall": {}, "questionable": {}, "reliable": {}}
    for post_id in sorted(per_post):
        row = per_post[post_id]
        day = row["created_day"]
        series = ["overall"] + ([row["label"]] if row["label"] in ("questionable", "reliable") else [])
        for name in series:
            posts_daily[name][day] = posts_daily[name].get(day, 0) + 1
            prev = first_day_by_user[name].get(row["author"])
            if prev is None or day < prev:
                first_day_by_user[name][row["author"]] = day
    new_users_daily = {}
    for name, firsts in first_day_by_user.items():
        daily: dict[str, int] = {}
        for day in firsts.values():
            daily[day] = daily.get(day, 0) + 1
        new_users_daily[name] = dict(sorted(daily.items()))

    cfg = config.to_dict()
    return {
        "schema_version": "1",
        "config": cfg,
        "config_hash": config_hash(cfg),
        "window": window.to_dict(),
        "counts": {
            "post_lines": config.n_posts,
            "valid_posts": n_valid,
            "malformed": n_malformed,
            "malformed_by_reason": {
                "json": (n_malformed + 2) // 3,
                "missing_field": (n_malformed + 1) // 3,
                "bad_timestamp": n_malformed // 3,
            },
            "offtopic": n_offtopic,
            "retained_posts": len(per_post),
            "with_links": n_linked,
            "labels": dict(label_counts),
            "comments": len(comments),
            "edges": len(edges),
            "users": len(users),
        },
        "breakdown": rows,
        "per_post": {k: per_post[k] for k in sorted(per_post)},
        "user_leaning": user_leaning,
        "user_lifetimes": user_lifetimes,
        "posts_daily": {k: dict(sorted(v.items())) for k, v in posts_daily.items()},
        "new_users_daily": new_users_daily,
    }


def load_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
