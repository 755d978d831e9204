"""Pipeline orchestration: classify, analyze, and emit the report bundle.

Every artifact is schema-versioned JSON (tables also get CSV mirrors) and
embeds both the corpus fingerprint and a hash of the analysis configuration,
so downstream consumers and tests share one byte-stable contract.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from ._jsonio import config_hash, dump_json
from .corpus.model import Corpus, day_of
from .corpus.stats import corpus_stats, links_only
from .corpus.store import corpus_fingerprint, load_corpus
from .errors import DegenerateInput, EmptyResult, FitFailure, UsageError
from .heavytail import DiscretePowerLaw, EngagementSample, ccdf, wald_compare
from .leaning import (FollowGraph, joint_density, leaning_correlation,
                      neighborhood_leaning, user_leaning)
from .sources import Label, label_posts, load_registry
from .survival import kaplan_meier, peto_peto, post_lifetimes, user_lifetimes

__all__ = ["RunConfig", "ReportBundle", "run_pipeline", "time_series",
           "SCHEMA_VERSION", "ENV_PREFIX"]

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
ENV_PREFIX = "NEWSFLOW_"

SECONDS_PER_DAY = 86_400

_GROUPS = ("questionable", "reliable")


@dataclass
class RunConfig:
    corpus: Path
    registry: Path
    out: Path
    seed: int = 0
    stages: dict = field(default_factory=lambda: {
        "engagement": True, "survival": True, "echo_chamber": True,
        "timeseries": True})
    engagement_kinds: tuple = ("likes", "reshares")
    engagement_units: tuple = ("post", "user")
    x_min: object = 1  # int or "auto"
    survival_units: tuple = ("post", "user")
    censoring: bool = True
    min_posts: int = 3
    bins: int = 50
    smoothing: Optional[float] = 0.05
    ng_reliable_strict: bool = True

    def validate(self) -> None:
        for name in ("corpus", "registry"):
            path = Path(getattr(self, name))
            if not path.exists():
                raise UsageError(f"config field {name!r}: path does not exist: {path}")

    def analysis_dict(self) -> dict:
        """Analysis-affecting parameters only; file locations stay out so the
        hash is stable across checkouts."""
        return {
            "seed": self.seed,
            "stages": dict(self.stages),
            "engagement_kinds": list(self.engagement_kinds),
            "engagement_units": list(self.engagement_units),
            "x_min": self.x_min,
            "survival_units": list(self.survival_units),
            "censoring": self.censoring,
            "min_posts": self.min_posts,
            "bins": self.bins,
            "smoothing": self.smoothing,
            "ng_reliable_strict": self.ng_reliable_strict,
        }

    @classmethod
    def from_toml(cls, path, environ: Optional[Mapping[str, str]] = None) -> "RunConfig":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(Path(path).read_text("utf-8"))
        environ = os.environ if environ is None else environ
        _apply_env_overrides(data, environ)

        missing = [k for k in ("corpus", "registry", "out") if k not in data]
        if missing:
            raise UsageError(f"run config is missing required fields: {missing}")
        base = Path(path).parent
        stages = {"engagement": True, "survival": True, "echo_chamber": True,
                  "timeseries": True}
        stages.update(data.get("stages", {}))
        engagement = data.get("engagement", {})
        survival = data.get("survival", {})
        echo = data.get("echo_chamber", {})
        sources_cfg = data.get("sources", {})
        smoothing = echo.get("smoothing", 0.05)
        if smoothing is False or smoothing == 0:
            smoothing = None
        return cls(
            corpus=base / data["corpus"],
            registry=base / data["registry"],
            out=base / data["out"],
            seed=int(data.get("seed", 0)),
            stages=stages,
            engagement_kinds=tuple(engagement.get("kinds", ("likes", "reshares"))),
            engagement_units=tuple(engagement.get("units", ("post", "user"))),
            x_min=engagement.get("x_min", 1),
            survival_units=tuple(survival.get("units", ("post", "user"))),
            censoring=bool(survival.get("censoring", True)),
            min_posts=int(echo.get("min_posts", 3)),
            bins=int(echo.get("bins", 50)),
            smoothing=None if smoothing is None else float(smoothing),
            ng_reliable_strict=bool(sources_cfg.get("ng_reliable_strict", True)),
        )


_TRUE_WORDS = ("1", "true", "yes", "on")
_FALSE_WORDS = ("0", "false", "no", "off")


def _coerce_like(current, raw: str):
    if isinstance(current, bool):
        if raw.lower() in _TRUE_WORDS:
            return True
        if raw.lower() in _FALSE_WORDS:
            return False
        raise UsageError(f"cannot parse boolean override {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, (list, tuple)):
        return [part.strip() for part in raw.split(",") if part.strip()]
    if current is None:
        # no file value to copy a type from: sniff one
        if raw.lower() in _TRUE_WORDS + _FALSE_WORDS:
            return raw.lower() in _TRUE_WORDS
        for cast in (int, float):
            try:
                return cast(raw)
            except ValueError:
                pass
        if "," in raw:
            return [part.strip() for part in raw.split(",") if part.strip()]
    return raw


def _apply_env_overrides(data: dict, environ: Mapping[str, str]) -> None:
    """NEWSFLOW_<KEY> overrides top-level keys, NEWSFLOW_<SECTION>_<KEY> nested
    ones (section and key upper-cased, echo_chamber -> ECHO_CHAMBER)."""
    sections = ("stages", "engagement", "survival", "echo_chamber", "sources")
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        hit = False
        for section in sections:
            prefix = section + "_"
            if rest.startswith(prefix):
                key = rest[len(prefix):]
                table = data.setdefault(section, {})
                table[key] = _coerce_like(table.get(key), raw)
                hit = True
                break
        if not hit:
            data[rest] = _coerce_like(data.get(rest), raw)


@dataclass
class ReportBundle:
    out_dir: Path
    artifacts: dict = field(default_factory=dict)  # name -> artifact dict
    errors: list = field(default_factory=list)     # (stage, message)

    @property
    def ok(self) -> bool:
        return not self.errors


def time_series(corpus: Corpus, labels: Optional[Mapping[str, str]] = None) -> dict:
    """Daily and cumulative counts of new posts and first-time posting users.

    A user is counted once per series, on the UTC day of their first retained
    post (for label series: their first post carrying that label). Days span
    the corpus window; cumulative values are running sums of the dailies.
    """
    labels = labels or {}
    start_day = corpus.window.start // SECONDS_PER_DAY
    end_day = corpus.window.end // SECONDS_PER_DAY
    days = [day_of(d * SECONDS_PER_DAY) for d in range(start_day, end_day + 1)]
    index = {day: i for i, day in enumerate(days)}

    series = ("overall",) + _GROUPS
    posts_daily = {name: [0] * len(days) for name in series}
    first_post_day: dict[str, dict[str, str]] = {name: {} for name in series}

    for post in corpus.posts.values():
        day = day_of(post.created_at)
        if day not in index:
            continue
        names = ["overall"]
        label = labels.get(post.post_id)
        if label in _GROUPS:
            names.append(str(label))
        for name in names:
            posts_daily[name][index[day]] += 1
            prev = first_post_day[name].get(post.author_id)
            if prev is None or day < prev:
                first_post_day[name][post.author_id] = day

    users_daily = {name: [0] * len(days) for name in series}
    for name in series:
        for day in first_post_day[name].values():
            users_daily[name][index[day]] += 1

    def cumulative(values: list[int]) -> list[int]:
        total, out = 0, []
        for v in values:
            total += v
            out.append(total)
        return out

    return {
        "days": days,
        "posts": {
            "daily": posts_daily,
            "cumulative": {name: cumulative(posts_daily[name]) for name in series},
        },
        "new_users": {
            "daily": users_daily,
            "cumulative": {name: cumulative(users_daily[name]) for name in series},
        },
    }


# ---------------------------------------------------------------------------
# stage implementations


def _engagement_values(corpus: Corpus, labels: Mapping[str, str],
                       kind: str, unit: str, label: str) -> list[int]:
    def post_ids():
        if label == "overall":
            return corpus.posts.keys()
        return [pid for pid, lab in labels.items()
                if str(lab) == label and pid in corpus.posts]

    def count_of(post) -> Optional[int]:
        value = getattr(post, kind)
        return value  # replies may be None: absent stays distinct from zero

    if unit == "post":
        values = [count_of(corpus.posts[pid]) for pid in post_ids()]
        return [v for v in values if v is not None]
    if unit == "user":
        per_user: dict[str, int] = {}
        for pid in post_ids():
            post = corpus.posts[pid]
            value = count_of(post)
            if value is None:
                continue
            per_user[post.author_id] = per_user.get(post.author_id, 0) + value
        return [per_user[u] for u in sorted(per_user)]
    raise UsageError(f"unknown engagement unit {unit!r}")


def _engagement_artifact(corpus: Corpus, labels: Mapping[str, str], kind: str,
                         unit: str, x_min, meta: dict) -> dict:
    fit_objs: dict[str, Optional[object]] = {}
    fits: dict[str, Optional[dict]] = {}
    samples: dict[str, Optional[EngagementSample]] = {}
    notes: dict[str, str] = {}
    for label in ("overall",) + _GROUPS:
        raw = _engagement_values(corpus, labels, kind, unit, label)
        fit_objs[label] = None
        if not raw:
            samples[label], fits[label] = None, None
            notes[label] = "no data"
            continue
        try:
            sample = EngagementSample.from_counts(raw, kind=kind, unit=unit, label=label)
            samples[label] = sample
            fit = DiscretePowerLaw(x_min=x_min).fit(sample.values).result()
            fit_objs[label] = fit
            fits[label] = {**fit.to_dict(), "n_zeros_excluded": sample.n_zeros}
        except (FitFailure, UsageError) as exc:
            samples[label] = None
            fits[label] = None
            notes[label] = str(exc)

    comparisons = []
    if fit_objs["questionable"] and fit_objs["reliable"]:
        wald = wald_compare(fit_objs["questionable"], fit_objs["reliable"])
        comparisons.append({"a": "questionable", "b": "reliable", **wald.to_dict()})

    ccdf_points = {
        label: ([[v, p] for v, p in ccdf(sample)] if sample is not None else None)
        for label, sample in samples.items()
    }

    # cumulative interactions by post creation day, for the figure insets
    daily: dict[str, dict[str, int]] = {name: {} for name in ("overall",) + _GROUPS}
    for pid, post in corpus.posts.items():
        value = getattr(post, kind)
        if value is None:
            continue
        day = day_of(post.created_at)
        names = ["overall"]
        label = labels.get(pid)
        if label in _GROUPS:
            names.append(str(label))
        for name in names:
            daily[name][day] = daily[name].get(day, 0) + value
    cumulative = {}
    for name, per_day in daily.items():
        days = sorted(per_day)
        total, values = 0, []
        for day in days:
            total += per_day[day]
            values.append(total)
        cumulative[name] = {"days": days, "values": values}

    return {
        **meta,
        "kind": "engagement",
        "engagement": kind,
        "unit": unit,
        "fits": fits,
        "fit_notes": notes,
        "comparisons": comparisons,
        "ccdf": ccdf_points,
        "cumulative": cumulative,
    }


def _survival_artifact(corpus: Corpus, labels: Mapping[str, str], unit: str,
                       censoring: bool, meta: dict) -> dict:
    records = (post_lifetimes if unit == "post" else user_lifetimes)(
        corpus, labels, censoring=censoring)
    groups = {}
    by_group = {g: [r for r in records if r.group == g] for g in _GROUPS}
    for group, rows in by_group.items():
        groups[group] = kaplan_meier(rows).to_dict() if rows else None
    peto = None
    warning = None
    if by_group["questionable"] and by_group["reliable"]:
        result = peto_peto(by_group["questionable"], by_group["reliable"])
        peto = result.to_dict()
        warning = result.warning
    else:
        warning = "a group has no lifetime records"
    return {
        **meta,
        "kind": "survival",
        "unit": unit,
        "censoring": censoring,
        "groups": groups,
        "peto_peto": peto,
        "warning": warning,
    }


def _echo_chamber_artifact(corpus: Corpus, labels: Mapping[str, str],
                           min_posts: int, bins: int, smoothing: Optional[float],
                           meta: dict) -> dict:
    pairs = []
    for pid, label in labels.items():
        post = corpus.posts.get(pid)
        if post is None or str(label) not in _GROUPS:
            continue
        pairs.append((post.author_id, 1 if str(label) == "questionable" else 0))
    leanings = user_leaning(pairs)
    graph = FollowGraph((e.follower_id, e.followee_id) for e in corpus.edges)
    neighborhood = neighborhood_leaning(graph, leanings)
    correlation = None
    corr_note = None
    try:
        r, n = leaning_correlation(leanings, neighborhood)
        correlation = {"r": r, "n": n}
    except DegenerateInput as exc:
        corr_note = str(exc)
    density = joint_density(leanings, neighborhood, min_posts=min_posts,
                            bins=bins, smoothing=smoothing)
    return {
        **meta,
        "kind": "joint_leaning",
        "min_posts": min_posts,
        "bins": bins,
        "smoothing": smoothing,
        "n_leaning_users": len(leanings),
        "n_neighborhood_users": len(neighborhood),
        "correlation": correlation,
        "correlation_note": corr_note,
        **density.to_dict(),
    }


def run_pipeline(config: RunConfig) -> ReportBundle:
    """Execute classify -> analyses -> time series, writing every artifact.

    Independent analysis stages run concurrently once labels exist; a stage
    failure is recorded and halts only its dependents. The bundle lists every
    error; callers should exit nonzero when ``bundle.ok`` is false.
    """
    config.validate()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    bundle = ReportBundle(out_dir=out)

    analysis = config.analysis_dict()
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash(analysis),
        "corpus_hash": corpus_fingerprint(config.corpus),
    }

    corpus = load_corpus(config.corpus)

    labels: dict[str, Label] = {}
    coverage: dict = {}
    classify_ok = False
    try:
        registry = load_registry(config.registry,
                                 ng_reliable_strict=config.ng_reliable_strict)
        linked, links_report = links_only(corpus)
        labels, coverage = label_posts(linked, registry)
        artifact = {
            **meta,
            "kind": "labels",
            "labels": {pid: str(lab) for pid, lab in sorted(labels.items())},
            "coverage": coverage,
            "links_only": links_report,
            "registry_counts": registry.counts(),
        }
        dump_json(artifact, out / "labels.json")
        bundle.artifacts["labels"] = artifact
        classify_ok = True
    except Exception as exc:  # noqa: BLE001 - surfaced with the stage name
        bundle.errors.append(("classify", str(exc)))
        logger.error("stage classify failed: %s", exc)

    breakdown = corpus_stats(corpus, labels if classify_ok else None)
    breakdown_artifact = {**meta, "kind": "breakdown", **breakdown.to_dict()}
    dump_json(breakdown_artifact, out / "breakdown.json")
    (out / "breakdown.csv").write_text("\n".join(breakdown.csv_lines()) + "\n",
                                       encoding="utf-8")
    bundle.artifacts["breakdown"] = breakdown_artifact

    jobs = []
    if classify_ok:
        if config.stages.get("engagement", True):
            for kind in config.engagement_kinds:
                for unit in config.engagement_units:
                    jobs.append((f"engagement_{kind}_{unit}", _engagement_artifact,
                                 (corpus, labels, kind, unit, config.x_min, meta)))
        if config.stages.get("survival", True):
            for unit in config.survival_units:
                jobs.append((f"survival_{unit}", _survival_artifact,
                             (corpus, labels, unit, config.censoring, meta)))
        if config.stages.get("echo_chamber", True):
            jobs.append(("joint", _echo_chamber_artifact,
                         (corpus, labels, config.min_posts, config.bins,
                          config.smoothing, meta)))
        if config.stages.get("timeseries", True):
            jobs.append(("timeseries",
                         lambda c, l, m: {**m, "kind": "timeseries", **time_series(c, l)},
                         (corpus, labels, meta)))
    else:
        for name in ("engagement", "survival", "echo_chamber", "timeseries"):
            if config.stages.get(name, True):
                bundle.errors.append((name, "skipped: classify failed"))

    if jobs:
        with ThreadPoolExecutor(max_workers=min(4, len(jobs))) as pool:
            futures = {name: pool.submit(fn, *args) for name, fn, args in jobs}
        for name, _, _ in jobs:
            try:
                artifact = futures[name].result()
            except Exception as exc:  # noqa: BLE001
                bundle.errors.append((name, str(exc)))
                logger.error("stage %s failed: %s", name, exc)
                continue
            dump_json(artifact, out / f"{name}.json")
            bundle.artifacts[name] = artifact

    index = {
        **meta,
        "kind": "bundle",
        "config": analysis,
        "artifacts": {name: f"{name}.json" for name in sorted(bundle.artifacts)},
        "errors": [{"stage": stage, "error": message}
                   for stage, message in bundle.errors],
    }
    dump_json(index, out / "bundle.json")
    bundle.artifacts["bundle"] = index
    return bundle
