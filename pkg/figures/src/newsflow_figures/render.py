"""Figure rendering from report-bundle artifacts.

All rendering is deterministic for a given artifact and spec: the Agg
backend, fixed fonts, fixed DPI, and scrubbed date metadata keep repeated
renders byte-identical on one host. Inputs are never mutated; every numeric
transformation (log scaling, step expansion) happens in plot space only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import ARTIFACT_KINDS, SchemaMismatch, load_artifact

__all__ = ["FigureSpec", "render", "build_figure"]

GROUP_COLORS = {
    "overall": "#666666",
    "questionable": "#d62728",
    "reliable": "#1f77b4",
}
GROUP_LABELS = {
    "overall": "Overall",
    "questionable": "Questionable",
    "reliable": "Reliable",
}

_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "figure.max_open_warning": 0,
    "svg.hashsalt": "newsflow-figures",
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str                       # engagement | km | joint | timeseries
    input: Path
    out: Path
    dpi: int = 150
    log_axes: bool = True           # engagement CCDF axes
    show_bins: bool = False         # overlay bin grid on the joint contour
    colors: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ARTIFACT_KINDS:
            raise SchemaMismatch(
                f"unknown figure kind {self.kind!r}; expected one of "
                f"{sorted(ARTIFACT_KINDS)}"
            )

    def color(self, group: str) -> str:
        return self.colors.get(group, GROUP_COLORS.get(group, "#333333"))


def _annotate_empty(ax, label: str) -> None:
    ax.text(0.5, 0.5, f"no data: {label}", transform=ax.transAxes,
            ha="center", va="center", color="#999999")


def _day_ticks(ax, days: list[str], max_ticks: int = 6) -> None:
    step = max(1, len(days) // max_ticks)
    positions = list(range(0, len(days), step))
    ax.set_xticks(positions)
    ax.set_xticklabels([days[p] for p in positions], rotation=30, ha="right")


def _build_km(artifact: dict, spec: FigureSpec, fig) -> None:
    ax = fig.subplots()
    drew = False
    for group in ("questionable", "reliable"):
        curve = artifact["groups"].get(group)
        if not curve or not curve["event_times"]:
            _annotate_empty(ax, group)
            continue
        times = [0.0] + [float(t) for t in curve["event_times"]]
        surv = [1.0] + [float(s) for s in curve["survival"]]
        tail = max(times + [float(t) for t in curve.get("censoring_times", [])])
        ax.plot(times + [tail], surv + [surv[-1]], drawstyle="steps-post",
                color=spec.color(group), label=GROUP_LABELS[group], lw=1.5)
        censor_times = np.asarray(curve.get("censoring_times", []), dtype=float)
        if censor_times.size:
            # survival value in force at each censoring time
            idx = np.searchsorted(np.asarray(times), censor_times, side="right") - 1
            at = np.asarray(surv)[np.clip(idx, 0, len(surv) - 1)]
            ax.plot(censor_times, at, linestyle="none", marker="|",
                    color=spec.color(group), markersize=7)
        drew = True
    ax.set_xlabel("lifetime (days)")
    ax.set_ylabel("survival probability")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"Commenting lifetime ({artifact['unit']})")
    if drew:
        ax.legend(loc="upper right", frameon=False)


def _build_engagement(artifact: dict, spec: FigureSpec, fig) -> None:
    ax = fig.subplots()
    drew = False
    for group in ("overall", "questionable", "reliable"):
        points = artifact["ccdf"].get(group)
        if not points:
            continue
        xs = [p[0] for p in points]
        ps = [p[1] for p in points]
        ax.plot(xs, ps, marker=".", markersize=3, lw=0.8,
                color=spec.color(group), label=GROUP_LABELS[group])
        drew = True
    if not drew:
        _annotate_empty(ax, "all groups")
    if spec.log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(artifact["engagement"])
    ax.set_ylabel("P(X ≥ x)")
    ax.set_title(f"{artifact['engagement'].title()} per {artifact['unit']}")
    if drew:
        ax.legend(loc="lower left", frameon=False)

    inset = ax.inset_axes([0.08, 0.12, 0.38, 0.32])
    for group, series in artifact.get("cumulative", {}).items():
        if not series or not series["days"]:
            continue
        inset.plot(range(len(series["days"])), series["values"],
                   color=spec.color(group), lw=0.9)
    inset.set_title("cumulative", fontsize=7)
    inset.tick_params(labelsize=6)


def _build_joint(artifact: dict, spec: FigureSpec, fig) -> None:
    grid = np.asarray(artifact["grid"], dtype=float)
    bins = int(artifact["bins"])
    centers = (np.arange(bins) + 0.5) / bins
    gs = fig.add_gridspec(2, 2, width_ratios=(4, 1), height_ratios=(1, 4),
                          hspace=0.08, wspace=0.08)
    ax_top = fig.add_subplot(gs[0, 0])
    ax_main = fig.add_subplot(gs[1, 0])
    ax_right = fig.add_subplot(gs[1, 1])

    # grid[i, j]: mass at individual-leaning bin i, neighborhood bin j
    ax_main.contourf(centers, centers, grid.T, levels=12, cmap="magma")
    if spec.show_bins:
        for edge in np.arange(0, bins + 1) / bins:
            ax_main.axhline(edge, color="white", lw=0.1, alpha=0.3)
            ax_main.axvline(edge, color="white", lw=0.1, alpha=0.3)
    ax_main.set_xlim(0, 1)
    ax_main.set_ylim(0, 1)
    ax_main.set_xlabel("individual leaning")
    ax_main.set_ylabel("neighborhood leaning")

    ax_top.fill_between(centers, artifact["marginal_q"], color="#888888", alpha=0.6)
    ax_top.set_xlim(0, 1)
    ax_top.set_xticks([])
    ax_top.set_ylabel("P(x)", fontsize=7)
    ax_right.fill_betweenx(centers, artifact["marginal_qn"], color="#888888", alpha=0.6)
    ax_right.set_ylim(0, 1)
    ax_right.set_yticks([])
    ax_right.set_xlabel("$P^N$(x)", fontsize=7)

    correlation = artifact.get("correlation")
    if correlation:
        ax_main.text(0.03, 0.97, f"r = {correlation['r']:.3f} (n = {correlation['n']})",
                     transform=ax_main.transAxes, va="top", fontsize=8,
                     color="white")


def _build_timeseries(artifact: dict, spec: FigureSpec, fig) -> None:
    axes = fig.subplots(2, 2)
    days = artifact["days"]
    panels = [
        ("posts", "daily", "new posts per day"),
        ("new_users", "daily", "first-time posting users per day"),
        ("posts", "cumulative", "cumulative posts"),
        ("new_users", "cumulative", "cumulative new users"),
    ]
    for ax, (family, mode, title) in zip(axes.ravel(), panels):
        series = artifact[family][mode]
        for group in ("overall", "questionable", "reliable"):
            values = series.get(group)
            if values is None:
                continue
            ax.plot(range(len(days)), values, color=spec.color(group),
                    lw=0.9, label=GROUP_LABELS[group])
        ax.set_title(title, fontsize=8)
        _day_ticks(ax, days, max_ticks=4)
        ax.tick_params(labelsize=6)
    axes[0, 0].legend(loc="upper left", fontsize=6, frameon=False)
    fig.align_labels()


_BUILDERS = {
    "km": _build_km,
    "engagement": _build_engagement,
    "joint": _build_joint,
    "timeseries": _build_timeseries,
}

_SIZES = {
    "km": (5.0, 3.4),
    "engagement": (5.0, 3.8),
    "joint": (4.6, 4.6),
    "timeseries": (7.0, 5.0),
}


def build_figure(spec: FigureSpec) -> tuple["matplotlib.figure.Figure", dict]:
    """Load, validate, and draw; returns the figure plus the artifact."""
    artifact = load_artifact(spec.input, spec.kind)
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=_SIZES[spec.kind])
        _BUILDERS[spec.kind](artifact, spec, fig)
        config_hash = artifact.get("config_hash", "")
        fig.text(0.995, 0.005, f"cfg {config_hash[:12]}", ha="right",
                 fontsize=5, color="#bbbbbb")
    return fig, artifact


def render(spec: FigureSpec) -> Path:
    """Render one figure to spec.out; the format follows the suffix."""
    fig, artifact = build_figure(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    suffix = out.suffix.lower().lstrip(".") or "png"
    metadata = None
    if suffix == "png":
        metadata = {"newsflow-config-hash": artifact.get("config_hash", "")}
    elif suffix == "svg":
        metadata = {"Date": None}  # scrub timestamps for determinism
    elif suffix == "pdf":
        metadata = {"CreationDate": None}
    try:
        fig.savefig(out, dpi=spec.dpi, metadata=metadata,
                    facecolor="white", bbox_inches="tight")
    finally:
        plt.close(fig)
    return out
