"""User leaning, neighborhood leaning over follow graphs, and the joint
leaning density used to quantify echo chambers.

A user's leaning q is the fraction of their categorized posts that link to
questionable outlets (0 = all reliable, 1 = all questionable). The
neighborhood leaning of a user is the mean leaning of the users they follow,
restricted to followees that have a leaning of their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np
from scipy.ndimage import gaussian_filter
from sklearn.base import BaseEstimator

from ._validation import check_fraction, check_positive_int
from .errors import DegenerateInput, EmptyResult, UsageError

__all__ = [
    "LeaningVector",
    "FollowGraph",
    "JointLeaningDensity",
    "LeaningDensity",
    "user_leaning",
    "neighborhood_leaning",
    "joint_density",
    "leaning_correlation",
]


@dataclass(frozen=True)
class LeaningVector:
    """Per-user leaning q and the number k of categorized posts behind it."""

    q: dict[str, float]
    k: dict[str, int]

    def __post_init__(self):
        if set(self.q) != set(self.k):
            raise UsageError("q and k must cover the same users")

    def __len__(self) -> int:
        return len(self.q)

    def users(self) -> list[str]:
        return list(self.q)

    def flipped(self) -> "LeaningVector":
        """Leanings after swapping every post label, recomputed from the
        integer counts so that q_flipped = (k - q*k) / k exactly."""
        flipped_q = {}
        for user, qv in self.q.items():
            k = self.k[user]
            s = round(qv * k)
            flipped_q[user] = (k - s) / k
        return LeaningVector(q=flipped_q, k=dict(self.k))


class FollowGraph:
    """Directed follow adjacency: an edge (i, j) means i follows j.

    Self-loops are discarded and duplicate edges collapsed on construction.
    """

    def __init__(self, edges: Iterable[tuple[str, str]]):
        adjacency: dict[str, set[str]] = {}
        dropped = 0
        for follower, followee in edges:
            if follower == followee:
                dropped += 1
                continue
            adjacency.setdefault(follower, set()).add(followee)
        self._adjacency = {u: tuple(sorted(vs)) for u, vs in adjacency.items()}
        self.n_self_loops_dropped = dropped

    def followers(self) -> list[str]:
        return list(self._adjacency)

    def followees(self, user: str) -> tuple[str, ...]:
        return self._adjacency.get(user, ())

    def out_degree(self, user: str) -> int:
        return len(self._adjacency.get(user, ()))

    def n_edges(self) -> int:
        return sum(len(v) for v in self._adjacency.values())

    def edge_list(self) -> list[tuple[str, str]]:
        return [(u, v) for u, vs in self._adjacency.items() for v in vs]


def user_leaning(post_labels: Iterable[tuple[str, int]]) -> LeaningVector:
    """Per-author mean of binary post labels (questionable=1, reliable=0).

    ``post_labels`` yields (author_id, label) pairs; authors without any
    categorized post simply never appear.
    """
    counts: dict[str, int] = {}
    questionable: dict[str, int] = {}
    for author, label in post_labels:
        if label not in (0, 1):
            raise UsageError(f"post label must be 0 or 1, got {label!r}")
        counts[author] = counts.get(author, 0) + 1
        questionable[author] = questionable.get(author, 0) + label
    q = {author: questionable[author] / counts[author] for author in counts}
    return LeaningVector(q=q, k=counts)


def neighborhood_leaning(graph: FollowGraph,
                         leanings: LeaningVector | Mapping[str, float]) -> dict[str, float]:
    """Mean leaning of each user's followees.

    Followees without a leaning are excluded from both the sum and the
    denominator; users left with no leaned followee are omitted.
    """
    q = leanings.q if isinstance(leanings, LeaningVector) else dict(leanings)
    result: dict[str, float] = {}
    for user in graph.followers():
        values = [q[v] for v in graph.followees(user) if v in q]
        if values:
            result[user] = math.fsum(values) / len(values)
    return result


def leaning_correlation(leanings: LeaningVector | Mapping[str, float],
                        neighborhood: Mapping[str, float]) -> tuple[float, int]:
    """Pearson correlation between q and neighborhood leaning, with n."""
    q = leanings.q if isinstance(leanings, LeaningVector) else dict(leanings)
    users = sorted(set(q) & set(neighborhood))
    n = len(users)
    if n < 2:
        raise DegenerateInput("need >= 2 users with both leanings")
    x = np.array([q[u] for u in users])
    y = np.array([neighborhood[u] for u in users])
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("correlation undefined: zero variance on an axis")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return r, n


@dataclass(frozen=True)
class JointLeaningDensity:
    """Probability mass grid over (q, neighborhood q) with its marginals.

    grid[i, j] is the mass for q in bin i and neighborhood leaning in bin j;
    the grid sums to one and each marginal is the corresponding axis sum.
    """

    grid: np.ndarray
    marginal_q: np.ndarray
    marginal_qn: np.ndarray
    n_users: int
    bins: int
    smoothing: Optional[float]

    def mode_cell(self) -> tuple[int, int]:
        idx = int(np.argmax(self.grid))
        return idx // self.bins, idx % self.bins

    def to_dict(self) -> dict:
        return {
            "grid": [[float(v) for v in row] for row in self.grid],
            "marginal_q": [float(v) for v in self.marginal_q],
            "marginal_qn": [float(v) for v in self.marginal_qn],
            "n_users": self.n_users,
            "bins": self.bins,
            "smoothing": self.smoothing,
        }


class LeaningDensity(BaseEstimator):
    """Binned joint density of individual vs neighborhood leaning.

    Users with fewer than ``min_posts`` categorized posts are excluded. The
    raw 2-D histogram is optionally smoothed with a Gaussian kernel
    (``smoothing`` is the bandwidth in leaning units) and then normalized,
    so the grid always carries total mass one. Marginals are recomputed from
    the final grid.
    """

    def __init__(self, bins: int = 50, min_posts: int = 3,
                 smoothing: Optional[float] = None):
        self.bins = bins
        self.min_posts = min_posts
        self.smoothing = smoothing

    def fit(self, X, y=None):
        """X is an (n, 2) array of (q, neighborhood q) pairs."""
        pairs = np.asarray(X, dtype=np.float64)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise UsageError("expected an (n, 2) array of leaning pairs")
        if pairs.shape[0] == 0:
            raise EmptyResult("no eligible users for the joint density")
        if np.any(pairs < 0.0) or np.any(pairs > 1.0):
            raise UsageError("leanings must lie in [0, 1]")
        bins = check_positive_int("bins", self.bins)
        if bins < 2:
            raise UsageError("bins must be >= 2")

        # bin index floor(q * bins), with q = 1 clipped into the last bin
        qi = np.minimum((pairs[:, 0] * bins).astype(np.int64), bins - 1)
        qj = np.minimum((pairs[:, 1] * bins).astype(np.int64), bins - 1)
        counts = np.zeros((bins, bins), dtype=np.float64)
        np.add.at(counts, (qi, qj), 1.0)
        if self.smoothing is not None:
            bw = float(self.smoothing)
            if bw <= 0.0:
                raise UsageError("smoothing bandwidth must be positive")
            counts = gaussian_filter(counts, sigma=bw * bins, mode="constant")
        grid = counts / math.fsum(counts.ravel().tolist())

        self.grid_ = grid
        # exactly-rounded row/column sums are order-independent, which keeps
        # the marginals symmetric under a label flip of the inputs
        self.marginal_q_ = np.array([math.fsum(row.tolist()) for row in grid])
        self.marginal_qn_ = np.array([math.fsum(col.tolist()) for col in grid.T])
        self.n_users_ = int(pairs.shape[0])
        return self

    def density(self) -> JointLeaningDensity:
        return JointLeaningDensity(
            grid=self.grid_,
            marginal_q=self.marginal_q_,
            marginal_qn=self.marginal_qn_,
            n_users=self.n_users_,
            bins=int(self.bins),
            smoothing=None if self.smoothing is None else float(self.smoothing),
        )


def joint_density(leanings: LeaningVector,
                  neighborhood: Mapping[str, float],
                  min_posts: int = 3,
                  bins: int = 50,
                  smoothing: Optional[float] = None) -> JointLeaningDensity:
    """Joint (q, neighborhood q) density over users eligible on both axes."""
    min_posts = check_positive_int("min_posts", min_posts)
    users = [
        u for u in sorted(set(leanings.q) & set(neighborhood))
        if leanings.k[u] >= min_posts
    ]
    if not users:
        raise EmptyResult(
            f"no users with >= {min_posts} categorized posts and a neighborhood leaning"
        )
    pairs = np.array([[leanings.q[u], neighborhood[u]] for u in users])
    est = LeaningDensity(bins=bins, min_posts=min_posts, smoothing=smoothing)
    est.fit(pairs)
    return est.density()
