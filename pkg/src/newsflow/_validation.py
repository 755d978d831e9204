"""Input validation helpers used by the estimator classes and module functions."""

from __future__ import annotations

import numpy as np

from .errors import UsageError


def check_positive_int(name: str, value) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise UsageError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_fraction(name: str, value) -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise UsageError(f"{name} must lie in [0, 1], got {value!r}")
    return v


def check_alpha(value, low: float = 1.0) -> float:
    v = float(value)
    if not v > low:
        raise ValueError(f"scaling exponent must be > {low}, got {value!r}")
    return v


def as_value_array(values, name: str = "values") -> np.ndarray:
    """Coerce to a 1-D float array of integer-valued entries.

    Values above 2**53 are accepted as approximate integers (every float64 of
    that magnitude is mathematically an integer).
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise UsageError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} must be finite")
    if not np.array_equal(arr, np.floor(arr)):
        raise UsageError(f"{name} must be integer-valued")
    return arr


def as_duration_array(durations) -> np.ndarray:
    arr = np.asarray(durations, dtype=np.float64).ravel()
    if arr.size == 0:
        raise UsageError("durations must be non-empty")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise UsageError("durations must be finite and non-negative")
    return arr
