"""Small statistical helpers shared by the estimators and checkers."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = float(_st.norm.ppf(0.5 + level / 2))
    ph = successes / trials
    denom = 1 + z * z / trials
    center = (ph + z * z / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / denom
    # clamp so that lo <= ph <= hi survives rounding
    return max(0.0, min(center - half, ph)), min(1.0, max(center + half, ph))


def ols_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def ols_slopes(x, ys) -> np.ndarray:
    """Slope of each row of ``ys`` against ``x``."""
    x = np.asarray(x, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xc = x - x.mean()
    return (ys - ys.mean(axis=1, keepdims=True)) @ xc / np.dot(xc, xc)


def mean_ci(samples, level: float = 0.95) -> tuple[float, float, float]:
    """Mean with a Student-t interval."""
    a = np.asarray(samples, dtype=float)
    m = float(a.mean())
    if a.size < 2:
        return m, m, m
    se = float(a.std(ddof=1) / math.sqrt(a.size))
    t = float(_st.t.ppf(0.5 + level / 2, a.size - 1))
    return m, m - t * se, m + t * se
