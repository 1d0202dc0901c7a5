"""Empirical-distribution machinery: ECDFs, KS distances, moments, bootstrap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class Ecdf:
    """Sorted sample array with right-continuous step evaluation."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))
        if self.samples.size == 0:
            raise ValueError("empty sample")

    @property
    def count(self) -> int:
        return self.samples.size

    def __call__(self, x):
        """F_hat(x) = (#samples <= x) / count."""
        return np.searchsorted(self.samples, x, side="right") / self.count


@dataclass
class KsResult:
    statistic: float
    n1: int
    n2: int          # 0 for one-sample tests
    location: float  # abscissa of the maximal deviation


@dataclass
class MomentSummary:
    count: int
    mean: float
    variance: float  # bias-corrected
    skewness: float
    excess_kurtosis: float
    se_mean: float
    se_variance: float


def ecdf(samples) -> Ecdf:
    return Ecdf(np.asarray(samples))


def ks_two_sample(e1: Ecdf, e2: Ecdf) -> KsResult:
    """Exact sup |F1 - F2| via a merged-sample sweep over all jump points."""
    grid = np.concatenate([e1.samples, e2.samples])
    grid.sort(kind="mergesort")
    diff = np.abs(e1(grid) - e2(grid))
    i = int(np.argmax(diff))
    return KsResult(float(diff[i]), e1.count, e2.count, float(grid[i]))


def ks_one_sample(e: Ecdf, cdf: Callable) -> KsResult:
    """Exact sup |F_hat - F| by the order-statistics formula."""
    n = e.count
    f = np.asarray(cdf(e.samples), dtype=float)
    i_over_n = np.arange(1, n + 1) / n
    upper = i_over_n - f          # F_hat jumps above F
    lower = f - (i_over_n - 1 / n)
    stat_u, stat_l = upper.max(), lower.max()
    if stat_u >= stat_l:
        loc = float(e.samples[int(np.argmax(upper))])
        stat = stat_u
    else:
        loc = float(e.samples[int(np.argmax(lower))])
        stat = stat_l
    return KsResult(float(max(stat, 0.0)), n, 0, loc)


def moments(samples) -> MomentSummary:
    """Permutation-invariant central moments (exact rounding via fsum)."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    mean = math.fsum(x) / n
    d = x - mean
    m2 = math.fsum(d * d) / n
    m3 = math.fsum(d**3) / n
    m4 = math.fsum(d**4) / n
    var = m2 * n / (n - 1)
    if m2 > 0:
        skew = m3 / m2**1.5
        kurt = m4 / m2**2 - 3.0
    else:
        skew = kurt = 0.0
    se_mean = math.sqrt(var / n)
    # SE of the sample variance from the fourth moment.
    se_var = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    return MomentSummary(n, mean, var, skew, kurt, se_mean, se_var)


def bootstrap_ci(samples, statistic: Callable, b: int, level: float,
                 rng: np.random.Generator) -> tuple:
    """Percentile bootstrap interval; deterministic given the generator."""
    if b < 100:
        raise ValueError("need at least 100 bootstrap resamples")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0,1)")
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise ValueError("empty sample")
    vals = np.empty(b)
    for i in range(b):
        vals[i] = statistic(x[rng.integers(0, x.size, size=x.size)])
    alpha = (1.0 - level) / 2.0
    return (float(np.quantile(vals, alpha)), float(np.quantile(vals, 1.0 - alpha)))
