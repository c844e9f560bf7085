"""Empirical CCDFs with Clopper-Pearson bands, KS distance, CI overlap."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression
from scipy.stats import beta, ks_2samp

from .errors import CapTooSmall


def clopper_pearson(k, n, level: float = 0.95):
    k = np.asarray(k, float)
    a = (1 - level) / 2
    with np.errstate(invalid="ignore"):
        lo = np.where(k > 0, beta.ppf(a, k, n - k + 1), 0.0)
        hi = np.where(k < n, beta.ppf(1 - a, k + 1, n - k), 1.0)
    if n == 0:
        return np.zeros_like(k), np.ones_like(k)
    return lo, hi


@dataclass
class DistributionEstimate:
    xi_grid: np.ndarray
    ccdf: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_samples: int
    regime: str = ""
    ccdf_raw: np.ndarray | None = None
    r_values: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def rows(self):
        for x, c, lo, hi in zip(self.xi_grid, self.ccdf, self.ci_low, self.ci_high):
            yield float(x), float(c), float(lo), float(hi), self.n_samples


def isotonic_nonincreasing(y) -> np.ndarray:
    y = np.asarray(y, float)
    if len(y) == 0:
        return y
    return isotonic_regression(y, increasing=False).x


def estimate_from_counts(xi_grid, successes, n, regime="", **extra) -> DistributionEstimate:
    xi_grid = np.asarray(xi_grid, float)
    k = np.asarray(successes, float)
    raw = k / n if n else np.full(len(xi_grid), np.nan)
    lo, hi = clopper_pearson(k, n)
    # raw counts from one sample set are already monotone; only pooled estimates need the projection
    adj = isotonic_nonincreasing(raw) if n and np.any(np.diff(raw) > 0) else raw
    return DistributionEstimate(xi_grid, adj, np.asarray(lo), np.asarray(hi), int(n), regime, raw, **extra)


def empirical_ccdf(scaled, xi_grid, censored=None, cap: float | None = None, regime="") -> DistributionEstimate:
    """Fraction of samples with scaled >= xi; censored samples count as >= cap."""
    xi_grid = np.asarray(xi_grid, float)
    if np.any(np.diff(xi_grid) <= 0):
        raise ValueError("xi grid must be increasing")
    scaled = np.asarray(scaled, float)
    if censored is not None and np.any(censored):
        if cap is None or cap <= xi_grid.max():
            raise CapTooSmall(f"censor cap {cap} must exceed max xi {xi_grid.max()}")
        scaled = np.where(censored, np.inf, scaled)
    elif cap is not None and cap <= xi_grid.max():
        raise CapTooSmall(f"censor cap {cap} must exceed max xi {xi_grid.max()}")
    k = (scaled[None, :] >= xi_grid[:, None]).sum(axis=1)
    return estimate_from_counts(xi_grid, k, len(scaled), regime)


def ks_distance(a, b) -> float:
    return float(ks_2samp(np.asarray(a, float), np.asarray(b, float)).statistic)


def ci_overlap(est_a: DistributionEstimate, est_b: DistributionEstimate) -> np.ndarray:
    """Per grid point: do the two 95% bands intersect?"""
    return (est_a.ci_low <= est_b.ci_high) & (est_b.ci_low <= est_a.ci_high)


def mean_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, float)
    if len(x) < 2:
        return (float(x.mean()) if len(x) else 0.0), 0.0
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))
