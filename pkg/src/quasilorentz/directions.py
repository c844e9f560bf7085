"""Directions to the points of P in a shell cT <= |y| < T, counted with multiplicity.

With C = (1 - c^d) * density the shell holds about C vol(B^d) T^d points.  A
spherical cap of surface measure sigma d / (C T^d) then captures sigma
directions on average; its limiting count distribution is E(r, sigma).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .cutproject import Scheme, Shell, ball_volume, points_in_region
from .errors import DiscTooLarge
from .homspace import draw_direction, orbit_lattice, orbit_points
from .parallel import run_chunks
from .rng import sample_rng, stream_key, uniform_sphere
from .stats import clopper_pearson, mean_stderr


@dataclass(frozen=True)
class ShellSpec:
    c: float
    T: float

    def __post_init__(self):
        if not (0 <= self.c < 1) or not self.T > 0:
            raise ValueError("need 0 <= c < 1 and T > 0")


def shell_constant(s: Scheme, c: float) -> float:
    return (1 - c ** s.d) * s.window.measure / s.covolume_section


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1}."""
    return d * ball_volume(d)


def cap_area(alpha: float, d: int) -> float:
    """Surface measure of a cap of angular radius alpha on S^{d-1}."""
    if d == 1:
        return 1.0 if alpha < math.pi else 2.0
    if d == 2:
        return 2 * alpha
    from scipy.integrate import quad
    return sphere_area(d - 1) * quad(lambda th: math.sin(th) ** (d - 2), 0, alpha, epsabs=1e-14)[0]


def cap_angle(area: float, d: int, tol: float = 1e-12) -> float:
    """Invert cap_area by bisection."""
    if area > sphere_area(d) / 2:
        raise DiscTooLarge(f"cap area {area:.4g} exceeds a hemisphere")
    lo, hi = 0.0, math.pi / 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cap_area(mid, d) < area:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shell_directions(s: Scheme, shell: ShellSpec) -> np.ndarray:
    pts, _ = points_in_region(s, Shell(tuple(np.zeros(s.d)), shell.c, shell.T))
    r = np.linalg.norm(pts, axis=1)
    pts, r = pts[r > 0], r[r > 0]
    return pts / r[:, None]


@dataclass
class DirectionCounts:
    sigma: float
    counts: np.ndarray          # per centre
    freq: np.ndarray            # histogram over r = 0, 1, ...
    n_centers: int
    mean: float
    ci_low: np.ndarray = field(default=None)
    ci_high: np.ndarray = field(default=None)
    stderr: float = 0.0

    def rows(self):
        for r, (f, lo, hi) in enumerate(zip(self.freq, self.ci_low, self.ci_high)):
            yield r, float(f), float(lo), float(hi)


def histogram(counts, sigma: float, r_max: int | None = None) -> DirectionCounts:
    counts = np.asarray(counts, dtype=np.int64)
    n = len(counts)
    top = int(counts.max()) if n else 0
    if r_max is not None:
        top = max(top, r_max)
    k = np.bincount(counts, minlength=top + 1)[: top + 1] if n else np.zeros(top + 1, np.int64)
    freq = k / n if n else np.zeros(top + 1)
    lo, hi = clopper_pearson(k, n)
    mean, se = mean_stderr(counts) if n else (0.0, 0.0)
    return DirectionCounts(sigma, counts, freq, n, float(mean), lo, hi, se)


def random_centers(rng, n: int, d: int, stratified: bool = False) -> np.ndarray:
    """Uniform centres; stratified (d = 2) uses one random rotation of n equispaced angles."""
    if stratified and d == 2:
        th = 2 * np.pi * (np.arange(n) + rng.uniform()) / n
        return np.c_[np.cos(th), np.sin(th)]
    return np.array([uniform_sphere(rng, d) for _ in range(n)]).reshape(n, d)


def count_in_discs(s: Scheme, shell: ShellSpec, sigma: float, centers, dirs: np.ndarray | None = None) -> DirectionCounts:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d = s.d
    C = shell_constant(s, shell.c)
    area = sigma * d / (C * shell.T**d)
    alpha = cap_angle(area, d)
    if dirs is None:
        dirs = shell_directions(s, shell)
    centers = np.atleast_2d(np.asarray(centers, float))
    if len(centers) == 0:
        return histogram([], sigma)
    chord = 2 * math.sin(alpha / 2)
    tree = cKDTree(dirs)
    counts = tree.query_ball_point(centers, chord * (1 + 1e-12), return_length=True)
    return histogram(counts, sigma)


def cone_slope(s: Scheme, c: float, sigma: float) -> float:
    d = s.d
    C = shell_constant(s, c)
    return (sigma * d / (C * ball_volume(d - 1))) ** (1.0 / (d - 1))


def cone_volume(s: Scheme, c: float, sigma: float) -> float:
    """Closed form sigma (1 - c^d) / C."""
    return sigma * (1 - c ** s.d) / shell_constant(s, c)


def _cone_chunk(a, b, s, key, t, c, k):
    d = s.d
    out = np.empty(b - a, dtype=np.int64)
    lo = np.r_[c, np.full(d - 1, -k)]
    hi = np.r_[1.0, np.full(d - 1, k)]
    for i in range(a, b):
        rng = sample_rng(key, i)
        v = draw_direction(rng, d)
        o = orbit_lattice(s, np.zeros(d), v, t)
        x = orbit_points(o, s, lo, hi)
        inside = (x[:, 0] > c) & (x[:, 0] < 1) & (np.sqrt(np.sum(x[:, 1:] ** 2, axis=1)) <= k * x[:, 0])
        out[i - a] = np.count_nonzero(inside)
    return out


def cone_side_E(s: Scheme, c: float, sigma: float, r_values=None, t: float = 6.0, n: int = 1000,
                seed: int = 0, workers: int | None = 1) -> DirectionCounts:
    """Orbit-side estimate of E(r, sigma): counts of P' in the cone c < x_1 < 1, |x_perp| <= k x_1."""
    k = cone_slope(s, c, sigma)
    key = stream_key(seed, 3)
    parts = run_chunks(_cone_chunk, n, workers, s, key, t, c, k)
    counts = np.concatenate(parts) if parts else np.zeros(0, np.int64)
    r_max = None if r_values is None else int(max(r_values))
    return histogram(counts, sigma, r_max)


def physical_side_E(s: Scheme, shell: ShellSpec, sigma: float, n_centers: int, seed: int = 0,
                    stratified: bool = False) -> DirectionCounts:
    rng = sample_rng(stream_key(seed, 4), 0)
    centers = random_centers(rng, n_centers, s.d, stratified)
    return count_in_discs(s, shell, sigma, centers)
