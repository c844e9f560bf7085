"""The lattice-orbit route to free path statistics.

For a scheme with lattice L, a point q and direction v, the orbit lattice at
time t is the affine lattice

    (m @ basis + shift - (q, 0)) @ blockdiag(K(v) Phi^t, 1_m),

so a scatterer centre p in P becomes x = (p - q) K(v) Phi^t in physical
coordinates while its internal coordinates are untouched.  With rho = e^{-t},
x_1 = rho^{d-1} (p - q).v and |x_perp| = |(p - q)_perp| / rho.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cutproject import Scheme, Window, ball_volume, in_window_coeff, recentered_window
from .errors import FlowOverflow, NearSingularDirection, NotAScattererPoint
from .lattice_core import LatticeModel, enumerate_in_box
from .parallel import run_chunks
from .rng import sample_rng, stream_key, uniform_sphere
from .stats import estimate_from_counts, mean_stderr

SINGULAR_ANGLE = 1e-6
DEFAULT_T = 6.0


def rotation_K(v) -> np.ndarray:
    """Rotation with v @ K = e_1, acting in span{v, e_1} only."""
    v = np.asarray(v, float)
    d = len(v)
    nv = np.linalg.norm(v)
    if abs(nv - 1) > 1e-9:
        raise ValueError(f"direction must be a unit vector (norm {nv})")
    v = v / nv
    c = float(np.clip(v[0], -1.0, 1.0))
    if math.pi - math.acos(c) < SINGULAR_ANGLE:
        raise NearSingularDirection("direction within 1e-6 rad of -e_1")
    u = v.copy()
    u[0] = 0.0
    s = float(np.linalg.norm(u))
    if s < 1e-300:
        return np.eye(d)
    w = u / s
    e1 = np.zeros(d)
    e1[0] = 1.0
    # rotation by the angle between v and e_1 in the (e_1, w) plane; rows act from the left
    return np.eye(d) + (c - 1) * (np.outer(e1, e1) + np.outer(w, w)) + s * (np.outer(w, e1) - np.outer(e1, w))


def flow_matrix(t: float, d: int, n: int | None = None) -> np.ndarray:
    if abs(t) > 500:
        raise FlowOverflow(f"|t| = {abs(t)} exceeds 500")
    n = d if n is None else n
    diag = np.ones(n)
    diag[0] = math.exp(-(d - 1) * t)
    diag[1:d] = math.exp(t)
    return np.diag(diag)


@dataclass(frozen=True, eq=False)
class OrbitPoint:
    matrix: np.ndarray
    shift: np.ndarray

    @property
    def det(self) -> float:
        return abs(float(np.linalg.det(self.matrix)))

    def as_lattice(self) -> LatticeModel:
        return LatticeModel(self.matrix, self.shift, "orbit", {})


@dataclass(frozen=True)
class CylinderSpec:
    xi: float
    r_shift: float = 0.0

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("cylinder length xi must be positive")


def orbit_factor(v, t: float, d: int, n: int) -> np.ndarray:
    blk = np.eye(n)
    blk[:d, :d] = rotation_K(v) @ flow_matrix(t, d)
    return blk


def orbit_lattice(s: Scheme, q, v, t: float, lattice: LatticeModel | None = None) -> OrbitPoint:
    lat = s.lattice if lattice is None else lattice
    d, n = s.d, lat.dim_n
    F = orbit_factor(v, t, d, n)
    shift = lat.shift.copy()
    shift[:d] -= np.asarray(q, float)
    return OrbitPoint(lat.basis @ F, shift @ F)


def orbit_points(o: OrbitPoint, s: Scheme, lo, hi, window: Window | None = None, offset=None):
    """Physical coordinates of orbit-lattice points in the closed box [lo, hi] whose internal part is in W.

    Internal coordinates are measured from ``offset`` (default: the lattice shift).
    """
    window = s.window if window is None else window
    d = s.d
    base = s.lattice.shift[d:] if offset is None else np.asarray(offset, float)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    lat = o.as_lattice()
    if s.m:
        wlo, whi = window.bbox(s.split)
        blo = np.concatenate([lo, wlo + base - 1e-9])
        bhi = np.concatenate([hi, whi + base + 1e-9])
    else:
        blo, bhi = lo, hi
    _, pts = enumerate_in_box(lat, blo, bhi)
    if s.m and len(pts):
        pts = pts[window.contains(pts[:, d:] - base, s.split, s.grazes)]
    return pts[:, :d]


def first_in_cylinder(o: OrbitPoint, s: Scheme, xi_max: float, r_shift: float = 0.0,
                      window: Window | None = None, offset=None) -> float:
    """Smallest x_1 in (0, xi_max) over orbit points in the cylinder (+ r e_d) x W, else inf."""
    d = s.d
    lo = np.full(d, -1.0)
    hi = np.full(d, 1.0)
    lo[0], hi[0] = 0.0, xi_max
    if d > 1:
        lo[d - 1] += r_shift
        hi[d - 1] += r_shift
    x = orbit_points(o, s, lo, hi, window, offset)
    if len(x) == 0:
        return math.inf
    perp = x[:, 1:].copy()
    if d > 1:
        perp[:, -1] -= r_shift
    inside = (x[:, 0] > 0) & (x[:, 0] < xi_max) & (np.sum(perp**2, axis=1) < 1.0)
    return float(x[inside, 0].min()) if np.any(inside) else math.inf


def cylinder_empty(o: OrbitPoint, s: Scheme, cyl: CylinderSpec, window: Window | None = None) -> bool:
    return first_in_cylinder(o, s, cyl.xi, cyl.r_shift, window) >= cyl.xi


# --------------------------------------------------------------- sampling

def default_q_box(s: Scheme) -> float:
    """Side of the box generic q are drawn from: one mean cell of P."""
    return (1.0 / s.density) ** (1.0 / s.d)


def draw_direction(rng, d: int) -> np.ndarray:
    while True:
        v = uniform_sphere(rng, d)
        if math.pi - math.acos(float(np.clip(v[0], -1, 1))) >= SINGULAR_ANGLE:
            return v


def draw_q(rng, s: Scheme, q_box: float | None, q_fixed=None) -> np.ndarray:
    if q_fixed is not None:
        return np.asarray(q_fixed, float)
    side = default_q_box(s) if q_box is None else q_box
    return rng.uniform(0.0, side, size=s.d)


def _orbit_chunk(a, b, s, key, t, xi_max, q_box, q_fixed, r_shift, coeff):
    window, offset = None, None
    if coeff is not None:
        # Palm version: observe from the scatterer y, with the window recentred at pi_int(y)
        y = s.lattice.points(np.asarray(coeff, dtype=np.int64).reshape(1, -1))[0]
        window = recentered_window(s, coeff)
        offset = y[s.d:]
        q_fixed = y[:s.d]
    out = np.empty(b - a)
    for i in range(a, b):
        rng = sample_rng(key, i)
        v = draw_direction(rng, s.d)
        q = draw_q(rng, s, q_box, q_fixed)
        o = orbit_lattice(s, q, v, t)
        out[i - a] = first_in_cylinder(o, s, xi_max, r_shift, window, offset)
    return out


def orbit_first_hits(s: Scheme, t: float, n: int, seed: int, xi_max: float, q_box=None, q_fixed=None,
                     r_shift: float = 0.0, coeff=None, workers: int | None = 1) -> np.ndarray:
    """Per-sample smallest x_1 of an orbit point in the cylinder of length xi_max (inf if none)."""
    key = stream_key(seed, 1)
    parts = run_chunks(_orbit_chunk, n, workers, s, key, t, xi_max, q_box, q_fixed, r_shift, coeff)
    return np.concatenate(parts) if parts else np.zeros(0)


def estimate_F(s: Scheme, xi_grid, t: float = DEFAULT_T, n: int = 1000, seed: int = 0, q_box=None,
               q_fixed=None, workers: int | None = 1):
    xi_grid = np.asarray(xi_grid, float)
    hits = orbit_first_hits(s, t, n, seed, float(xi_grid.max()) + 1e-9, q_box, q_fixed, workers=workers)
    k = (hits[None, :] >= xi_grid[:, None]).sum(axis=1)
    est = estimate_from_counts(xi_grid, k, n, "homspace-F")
    est.extra["first_hits"] = hits
    return est


def estimate_F_q(s: Scheme, scatterer_coeff, xi_grid, r: float, t: float = DEFAULT_T, n: int = 1000,
                 seed: int = 0, workers: int | None = 1):
    if not in_window_coeff(s, scatterer_coeff):
        raise NotAScattererPoint(f"coefficient {list(scatterer_coeff)} is not a point of P")
    if r < 0:
        raise ValueError("r must be non-negative")
    xi_grid = np.asarray(xi_grid, float)
    hits = orbit_first_hits(s, t, n, seed, float(xi_grid.max()) + 1e-9, r_shift=r,
                            coeff=tuple(int(c) for c in scatterer_coeff), workers=workers)
    k = (hits[None, :] >= xi_grid[:, None]).sum(axis=1)
    est = estimate_from_counts(xi_grid, k, n, "homspace-Fq")
    est.extra["first_hits"] = hits
    est.extra["r"] = r
    return est


@dataclass(frozen=True)
class BallIndicator:
    radius: float

    def volume(self, d: int) -> float:
        return ball_volume(d) * self.radius**d


@dataclass(frozen=True)
class BoxIndicator:
    lo: tuple
    hi: tuple

    def volume(self, d: int) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))


def _siegel_chunk(a, b, s, key, t, f, q_box):
    d = s.d
    out = np.empty(b - a)
    for i in range(a, b):
        rng = sample_rng(key, i)
        v = draw_direction(rng, d)
        q = draw_q(rng, s, q_box)
        o = orbit_lattice(s, q, v, t)
        if isinstance(f, BallIndicator):
            x = orbit_points(o, s, np.full(d, -f.radius), np.full(d, f.radius))
            keep = np.sum(x**2, axis=1) < f.radius**2
        else:
            lo, hi = np.asarray(f.lo, float), np.asarray(f.hi, float)
            x = orbit_points(o, s, lo, hi)
            keep = np.all((x >= lo) & (x < hi), axis=1)
        keep &= np.any(x != 0, axis=1)
        out[i - a] = np.count_nonzero(keep)
    return out


def siegel_check(s: Scheme, f, t: float = DEFAULT_T, n: int = 1000, seed: int = 0, q_box=None,
                 workers: int | None = 1):
    """(mc mean, mc stderr, density * vol(f)) for an indicator f of a ball or box; f=None is f = 0."""
    if f is None or n == 0:
        return 0.0, 0.0, 0.0
    key = stream_key(seed, 2)
    parts = run_chunks(_siegel_chunk, n, workers, s, key, t, f, q_box)
    counts = np.concatenate(parts)
    mean, se = mean_stderr(counts)
    return mean, se, s.density * f.volume(s.d)
