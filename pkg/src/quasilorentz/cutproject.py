"""Cut-and-project schemes: internal group, windows, point generation and checks.

Coordinates in R^n = R^d x R^m are split as (physical, internal).  The internal
group is A = A° + Z c_1 + ... + Z c_{m2}, where A° is spanned by the
orthonormal rows of ``a_circle_basis`` and c_j are the ``coset_generators``.
Window components are convex polytopes in A° coordinates, one per coset.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import (EmptyRegion, NoLatticeInV, NonRegularGamma, NotHalfSum,
                     SplitMismatch)
from .lattice_core import (LatticeModel, enumerate_in_box, integer_kernel,
                           lattice_volume, penrose_rows)

GRAZE_TOL = 1e-9
COSET_TOL = 1e-6


class GrazeCounter:
    """Thread-safe count of lattice points found within GRAZE_TOL of a window face."""

    def __init__(self):
        self._n = 0
        self._lock = threading.Lock()

    def add(self, k: int):
        if k:
            with self._lock:
                self._n += int(k)

    @property
    def value(self) -> int:
        return self._n

    def reset(self):
        with self._lock:
            self._n = 0

    def __reduce__(self):
        # counters are per process; a copy starts from zero
        return (GrazeCounter, ())


@dataclass(frozen=True, eq=False)
class InternalSplit:
    d: int
    m: int
    m1: int
    a_circle_basis: np.ndarray        # m1 x m, orthonormal rows
    coset_generators: np.ndarray      # m2 x m
    coset_matrix: np.ndarray          # n x m2 integers: coset index of each basis row

    def __post_init__(self):
        object.__setattr__(self, "a_circle_basis", np.array(self.a_circle_basis, float).reshape(self.m1, self.m))
        m2 = np.asarray(self.coset_generators).size // self.m if self.m else 0
        object.__setattr__(self, "coset_generators", np.array(self.coset_generators, float).reshape(m2, self.m))
        object.__setattr__(self, "coset_matrix", np.array(self.coset_matrix, dtype=np.int64).reshape(self.d + self.m, m2))
        if not 0 <= self.m1 <= self.m:
            raise SplitMismatch(f"m1={self.m1} out of range for m={self.m}")
        A = self.a_circle_basis
        if self.m1 and not np.allclose(A @ A.T, np.eye(self.m1), atol=1e-12):
            raise SplitMismatch("a_circle_basis rows must be orthonormal")
        if m2:
            resid = self.coset_generators - (self.coset_generators @ A.T) @ A
            if np.linalg.matrix_rank(resid, tol=1e-9) < m2:
                raise SplitMismatch("coset generators are dependent modulo A°")

    @property
    def n(self) -> int:
        return self.d + self.m

    @property
    def m2(self) -> int:
        return self.coset_generators.shape[0]

    def a_coords(self, z: np.ndarray) -> np.ndarray:
        return z @ self.a_circle_basis.T

    def coset_of(self, z: np.ndarray):
        """(integer coset index, max rounding error) for internal coordinates z (rows)."""
        z = np.atleast_2d(z)
        if self.m2 == 0:
            resid = z - self.a_coords(z) @ self.a_circle_basis if self.m else np.zeros((len(z), 0))
            err = np.max(np.abs(resid), axis=1) if resid.size else np.zeros(len(z))
            return np.zeros((len(z), 0), np.int64), err
        resid = z - self.a_coords(z) @ self.a_circle_basis
        C = self.coset_generators - (self.coset_generators @ self.a_circle_basis.T) @ self.a_circle_basis
        k, *_ = np.linalg.lstsq(C.T, resid.T, rcond=None)
        ki = np.rint(k.T).astype(np.int64)
        err = np.max(np.abs(resid - ki @ C), axis=1)
        return ki, err

    def offset_of(self, coset) -> np.ndarray:
        """Internal representative of a coset (a vector in R^m)."""
        coset = np.asarray(coset, dtype=float).reshape(-1)
        return coset @ self.coset_generators if self.m2 else np.zeros(self.m)


@dataclass(frozen=True, eq=False)
class WindowComponent:
    coset: tuple
    A: np.ndarray          # h x m1; open polytope {a : A a < b}
    b: np.ndarray
    vertices: np.ndarray   # k x m1

    @property
    def volume(self) -> float:
        m1 = self.vertices.shape[1]
        if m1 == 0:
            return 1.0
        if m1 == 1:
            return float(self.vertices.max() - self.vertices.min())
        return float(ConvexHull(self.vertices).volume)


def polytope_from_vertices(vertices) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-space form (A, b) and hull vertices of conv(vertices)."""
    V = np.asarray(vertices, float)
    m1 = V.shape[1]
    if m1 == 0:
        return np.zeros((0, 0)), np.zeros(0), np.zeros((1, 0))
    if m1 == 1:
        lo, hi = V.min(), V.max()
        return np.array([[-1.0], [1.0]]), np.array([-lo, hi]), np.array([[lo], [hi]])
    hull = ConvexHull(V)
    eq = hull.equations
    return eq[:, :-1].copy(), -eq[:, -1].copy(), V[hull.vertices].copy()


def make_component(coset, vertices) -> WindowComponent:
    A, b, verts = polytope_from_vertices(vertices)
    return WindowComponent(tuple(int(c) for c in coset), A, b, verts)


@dataclass(frozen=True, eq=False)
class Window:
    components: tuple

    @property
    def measure(self) -> float:
        return float(sum(c.volume for c in self.components))

    def bbox(self, split: InternalSplit) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box of the window in internal coordinates R^m."""
        pts = []
        for c in self.components:
            pts.append(c.vertices @ split.a_circle_basis + split.offset_of(c.coset))
        P = np.vstack(pts)
        return P.min(axis=0), P.max(axis=0)

    def diameter(self, split: InternalSplit) -> float:
        lo, hi = self.bbox(split)
        return float(np.linalg.norm(hi - lo))

    def shifted(self, a_shift, coset_shift=None) -> "Window":
        """W - z for z with A° coordinates a_shift and coset index coset_shift."""
        a_shift = np.asarray(a_shift, float)
        comps = []
        for c in self.components:
            k = c.coset if coset_shift is None else tuple(int(a - b) for a, b in zip(c.coset, coset_shift))
            comps.append(WindowComponent(k, c.A, c.b - c.A @ a_shift, c.vertices - a_shift))
        return Window(tuple(comps))

    def contains(self, z: np.ndarray, split: InternalSplit, grazes: GrazeCounter | None = None) -> np.ndarray:
        """Strict-interior window membership for internal coordinates z (rows)."""
        z = np.atleast_2d(z)
        if len(z) == 0:
            return np.zeros(0, bool)
        coset, err = split.coset_of(z)
        ok_coset = err < COSET_TOL
        a = split.a_coords(z)
        inside = np.zeros(len(z), bool)
        graze = 0
        for comp in self.components:
            sel = ok_coset & np.all(coset == np.array(comp.coset, dtype=np.int64), axis=1)
            if not np.any(sel):
                continue
            if comp.A.shape[0] == 0:
                inside |= sel
                continue
            slack = comp.b[None, :] - a[sel] @ comp.A.T
            hit = np.all(slack > 0, axis=1)
            near = np.any(np.abs(slack) < GRAZE_TOL, axis=1) & np.all(slack > -GRAZE_TOL, axis=1)
            graze += int(np.sum(near))
            idx = np.flatnonzero(sel)
            inside[idx[hit]] = True
        if grazes is not None:
            grazes.add(graze)
        return inside


def single_point_window(cosets=((),)) -> Window:
    return Window(tuple(make_component(c, np.zeros((1, 0))) for c in cosets))


def interval_window(lo: float, hi: float, coset=()) -> Window:
    return Window((make_component(coset, np.array([[lo], [hi]])),))


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def bbox(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    def contains(self, x):
        lo, hi = self.bbox()
        return np.all((x >= lo) & (x < hi), axis=1)

    @property
    def volume(self) -> float:
        lo, hi = self.bbox()
        return float(np.prod(hi - lo))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def bbox(self):
        c = np.asarray(self.center, float)
        return c - self.radius, c + self.radius

    def contains(self, x):
        return np.sum((x - np.asarray(self.center, float)) ** 2, axis=1) < self.radius**2

    @property
    def volume(self) -> float:
        d = len(self.center)
        return ball_volume(d) * self.radius**d


@dataclass(frozen=True)
class Shell:
    """cT <= |x - center| < T."""
    center: tuple
    c: float
    T: float

    def bbox(self):
        ctr = np.asarray(self.center, float)
        return ctr - self.T, ctr + self.T

    def contains(self, x):
        r2 = np.sum((x - np.asarray(self.center, float)) ** 2, axis=1)
        return (r2 >= (self.c * self.T) ** 2) & (r2 < self.T**2)

    @property
    def volume(self) -> float:
        d = len(self.center)
        return ball_volume(d) * self.T**d * (1 - self.c**d)


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# ---------------------------------------------------------------- scheme

@dataclass(frozen=True, eq=False)
class Scheme:
    lattice: LatticeModel
    split: InternalSplit
    window: Window
    covolume_section: float
    density: float
    name: str = "custom"
    grazes: GrazeCounter = field(default_factory=GrazeCounter, compare=False, repr=False)

    @property
    def d(self) -> int:
        return self.split.d

    @property
    def m(self) -> int:
        return self.split.m


def section_covolume(lat: LatticeModel, split: InternalSplit) -> float:
    """vol(V / (L cap V)) with V = R^d x A°, from the exact coset matrix."""
    ker = integer_kernel(split.coset_matrix) if split.m2 else np.eye(lat.dim_n, dtype=np.int64)
    want = split.d + split.m1
    if ker.shape[0] != want:
        raise NoLatticeInV(f"L cap V has rank {ker.shape[0]}, expected {want}")
    vecs = ker.astype(float) @ lat.basis
    phys = vecs[:, :split.d]
    a = split.a_coords(vecs[:, split.d:]) if split.m1 else np.zeros((len(vecs), 0))
    V = np.hstack([phys, a])
    vol = lattice_volume(V)
    if not vol > 1e-12:
        raise NoLatticeInV("L cap V is degenerate")
    return vol


def check_split(lat: LatticeModel, split: InternalSplit, n_points: int = 10_000):
    """Numeric sanity: internal projections of lattice points lie in A with the recorded cosets."""
    n = lat.dim_n
    if split.n != n:
        raise SplitMismatch(f"split has n={split.n}, lattice has n={n}")
    if split.m == 0:
        return
    # enumerate a box around the shift holding about n_points points
    side = (n_points * lat.delta) ** (1.0 / n)
    c = lat.shift
    coeffs, pts = enumerate_in_box(lat, c - side / 2, c + side / 2)
    coeffs, pts = coeffs[:n_points], pts[:n_points]
    z = pts[:, split.d:] - lat.shift[split.d:]
    k, err = split.coset_of(z)
    if np.any(err > COSET_TOL):
        raise SplitMismatch(f"internal projection off A by {err.max():.3g}")
    if split.m2 and not np.array_equal(k, coeffs @ split.coset_matrix):
        raise SplitMismatch("coset matrix disagrees with numeric coset index")


def build_scheme(lat: LatticeModel, split: InternalSplit, window: Window, name: str = "custom",
                 check: bool = True) -> Scheme:
    if check:
        check_split(lat, split)
    cov = section_covolume(lat, split)
    mu = window.measure
    if not mu > 0:
        raise ValueError("window has zero measure")
    return Scheme(lat, split, window, cov, mu / cov, name)


def recentered_window(s: Scheme, coeff) -> Window:
    """W - pi_int(y) for the lattice point y with the given coefficient."""
    if s.m == 0:
        return s.window
    y = s.lattice.points(np.asarray(coeff, dtype=np.int64).reshape(1, -1))[0]
    z = y[s.d:] - s.lattice.shift[s.d:]
    k = np.asarray(coeff, dtype=np.int64) @ s.split.coset_matrix
    a = s.split.a_coords(z[None])[0]
    return s.window.shifted(a, tuple(k))


def translate_scheme(s: Scheme, x) -> Scheme:
    """Scheme for the affine lattice L + x (same window)."""
    return Scheme(s.lattice.translated(x), s.split, s.window, s.covolume_section, s.density, s.name)


def points_in_region(s: Scheme, region, cap: int | None = None, window: Window | None = None):
    """Points of P in the region, returned as (points (k x d), coeffs (k x n))."""
    d, m = s.d, s.m
    window = s.window if window is None else window
    plo, phi = region.bbox()
    if m:
        wlo, whi = window.bbox(s.split)
        shift_int = s.lattice.shift[d:]
        lo = np.concatenate([plo, wlo + shift_int - 1e-9])
        hi = np.concatenate([phi, whi + shift_int + 1e-9])
    else:
        lo, hi = plo, phi
    kw = {} if cap is None else {"cap": cap}
    coeffs, pts = enumerate_in_box(s.lattice, lo, hi, **kw)
    keep = region.contains(pts[:, :d])
    if m and np.any(keep):
        idx = np.flatnonzero(keep)
        inw = window.contains(pts[idx, d:] - s.lattice.shift[d:], s.split, s.grazes)
        keep[idx[~inw]] = False
    return pts[keep, :d].copy(), coeffs[keep]


def in_window_coeff(s: Scheme, coeff) -> bool:
    y = s.lattice.points(np.asarray(coeff, dtype=np.int64).reshape(1, -1))[0]
    if s.m == 0:
        return True
    return bool(s.window.contains(y[None, s.d:] - s.lattice.shift[s.d:], s.split)[0])


def density_check(s: Scheme, shape: str, T_list, offsets) -> list[dict]:
    """Count ratios count / (T^d vol density) for growing T and several translates."""
    rows = []
    d = s.d
    for T in T_list:
        for j, x in enumerate(offsets):
            x = np.asarray(x, float)
            if shape == "box":
                region = Box(tuple(x), tuple(x + T))
            elif shape == "ball":
                region = Ball(tuple(x), T)
            else:
                raise ValueError(f"unknown region shape {shape!r}")
            pts, _ = points_in_region(s, region)
            expected = region.volume * s.density
            rows.append({"T": float(T), "offset": j, "count": len(pts),
                         "expected": expected, "ratio": len(pts) / expected})
    return rows


@dataclass(frozen=True)
class InjectivityCertificate:
    ok: bool
    witness: tuple | None = None       # lattice coefficient l with pi(l) = 0, pi_int(l) in W - W
    components: tuple | None = None    # (i, j) with pi_int(l) in W_i - W_j


def injectivity_check(s: Scheme) -> InjectivityCertificate:
    if s.m == 0:
        return InjectivityCertificate(True)
    d = s.d
    diam = s.window.diameter(s.split)
    lo = np.concatenate([np.full(d, -1e-9), np.full(s.m, -diam - 1e-9)])
    coeffs, pts = enumerate_in_box(LatticeModel(s.lattice.basis, np.zeros(s.lattice.dim_n)), lo, -lo)
    split = s.split
    for coeff, y in zip(coeffs, pts):
        if not np.any(coeff):
            continue
        if np.linalg.norm(y[:d]) >= 1e-9:
            continue
        z = y[d:]
        k, err = split.coset_of(z[None])
        if err[0] > COSET_TOL:
            continue
        a = split.a_coords(z[None])[0]
        for i, ci in enumerate(s.window.components):
            for j, cj in enumerate(s.window.components):
                if tuple(np.array(ci.coset) - np.array(cj.coset)) != tuple(k[0]):
                    continue
                if _in_difference(a, ci, cj):
                    return InjectivityCertificate(False, tuple(int(c) for c in coeff), (i, j))
    return InjectivityCertificate(True)


def _in_difference(a, ci: WindowComponent, cj: WindowComponent) -> bool:
    """Is a in the open Minkowski difference int(P_i) - int(P_j)?"""
    m1 = len(a)
    if m1 == 0:
        return True
    diffs = (ci.vertices[:, None, :] - cj.vertices[None, :, :]).reshape(-1, m1)
    A, b, _ = polytope_from_vertices(diffs)
    return bool(np.all(A @ a < b))


def delone_radii(s: Scheme, probe: Box, margin: float | None = None):
    """(min nearest-neighbour distance, max empty-ball radius) sampled over the probe box."""
    lo, hi = probe.bbox()
    if margin is None:
        margin = 0.25 * float(np.min(hi - lo))
    pts, _ = points_in_region(s, Box(tuple(lo - margin), tuple(hi + margin)))
    if len(pts) < 2:
        raise EmptyRegion("fewer than two points near the probe region")
    tree = cKDTree(pts)
    inner = probe.contains(pts)
    if not np.any(inner):
        raise EmptyRegion("no points inside the probe region")
    dist, _ = tree.query(pts[inner], k=2)
    packing = float(dist[:, 1].min())
    step = packing / 4
    axes = [np.arange(l, h + step / 2, step) for l, h in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    gd, _ = tree.query(grid)
    # refine the best grid cells: the empty-ball maximum sits at a Voronoi vertex between grid nodes
    best = float(gd.max())
    offs = np.stack(np.meshgrid(*[np.arange(-2, 3)] * len(lo), indexing="ij"), axis=-1).reshape(-1, len(lo))
    for start in grid[np.argsort(gd)[-20:]]:
        x, h = start, step / 2
        for _ in range(20):
            cand = np.clip(x + h * offs, lo, hi)
            cd, _ = tree.query(cand)
            x = cand[np.argmax(cd)]
            best = max(best, float(cd.max()))
            h /= 2
    return packing, best


# ---------------------------------------------------------------- Penrose window

def penrose_split() -> InternalSplit:
    return InternalSplit(
        d=2, m=3, m1=2,
        a_circle_basis=np.array([[1.0, 0, 0], [0, 1.0, 0]]),
        coset_generators=np.array([[0.0, 0.0, 5**-0.5]]),
        coset_matrix=np.ones((5, 1), dtype=np.int64),
    )


def _check_regular(gamma, tol=1e-9, reach: int = 6):
    """The physical plane must miss every 2-face of the cubes Q + gamma + Z^5.

    A 2-face fixes three coordinates at half-integers + gamma, so for each triple
    of coordinates we solve two of the linear equations on the plane and test the
    third modulo 1.
    """
    U = penrose_rows()[:, :2]     # x_j = p . U_j on the physical plane
    for a, b, c in itertools.combinations(range(5), 3):
        M = np.array([U[a], U[b]])
        Minv = np.linalg.inv(M)
        for na, nb in itertools.product(range(-reach, reach + 1), repeat=2):
            rhs = np.array([gamma[a] + 0.5 + na, gamma[b] + 0.5 + nb])
            p = Minv @ rhs
            r = p @ U[c] - gamma[c] - 0.5
            if abs(r - round(r)) < tol:
                raise NonRegularGamma(f"plane meets a 2-face (coords {a},{b},{c})")


def penrose_component_vertices(gamma, k: int) -> np.ndarray:
    """Vertices (in A° coords) of the projection of (Q_5 + gamma) cap {sum x = k}."""
    g = penrose_rows()
    proj = g[:, 2:4]
    pts = []
    # edges of the closed cube: vary coordinate j, others fixed at +-1/2
    for j in range(5):
        others = [i for i in range(5) if i != j]
        for signs in itertools.product((-0.5, 0.5), repeat=4):
            x = np.array(gamma, float).copy()
            for i, sg in zip(others, signs):
                x[i] += sg
            need = k - (x.sum() - x[j])
            if gamma[j] - 0.5 - 1e-12 <= need <= gamma[j] + 0.5 + 1e-12:
                x[j] = need
                pts.append(x @ proj)
    return np.array(pts).reshape(-1, 2)


def penrose_window(gamma, check_regular: bool = True) -> Window:
    gamma = np.asarray(gamma, float)
    if gamma.shape != (5,):
        raise ValueError("gamma must have 5 entries")
    half = gamma.sum() - 0.5
    if abs(half - round(half)) > 1e-9:
        raise NotHalfSum(f"sum(gamma) = {gamma.sum():.12g} is not 1/2 mod 1")
    if check_regular:
        _check_regular(gamma)
    comps = []
    s = gamma.sum()
    for k in range(math.floor(s - 2.5), math.ceil(s + 2.5) + 1):
        V = penrose_component_vertices(gamma, k)
        if len(V) < 3:
            continue
        try:
            hull = ConvexHull(V)
        except Exception:
            continue
        if hull.volume < 1e-12:
            continue
        comps.append(make_component((k,), V))
    return Window(tuple(comps))
