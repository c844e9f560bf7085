"""Full-rank (affine) lattices in R^n and point enumeration.

Everything uses the row convention: a lattice is ``{m @ basis + shift}``
for integer row vectors m, and ``basis = delta**(1/n) * g_factor`` with
``det g_factor = +-1``.

Constructors record their parameters in ``LatticeModel.params`` (JSON-able),
which is enough for :func:`exact_basis` to rebuild the basis in
arbitrary precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import _kernels
from .errors import BoxTooLarge, NonPositiveIndex, SingularBasis, UnsupportedField

DEFAULT_POINT_CAP = 10**8
LOVASZ_DELTA = 0.99


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticeModel:
    basis: np.ndarray
    shift: np.ndarray
    provenance: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "basis", _frozen(self.basis))
        object.__setattr__(self, "shift", _frozen(self.shift))

    @property
    def dim_n(self) -> int:
        return self.basis.shape[0]

    n = dim_n

    @property
    def delta(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    @property
    def g_factor(self) -> np.ndarray:
        return self.basis / self.delta ** (1.0 / self.dim_n)

    def points(self, coeffs) -> np.ndarray:
        coeffs = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=np.int64)
        return _kernels.points_from_coeffs(coeffs, np.ascontiguousarray(self.basis), self.shift.copy())

    def translated(self, x) -> "LatticeModel":
        return LatticeModel(self.basis, self.shift + np.asarray(x, float), self.provenance, self.params)

    def same_as(self, other: "LatticeModel") -> bool:
        return (
            np.array_equal(self.basis, other.basis)
            and np.array_equal(self.shift, other.shift)
            and self.provenance == other.provenance
            and self.params == other.params
        )


@dataclass(frozen=True)
class IntegerTransform:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix, dtype=np.int64))

    @property
    def index(self) -> int:
        return _int_det(self.matrix.tolist())


def _int_det(rows: list[list[int]]) -> int:
    """Exact determinant of a small integer matrix (Bareiss)."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1] if n else 1


def make_lattice(basis, shift=None, provenance: str = "custom", params: dict | None = None) -> LatticeModel:
    basis = np.array(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
        raise SingularBasis(f"basis must be square, got shape {basis.shape}")
    n = basis.shape[0]
    shift = np.zeros(n) if shift is None else np.array(shift, dtype=float)
    scale = float(np.max(np.linalg.norm(basis, axis=1))) if n else 1.0
    if abs(np.linalg.det(basis)) < 1e-12 * scale**n:
        raise SingularBasis("basis is (numerically) singular")
    if params is None:
        params = {"kind": "custom", "basis": basis.tolist()}
    return LatticeModel(basis, shift, provenance, params)


def identity_lattice(n: int) -> LatticeModel:
    return make_lattice(np.eye(n), provenance="identity", params={"kind": "identity", "n": int(n)})


def _squarefree(D: int) -> bool:
    if D < 2:
        return False
    k = 2
    while k * k <= D:
        if D % (k * k) == 0:
            return False
        k += 1
    return True


def quadratic_field(D: int) -> tuple[float, float, int]:
    """(omega, conjugate of omega, discriminant) for the integers of Q(sqrt D)."""
    if not _squarefree(D):
        raise UnsupportedField(f"D={D} must be a squarefree integer > 1")
    r = math.sqrt(D)
    if D % 4 == 1:
        return (1 + r) / 2, (1 - r) / 2, D
    return r, -r, 4 * D


def number_field_lattice(d: int, D: int) -> LatticeModel:
    """Minkowski embedding {(x, conj x) : x in O_K^d} of a real quadratic field."""
    omega, omega_bar, _ = quadratic_field(D)
    n = 2 * d
    basis = np.zeros((n, n))
    for i in range(d):
        basis[2 * i, i], basis[2 * i, d + i] = 1.0, 1.0
        basis[2 * i + 1, i], basis[2 * i + 1, d + i] = omega, omega_bar
    return make_lattice(basis, provenance="number_field", params={"kind": "number_field", "d": int(d), "D": int(D)})


def discriminant(D: int) -> int:
    return quadratic_field(D)[2]


def penrose_rows() -> np.ndarray:
    j = np.arange(5)[:, None]
    ang = 2 * np.pi * j / 5
    rows = np.hstack([np.cos(ang), np.sin(ang), np.cos(2 * ang), np.sin(2 * ang), np.full((5, 1), 2**-0.5)])
    return np.sqrt(2 / 5) * rows


def penrose_lattice() -> LatticeModel:
    return make_lattice(penrose_rows(), provenance="penrose", params={"kind": "penrose"})


def _as_fraction_rows(coeffs) -> list[list[str]]:
    return [[str(Fraction(c)) for c in row] for row in coeffs]


def extension_lattice(base: LatticeModel, ext_vectors=None, *, coeffs=None) -> LatticeModel:
    """Rank-r extension (L x {0}) + sum Z (b_k, e_k) in R^{n+r}.

    Give the extension vectors either directly or as rational coefficient
    rows over the base basis (``coeffs``, entries Fraction/str/int), which
    keeps them exact.
    """
    if np.any(base.shift != 0):
        raise ValueError("extension needs a true lattice (zero shift)")
    n = base.dim_n
    params = {"kind": "extension", "base": base.params}
    if coeffs is not None:
        frac = _as_fraction_rows(coeffs)
        b = np.array([[float(Fraction(c)) for c in row] for row in frac]).reshape(-1, n) @ base.basis
        params["coeffs"] = frac
    else:
        b = np.array(ext_vectors if ext_vectors is not None else [], dtype=float).reshape(-1, n)
        params["vectors"] = b.tolist()
    r = b.shape[0]
    basis = np.zeros((n + r, n + r))
    basis[:n, :n] = base.basis
    basis[n:, :n] = b
    basis[n:, n:] = np.eye(r)
    return make_lattice(basis, provenance="extension", params=params)


def sublattice(base: LatticeModel, t: IntegerTransform) -> LatticeModel:
    if np.any(base.shift != 0):
        raise ValueError("sublattice needs a true lattice (zero shift)")
    if t.index <= 0:
        raise NonPositiveIndex(f"det T = {t.index} must be positive")
    basis = t.matrix.astype(float) @ base.basis
    return make_lattice(basis, provenance="sublattice",
                        params={"kind": "sublattice", "base": base.params, "T": t.matrix.tolist()})


def exact_basis(params: dict, dps: int = 50) -> mpmath.matrix:
    """Rebuild a basis from constructor parameters at ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        kind = params["kind"]
        if kind == "identity":
            return mpmath.eye(params["n"])
        if kind == "custom":
            return mpmath.matrix([[mpmath.mpf(x) for x in row] for row in params["basis"]])
        if kind == "number_field":
            d, D = params["d"], params["D"]
            root = mpmath.sqrt(D)
            omega, omega_bar = ((1 + root) / 2, (1 - root) / 2) if D % 4 == 1 else (root, -root)
            B = mpmath.zeros(2 * d, 2 * d)
            for i in range(d):
                B[2 * i, i], B[2 * i, d + i] = 1, 1
                B[2 * i + 1, i], B[2 * i + 1, d + i] = omega, omega_bar
            return B
        if kind == "penrose":
            B = mpmath.zeros(5, 5)
            s = mpmath.sqrt(mpmath.mpf(2) / 5)
            for j in range(5):
                a = 2 * mpmath.pi * j / 5
                row = [mpmath.cos(a), mpmath.sin(a), mpmath.cos(2 * a), mpmath.sin(2 * a), 1 / mpmath.sqrt(2)]
                for c in range(5):
                    B[j, c] = s * row[c]
            return B
        if kind in ("sublattice", "reduced"):
            base = exact_basis(params["base"], dps)
            T = mpmath.matrix(params["T"] if kind == "sublattice" else params["U"])
            return T * base
        if kind == "extension":
            base = exact_basis(params["base"], dps)
            n = base.rows
            if "coeffs" in params:
                C = mpmath.matrix([[mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator for c in row]
                                   for row in params["coeffs"]])
                b = C * base if C.rows else mpmath.matrix(0, n)
            else:
                b = mpmath.matrix([[mpmath.mpf(x) for x in row] for row in params["vectors"]]) \
                    if params["vectors"] else mpmath.matrix(0, n)
            r = len(params.get("coeffs", params.get("vectors", [])))
            B = mpmath.zeros(n + r, n + r)
            for i in range(n):
                for j in range(n):
                    B[i, j] = base[i, j]
            for k in range(r):
                for j in range(n):
                    B[n + k, j] = b[k, j]
                B[n + k, n + k] = 1
            return B
        raise ValueError(f"unknown lattice kind {kind!r}")


def lll_reduce(lat: LatticeModel, delta: float = LOVASZ_DELTA) -> LatticeModel:
    red, U = _kernels.lll(np.ascontiguousarray(lat.basis), delta)
    U = np.rint(U).astype(np.int64)
    # recompute from U so the reduced basis is an exact integer recombination
    red = U.astype(float) @ lat.basis
    return LatticeModel(red, lat.shift, lat.provenance,
                        {"kind": "reduced", "base": lat.params, "U": U.tolist()})


def lll_transform(basis: np.ndarray, delta: float = LOVASZ_DELTA) -> np.ndarray:
    _, U = _kernels.lll(np.ascontiguousarray(basis, dtype=float), delta)
    return np.rint(U).astype(np.int64)


def lovasz_holds(basis: np.ndarray, delta: float = LOVASZ_DELTA, tol: float = 1e-9) -> bool:
    _, mu, bn = _kernels.gram_schmidt(np.ascontiguousarray(basis, dtype=float))
    n = basis.shape[0]
    size_ok = all(abs(mu[i, j]) <= 0.5 + tol for i in range(n) for j in range(i))
    lov_ok = all(bn[k] >= (delta - mu[k, k - 1] ** 2) * bn[k - 1] * (1 - tol) for k in range(1, n))
    return size_ok and lov_ok


SPLIT_BOUND = 4 * 10**6


def _scaled_reduction(basis, widths):
    scaled = basis / widths
    U = lll_transform(scaled)
    red = U.astype(float) @ scaled
    _, _, bn = _kernels.gram_schmidt(red)
    return U, red, bn


def enumerate_ellipsoid(basis: np.ndarray, center, widths, cap: int = DEFAULT_POINT_CAP, box: bool = True):
    """Integer m with sum(((m @ basis - center) / widths)^2) <= n (a box-enclosing ellipsoid).

    With ``box`` the kernel already drops points outside the scaled unit box
    (with a little slack), which keeps memory proportional to the box count.
    """
    basis = np.asarray(basis, float)
    n = basis.shape[0]
    U, red, bn = _scaled_reduction(basis, widths)
    r2 = n * (1 + 1e-9) + 1e-12
    coeffs, count, overflow = _kernels.enumerate_ball(red, np.ascontiguousarray(center / widths, dtype=float),
                                                      r2, int(cap), 1.0 + 1e-7 if box else 0.0)
    if overflow:
        raise BoxTooLarge(f"more than {cap} candidate points")
    return coeffs @ U


def _search_bound(basis, widths) -> float:
    n = basis.shape[0]
    _, _, bn = _scaled_reduction(basis, widths)
    return float(np.prod(2 * np.sqrt(n / bn) + 1))


def _enumerate_box(basis, shift, lo, hi, cap, depth=0):
    c = 0.5 * (lo + hi)
    w = 0.5 * (hi - lo)
    w = np.maximum(w, 1e-12 * np.maximum(1.0, np.abs(c)))
    if depth < 40 and _search_bound(basis, w) > SPLIT_BOUND:
        # split along the axis with the most lattice layers across it
        layers = 2 * w * np.linalg.norm(np.linalg.inv(basis), axis=1)
        ax = int(np.argmax(layers))
        if layers[ax] > 2:
            mid = c[ax]
            hi_a = hi.copy()
            hi_a[ax] = mid
            lo_b = lo.copy()
            lo_b[ax] = mid
            ca, pa = _enumerate_box(basis, shift, lo, hi_a, cap, depth + 1)
            cb, pb = _enumerate_box(basis, shift, lo_b, hi, cap, depth + 1)
            keep_a = pa[:, ax] < mid
            keep_b = pb[:, ax] >= mid
            return np.vstack([ca[keep_a], cb[keep_b]]), np.vstack([pa[keep_a], pb[keep_b]])
    coeffs = enumerate_ellipsoid(basis, c - shift, w, cap)
    pts = _kernels.points_from_coeffs(np.ascontiguousarray(coeffs), np.ascontiguousarray(basis), shift.copy())
    keep = np.all((pts >= lo) & (pts <= hi), axis=1)
    return coeffs[keep], pts[keep]


def enumerate_in_box(lat: LatticeModel, lo, hi, cap: int = DEFAULT_POINT_CAP):
    """Lattice points in the closed box [lo, hi].

    Returns ``(coeffs, points)`` sorted lexicographically by coefficient.
    Raises BoxTooLarge when the expected count vol(box)/det (plus a boundary
    allowance) exceeds ``cap``; large boxes are enumerated in pieces.
    """
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("box must be bounded")
    n = lat.dim_n
    if np.any(hi < lo):
        return np.zeros((0, n), np.int64), np.zeros((0, n))
    # a-priori count: lattice layers across each side, thickened by one layer
    layers = (hi - lo) * np.linalg.norm(np.linalg.inv(lat.basis), axis=1)
    estimate = float(np.prod(hi - lo + np.linalg.norm(lat.basis, axis=0))) / lat.delta
    if min(estimate, float(np.prod(layers + 1))) > cap:
        raise BoxTooLarge(f"a-priori point bound {estimate:.3g} exceeds cap {cap:.3g}")
    coeffs, pts = _enumerate_box(lat.basis, lat.shift, lo, hi, cap)
    order = np.lexsort(coeffs.T[::-1]) if len(coeffs) else np.zeros(0, int)
    return coeffs[order], pts[order]


def contains(lat: LatticeModel, points, tol: float = 1e-9) -> np.ndarray:
    """Membership test by solving m @ basis = p - shift."""
    pts = np.atleast_2d(points) - lat.shift
    m = np.linalg.solve(lat.basis.T, pts.T).T
    return np.all(np.abs(m - np.rint(m)) < tol, axis=1)


def integer_kernel(K: np.ndarray) -> np.ndarray:
    """Basis (rows) of {m in Z^n : m @ K = 0} for an integer n x k matrix K."""
    K = [list(map(int, r)) for r in np.asarray(K, dtype=np.int64).reshape(len(K), -1)]
    n = len(K)
    k = len(K[0]) if n else 0
    # row operations on [K | I]; echelonise the K part
    rows = [K[i] + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    pivot_row = 0
    for col in range(k):
        while True:
            nz = [i for i in range(pivot_row, n) if rows[i][col] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(rows[i][col]))
            rows[pivot_row], rows[p] = rows[p], rows[pivot_row]
            done = True
            for i in range(pivot_row + 1, n):
                if rows[i][col] != 0:
                    q = rows[i][col] // rows[pivot_row][col]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
                    if rows[i][col] != 0:
                        done = False
            if done:
                break
        if any(rows[i][col] != 0 for i in range(pivot_row, n)):
            pivot_row += 1
    kernel = [r[k:] for r in rows if all(v == 0 for v in r[:k])]
    return np.array(kernel, dtype=np.int64).reshape(-1, n)


def lattice_volume(vectors: np.ndarray) -> float:
    """sqrt(det Gram) of the rows."""
    G = vectors @ vectors.T
    return math.sqrt(max(float(np.linalg.det(G)), 0.0))


def random_lattice(rng: np.random.Generator, n: int, max_cond: float = 100.0) -> LatticeModel:
    """A random basis with condition number below ``max_cond`` (test helper)."""
    while True:
        B = rng.normal(size=(n, n))
        if np.linalg.cond(B) < max_cond:
            return make_lattice(B)


def rows_as_list(a) -> Sequence[Sequence[float]]:
    return np.asarray(a, float).tolist()
