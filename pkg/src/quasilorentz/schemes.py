"""Packaged schemes: Z^d, Fibonacci chain, honeycomb, Penrose vertex set."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .cutproject import (InternalSplit, Scheme, Window, build_scheme, interval_window,
                         make_component, penrose_split, penrose_window, single_point_window)
from .lattice_core import (LatticeModel, extension_lattice, identity_lattice, make_lattice,
                           number_field_lattice, penrose_lattice)

PENROSE_GAMMA = (0.1, 0.1, 0.1, 0.1, 0.1)
TAU = (1 + math.sqrt(5)) / 2


def trivial_split(d: int) -> InternalSplit:
    return InternalSplit(d=d, m=0, m1=0, a_circle_basis=np.zeros((0, 0)),
                         coset_generators=np.zeros((0, 0)), coset_matrix=np.zeros((d, 0)))


def extension_split(base: InternalSplit, r: int) -> InternalSplit:
    """Split of an extension of rank r: the new internal directions are purely discrete."""
    m = base.m + r
    a = np.zeros((base.m1, m))
    a[:, :base.m] = base.a_circle_basis
    gens = np.zeros((base.m2 + r, m))
    gens[:base.m2, :base.m] = base.coset_generators
    gens[base.m2:, base.m:] = np.eye(r)
    K = np.zeros((base.n + r, base.m2 + r), dtype=np.int64)
    K[:base.n, :base.m2] = base.coset_matrix
    K[base.n:, base.m2:] = np.eye(r, dtype=np.int64)
    return InternalSplit(d=base.d, m=m, m1=base.m1, a_circle_basis=a, coset_generators=gens, coset_matrix=K)


def lattice_scheme(d: int = 2) -> Scheme:
    return build_scheme(identity_lattice(d), trivial_split(d), single_point_window(), name=f"Z{d}")


def pure_lattice_scheme(lat: LatticeModel, name: str = "lattice") -> Scheme:
    return build_scheme(lat, trivial_split(lat.dim_n), single_point_window(), name=name)


def fibonacci_scheme(lo: float = 0.0, hi: float = 1.0) -> Scheme:
    lat = number_field_lattice(1, 5)
    split = InternalSplit(d=1, m=1, m1=1, a_circle_basis=[[1.0]], coset_generators=np.zeros((0, 1)),
                          coset_matrix=np.zeros((2, 0)))
    return build_scheme(lat, split, interval_window(lo, hi), name="fibonacci")


def triangular_lattice() -> LatticeModel:
    return make_lattice([[1.0, 0.0], [0.5, math.sqrt(3) / 2]])


def honeycomb_scheme() -> Scheme:
    """Triangular lattice plus its translate by (2/3)(a1 + a2): the honeycomb vertex set."""
    base = triangular_lattice()
    lat = extension_lattice(base, coeffs=[[Fraction(2, 3), Fraction(2, 3)]])
    split = extension_split(trivial_split(2), 1)
    return build_scheme(lat, split, single_point_window([(0,), (1,)]), name="honeycomb")


def coset_union_scheme(base: LatticeModel, coeffs, cosets) -> Scheme:
    """Union of translates of a d-dim lattice by k*b for k in the chosen cosets (rank-1 extension)."""
    lat = extension_lattice(base, coeffs=[coeffs])
    split = extension_split(trivial_split(base.dim_n), 1)
    return build_scheme(lat, split, single_point_window([(int(k),) for k in cosets]), name="coset_union")


def penrose_scheme(gamma=PENROSE_GAMMA) -> Scheme:
    return build_scheme(penrose_lattice(), penrose_split(), penrose_window(gamma), name="penrose")


PACKAGED = {
    "Z2": lambda: lattice_scheme(2),
    "fibonacci": fibonacci_scheme,
    "honeycomb": honeycomb_scheme,
    "penrose": penrose_scheme,
}


def packaged(name: str) -> Scheme:
    try:
        return PACKAGED[name]()
    except KeyError:
        raise ValueError(f"unknown packaged scheme {name!r}; choose from {sorted(PACKAGED)}") from None


def honeycomb_points_bruteforce(lo, hi) -> np.ndarray:
    """Independent honeycomb generator: hexagon-centre lattice minus centres, kept in [lo, hi)."""
    # a honeycomb is the triangular lattice scaled by 1/sqrt3 and rotated, minus a
    # sublattice of index 3 (the hexagon centres)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    s = 1 / math.sqrt(3)
    a1 = s * np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)])
    a2 = s * np.array([0.0, 1.0])
    R = int(np.ceil(4 * max(np.abs(lo).max(), np.abs(hi).max()) / s)) + 4
    origin = 2 * a1  # a vertex whose bonds point at 90, 210 and 330 degrees
    out = []
    for i in range(-R, R + 1):
        for j in range(-R, R + 1):
            if (i - j) % 3 == 0:
                continue  # hexagon centres
            p = i * a1 + j * a2 - origin
            if np.all(p >= lo) and np.all(p < hi):
                out.append(p)
    return np.array(out).reshape(-1, 2)

