"""Independent brute-force oracles shared by the tests."""
import itertools

import numpy as np


def brute_box(lat, lo, hi):
    """Coefficient set of lattice points in the closed box, by scanning every m within the inverse-basis bound."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    inv = np.linalg.inv(lat.basis)
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    m = (corners - lat.shift) @ inv
    mlo = np.floor(m.min(axis=0)).astype(int) - 1
    mhi = np.ceil(m.max(axis=0)).astype(int) + 1
    grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(mlo, mhi)], indexing="ij")
    coeffs = np.stack([g.ravel() for g in grids], axis=1)
    pts = coeffs @ lat.basis + lat.shift
    keep = np.all((pts >= lo) & (pts <= hi), axis=1)
    return {tuple(int(x) for x in c) for c in coeffs[keep]}


def zonotope_volume(gens):
    """Volume of the zonotope sum_j [-1/2, 1/2] g_j, g_j the rows (k x k minors formula)."""
    gens = np.asarray(gens, float)
    k = gens.shape[1]
    return float(sum(abs(np.linalg.det(gens[list(S)])) for S in itertools.combinations(range(len(gens)), k)))


def penrose_tiling_density(edge):
    """Vertex density of a rhombic Penrose tiling with the given edge length.

    Thick and thin rhombi occur in ratio tau : 1 and there is one vertex per
    rhombus on average (Euler), so the density is (tau + 1) / area-weighted sum.
    """
    tau = (1 + 5**0.5) / 2
    thick = edge**2 * np.sin(2 * np.pi / 5)
    thin = edge**2 * np.sin(np.pi / 5)
    return (tau + 1) / (tau * thick + thin)
