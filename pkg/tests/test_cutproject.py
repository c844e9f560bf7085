import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasilorentz.cutproject import (Ball, Box, InternalSplit, Shell, build_scheme, delone_radii, density_check,
                                     injectivity_check, interval_window, penrose_split, penrose_window,
                                     points_in_region, recentered_window, in_window_coeff, single_point_window,
                                     translate_scheme)
from quasilorentz.errors import EmptyRegion, NonRegularGamma, NotHalfSum, SplitMismatch
from quasilorentz.lattice_core import identity_lattice, penrose_rows
from quasilorentz.schemes import (coset_union_scheme, honeycomb_points_bruteforce, lattice_scheme,
                                  pure_lattice_scheme)

from oracles import penrose_tiling_density, zonotope_volume

TAU = (1 + math.sqrt(5)) / 2


def test_lattice_scheme_is_lattice(z2):
    assert z2.density == 1.0 and z2.m == 0
    pts, coeffs = points_in_region(z2, Box((0, 0), (10, 10)))
    assert len(pts) == 100
    assert np.array_equal(pts, coeffs.astype(float))
    s3 = lattice_scheme(3)
    assert s3.density == 1.0
    assert len(points_in_region(s3, Box((0, 0, 0), (4, 4, 4)))[0]) == 64


def test_fibonacci_density_and_gaps(fibonacci):
    assert fibonacci.density == pytest.approx(1 / math.sqrt(5), rel=1e-14)
    pts, _ = points_in_region(fibonacci, Box((0.0,), (1.0e4,)))
    assert len(pts) / 1e4 == pytest.approx(fibonacci.density, rel=1e-3)
    x = np.sort(pts[:1000, 0])
    gaps = np.unique(np.round(np.diff(x), 9))
    assert len(gaps) == 2
    assert gaps[1] / gaps[0] == pytest.approx(TAU, abs=1e-6)
    assert np.allclose(gaps, [TAU, TAU**2], atol=1e-9)


def test_penrose_density_oracles(penrose):
    # unimodular lattice: density equals the volume of the internal projection of the unit cube
    d_zono = zonotope_volume(penrose_rows()[:, 2:5])
    assert penrose.density == pytest.approx(d_zono, rel=1e-12)
    # rhombus tilings with edge sqrt(2/5)
    assert penrose.density == pytest.approx(penrose_tiling_density(math.sqrt(2 / 5)), rel=1e-12)
    assert penrose.density == pytest.approx(3.0776835371752544, rel=1e-12)
    assert penrose.covolume_section == pytest.approx(math.sqrt(5) / 5, rel=1e-12) or \
        penrose.window.measure / penrose.covolume_section == pytest.approx(penrose.density)


def _in_zonotope(p, gens, centre):
    """Membership in the 3-d zonotope sum [-1/2,1/2] g_j + centre via its facet normals."""
    ok = np.ones(len(p), bool)
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            n = np.cross(gens[i], gens[j])
            h = 0.5 * np.sum(np.abs(gens @ n))
            ok &= np.abs((p - centre) @ n) < h
    return ok


def test_penrose_window_monte_carlo(penrose):
    gamma = np.full(5, 0.1)
    g = penrose_rows()
    gens = g[:, 2:5]
    centre = gamma @ gens
    rng = np.random.default_rng(7)
    R = 0.5 * np.sum(np.linalg.norm(gens[:, :2], axis=1))
    comps = {c.coset[0]: c for c in penrose.window.components}
    assert sorted(comps) == [-1, 0, 1, 2]
    total = 0.0
    for k, comp in comps.items():
        w = rng.uniform(-R, R, size=(250_000, 2))
        p = np.c_[w, np.full(len(w), k / math.sqrt(5))]
        frac = _in_zonotope(p, gens, centre).mean()
        area = frac * (2 * R) ** 2
        total += area
        assert area == pytest.approx(comp.volume, rel=0.02)
    assert total == pytest.approx(penrose.window.measure, rel=0.005)
    assert penrose.window.measure == pytest.approx(6.8819, abs=1e-4)


def test_penrose_window_errors():
    with pytest.raises(NotHalfSum):
        penrose_window(np.zeros(5))
    with pytest.raises(NonRegularGamma):
        penrose_window([0.5, 0.0, 0.0, 0.0, 0.0])
    w = penrose_window([0.2, 0.1, 0.05, 0.1, 0.05])
    assert len(w.components) == 4


def test_penrose_count_in_disc(penrose):
    pts, _ = points_in_region(penrose, Ball((0.0, 0.0), 50.0))
    assert len(pts) / (math.pi * 2500) == pytest.approx(penrose.density, rel=0.03)


def test_penrose_local_geometry(penrose):
    probe = Box((0.1234, 0.1234), (10.1234, 10.1234))
    packing, covering = delone_radii(penrose, probe)
    edge = math.sqrt(2 / 5)
    # thin-rhombus short diagonal
    assert packing == pytest.approx(edge * 2 * math.sin(math.pi / 10), rel=1e-9)
    assert packing / edge > 0.5          # in unit-edge normalisation
    assert 0.3 < covering < 0.45
    pts, _ = points_in_region(penrose, Box((0, 0), (8, 8)))
    from scipy.spatial import cKDTree
    dd, _ = cKDTree(pts).query(pts, k=2)
    assert np.any(np.isclose(dd[:, 1], edge, atol=1e-9))


def test_density_check_rows(z2, honeycomb):
    rows = density_check(z2, "box", [5, 10], [np.zeros(2), np.array([3.0, -7.0])])
    assert [r["ratio"] for r in rows] == [1.0, 1.0, 1.0, 1.0]
    rows = density_check(honeycomb, "ball", [100.0], [np.array([0.31, 0.17])])
    assert rows[0]["ratio"] == pytest.approx(1.0, abs=0.01)
    with pytest.raises(ValueError):
        density_check(z2, "hexagon", [1.0], [np.zeros(2)])


def test_honeycomb_against_bruteforce(honeycomb):
    assert honeycomb.density == pytest.approx(4 / math.sqrt(3), rel=1e-12)
    lo, hi = np.array([0.0137, 0.0291]), np.array([6.0137, 6.0291])
    pts, _ = points_in_region(honeycomb, Box(tuple(lo), tuple(hi)))
    ref = honeycomb_points_bruteforce(lo, hi)
    key = lambda a: sorted(map(tuple, np.round(a, 9)))
    assert key(pts) == key(ref)
    # every vertex has exactly three neighbours at distance 1/sqrt(3)
    from scipy.spatial import cKDTree
    inner = pts[np.all((pts > lo + 1) & (pts < hi - 1), axis=1)]
    tree = cKDTree(pts)
    counts = [len(tree.query_ball_point(p, 1 / math.sqrt(3) + 1e-9)) - 1 for p in inner]
    assert set(counts) == {3}


def test_coset_union_example():
    s = coset_union_scheme(identity_lattice(2), ["1/3", "1/3"], [0, 1, 2])
    lo, hi = (0.0, 0.0), (3.0, 3.0)
    pts, _ = points_in_region(s, Box(lo, hi))
    grid = np.array([(i, j) for i in range(3) for j in range(3)], float)
    ref = np.vstack([grid + k / 3 for k in range(3)])
    key = lambda a: sorted(map(tuple, np.round(a, 9)))
    assert key(pts) == key(ref)
    assert s.density == pytest.approx(3.0)


def test_injectivity(z2, penrose):
    assert injectivity_check(z2).ok
    assert injectivity_check(penrose).ok
    # Z^3 with a 2-d physical space and the window [0, 1.5] in the third coordinate
    split = InternalSplit(d=2, m=1, m1=1, a_circle_basis=[[1.0]], coset_generators=np.zeros((0, 1)),
                          coset_matrix=np.zeros((3, 0)))
    bad = build_scheme(identity_lattice(3), split, interval_window(0.0, 1.5), check=False)
    cert = injectivity_check(bad)
    assert not cert.ok
    assert cert.witness in [(0, 0, 1), (0, 0, -1)]


def test_split_mismatch():
    split = InternalSplit(d=1, m=1, m1=0, a_circle_basis=np.zeros((0, 1)), coset_generators=[[1.0]],
                          coset_matrix=np.array([[0], [2]]))
    with pytest.raises(SplitMismatch):
        build_scheme(identity_lattice(2), split, single_point_window([(0,)]))


def test_delone_z2(z2):
    p, c = delone_radii(z2, Box((0.3, 0.3), (10.3, 10.3)))
    assert p == pytest.approx(1.0)
    assert c == pytest.approx(math.sqrt(2) / 2, rel=0.05)
    with pytest.raises(EmptyRegion):
        delone_radii(pure_lattice_scheme(identity_lattice(2) if False else _sparse()), Box((0.1, 0.1), (0.2, 0.2)))


def _sparse():
    from quasilorentz.lattice_core import make_lattice
    return make_lattice(np.diag([100.0, 100.0]))


def test_fibonacci_delone(fibonacci):
    p, c = delone_radii(fibonacci, Box((10.0,), (500.0,)))
    assert p == pytest.approx(TAU, rel=1e-9)
    assert c <= TAU**2 / 2 + 1e-9 and c >= TAU / 2


def test_shell_and_regions():
    sh = Shell((0.0, 0.0), 0.5, 2.0)
    x = np.array([[0.9, 0.0], [1.0, 0.0], [1.99, 0.0], [2.0, 0.0]])
    assert sh.contains(x).tolist() == [False, True, True, False]
    assert sh.volume == pytest.approx(math.pi * 4 * 0.75)
    b = Box((0, 0), (1, 1))
    assert b.contains(np.array([[0, 0], [1, 0.5]])).tolist() == [True, False]


def test_recentered_window_palm(penrose):
    # a point y of P sees itself at the origin of the recentred window
    pts, coeffs = points_in_region(penrose, Ball((0.0, 0.0), 2.0))
    y = coeffs[0]
    assert in_window_coeff(penrose, y)
    W = recentered_window(penrose, y)
    assert W.measure == pytest.approx(penrose.window.measure)


def test_translate_scheme(z2):
    t = translate_scheme(z2, [0.5, 0.25])
    pts, _ = points_in_region(t, Box((0, 0), (2, 2)))
    assert len(pts) == 4 and np.allclose(np.sort(pts[:, 1]), [0.25, 0.25, 1.25, 1.25])


@settings(max_examples=25)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(3.0, 12.0))
def test_box_count_is_additive(x, y, T):
    from quasilorentz.schemes import packaged
    s = _penrose_cached()
    mid = x + T / 2
    a = len(points_in_region(s, Box((x, y), (mid, y + T)))[0])
    b = len(points_in_region(s, Box((mid, y), (x + T, y + T)))[0])
    c = len(points_in_region(s, Box((x, y), (x + T, y + T)))[0])
    assert a + b == c


_CACHE = {}


def _penrose_cached():
    from quasilorentz.schemes import packaged
    if "p" not in _CACHE:
        _CACHE["p"] = packaged("penrose")
    return _CACHE["p"]


def _direct_points(s, x, box_lo, box_hi):
    """P(W, L + x) by direct filtering: lattice points of L + x whose absolute internal part lies in W."""
    from quasilorentz.lattice_core import enumerate_in_box, make_lattice
    lat = make_lattice(s.lattice.basis, shift=x)
    wlo, whi = s.window.bbox(s.split)
    lo = np.r_[box_lo, wlo - 1e-6]
    hi = np.r_[box_hi, whi + 1e-6]
    _, pts = enumerate_in_box(lat, lo, hi)
    keep = np.all((pts[:, :s.d] >= box_lo) & (pts[:, :s.d] < box_hi), axis=1)
    keep &= s.window.contains(pts[:, s.d:], s.split)
    return pts[keep, :s.d]


@settings(max_examples=15)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.integers(-1, 1))
def test_translation_consistency(p1, p2, a1, a2, k):
    """P(W, L + x) = P(W - pi_int(x), L) + pi(x), for x with internal part in A."""
    s = _penrose_cached()
    x_int = np.array([a1, a2, k / math.sqrt(5)])
    x = np.r_[p1, p2, x_int]
    lo, hi = np.array([-4.1, -3.9]), np.array([4.2, 4.3])
    lhs = _direct_points(s, x, lo, hi)
    W = s.window.shifted(x_int[:2], (k,))
    from quasilorentz.cutproject import Scheme
    shifted = Scheme(s.lattice, s.split, W, s.covolume_section, s.density)
    rhs, _ = points_in_region(shifted, Box(tuple(lo - x[:2]), tuple(hi - x[:2])))
    rhs = rhs + x[:2]
    key = lambda a: sorted(map(tuple, np.round(a, 8)))
    assert key(lhs) == key(rhs)


@pytest.mark.parametrize("name", ["Z2", "fibonacci", "honeycomb", "penrose"])
def test_injective_means_no_duplicates(name):
    from quasilorentz.schemes import packaged
    s = packaged(name)
    assert injectivity_check(s).ok
    region = Box((-15.0,) * s.d, (15.0,) * s.d) if s.d == 2 else Box((-500.0,), (500.0,))
    pts, _ = points_in_region(s, region)
    from scipy.spatial import cKDTree
    dd, _ = cKDTree(pts).query(pts, k=2)
    assert dd[:, 1].min() > 1e-9
