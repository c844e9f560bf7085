import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasilorentz.cutproject import Ball, points_in_region
from quasilorentz.errors import FlowOverflow, NearSingularDirection, NotAScattererPoint
from quasilorentz.homspace import (BallIndicator, BoxIndicator, CylinderSpec, cylinder_empty, estimate_F,
                                   estimate_F_q, first_in_cylinder, flow_matrix, orbit_lattice, rotation_K,
                                   siegel_check)
from quasilorentz.rng import uniform_sphere
from tests_support import penrose_scheme


def test_rotation_identity_and_quarter_turn():
    assert np.array_equal(rotation_K([1.0, 0.0]), np.eye(2))
    K = rotation_K([0.0, 1.0])
    assert np.allclose(K, [[0, -1], [1, 0]])
    assert np.allclose(np.array([0.0, 1.0]) @ K, [1, 0])


@settings(max_examples=60)
@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 3, 4]))
def test_rotation_is_special_orthogonal(seed, d):
    v = uniform_sphere(np.random.default_rng(seed), d)
    if v[0] < -1 + 1e-9:
        return
    K = rotation_K(v)
    assert np.allclose(K @ K.T, np.eye(d), atol=1e-12)
    assert np.linalg.det(K) == pytest.approx(1.0, abs=1e-12)
    e1 = np.zeros(d)
    e1[0] = 1
    assert np.allclose(v @ K, e1, atol=1e-12)


def test_rotation_rejects_antipode_and_non_unit():
    with pytest.raises(NearSingularDirection):
        rotation_K([-1.0, 0.0])
    with pytest.raises(NearSingularDirection):
        rotation_K([-math.cos(1e-8), math.sin(1e-8)])
    with pytest.raises(ValueError):
        rotation_K([2.0, 0.0])


def test_flow_matrix_examples():
    assert np.array_equal(flow_matrix(0.0, 2), np.eye(2))
    assert np.allclose(flow_matrix(math.log(2), 2), np.diag([0.5, 2.0]))
    P = flow_matrix(1.0, 3)
    assert np.allclose(np.diag(P), [math.exp(-2), math.e, math.e])
    assert np.linalg.det(P) == pytest.approx(1.0)
    assert flow_matrix(0.5, 2, 5).shape == (5, 5)
    with pytest.raises(FlowOverflow):
        flow_matrix(501.0, 2)


def test_orbit_lattice_t0_and_determinant(penrose, z2):
    o = orbit_lattice(z2, (0, 0), (1, 0), 0.0)
    assert np.allclose(o.matrix, np.eye(2))
    for s in (z2, penrose):
        base = abs(np.linalg.det(s.lattice.basis))
        v = uniform_sphere(np.random.default_rng(3), s.d)
        o = orbit_lattice(s, (0.1, 0.2), v, 2.5)
        assert o.det == pytest.approx(base, rel=1e-9)


def test_cylinder_shifted(z2):
    o = orbit_lattice(z2, (0.5, 0.5), (1, 0), 0.0)
    assert cylinder_empty(o, z2, CylinderSpec(0.4))
    assert not cylinder_empty(o, z2, CylinderSpec(1.0))
    # at t = 2 the unit cross-section is e^-2 wide physically: the axis y = 0.5 misses every row
    o = orbit_lattice(z2, (0.0, 0.5), (1, 0), 2.0)
    assert cylinder_empty(o, z2, CylinderSpec(50.0))
    assert not cylinder_empty(o, z2, CylinderSpec(50.0, r_shift=0.5 * math.exp(2.0)))


def test_cylinder_z2_short(z2):
    # t = 0, q on a row halfway between centres: the first one with |x_perp| < 1 sits at x_1 = 1/2
    o = orbit_lattice(z2, (0.5, 0.0), (1, 0), 0.0)
    assert first_in_cylinder(o, z2, 5.0) == pytest.approx(0.5)
    assert cylinder_empty(o, z2, CylinderSpec(0.5))
    assert not cylinder_empty(o, z2, CylinderSpec(0.5 + 1e-9))


def _first_brute(s, q, v, t, xi_max):
    rho = math.exp(-t)
    d = s.d
    reach = xi_max / rho ** (d - 1) + 1.0
    pts, _ = points_in_region(s, Ball(tuple(q), reach))
    rel = pts - np.asarray(q)
    x1 = rho ** (d - 1) * rel @ v
    perp2 = np.sum(rel**2, axis=1) - (rel @ v) ** 2
    ok = (x1 > 0) & (x1 < xi_max) & (perp2 / rho**2 < 1.0)
    return float(x1[ok].min()) if np.any(ok) else math.inf


@settings(max_examples=40)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.5))
def test_cylinder_matches_physical_scan(seed, t):
    s = penrose_scheme()
    rng = np.random.default_rng(seed)
    v = uniform_sphere(rng, 2)
    if v[0] < -1 + 1e-5:
        return
    q = rng.uniform(-1, 1, 2)
    o = orbit_lattice(s, q, v, t)
    got = first_in_cylinder(o, s, 3.0)
    want = _first_brute(s, q, v, t, 3.0)
    assert got == pytest.approx(want, abs=1e-9) or (math.isinf(got) and math.isinf(want))


def test_estimate_F_basic(penrose):
    grid = np.r_[1e-9, np.arange(0.25, 4.01, 0.25)]
    est = estimate_F(penrose, grid, t=4.0, n=300, seed=1)
    assert est.ccdf[0] == pytest.approx(1.0, abs=0.02)
    assert np.all(np.diff(est.ccdf) <= 0)
    assert np.array_equal(est.ccdf, est.ccdf_raw)
    assert np.all((est.ci_low <= est.ccdf) & (est.ccdf <= est.ci_high))


def test_estimate_F_q(z2):
    grid = np.r_[1e-9, np.arange(0.1, 2.01, 0.1)]
    est = estimate_F_q(z2, (0, 0), grid, r=0.0, t=4.0, n=300, seed=2)
    assert est.ccdf[0] == pytest.approx(1.0, abs=0.02)
    assert np.all(np.diff(est.ccdf) <= 0)
    assert est.extra["r"] == 0.0


def test_estimate_F_q_rejects_non_scatterer(penrose):
    # coefficient whose internal part leaves the window by a wide margin
    with pytest.raises(NotAScattererPoint):
        estimate_F_q(penrose, (0, 5, 0, -5, 0), [0.5], r=0.0, n=5)
    with pytest.raises(ValueError):
        estimate_F_q(penrose, (0, 0, 0, 0, 0), [0.5], r=-1.0, n=5)


def test_siegel_zero_function(z2):
    assert siegel_check(z2, None) == (0.0, 0.0, 0.0)


def test_siegel_rhs(z2, penrose):
    assert siegel_check(z2, BallIndicator(3.0), n=0) == (0.0, 0.0, 0.0)
    mean, se, rhs = siegel_check(z2, BallIndicator(3.0), t=3.0, n=200, seed=9)
    assert rhs == pytest.approx(9 * math.pi)
    assert abs(mean - rhs) < 4 * se
    mean, se, rhs = siegel_check(penrose, BoxIndicator((-1.0, -1.0), (1.0, 1.0)), t=3.0, n=200, seed=9)
    assert rhs == pytest.approx(4 * penrose.density)
    assert abs(mean - rhs) < 4 * se + 1e-9
