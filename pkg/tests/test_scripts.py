"""The experiment scripts run end to end on small configs."""
import importlib
import sys
from dataclasses import fields
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"
sys.path.insert(0, str(SCRIPTS))

_config = importlib.import_module("_config")


def load(name):
    return importlib.import_module(name)


@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=5), st.integers(1, 10**6))
def test_config_flags_round_trip(rhos, n):
    mod = load("rho_convergence")
    argv = ["--rhos", ",".join(repr(r) for r in rhos), "--n", str(n)]
    cfg = _config.from_argv(mod.Config, argv)
    assert cfg.rhos == tuple(rhos) and cfg.n == n
    assert cfg.scheme == mod.Config().scheme


@pytest.mark.parametrize("name", ["rho_convergence", "cross_route", "directions_study"])
def test_every_field_is_a_flag(name):
    cfg_cls = load(name).Config
    p = _config.build_parser(cfg_cls)
    dests = {a.dest for a in p._actions}
    assert {f.name for f in fields(cfg_cls)} <= dests


def test_rho_convergence_small(capsys):
    mod = load("rho_convergence")
    rows = mod.run(mod.Config(n=400, rhos=(0.05, 0.02)))
    assert len(rows) == 1 and 0 <= rows[0]["ks"] <= 1
    assert rows[0]["lump_pred_a"] == pytest.approx(0.0637, abs=1e-4)
    assert mod.main(["--regime", "thm1", "--scheme", "penrose", "--n", "100", "--rhos", "0.05,0.03"]) == 0
    assert "rho_a,rho_b,ks" in capsys.readouterr().out


def test_cross_route_small():
    mod = load("cross_route")
    r = mod.run(mod.Config(t=3.0, n=200))
    assert len(r["overlap"]) == 17
    assert r["overlap"].mean() > 0.8


def test_directions_study_small():
    mod = load("directions_study")
    r = mod.run(mod.Config(T=80.0, centers=100, cone_n=100, t=3.0))
    assert r["exact_mean"] == pytest.approx(2.0, rel=0.03)
    assert r["cone"].freq.sum() == pytest.approx(1.0)
