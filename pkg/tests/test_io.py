import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasilorentz import kvfile
from quasilorentz.csvio import compare_estimates, read_estimate, write_estimate
from quasilorentz.errors import GridMismatch, ParseError
from quasilorentz.lattice_core import number_field_lattice, penrose_lattice
from quasilorentz.schemefile import dump_lattice, dump_scheme, load_lattice, load_scheme, scheme_hash
from quasilorentz.schemes import PACKAGED, packaged
from quasilorentz.stats import estimate_from_counts


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip(x):
    assert float(kvfile.fmt_float(x)) == x or (x == 0 and kvfile.fmt_float(x) == "0")


def test_parse_and_dump():
    text = "# hi\n\n[a]\nx = 1 2 3\ny = 0.5\n\n[b]\nname = foo bar\n"
    secs = kvfile.parse(text)
    assert secs["a"].floats("x", 3).tolist() == [1, 2, 3]
    assert secs["a"].float("y") == 0.5
    assert secs["b"]["name"] == "foo bar"
    assert secs["a"].lines["y"] == 5
    again = kvfile.dump([(n, list(s.items())) for n, s in secs.items()], header="hi")
    assert again == text


@pytest.mark.parametrize("text,line", [
    ("[a]\nx = 1\nbogus\n", 3),
    ("x = 1\n", 1),
    ("[a]\n[a]\n", 2),
    ("[a]\nx = 1\nx = 2\n", 3),
    ("[a\n", 1),
    ("[a]\n = 4\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        kvfile.parse(text)
    assert e.value.lineno == line
    assert f"line {line}" in str(e.value)


def test_section_value_errors():
    secs = kvfile.parse("[a]\nx = 1 two\nn = 3\n")
    with pytest.raises(ParseError) as e:
        secs["a"].floats("x")
    assert e.value.lineno == 2
    with pytest.raises(ParseError):
        secs["a"].floats("n", 2)
    with pytest.raises(ParseError):
        secs["a"].need("missing")


@pytest.mark.parametrize("name", sorted(PACKAGED))
def test_scheme_roundtrip_bytes(name):
    s = packaged(name)
    text = dump_scheme(s)
    s2 = load_scheme(text)
    assert dump_scheme(s2) == text
    assert scheme_hash(s2) == scheme_hash(s)
    assert s2.density == pytest.approx(s.density, rel=1e-14)
    assert np.array_equal(s2.lattice.basis, s.lattice.basis)


@pytest.mark.parametrize("lat", [penrose_lattice(), number_field_lattice(2, 5)])
def test_lattice_roundtrip(lat):
    text = dump_lattice(lat)
    L = load_lattice(text)
    assert L.same_as(lat)
    assert dump_lattice(L) == text


def test_malformed_scheme_reports_line():
    text = dump_scheme(packaged("penrose")).replace("basis.3 = -0.5", "basis.3 = -0.5x", 1)
    with pytest.raises(ParseError) as e:
        load_scheme(text)
    assert e.value.lineno == text.splitlines().index(next(l for l in text.splitlines() if "0.5x" in l)) + 1
    with pytest.raises(ParseError):
        load_scheme("[lattice]\nn = 2\nbasis.0 = 1 0\n")


def test_estimate_csv_roundtrip_and_compare(tmp_path):
    grid = np.array([0.0, 0.5, 1.0])
    a = estimate_from_counts(grid, [100, 60, 20], 100)
    write_estimate(tmp_path / "a.csv", a)
    b = read_estimate(tmp_path / "a.csv")
    assert np.array_equal(b.xi_grid, a.xi_grid) and np.array_equal(b.ccdf, a.ccdf)
    ks, ov = compare_estimates(a, b)
    assert ks == 0 and ov.all()
    one = estimate_from_counts(grid, [100, 100, 100], 100)
    zero = estimate_from_counts(grid, [0, 0, 0], 100)
    ks, ov = compare_estimates(one, zero)
    assert ks == 1 and not ov.any()
    with pytest.raises(GridMismatch):
        compare_estimates(a, estimate_from_counts(grid[:2], [1, 1], 1))
    (tmp_path / "bad.csv").write_text("x,y\n1,2\n")
    with pytest.raises(ParseError):
        read_estimate(tmp_path / "bad.csv")
