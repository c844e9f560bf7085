"""Lattice and scheme description files (sectioned key-value text).

Lattice file::

    [lattice]
    n = 2
    provenance = identity
    params = {"kind": "identity", "n": 2}
    basis.0 = 1 0
    basis.1 = 0 1
    shift = 0 0

A scheme file adds ``[scheme]``, ``[split]``, ``[window]`` and one
``[window.component.i]`` section per window component holding the coset
index, the half-spaces ``A y < b`` (each row ``a_1 .. a_m1 b``) and the vertices.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import kvfile
from .cutproject import InternalSplit, Scheme, Window, WindowComponent, build_scheme
from .errors import ParseError
from .kvfile import fmt_ints, fmt_vec
from .lattice_core import LatticeModel, make_lattice

FILE_HEADER = "quasilorentz description file"


def lattice_items(lat: LatticeModel) -> list[tuple[str, str]]:
    items = [("n", str(lat.dim_n)), ("provenance", lat.provenance),
             ("params", json.dumps(lat.params, sort_keys=True, separators=(",", ":")))]
    items += [(f"basis.{i}", fmt_vec(row)) for i, row in enumerate(lat.basis)]
    items.append(("shift", fmt_vec(lat.shift)))
    return items


def lattice_from_section(sec: kvfile.Section) -> LatticeModel:
    n = sec.int("n")
    if n < 1 or n > 16:
        raise ParseError(f"n = {n} out of range 1..16", sec.lines["n"])
    basis = np.array([sec.floats(f"basis.{i}", n) for i in range(n)])
    shift = sec.floats("shift", n) if "shift" in sec else np.zeros(n)
    prov = sec.get("provenance", "custom")
    params = None
    if "params" in sec:
        try:
            params = json.loads(sec["params"])
        except json.JSONDecodeError as e:
            raise ParseError(f"params is not valid JSON ({e.msg})", sec.lines["params"]) from None
    return make_lattice(basis, shift, provenance=prov, params=params)


def dump_lattice(lat: LatticeModel) -> str:
    return kvfile.dump([("lattice", lattice_items(lat))], header=FILE_HEADER)


def load_lattice(text: str) -> LatticeModel:
    secs = kvfile.parse(text)
    if "lattice" not in secs:
        raise ParseError("missing [lattice] section", 1)
    return lattice_from_section(secs["lattice"])


def dump_scheme(s: Scheme) -> str:
    sp = s.split
    split_items = [("d", str(sp.d)), ("m", str(sp.m)), ("m1", str(sp.m1)), ("m2", str(sp.m2))]
    split_items += [(f"a_circle.{i}", fmt_vec(r)) for i, r in enumerate(sp.a_circle_basis)]
    split_items += [(f"coset_generator.{i}", fmt_vec(r)) for i, r in enumerate(sp.coset_generators)]
    if sp.m2:
        split_items += [(f"coset_matrix.{i}", fmt_ints(r)) for i, r in enumerate(sp.coset_matrix)]
    sections = [("lattice", lattice_items(s.lattice)), ("scheme", [("name", s.name)]), ("split", split_items),
                ("window", [("components", str(len(s.window.components)))])]
    for i, c in enumerate(s.window.components):
        items = [("coset", fmt_ints(c.coset)), ("halfspaces", str(len(c.A)))]
        items += [(f"halfspace.{j}", fmt_vec(np.r_[a, b])) for j, (a, b) in enumerate(zip(c.A, c.b))]
        items.append(("vertices", str(len(c.vertices))))
        items += [(f"vertex.{j}", fmt_vec(v)) for j, v in enumerate(c.vertices)]
        sections.append((f"window.component.{i}", items))
    return kvfile.dump(sections, header=FILE_HEADER)


def load_scheme(text: str) -> Scheme:
    secs = kvfile.parse(text)
    for name in ("lattice", "split", "window"):
        if name not in secs:
            raise ParseError(f"missing [{name}] section", 1)
    lat = lattice_from_section(secs["lattice"])
    sp = secs["split"]
    d, m, m1, m2 = sp.int("d"), sp.int("m"), sp.int("m1"), sp.int("m2")
    if d + m != lat.dim_n:
        raise ParseError(f"d + m = {d + m} does not match n = {lat.dim_n}", sp.lines["d"])
    a = np.array([sp.floats(f"a_circle.{i}", m) for i in range(m1)]).reshape(m1, m)
    gens = np.array([sp.floats(f"coset_generator.{i}", m) for i in range(m2)]).reshape(m2, m)
    K = np.array([sp.ints(f"coset_matrix.{i}", m2) for i in range(lat.dim_n)]).reshape(lat.dim_n, m2) \
        if m2 else np.zeros((lat.dim_n, 0), np.int64)
    split = InternalSplit(d=d, m=m, m1=m1, a_circle_basis=a, coset_generators=gens, coset_matrix=K)
    w = secs["window"]
    comps = []
    for i in range(w.int("components")):
        key = f"window.component.{i}"
        if key not in secs:
            raise ParseError(f"missing [{key}] section", w.lines["components"])
        c = secs[key]
        coset = tuple(int(x) for x in c.ints("coset", m2)) if m2 else ()
        h = c.int("halfspaces")
        rows = np.array([c.floats(f"halfspace.{j}", m1 + 1) for j in range(h)]).reshape(h, m1 + 1)
        nv = c.int("vertices")
        verts = np.array([c.floats(f"vertex.{j}", m1) for j in range(nv)]).reshape(nv, m1)
        comps.append(WindowComponent(coset, rows[:, :m1].copy(), rows[:, m1].copy(), verts))
    name = secs["scheme"].get("name", "custom") if "scheme" in secs else "custom"
    return build_scheme(lat, split, Window(tuple(comps)), name=name)


def scheme_hash(s: Scheme) -> str:
    return hashlib.sha256(dump_scheme(s).encode()).hexdigest()


def write_text(path, text: str):
    Path(path).write_text(text)
