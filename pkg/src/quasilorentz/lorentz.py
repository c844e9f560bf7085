"""Free path lengths in the Lorentz gas with scatterers at the points of P.

Scatterers are open balls of radius rho.  A ray tangent to a ball counts as
a hit.  tau1 walks the ray in segments and only looks at scatterer centres
within rho of the current segment, pulled from a lazily filled tile cache.
"""
from __future__ import annotations

import hashlib
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .cutproject import Box, Scheme, delone_radii, in_window_coeff, points_in_region
from .errors import InsideScatterer, NoHitWithinCap, NotAScattererPoint, RetryExhausted, ValidationError
from .homspace import rotation_K
from .parallel import run_chunks
from .rng import sample_rng, stream_key, uniform_sphere

TANGENT_TOL = 1e-12
POINTS_PER_TILE = 400
MAX_RETRIES = 100


def scheme_fingerprint(s: Scheme) -> str:
    h = hashlib.sha256()
    for a in (s.lattice.basis, s.lattice.shift):
        h.update(np.ascontiguousarray(a).tobytes())
    for c in s.window.components:
        h.update(repr(c.coset).encode())
        h.update(np.ascontiguousarray(c.A).tobytes())
        h.update(np.ascontiguousarray(c.b).tobytes())
    return h.hexdigest()


class ScattererField:
    """Scatterer centres of a scheme, generated tile by tile on demand."""

    def __init__(self, s: Scheme, tile_side: float | None = None, max_tiles: int = 50_000):
        self.scheme = s
        self.d = s.d
        self.tile = tile_side or (POINTS_PER_TILE / s.density) ** (1.0 / s.d)
        self.max_tiles = max_tiles
        self._tiles: OrderedDict = OrderedDict()
        self._covering = None

    @property
    def covering_radius(self) -> float:
        if self._covering is None:
            side = 8 * (1.0 / self.scheme.density) ** (1.0 / self.d)
            lo = tuple(np.full(self.d, 0.123 * side))
            hi = tuple(np.full(self.d, 1.123 * side))
            _, self._covering = delone_radii(self.scheme, Box(lo, hi), margin=side)
        return self._covering

    def tile_points(self, idx: tuple) -> np.ndarray:
        pts = self._tiles.get(idx)
        if pts is not None:
            self._tiles.move_to_end(idx)
            return pts
        lo = np.asarray(idx, float) * self.tile
        pts, _ = points_in_region(self.scheme, Box(tuple(lo), tuple(lo + self.tile)))
        self._tiles[idx] = pts
        if len(self._tiles) > self.max_tiles:
            self._tiles.popitem(last=False)
        return pts

    def points_in_box(self, lo, hi) -> np.ndarray:
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        a = np.floor(lo / self.tile).astype(int)
        b = np.floor(hi / self.tile).astype(int)
        chunks = []
        for idx in np.ndindex(*(b - a + 1)):
            pts = self.tile_points(tuple(int(x) for x in a + np.array(idx)))
            if len(pts):
                sel = np.all((pts >= lo) & (pts <= hi), axis=1)
                if np.any(sel):
                    chunks.append(pts[sel])
        return np.vstack(chunks) if chunks else np.zeros((0, self.d))


_FIELDS: dict = {}


def field_for(s: Scheme) -> ScattererField:
    key = scheme_fingerprint(s)
    f = _FIELDS.get(key)
    if f is None:
        if len(_FIELDS) > 8:
            _FIELDS.clear()
        f = _FIELDS[key] = ScattererField(s)
    return f


def _as_field(obj) -> ScattererField:
    return obj if isinstance(obj, ScattererField) else field_for(obj)


def _first_entry(centers: np.ndarray, q, v, rho: float):
    """Entry times t > 0 of the ray into each open ball (inf when it misses)."""
    w = centers - q
    b = w @ v
    perp2 = np.einsum("ij,ij->i", w, w) - b * b
    hit = perp2 <= rho * rho * (1 + TANGENT_TOL)
    disc = np.maximum(rho * rho - perp2, 0.0)
    t = np.where(hit, b - np.sqrt(disc), np.inf)
    return np.where(t > 0, t, np.inf)


def _check_outside(field: ScattererField, q, rho: float, exclude=None):
    near = field.points_in_box(q - rho, q + rho)
    if exclude is not None and len(near):
        near = near[np.any(np.abs(near - exclude) > 1e-9, axis=1)]
    if len(near):
        d2 = np.sum((near - q) ** 2, axis=1)
        if np.any(d2 < rho * rho):
            raise InsideScatterer(near[np.argmin(d2)].tolist())


def tau1(s, q, v, rho: float, cap: float, exclude=None, check: bool = True) -> float:
    """Free path length from q in direction v; NoHitWithinCap beyond cap.

    ``exclude`` is the centre of the scatterer the path starts on (it is ignored).
    """
    f = _as_field(s)
    q = np.asarray(q, float)
    v = np.asarray(v, float)
    if not rho > 0 or not cap > 0:
        raise ValueError("rho and cap must be positive")
    exclude = None if exclude is None else np.asarray(exclude, float)
    if check:
        _check_outside(f, q, rho, exclude)
    step = 4 * f.covering_radius
    s0 = 0.0
    while s0 < cap:
        s1 = min(s0 + step, cap)
        a, b = q + s0 * v, q + s1 * v
        lo = np.minimum(a, b) - rho
        hi = np.maximum(a, b) + rho
        cand = f.points_in_box(lo, hi)
        if exclude is not None and len(cand):
            cand = cand[np.any(np.abs(cand - exclude) > 1e-9, axis=1)]
        if len(cand):
            t = _first_entry(cand, q, v, rho)
            tmin = float(t.min())
            if tmin <= s1:
                return tmin
        s0 = s1
        step = min(2 * step, f.tile)
    raise NoHitWithinCap(cap)


def tau1_bruteforce(s: Scheme, q, v, rho: float, cap: float, exclude=None) -> float:
    """Oracle: all centres within cap + rho of q at once."""
    from .cutproject import Ball
    q = np.asarray(q, float)
    pts, _ = points_in_region(s, Ball(tuple(q), cap + rho))
    if exclude is not None and len(pts):
        pts = pts[np.any(np.abs(pts - np.asarray(exclude)) > 1e-9, axis=1)]
    t = _first_entry(pts, q, np.asarray(v, float), rho)
    tmin = float(t.min()) if len(t) else math.inf
    if tmin > cap:
        raise NoHitWithinCap(cap)
    return tmin


def segment_clear(s, q, v, rho: float, length: float, shape: str = "cylinder", exclude=None) -> bool:
    """No scatterer centre in the open cylinder (or closed capsule) of radius rho around q -> q + length v."""
    f = _as_field(s)
    q = np.asarray(q, float)
    v = np.asarray(v, float)
    a, b = q, q + length * v
    cand = f.points_in_box(np.minimum(a, b) - rho, np.maximum(a, b) + rho)
    if exclude is not None and len(cand):
        cand = cand[np.any(np.abs(cand - np.asarray(exclude)) > 1e-9, axis=1)]
    if len(cand) == 0:
        return True
    w = cand - q
    proj = w @ v
    perp2 = np.einsum("ij,ij->i", w, w) - proj**2
    if shape == "cylinder":
        return not np.any((proj > 0) & (proj < length) & (perp2 < rho * rho))
    if shape == "capsule":
        c = np.clip(proj, 0, length)
        dist2 = np.sum((w - c[:, None] * v) ** 2, axis=1)
        return not np.any(dist2 <= rho * rho * (1 + TANGENT_TOL))
    raise ValueError(f"unknown shape {shape!r}")


# --------------------------------------------------------------- samplers

@dataclass(frozen=True)
class BetaSpec:
    """Offset map beta(v) for starting on a scatterer.

    kind 'vframe': beta(v) K(v) = vector (constant in the frame of v);
    kind 'graze': vframe vector (sqrt(1 - r^2) + pad, 0, ..., r), i.e. constant r;
    kind 'fixed': beta(v) = vector in the fixed frame.
    """
    kind: str = "graze"
    vector: tuple | None = None
    r: float = 0.0
    pad: float = 1e-6

    def vframe(self, d: int) -> np.ndarray:
        if self.kind == "vframe":
            return np.asarray(self.vector, float)
        if self.kind == "graze":
            b = np.zeros(d)
            if self.r < 1:
                b[0] = math.sqrt(1 - self.r**2) + self.pad
            if d > 1:
                b[-1] = self.r
            elif self.r:
                raise ValidationError("r > 0 needs d >= 2")
            return b
        raise ValueError("fixed-frame beta has no constant v-frame vector")

    def beta(self, v, K=None) -> np.ndarray:
        if self.kind == "fixed":
            return np.asarray(self.vector, float)
        K = rotation_K(v) if K is None else K
        return self.vframe(len(v)) @ K.T


def excluded_ok(b) -> bool:
    """(b + R_{>0} e_1) misses the open unit ball."""
    b = np.asarray(b, float)
    if b[0] >= 0:
        return float(b @ b) >= 1.0
    return float(b[1:] @ b[1:]) >= 1.0


@dataclass(frozen=True)
class SamplerSpec:
    regime: str = "thm1"            # thm0 | thm1 | thm2
    q_family: str = "box"           # thm0: box | gaussian
    q_lo: float = 0.0
    q_hi: float = 1.0
    q_mean: tuple | None = None
    q_sd: float = 1.0
    v_family: str = "sphere"        # sphere | cap
    cap_axis: tuple | None = None
    cap_angle: float = math.pi / 2
    s_scale: float = 1.0
    q_fixed: tuple | None = None
    scatterer_coeff: tuple | None = None
    beta: BetaSpec = field(default_factory=BetaSpec)


def draw_v(spec: SamplerSpec, rng, d: int) -> np.ndarray:
    if spec.v_family == "sphere":
        return uniform_sphere(rng, d)
    if spec.v_family == "cap":
        axis = np.zeros(d) if spec.cap_axis is None else np.asarray(spec.cap_axis, float)
        if spec.cap_axis is None:
            axis[-1] = 1.0
        axis = axis / np.linalg.norm(axis)
        if d == 2:
            th = math.atan2(axis[1], axis[0]) + rng.uniform(-spec.cap_angle, spec.cap_angle)
            return np.array([math.cos(th), math.sin(th)])
        cosmin = math.cos(spec.cap_angle)
        while True:
            v = uniform_sphere(rng, d)
            if v @ axis >= cosmin:
                return v
    raise ValueError(f"unknown direction family {spec.v_family!r}")


def draw_q0(spec: SamplerSpec, rng, d: int) -> np.ndarray:
    if spec.q_family == "box":
        q = rng.uniform(spec.q_lo, spec.q_hi, size=d)
    elif spec.q_family == "gaussian":
        mean = np.zeros(d) if spec.q_mean is None else np.asarray(spec.q_mean, float)
        q = mean + spec.q_sd * rng.standard_normal(d)
    else:
        raise ValueError(f"unknown position family {spec.q_family!r}")
    return spec.s_scale * q


@dataclass
class SampleSet:
    idx: np.ndarray
    q: np.ndarray
    v: np.ndarray
    rho: float
    tau: np.ndarray
    scaled: np.ndarray
    censored: np.ndarray
    d: int
    regime: str = ""
    r_values: np.ndarray | None = None
    retries: int = 0
    cap: float = math.inf

    def __len__(self):
        return len(self.idx)

    @property
    def censor_cap_scaled(self) -> float:
        return self.rho ** (self.d - 1) * self.cap

    def records(self):
        for i in range(len(self)):
            yield FreePathSample(self.q[i], self.v[i], self.rho, float(self.tau[i]), float(self.scaled[i]),
                                 bool(self.censored[i]))


@dataclass(frozen=True)
class FreePathSample:
    q: np.ndarray
    v: np.ndarray
    rho: float
    tau: float
    scaled: float
    censored: bool = False


def validate_beta(spec: SamplerSpec, d: int, grid: int = 1000):
    b = spec.beta
    if b.kind in ("vframe", "graze"):
        if not excluded_ok(b.vframe(d)):
            raise ValidationError(f"beta {b.vframe(d).tolist()} violates the exclusion condition")
        return
    rng = np.random.default_rng(0)
    for _ in range(grid):
        v = draw_v(spec, rng, d)
        if not excluded_ok(b.beta(v) @ rotation_K(v)):
            raise ValidationError(f"fixed beta {b.vector} fails the exclusion condition at v={v.tolist()}")


def _sample_chunk(a, b, s, spec, rho, cap, key):
    f = field_for(s)
    d = s.d
    n = b - a
    qs = np.empty((n, d))
    vs = np.empty((n, d))
    tau = np.empty(n)
    cens = np.zeros(n, bool)
    rvals = np.full(n, np.nan)
    retries = 0
    y = None
    if spec.regime == "thm2":
        y = s.lattice.points(np.asarray(spec.scatterer_coeff, dtype=np.int64).reshape(1, -1))[0, :d]
    for i in range(a, b):
        rng = sample_rng(key, i)
        j = i - a
        exclude = None
        if spec.regime == "thm1":
            v = draw_v(spec, rng, d)
            q = np.asarray(spec.q_fixed, float)
        elif spec.regime == "thm0":
            for attempt in range(MAX_RETRIES + 1):
                q = draw_q0(spec, rng, d)
                v = draw_v(spec, rng, d)
                try:
                    _check_outside(f, q, rho)
                    break
                except InsideScatterer:
                    retries += 1
            else:
                raise RetryExhausted(f"sample {i}: {MAX_RETRIES} retries all inside scatterers")
        elif spec.regime == "thm2":
            v = draw_v(spec, rng, d)
            K = rotation_K(v)
            beta = spec.beta.beta(v, K)
            rvals[j] = float(np.linalg.norm((beta @ K)[1:]))
            q = y + rho * beta
            exclude = y
        else:
            raise ValueError(f"unknown regime {spec.regime!r}")
        qs[j], vs[j] = q, v
        try:
            tau[j] = tau1(f, q, v, rho, cap, exclude=exclude, check=spec.regime != "thm0")
        except NoHitWithinCap:
            tau[j] = cap
            cens[j] = True
    return qs, vs, tau, cens, rvals, retries


def sample(s: Scheme, spec: SamplerSpec, rho: float, n: int, seed: int, cap_scaled: float | None = None,
           workers: int | None = 1) -> SampleSet:
    d = s.d
    if cap_scaled is None:
        cap_scaled = 50.0 / s.density
    cap = cap_scaled * rho ** (1 - d)
    if spec.regime == "thm1":
        if spec.q_fixed is None:
            raise ValidationError("thm1 needs a fixed initial point q")
        _check_outside(field_for(s), np.asarray(spec.q_fixed, float), rho)
    if spec.regime == "thm2":
        if spec.scatterer_coeff is None or not in_window_coeff(s, spec.scatterer_coeff):
            raise NotAScattererPoint(f"coefficient {spec.scatterer_coeff} is not a point of P")
        validate_beta(spec, d)
    key = stream_key(seed, 0)
    parts = run_chunks(_sample_chunk, n, workers, s, spec, rho, cap, key)
    if parts:
        qs, vs, tau, cens, rv, ret = (np.concatenate([p[k] for p in parts]) if k < 5 else sum(p[5] for p in parts)
                                      for k in range(6))
    else:
        qs = vs = np.zeros((0, d))
        tau = rv = np.zeros(0)
        cens = np.zeros(0, bool)
        ret = 0
    scaled = rho ** (d - 1) * tau
    return SampleSet(np.arange(n), qs, vs, rho, tau, scaled, cens, d, spec.regime,
                     rv if spec.regime == "thm2" else None, int(ret), cap)


def sample_thm1(s: Scheme, q, lam: SamplerSpec | None, rho: float, n: int, seed: int, **kw) -> SampleSet:
    lam = lam or SamplerSpec()
    spec = SamplerSpec(**{**lam.__dict__, "regime": "thm1", "q_fixed": tuple(np.asarray(q, float))})
    return sample(s, spec, rho, n, seed, **kw)


def sample_thm0(s: Scheme, Lam: SamplerSpec | None, s_scale: float, rho: float, n: int, seed: int, **kw) -> SampleSet:
    Lam = Lam or SamplerSpec()
    spec = SamplerSpec(**{**Lam.__dict__, "regime": "thm0", "s_scale": float(s_scale)})
    return sample(s, spec, rho, n, seed, **kw)


def sample_thm2(s: Scheme, scatterer_coeff, beta_spec: BetaSpec, lam: SamplerSpec | None, rho: float, n: int,
                seed: int, **kw) -> SampleSet:
    lam = lam or SamplerSpec()
    spec = SamplerSpec(**{**lam.__dict__, "regime": "thm2",
                          "scatterer_coeff": tuple(int(c) for c in scatterer_coeff), "beta": beta_spec})
    return sample(s, spec, rho, n, seed, **kw)
