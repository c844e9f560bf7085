"""KS distance between scaled free path samples at successive scatterer radii.

Fixed-start regimes (thm1 with a fixed q, thm2 from a scatterer) approach the
Boltzmann-Grad limit only at rate O(rho): first hits on the few centres within
distance O(1) of the start put mass ~rho * sum 1/|p - q| at scaled lengths
~rho |p - q|, and that lump moves with rho.  For thm2 on Z2 from a lattice
point the four nearest neighbours alone carry 4 arcsin(rho) / pi.

    python scripts/rho_convergence.py --scheme penrose --regime thm1 --rhos 0.05,0.02,0.01,0.005
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from _config import dump, from_argv
from quasilorentz.lorentz import BetaSpec, sample_thm0, sample_thm1, sample_thm2
from quasilorentz.schemes import packaged
from quasilorentz.stats import ks_distance


@dataclass
class Config:
    """Scaled free path KS distance between consecutive radii."""
    scheme: str = "Z2"
    regime: str = "thm2"                 # thm0 | thm1 | thm2
    rhos: tuple[float, ...] = (0.05, 0.02, 0.01, 0.005)
    n: int = 10_000
    seed: int = 1
    q: tuple[float, ...] = (0.2137, 0.0712)
    coeff: tuple[int, ...] = (0, 0)
    cap: float = 50.0
    workers: int = 1


def draw(cfg: Config, s, rho, seed):
    kw = dict(cap_scaled=cfg.cap, workers=cfg.workers)
    if cfg.regime == "thm0":
        return sample_thm0(s, None, 1.0, rho, cfg.n, seed, **kw)
    if cfg.regime == "thm1":
        return sample_thm1(s, cfg.q, None, rho, cfg.n, seed, **kw)
    beta = BetaSpec(kind="vframe", vector=(1 + 1e-6,) + (0.0,) * (s.d - 1))
    return sample_thm2(s, cfg.coeff, beta, None, rho, cfg.n, seed, **kw)


def run(cfg: Config) -> list[dict]:
    s = packaged(cfg.scheme)
    samples = {rho: draw(cfg, s, rho, cfg.seed + i) for i, rho in enumerate(cfg.rhos)}
    rows = []
    for a, b in zip(cfg.rhos, cfg.rhos[1:]):
        row = {"rho_a": a, "rho_b": b, "ks": ks_distance(samples[a].scaled, samples[b].scaled)}
        if cfg.regime == "thm2" and cfg.scheme == "Z2":
            # the nearest-neighbour lump sits at scaled ~rho(1 - rho) with mass 4 arcsin(rho)/pi
            lump = [float(np.mean(np.abs(samples[r].scaled - r * (1 - r)) < 2 * r * r)) for r in (a, b)]
            row.update(lump_a=lump[0], lump_b=lump[1],
                       lump_pred_a=4 * math.asin(a) / math.pi, lump_pred_b=4 * math.asin(b) / math.pi)
        rows.append(row)
    return rows


def main(argv=None) -> int:
    cfg = from_argv(Config, argv)
    print("# " + dump(cfg))
    rows = run(cfg)
    keys = list(rows[0]) if rows else []
    print(",".join(keys))
    for r in rows:
        print(",".join(f"{r[k]:.6g}" for k in keys))
    return 0


if __name__ == "__main__":
    sys.exit(main())
