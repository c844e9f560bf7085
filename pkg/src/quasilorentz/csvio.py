"""CSV writers/readers for samples, estimates and direction histograms."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import GridMismatch, ParseError
from .kvfile import fmt_float
from .stats import DistributionEstimate


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_samples(path, S):
    d = S.d
    header = ["idx"] + [f"q_{i + 1}" for i in range(d)] + [f"v_{i + 1}" for i in range(d)] + \
        ["rho", "tau", "scaled", "censored"]
    if S.r_values is not None:
        header.append("r")
    rows = []
    for i in range(len(S)):
        row = [str(int(S.idx[i]))] + [fmt_float(x) for x in S.q[i]] + [fmt_float(x) for x in S.v[i]]
        row += [fmt_float(S.rho), fmt_float(S.tau[i]), fmt_float(S.scaled[i]), str(int(S.censored[i]))]
        if S.r_values is not None:
            row.append(fmt_float(S.r_values[i]))
        rows.append(row)
    _write(path, header, rows)


def write_estimate(path, est: DistributionEstimate):
    rows = [[fmt_float(x), fmt_float(c), fmt_float(lo), fmt_float(hi), str(n)] for x, c, lo, hi, n in est.rows()]
    _write(path, ["xi", "ccdf", "ci_low", "ci_high", "n"], rows)


def read_estimate(path) -> DistributionEstimate:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["xi", "ccdf", "ci_low", "ci_high", "n"]:
        raise ParseError(f"{path}: not an estimate CSV (header {rows[0] if rows else None})", 1)
    try:
        a = np.array([[float(x) for x in r] for r in rows[1:]]).reshape(-1, 5)
    except ValueError as e:
        raise ParseError(f"{path}: {e}") from None
    n = int(a[0, 4]) if len(a) else 0
    return DistributionEstimate(a[:, 0], a[:, 1], a[:, 2], a[:, 3], n)


def write_directions(path, counts):
    _write(path, ["r", "freq", "ci_low", "ci_high"],
           [[str(r), fmt_float(f), fmt_float(lo), fmt_float(hi)] for r, f, lo, hi in counts.rows()])


def write_points(path, pts, coeffs):
    d, n = pts.shape[1], coeffs.shape[1]
    header = [f"p{i + 1}" for i in range(d)] + [f"coeff_{i + 1}" for i in range(n)]
    _write(path, header, [[fmt_float(x) for x in p] + [str(int(c)) for c in k] for p, k in zip(pts, coeffs)])


def compare_estimates(a: DistributionEstimate, b: DistributionEstimate):
    """(KS distance max|F_a - F_b|, per-row CI overlap)."""
    if len(a.xi_grid) != len(b.xi_grid) or not np.allclose(a.xi_grid, b.xi_grid, rtol=0, atol=1e-12):
        raise GridMismatch("the two estimates use different xi grids")
    ks = float(np.max(np.abs(a.ccdf - b.ccdf))) if len(a.xi_grid) else 0.0
    overlap = (a.ci_low <= b.ci_high) & (b.ci_low <= a.ci_high)
    return ks, overlap


def read_text(path) -> str:
    return Path(path).read_text()
