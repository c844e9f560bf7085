"""Command line front end (``ql``).

Exit codes: 0 success, 2 validation failure, 3 usage error, 4 numeric guard.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kvfile
from .csvio import (compare_estimates, read_estimate, write_directions, write_estimate, write_points,
                    write_samples)
from .cutproject import Ball, Box, delone_radii, density_check, injectivity_check, points_in_region
from .errors import QuasiLorentzError, UsageError
from .parallel import default_workers
from .rng import master_seed, sample_rng, stream_key
from .schemefile import dump_scheme, load_scheme, scheme_hash
from .stats import empirical_ccdf

DEFAULT_GRID = "0:10:0.25"


class Parser(argparse.ArgumentParser):
    # no prefix matching: '--c' must never resolve to '--config' or '--cap'
    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def grid(text: str) -> np.ndarray:
    """'a:b:step' (inclusive of b) or a comma list."""
    if ":" in text:
        try:
            a, b, st = (float(x) for x in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step") from None
        if st <= 0 or b < a:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        k = int(math.floor((b - a) / st + 1e-9))
        return a + st * np.arange(k + 1)
    return np.array(floats(text))


def resolve_scheme(spec: str):
    """A packaged scheme name or a scheme file path -> (Scheme, hash)."""
    from .schemes import PACKAGED, packaged
    if spec in PACKAGED:
        s = packaged(spec)
    else:
        p = Path(spec)
        if not p.exists():
            raise UsageError(f"scheme {spec!r} is neither a packaged name ({', '.join(PACKAGED)}) nor a file")
        s = load_scheme(p.read_text())
    return s, scheme_hash(s)


def write_manifest(path, args, argv, shash, seed, t0, extra=None):
    params = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in vars(args).items()
              if k not in ("func",)}
    man = {"command": args.command, "argv": list(argv), "scheme_hash": shash, "params": params, "seed": seed,
           "version": __version__, "wall_time": time.time() - t0}
    if extra:
        man.update(extra)
    Path(path).write_text(json.dumps(man, indent=2, sort_keys=True, default=str) + "\n")


def out_paths(prefix: str, *suffixes):
    p = Path(prefix)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return [Path(f"{prefix}.{s}") for s in suffixes]


# ------------------------------------------------------------------ commands

def cmd_scheme(args, argv):
    from . import schemes
    from .lattice_core import number_field_lattice
    t0 = time.time()
    kind = args.kind
    if kind == "penrose":
        s = schemes.penrose_scheme(tuple(args.gamma))
    elif kind == "fibonacci":
        s = schemes.fibonacci_scheme()
    elif kind == "lattice":
        s = schemes.lattice_scheme(args.dim)
    elif kind == "honeycomb":
        s = schemes.honeycomb_scheme()
    elif kind == "numberfield":
        s = schemes.pure_lattice_scheme(number_field_lattice(args.dim, args.D), name="numberfield")
    elif kind == "custom-file":
        if not args.file:
            raise UsageError("custom-file needs --file")
        s = load_scheme(Path(args.file).read_text())
    else:
        raise UsageError(f"unknown scheme kind {kind!r}")
    cert = injectivity_check(s)
    side = 10 * (1 / s.density) ** (1 / s.d)
    packing, covering = delone_radii(s, Box(tuple(np.full(s.d, 0.1234)), tuple(np.full(s.d, 0.1234 + side))))
    report = {
        "name": s.name, "d": s.d, "m": s.m, "density": s.density, "window_measure": s.window.measure,
        "covolume_section": s.covolume_section, "components": len(s.window.components),
        "component_areas": [c.volume for c in s.window.components],
        "injective": cert.ok, "witness": cert.witness, "packing": packing, "covering": covering,
        "scheme_hash": scheme_hash(s),
    }
    text = dump_scheme(s)
    if args.out:
        Path(args.out).write_text(text)
        Path(str(args.out) + ".report.json").write_text(json.dumps(report, indent=2) + "\n")
        write_manifest(str(args.out) + ".manifest.json", args, argv, report["scheme_hash"], None, t0)
    print(json.dumps(report, indent=2))
    return 0 if cert.ok else 2


def cmd_freepath(args, argv):
    from .lorentz import BetaSpec, SamplerSpec, sample
    t0 = time.time()
    s, shash = resolve_scheme(args.scheme)
    seed = master_seed(args.seed)
    beta = BetaSpec(kind="graze", r=args.beta_r, pad=args.beta_pad)
    if args.beta is not None:
        beta = BetaSpec(kind=args.beta_frame, vector=tuple(args.beta))
    if args.regime == "thm2" and args.coeff is None:
        raise UsageError("regime thm2 needs --coeff (lattice coefficient of the starting scatterer)")
    if args.regime == "thm1" and args.q is None:
        raise UsageError("regime thm1 needs --q")
    spec = SamplerSpec(regime=args.regime, q_family=args.lam, q_lo=args.q_lo, q_hi=args.q_hi, q_sd=args.q_sd,
                       v_family=args.v_family, cap_angle=args.cap_angle, s_scale=args.s_scale,
                       q_fixed=None if args.q is None else tuple(args.q),
                       scatterer_coeff=None if args.coeff is None else tuple(args.coeff), beta=beta)
    S = sample(s, spec, args.rho, args.n, seed, cap_scaled=args.cap, workers=args.workers)
    xi = args.xi_grid
    est = empirical_ccdf(S.scaled, xi, S.censored, S.censor_cap_scaled, regime=args.regime)
    fs, fe, fm = out_paths(args.out, "samples.csv", "estimate.csv", "manifest.json")
    write_samples(fs, S)
    write_estimate(fe, est)
    write_manifest(fm, args, argv, shash, seed, t0,
                   {"censored": int(S.censored.sum()), "retries": S.retries, "grazes": s.grazes.value})
    print(f"{len(S)} samples, {int(S.censored.sum())} censored -> {fs}, {fe}")
    return 0


def cmd_homspace(args, argv):
    from . import homspace
    t0 = time.time()
    s, shash = resolve_scheme(args.scheme)
    seed = master_seed(args.seed)
    homspace.flow_matrix(args.t, s.d)  # overflow guard before any work
    fe, fm = out_paths(args.out, "estimate.csv" if args.mode in ("F", "Fq") else "csv", "manifest.json")
    extra = {}
    if args.mode == "F":
        est = homspace.estimate_F(s, args.xi_grid, args.t, args.n, seed,
                                  q_fixed=None if args.q is None else tuple(args.q), workers=args.workers)
        write_estimate(fe, est)
    elif args.mode == "Fq":
        if args.coeff is None:
            raise UsageError("mode Fq needs --coeff")
        est = homspace.estimate_F_q(s, args.coeff, args.xi_grid, args.r, args.t, args.n, seed, workers=args.workers)
        write_estimate(fe, est)
    elif args.mode == "siegel":
        f = homspace.BallIndicator(args.radius)
        mean, se, rhs = homspace.siegel_check(s, f, args.t, args.n, seed, workers=args.workers)
        rows = [["mc_mean", "mc_stderr", "rhs"], [kvfile.fmt_float(mean), kvfile.fmt_float(se), kvfile.fmt_float(rhs)]]
        fe.write_text("\n".join(",".join(r) for r in rows) + "\n")
        extra = {"mc_mean": mean, "mc_stderr": se, "rhs": rhs}
        print(f"siegel: mean {mean:.6g} +- {se:.3g}, rhs {rhs:.6g}")
    elif args.mode == "cone":
        from .directions import cone_side_E
        cnt = cone_side_E(s, args.c, args.sigma, None, args.t, args.n, seed, workers=args.workers)
        write_directions(fe, cnt)
        extra = {"mean": cnt.mean, "stderr": cnt.stderr}
    write_manifest(fm, args, argv, shash, seed, t0, extra)
    print(f"wrote {fe}")
    return 0


def cmd_directions(args, argv):
    from .directions import ShellSpec, count_in_discs, random_centers
    t0 = time.time()
    s, shash = resolve_scheme(args.scheme)
    seed = master_seed(args.seed)
    rng = sample_rng(stream_key(seed, 4), 0)
    centers = random_centers(rng, args.centers, s.d)
    cnt = count_in_discs(s, ShellSpec(args.c, args.T), args.sigma, centers)
    fc, fm = out_paths(args.out, "csv", "manifest.json")
    write_directions(fc, cnt)
    write_manifest(fm, args, argv, shash, seed, t0, {"mean": cnt.mean, "stderr": cnt.stderr})
    print(f"mean count {cnt.mean:.4f} (sigma {args.sigma}) -> {fc}")
    return 0


def cmd_compare(args, argv):
    a = read_estimate(args.file_a)
    b = read_estimate(args.file_b)
    ks, overlap = compare_estimates(a, b)
    print("xi,ccdf_a,ccdf_b,overlap")
    for x, fa, fb, ok in zip(a.xi_grid, a.ccdf, b.ccdf, overlap):
        print(f"{x:.6g},{fa:.6g},{fb:.6g},{'pass' if ok else 'fail'}")
    verdict = bool(np.all(overlap))
    print(f"KS {ks:.6g} verdict {'pass' if verdict else 'fail'}")
    return 0 if verdict else 2


def cmd_density_check(args, argv):
    t0 = time.time()
    s, shash = resolve_scheme(args.scheme)
    seed = master_seed(args.seed)
    rng = sample_rng(stream_key(seed, 5), 0)
    offsets = [rng.uniform(-100, 100, size=s.d) for _ in range(args.offsets)]
    rows = density_check(s, args.shape, args.T, offsets)
    print("T,offset,count,expected,ratio")
    for r in rows:
        print(f"{r['T']:.6g},{r['offset']},{r['count']},{r['expected']:.6g},{r['ratio']:.6f}")
    if args.out:
        fc, fm = out_paths(args.out, "csv", "manifest.json")
        fc.write_text("T,offset,count,expected,ratio\n" + "".join(
            f"{kvfile.fmt_float(r['T'])},{r['offset']},{r['count']},{kvfile.fmt_float(r['expected'])},"
            f"{kvfile.fmt_float(r['ratio'])}\n" for r in rows))
        write_manifest(fm, args, argv, shash, seed, t0)
    if args.tol is not None:
        last = [r for r in rows if r["T"] == max(args.T)]
        if any(abs(r["ratio"] - 1) > args.tol for r in last):
            return 2
    return 0


def cmd_points(args, argv):
    s, _ = resolve_scheme(args.scheme)
    if args.radius is not None:
        region = Ball(tuple(np.zeros(s.d)), args.radius)
    else:
        region = Box(tuple(args.lo), tuple(args.hi))
    pts, coeffs = points_in_region(s, region)
    write_points(args.out, pts, coeffs)
    print(f"{len(pts)} points -> {args.out}")
    return 0


def cmd_replay(args, argv):
    man = json.loads(Path(args.manifest).read_text())
    argv = list(man["argv"])
    # pin the recorded seed so a changed $QL_SEED cannot alter the replay
    if man.get("seed") is not None and "--seed" not in argv:
        argv += ["--seed", str(man["seed"])]
    return main(argv)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = Parser(prog="ql", description="Cut-and-project quasicrystals and Lorentz-gas free paths.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="key-value config file, one [section] per command")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(sp, seed=True, scheme=True):
        if scheme:
            sp.add_argument("--scheme", default="Z2", help="packaged name (Z2, fibonacci, honeycomb, penrose) or scheme file")
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="master seed (default: $QL_SEED or built-in)")
            sp.add_argument("--workers", type=int, default=default_workers(), help="worker processes")

    sp = sub.add_parser("scheme", help="build and validate a scheme file")
    sp.add_argument("kind", choices=["penrose", "fibonacci", "lattice", "honeycomb", "numberfield", "custom-file"])
    sp.add_argument("--gamma", type=floats, default=[0.1] * 5, help="Penrose offset, 5 numbers summing to 1/2 mod 1")
    sp.add_argument("--dim", type=int, default=2, help="lattice dimension (lattice) or d (numberfield)")
    sp.add_argument("--D", type=int, default=5, help="squarefree D for Q(sqrt D)")
    sp.add_argument("--file", help="scheme file to validate (custom-file)")
    sp.add_argument("--out", help="write the scheme file here")
    sp.set_defaults(func=cmd_scheme)

    sp = sub.add_parser("freepath", help="sample free path lengths")
    common(sp)
    sp.add_argument("--regime", choices=["thm0", "thm1", "thm2"], default="thm0")
    sp.add_argument("--rho", type=float, default=0.02, help="scatterer radius (lattice length units)")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--q", type=floats, help="fixed initial point (thm1)")
    sp.add_argument("--lam", choices=["box", "gaussian"], default="box", help="initial point family (thm0)")
    sp.add_argument("--q-lo", type=float, default=0.0)
    sp.add_argument("--q-hi", type=float, default=1.0)
    sp.add_argument("--q-sd", type=float, default=1.0)
    sp.add_argument("--s-scale", type=float, default=1.0, help="macroscopic scaling s (thm0)")
    sp.add_argument("--v-family", choices=["sphere", "cap"], default="sphere")
    sp.add_argument("--cap-angle", type=float, default=math.pi / 2, help="half-angle of the direction cap (radians)")
    sp.add_argument("--coeff", type=ints, help="lattice coefficient of the starting scatterer (thm2)")
    sp.add_argument("--beta-r", type=float, default=0.0, help="constant impact offset r (thm2)")
    sp.add_argument("--beta-pad", type=float, default=1e-6)
    sp.add_argument("--beta", type=floats, help="explicit beta vector (thm2)")
    sp.add_argument("--beta-frame", choices=["vframe", "fixed"], default="vframe")
    sp.add_argument("--cap", type=float, default=None, help="censoring cap in scaled units (default 50/density)")
    sp.add_argument("--xi-grid", type=grid, default=grid(DEFAULT_GRID))
    sp.add_argument("--out", required=True, help="output prefix")
    sp.set_defaults(func=cmd_freepath)

    sp = sub.add_parser("homspace", help="orbit-lattice estimates")
    common(sp)
    sp.add_argument("--mode", choices=["F", "Fq", "siegel", "cone"], default="F")
    sp.add_argument("--t", type=float, default=6.0, help="flow time (natural log units; rho = e^-t)")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--q", type=floats, help="fixed initial point (mode F; default random)")
    sp.add_argument("--coeff", type=ints, help="scatterer coefficient (mode Fq)")
    sp.add_argument("--r", type=float, default=0.0, help="cylinder offset along e_d (mode Fq)")
    sp.add_argument("--radius", type=float, default=3.0, help="ball radius (mode siegel)")
    sp.add_argument("--c", type=float, default=0.0, help="inner shell ratio (mode cone)")
    sp.add_argument("--sigma", type=float, default=2.0, help="disc volume parameter (mode cone)")
    sp.add_argument("--xi-grid", type=grid, default=grid(DEFAULT_GRID))
    sp.add_argument("--out", required=True, help="output prefix")
    sp.set_defaults(func=cmd_homspace)

    sp = sub.add_parser("directions", help="direction counts in small discs")
    common(sp)
    sp.add_argument("--c", type=float, default=0.0)
    sp.add_argument("--T", type=float, default=300.0)
    sp.add_argument("--sigma", type=float, default=2.0)
    sp.add_argument("--centers", type=int, default=1000)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_directions)

    sp = sub.add_parser("compare", help="compare two estimate CSVs")
    sp.add_argument("file_a")
    sp.add_argument("file_b")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("density-check", help="count ratios over growing regions")
    common(sp)
    sp.add_argument("--shape", choices=["box", "ball"], default="ball")
    sp.add_argument("--T", type=floats, default=[25.0, 50.0, 100.0, 200.0])
    sp.add_argument("--offsets", type=int, default=5)
    sp.add_argument("--tol", type=float, default=None, help="fail (exit 2) if a last-T ratio is off by more")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_density_check)

    sp = sub.add_parser("points", help="dump points of a scheme")
    common(sp, seed=False)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--lo", type=floats, default=[0.0, 0.0])
    sp.add_argument("--hi", type=floats, default=[10.0, 10.0])
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_points)

    sp = sub.add_parser("replay", help="re-run a command from its manifest")
    sp.add_argument("manifest")
    sp.set_defaults(func=cmd_replay)
    return p


def _config_defaults(parser: argparse.ArgumentParser, argv) -> None:
    """Apply [command] sections of --config as parser defaults (flags still win)."""
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    secs = kvfile.parse(Path(known.config).read_text())
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sec in secs.items():
        sp = sub.choices.get(name)
        if sp is None:
            raise UsageError(f"config section [{name}] is not a command")
        acts = {a.dest: a for a in sp._actions}
        vals = {}
        for key, raw in sec.items():
            dest = key.replace("-", "_")
            if dest not in acts:
                raise UsageError(f"config [{name}] has unknown key {key!r} (line {sec.lines[key]})")
            act = acts[dest]
            vals[dest] = act.type(raw) if act.type else raw
        sp.set_defaults(**vals)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _config_defaults(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code) if e.code is not None else 0
        return args.func(args, argv)
    except QuasiLorentzError as e:
        print(f"ql: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except (FileNotFoundError, IsADirectoryError) as e:
        print(f"ql: {e}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
