"""Command-line driver: exponent tables, profile and curve CSVs, and the verification suite.

Exit codes: 0 success, 1 verification failure, 2 usage or solver error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import appell, pde_verify, verify
from ._roots import BracketExhausted, monotone_root
from .config import ConfigError, RunConfig, load_config
from .exponents import (
    exponent_table,
    matching_residual,
    profile_for_alpha,
    solve_alpha,
)
from .profile_ode import (
    IntegrationError,
    ProblemParams,
    Sign,
    TangencyError,
    Unsupported,
)
from .shooting import Side, ZeroAbsent, inverse_zero_map, shoot_origin, zero_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SOLVER_ERRORS = (BracketExhausted, TangencyError, IntegrationError, Unsupported, ZeroAbsent,
                 ArithmeticError)

ALPHA_COLUMNS = ["k", "sign", "alpha", "beta", "residual", "ident_check", "bracket_lo",
                 "bracket_hi"]

# (column, sign, k, side) of the sweep curves
SWEEP_CURVES = (
    ("alpha_plus", Sign.PLUS, 1, Side.FROM_ORIGIN),
    ("alpha_minus", Sign.MINUS, 1, Side.FROM_ORIGIN),
    ("alpha_tilde_plus", Sign.PLUS, 1, Side.FROM_INFINITY),
    ("alpha_tilde_minus", Sign.MINUS, 1, Side.FROM_INFINITY),
    ("alpha_plus_2", Sign.PLUS, 2, Side.FROM_ORIGIN),
    ("alpha_minus_2", Sign.MINUS, 2, Side.FROM_ORIGIN),
)

# (exponent label, origin curve, infinity curve, start sign, k)
SWEEP_CROSSINGS = (
    ("alpha-_1", "alpha_minus", "alpha_tilde_plus", Sign.MINUS, 1),
    ("alpha+_1", "alpha_plus", "alpha_tilde_minus", Sign.PLUS, 1),
    ("alpha+_2", "alpha_plus_2", "alpha_tilde_plus", Sign.PLUS, 2),
    ("alpha-_2", "alpha_minus_2", "alpha_tilde_minus", Sign.MINUS, 2),
)


class UsageError(ValueError):
    pass


# -- output helpers ----------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _out(cfg: RunConfig, given: Optional[str], default: str) -> Path:
    return Path(given) if given else cfg.out_path / default


def _pool_map(fn, items: list, workers: int) -> list:
    """Map in input order; serial when one worker is requested."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# -- commands ------------------------------------------------------------------------


def cmd_alpha(args, cfg: RunConfig) -> int:
    N = cfg.N
    if args.max_k is not None:
        if args.max_k < 1:
            raise UsageError("--max-k must be >= 1")
        table = exponent_table(args.max_k, N, tol=cfg.alpha_tol, workers=cfg.workers,
                               strict=False)
        records = table.rows()
        bad = [name for name, ok, _ in table.invariant_checks() if not ok]
        for name in bad:
            print(f"warning: invariant violated: {name}", file=sys.stderr)
    else:
        if args.k is None or args.sign is None:
            raise UsageError("give --k and --sign, or --max-k")
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        records = [solve_alpha(args.k, args.sign, N, tol=cfg.alpha_tol)]
    rows = [[r.as_row()[c] for c in ALPHA_COLUMNS] for r in records]
    print(",".join(ALPHA_COLUMNS))
    for row in rows:
        print(",".join(fmt(v) for v in row))
    path = write_csv(_out(cfg, args.out, f"alpha_N{N}.csv"), ALPHA_COLUMNS, rows)
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _profile_rows(prof, S: float, points: int):
    end = min(S, prof.end)
    s = np.union1d(np.linspace(0.0, end, points), [z for z in prof.zeros if z <= end])
    f, fp = prof(s)
    idx = prof.piece_index(s)
    branch = [prof.pieces[i].branch.value for i in idx]
    return s, np.atleast_1d(f), np.atleast_1d(fp), branch, idx


def cmd_profile(args, cfg: RunConfig) -> int:
    N = cfg.N
    prof, k = profile_for_alpha(args.alpha, args.sign, N, matching_tol=cfg.matching_tol,
                                max_zeros=cfg.max_zeros)
    s, f, fp, branch, idx = _profile_rows(prof, cfg.S_max, args.points)
    tail = prof.tail.kind.value
    path = write_csv(_out(cfg, args.out, f"profile_{Sign.parse(args.sign).label}_N{N}.csv"),
                     ["s", "f", "f_prime", "branch", "piece_index", "tail"],
                     zip(s, f, fp, branch, idx, [tail] * s.size))
    zeros = ", ".join(f"{z:.12g}" for z in prof.zeros)
    label = f"eigen-profile with k={k}" if k else "origin shot"
    print(f"{label}; zeros: {zeros or 'none'}; tail: {tail}")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _sweep_point(job):
    s, N = job
    out = []
    for _, sign, k, side in SWEEP_CURVES:
        try:
            out.append(inverse_zero_map(s, sign, k, side, N))
        except (*SOLVER_ERRORS, ValueError):
            out.append(math.nan)
    return out


def parse_range(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise UsageError(f"--s-range must look like lo:hi:n, got {text!r}") from exc
    if not (0 < lo < hi and n >= 2):
        raise UsageError("--s-range needs 0 < lo < hi and n >= 2")
    return lo, hi, n


def sweep_intersections(s: np.ndarray, curves: dict, N: int) -> list[tuple]:
    """Crossings of origin and infinity curves, refined on the matching residual."""
    found = []
    for label, a_name, b_name, sign0, k in SWEEP_CROSSINGS:
        a, b = curves[a_name], curves[b_name]
        d = a - b
        for i in range(len(s) - 1):
            if not (np.isfinite(d[i]) and np.isfinite(d[i + 1])) or d[i] * d[i + 1] > 0:
                continue
            lo = float(np.min([a[i], a[i + 1], b[i], b[i + 1]]))
            hi = float(np.max([a[i], a[i + 1], b[i], b[i + 1]]))

            def res(al):
                try:
                    return matching_residual(al, sign0, k, N)
                except Unsupported:
                    return math.inf

            try:
                alpha = monotone_root(res, lo, hi, xtol=1e-12)
            except BracketExhausted:
                continue
            z = zero_map(alpha, sign0, k, Side.FROM_ORIGIN, N).value
            found.append((label, a_name, b_name, z, alpha))
    return found


def cmd_sweep(args, cfg: RunConfig) -> int:
    from .verify import heat_polynomial_zeros

    N = cfg.N
    lo, hi, n = parse_range(args.s_range)
    s = np.linspace(lo, hi, n)
    values = _pool_map(_sweep_point, [(float(x), N) for x in s], cfg.workers)
    names = [c[0] for c in SWEEP_CURVES]
    arr = np.array(values, dtype=float).reshape(n, len(names))
    path = write_csv(_out(cfg, args.out, f"sweep_N{N}.csv"), ["s"] + names,
                     ([x] + list(row) for x, row in zip(s, arr)))
    curves = {name: arr[:, j] for j, name in enumerate(names)}
    inter = sweep_intersections(s, curves, N)
    stem = path.with_suffix("")
    write_csv(Path(f"{stem}_intersections.csv"), ["exponent", "curve_a", "curve_b", "s", "alpha"],
              inter)
    heat = []
    for deg in (2, 4, 6):
        oracle = heat_polynomial_zeros(deg, N)[0]
        shot = shoot_origin(ProblemParams(N, float(deg), Sign.PLUS), fixed_branch=True).zeros[0]
        heat.append((deg, float(deg), oracle, shot))
    write_csv(Path(f"{stem}_heat.csv"), ["degree", "alpha", "s_oracle", "s_shooting"], heat)
    for row in inter:
        print(f"{row[0]}: {row[1]} meets {row[2]} at s={row[3]:.12g}, alpha={row[4]:.12g}")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    dims = (args.dim,) if args.dim is not None else (cfg.N,)
    verify.TABLE_WORKERS = max(1, min(cfg.workers, 2))
    results = verify.run_suite(args.suite, dims)
    for res in results:
        print(res.line())
        if args.verbose or not res.ok:
            for c in res.checks:
                if args.verbose or not c.ok:
                    print("    " + c.line())
    summary = {"suite": args.suite, "dims": list(dims), "ok": all(r.ok for r in results),
               "criteria": [r.summary() for r in results]}
    text = json.dumps(summary, sort_keys=True)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return EXIT_OK if summary["ok"] else EXIT_FAIL


def cmd_appell(args, cfg: RunConfig) -> int:
    N = cfg.N
    prof, k = profile_for_alpha(args.alpha, args.sign, N, matching_tol=cfg.matching_tol,
                                max_zeros=cfg.max_zeros)
    pair = appell.appell_transform(prof)
    end = min(cfg.S_max, prof.end)
    r = np.linspace(0.0, end, args.points)
    f, _ = prof(r)
    g, _ = pair.dual(r)
    path = write_csv(_out(cfg, args.out, f"appell_{Sign.parse(args.sign).label}_N{N}.csv"),
                     ["r", "f", "psi", "g"], zip(r, np.atleast_1d(f), pair.psi(r), g))
    print(f"beta = {pair.beta:.12g}; tail lambda = {pair.ell:g}; "
          f"dual residual = {appell.dual_residual_max(pair):.3e}")
    if k:
        d = appell.decay_check(pair)
        print(f"tail limit of exp(l r^2/4) r^-alpha g: {d.limit:.12g} "
              f"({'converged' if d.converged else 'not converged'})")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_evolve(args, cfg: RunConfig) -> int:
    N = cfg.N
    sign = Sign.parse(args.sign)
    alpha = args.alpha if args.alpha is not None else solve_alpha(1, sign, N).alpha
    prof, k = profile_for_alpha(alpha, sign, N, matching_tol=cfg.matching_tol,
                                max_zeros=cfg.max_zeros)
    f0 = float(prof(0.0)[0])
    if args.lipschitz_demo:
        taus = 2.0 ** -np.arange(1, 11)
        tr = pde_verify.staged_center_trace(prof, taus, args.h or 1 / 200)
        rep = pde_verify.lipschitz_demo(tr, alpha, taus)
        w0 = [tr.at(-x) for x in taus]
        path = write_csv(_out(cfg, args.out, f"lipschitz_N{N}.csv"), ["tau", "w0", "quotient"],
                         zip(taus, w0, rep.quotients))
        print(f"fitted slope {rep.slope:.6g}; alpha/2 - 1 = {rep.expected_slope:.6g}; "
              f"relative error {rep.relative_error:.3e}; "
              f"quotients {'bounded' if rep.bounded else 'unbounded'}")
    else:
        if not -1 < args.t_end < 0:
            raise UsageError("--t-end must lie in (-1, 0)")
        boundary = "selfsimilar" if k else "frozen"
        if not k:
            print("alpha is not an eigen-homogeneity: frozen outer boundary", file=sys.stderr)
        tr = pde_verify.evolve_profile(prof, args.t_end, args.h or cfg.pde_h, boundary=boundary)
        ratio = tr.ratio(alpha, f0)
        path = write_csv(_out(cfg, args.out, f"evolve_N{N}.csv"), ["t", "w0", "ratio"],
                         zip(tr.t, tr.w0, ratio))
        print(f"ratio range [{ratio.min():.8f}, {ratio.max():.8f}]")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--dim", type=int, help="space dimension N")
    common.add_argument("--workers", type=int, help="worker processes (overrides SSS_THREADS)")
    common.add_argument("--horizon", type=float, help="profile horizon S_max")
    common.add_argument("--out-dir", help="directory for default output files")

    p = argparse.ArgumentParser(prog="selfsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("alpha", parents=[common], help="eigen-homogeneities")
    a.add_argument("--k", type=int)
    a.add_argument("--sign", choices=["plus", "minus"])
    a.add_argument("--max-k", type=int)
    a.add_argument("--out")
    a.set_defaults(func=cmd_alpha)

    pr = sub.add_parser("profile", parents=[common], help="sample a profile")
    pr.add_argument("--alpha", type=float, required=True)
    pr.add_argument("--sign", choices=["plus", "minus"], required=True)
    pr.add_argument("--points", type=int, default=2000)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_profile)

    sw = sub.add_parser("sweep", parents=[common], help="inverse zero-map curves")
    sw.add_argument("--s-range", required=True, help="lo:hi:n")
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", parents=[common], help="acceptance suite")
    v.add_argument("--suite", choices=verify.SUITES, default="all")
    v.add_argument("--json", help="also write the JSON summary here")
    v.add_argument("--verbose", action="store_true")
    v.set_defaults(func=cmd_verify)

    ap = sub.add_parser("appell", parents=[common], help="dual profile g = psi f")
    ap.add_argument("--alpha", type=float, required=True)
    ap.add_argument("--sign", choices=["plus", "minus"], required=True)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--out")
    ap.set_defaults(func=cmd_appell)

    ev = sub.add_parser("evolve", parents=[common], help="radial PDE evolution")
    ev.add_argument("--alpha", type=float, help="default: the first exponent of --sign")
    ev.add_argument("--sign", choices=["plus", "minus"], default="minus")
    ev.add_argument("--t-end", type=float, default=-0.05)
    ev.add_argument("--h", type=float)
    ev.add_argument("--lipschitz-demo", action="store_true")
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_evolve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, {"N": args.dim, "workers": args.workers,
                                        "horizon": args.horizon, "out_dir": args.out_dir})
        if getattr(args, "points", 2) < 2:
            raise UsageError("--points must be >= 2")
        if getattr(args, "alpha", None) is not None and not args.alpha > 0:
            raise UsageError("--alpha must be > 0")
        if getattr(args, "h", None) is not None and not args.h > 0:
            raise UsageError("--h must be > 0")
        return args.func(args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SOLVER_ERRORS as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
