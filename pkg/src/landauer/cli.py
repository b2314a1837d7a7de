"""Command-line interface: ``landauer {bounds,run,kstep,verify,witnesses,counterexamples}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from math import log
from typing import Iterable, Sequence

import numpy as np

from .bounds import NChoice, compute_M, n_value, theorem2_negative_branch
from .processes import (KStepSpec, ProcessSpec, build_kstep_process, correlation_counterexamples,
                        deltaS_range_witnesses, memory_erasure_spec, memory_process_report,
                        pureness_bound_check, run_process)
from .quantum import HermitianOp, QState, haar_unitary, random_state
from .scenario import ScenarioError, load_scenario, run_scenario, to_plain
from .thermo import Reservoir

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CURVE_COLUMNS = ["delta_s", "landauer", "quadratic", "best", "swap_envelope"]
KSTEP_COLUMNS = ["k", "beta_delta_Q", "gap", "upper_bound", "lower_bound"]
ORDER_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    """12 significant digits; infinities as ``inf``."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v) + 0.0
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def emit_table(columns: Sequence[str], rows: Iterable[Sequence], fmt_name: str, out) -> None:
    rows = [[fmt(x) for x in r] for r in rows]
    if fmt_name == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        return
    widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c)
              for i, c in enumerate(columns)]
    out.write("  ".join(c.rjust(w) for c, w in zip(columns, widths)) + "\n")
    for r in rows:
        out.write("  ".join(x.rjust(w) for x, w in zip(r, widths)) + "\n")


def emit_pairs(pairs: Iterable[tuple[str, object]], fmt_name: str, out) -> None:
    emit_table(["quantity", "value"], [(k, v) for k, v in pairs], fmt_name, out)


# --- bounds ---------------------------------------------------------------------------

def curve_row(delta_s: float, d: int, N: float) -> tuple[float, ...]:
    ld = log(d)
    if delta_s >= 0:
        best = delta_s + compute_M(min(delta_s, ld), d).value
        return delta_s, delta_s, delta_s + delta_s**2 / (2 * N), best, best
    branch = theorem2_negative_branch(delta_s, N)
    envelope = delta_s + compute_M(delta_s, d).value if delta_s >= -ld else math.nan
    return delta_s, delta_s, branch, branch, envelope


def default_grid(d: int) -> np.ndarray:
    ld = log(d)
    tail = [ld - 10.0 ** -j for j in range(3, 13)]
    return np.unique(np.concatenate([np.linspace(-ld, ld, 201), tail]))


def bounds_grid(args) -> np.ndarray:
    d = args.d
    ld = log(d)
    if args.start is None and args.stop is None and args.points is None:
        grid = default_grid(d)
    else:
        lo = -ld if args.start is None else args.start
        hi = ld if args.stop is None else args.stop
        pts = 201 if args.points is None else args.points
        if pts < 1 or (pts == 1 and lo != hi):
            raise UsageError("--points must be >= 2 for a nondegenerate range")
        if lo > hi:
            raise UsageError("--from must not exceed --to")
        grid = np.linspace(lo, hi, pts)
    if args.at:
        grid = np.unique(np.concatenate([grid, args.at]))
    if grid.size and (grid.min() < -2 * ld - 1e-12 or grid.max() > ld + 1e-12):
        raise UsageError(f"grid must lie in [-2 log d, log d] = [{-2 * ld:.6g}, {ld:.6g}]")
    return grid


def cmd_bounds(args, out) -> int:
    if args.d < 2:
        raise UsageError("--d must be at least 2")
    grid = bounds_grid(args)
    N = n_value(args.d, NChoice(args.n_choice))
    rows = [curve_row(float(x), args.d, N) for x in grid]
    emit_table(CURVE_COLUMNS, rows, args.format, out)
    ok = all(r[3] >= r[2] - ORDER_TOL and r[2] >= r[1] - ORDER_TOL for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


# --- run ---------------------------------------------------------------------------------

def cmd_run(args, out) -> int:
    try:
        sc = load_scenario(args.scenario)
        quantities, checks = run_scenario(sc)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        json.dump(to_plain({"quantities": quantities,
                            "checks": [{"name": c.name, "quantity": c.quantity, "value": c.value,
                                        "tol": c.tol, "passed": c.passed} for c in checks]}),
                  out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        emit_pairs(quantities.items(), "csv", out)
    else:
        title = sc.data.get("name", str(args.scenario))
        out.write(f"scenario: {title} ({sc.kind})\n")
        emit_pairs(quantities.items(), "text", out)
    if args.format != "json":
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"{status} {c.name}: {c.quantity} = {fmt(c.value)} ({c.detail}, tol {fmt(c.tol)})\n"
            (sys.stderr if args.format == "csv" else out).write(line)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


# --- kstep -------------------------------------------------------------------------------

def _spectrum(text: str) -> QState:
    try:
        p = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse spectrum '{text}'") from None
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
        raise UsageError(f"spectrum '{text}' must be nonnegative and sum to 1")
    return QState.from_spectrum(p)


def kstep_values(args) -> list[int]:
    if args.k:
        ks = args.k
    else:
        ks = np.unique(np.round(np.logspace(log(args.kmin, 10), log(args.kmax, 10), args.points)))
        ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise UsageError("k must be positive")
    return sorted(set(ks))


def cmd_kstep(args, out) -> int:
    rho0, rho1 = _spectrum(args.initial), _spectrum(args.target)
    if rho0.dim != rho1.dim:
        raise UsageError("initial and target spectra differ in length")
    if args.kmin < 1 or args.kmax < args.kmin or args.points < 1:
        raise UsageError("need 1 <= --kmin <= --kmax and --points >= 1")
    try:
        reps = [build_kstep_process(KStepSpec(rho0, rho1, k)) for k in kstep_values(args)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [(r.k, r.beta_delta_Q, r.gap, r.upper_bound, r.lower_bound) for r in reps]
    emit_table(KSTEP_COLUMNS, rows, args.format, out)
    ok = all(r.lower_bound - 1e-10 <= r.gap <= r.upper_bound + 1e-10 for r in reps)
    return EXIT_OK if ok else EXIT_FAIL


# --- verify ------------------------------------------------------------------------------

def random_process(seed: int, max_dim: int = 6, betas=(-2.0, 0.5, 3.0)) -> ProcessSpec:
    rng = np.random.default_rng(seed)
    d_S, d = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
    child = rng.integers(0, 2**32, size=3)
    h = HermitianOp(random_state(d, seed=int(child[0])).matrix * float(rng.uniform(0.5, 5.0)))
    beta = float(betas[int(rng.integers(len(betas)))])
    return ProcessSpec(random_state(d_S, seed=int(child[1])), Reservoir(h, beta),
                       haar_unitary(d_S * d, seed=int(child[2])))


def sweep(seed: int, count: int, max_dim: int = 6) -> dict[str, float]:
    worst = {"max_equality_residual": 0.0, "max_second_law_residual": 0.0,
             "min_mutual_info": math.inf, "min_landauer_margin": math.inf,
             "min_theorem2_margin": math.inf, "min_theorem3_margin": math.inf,
             "min_pureness_margin": math.inf, "theorem3_applicable": 0}
    for i in range(count):
        spec = random_process(seed + i, max_dim)
        rep = run_process(spec)
        worst["max_equality_residual"] = max(worst["max_equality_residual"], rep.equality_residual)
        worst["max_second_law_residual"] = max(worst["max_second_law_residual"], rep.second_law_residual)
        worst["min_mutual_info"] = min(worst["min_mutual_info"], rep.mutual_info_final)
        worst["min_landauer_margin"] = min(worst["min_landauer_margin"], rep.landauer_margin)
        worst["min_theorem2_margin"] = min(worst["min_theorem2_margin"], rep.theorem2_margin)
        if rep.theorem3.applicable:
            worst["theorem3_applicable"] += 1
            worst["min_theorem3_margin"] = min(worst["min_theorem3_margin"], rep.theorem3.margin)
        pm = pureness_bound_check(spec, rep)
        if pm is not None:
            worst["min_pureness_margin"] = min(worst["min_pureness_margin"], pm)
    return worst


VERIFY_LIMITS = {"max_equality_residual": ("max", 1e-8), "max_second_law_residual": ("max", 1e-9),
                 "min_mutual_info": ("min", 1e-12), "min_landauer_margin": ("min", 1e-8),
                 "min_theorem2_margin": ("min", 1e-8), "min_theorem3_margin": ("min", 1e-8),
                 "min_pureness_margin": ("min", 1e-10)}


def cmd_verify(args, out) -> int:
    if args.count < 1 or args.max_dim < 1:
        raise UsageError("--count and --max-dim must be positive")
    worst = sweep(args.seed, args.count, args.max_dim)
    n3 = worst.pop("theorem3_applicable")
    ok = True
    rows = []
    for key, v in worst.items():
        mode, tol = VERIFY_LIMITS[key]
        passed = v <= tol if mode == "max" else v >= -tol
        ok &= passed
        rows.append((key, "n/a" if math.isinf(v) else v, tol, "PASS" if passed else "FAIL"))
    if args.format == "text":
        out.write(f"processes: {args.count}  seed: {args.seed}  max dim: {args.max_dim}  "
                  f"theorem3 applicable: {n3}\n")
    emit_table(["quantity", "value", "tol", "status"], rows, args.format, out)
    return EXIT_OK if ok else EXIT_FAIL


# --- witnesses / counterexamples -------------------------------------------------------------

def cmd_witnesses(args, out) -> int:
    if args.d < 2:
        raise UsageError("--d must be at least 2")
    ld = log(args.d)
    expected = {"upper": ld, "classical_lower": -ld, "quantum_lower": -2 * ld}
    rows, ok = [], True
    for name, spec in deltaS_range_witnesses(args.d, seed=args.seed).items():
        rep = run_process(spec)
        target = expected.get(name, math.nan)
        if name in expected:
            ok &= abs(rep.delta_S - target) <= 1e-8
        rows.append((name, rep.delta_S, rep.delta_S / ld, rep.delta_Q, rep.beta_delta_Q,
                     rep.equality_residual))
    emit_table(["witness", "delta_S", "delta_S_over_log_d", "delta_Q", "beta_delta_Q",
                "equality_residual"], rows, args.format, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_counterexamples(args, out) -> int:
    if args.d < 2 or args.points < 3:
        raise UsageError("need --d >= 2 and --points >= 3")
    ce = correlation_counterexamples(args.d, args.points)
    mem = memory_process_report(memory_erasure_spec([0.5, 0.5], "classical"))
    ld = log(args.d)
    mix = ce.mixing
    rows = [
        ("shared_state_delta_I", ce.shared_delta_I),
        ("shared_state_beta_delta_Q", ce.shared_beta_delta_Q),
        ("mixing_lambda_star", mix.lambda_star),
        ("mixing_beta_delta_Q_star", mix.beta_delta_Q_star),
        ("mixing_dense_beta_delta_Q", mix.dense_beta_delta_Q),
        ("mixing_dense_delta_I", mix.dense_delta_I),
        ("mixing_scan_min", float(mix.values.min())),
        ("threshold_minus_0.4_log_d", -0.4 * ld),
        ("floor_0.2_minus_log_d", 0.2 - ld),
        ("memory_erasure_delta_Q", mem.delta_Q),
        ("memory_erasure_delta_S_cond", mem.delta_S_cond),
    ]
    emit_pairs(rows, args.format, out)
    ok = (ce.shared_delta_I > ce.shared_beta_delta_Q + 1e-9
          and mix.beta_delta_Q_star < -0.4 * ld
          and bool(np.all(mix.values > 0.2 - ld))
          and abs(mix.dense_delta_I) <= 1e-9)
    return EXIT_OK if ok else EXIT_FAIL


# --- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="landauer", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("csv", "text")):
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--out", help="write output to this file instead of stdout")

    b = sub.add_parser("bounds", help="lower-bound curves g(dS) as CSV")
    b.add_argument("--d", type=int, required=True, help="reservoir dimension")
    b.add_argument("--from", dest="start", type=float)
    b.add_argument("--to", dest="stop", type=float)
    b.add_argument("--points", type=int)
    b.add_argument("--at", type=float, action="append", help="extra grid point (repeatable)")
    b.add_argument("--n-choice", choices=[c.value for c in NChoice], default=NChoice.EXACT.value)
    common(b)

    r = sub.add_parser("run", help="run a scenario file and its checks")
    r.add_argument("scenario")
    common(r, ("text", "csv", "json"))

    k = sub.add_parser("kstep", help="k-step approach to the Landauer bound")
    k.add_argument("--initial", default="0.5,0.5", help="initial spectrum, comma separated")
    k.add_argument("--target", default="0.9,0.1", help="target spectrum, comma separated")
    k.add_argument("--k", type=int, nargs="+", help="explicit step counts")
    k.add_argument("--kmin", type=int, default=10)
    k.add_argument("--kmax", type=int, default=1000)
    k.add_argument("--points", type=int, default=9, help="log-spaced step counts")
    common(k)

    v = sub.add_parser("verify", help="random property sweep")
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--count", type=int, default=200)
    v.add_argument("--max-dim", type=int, default=6)
    common(v, ("text", "csv"))

    w = sub.add_parser("witnesses", help="processes attaining the range of dS")
    w.add_argument("--d", type=int, required=True)
    w.add_argument("--seed", type=int, default=0)
    common(w, ("text", "csv"))

    c = sub.add_parser("counterexamples", help="processes violating beta*dQ >= dI")
    c.add_argument("--d", type=int, default=16)
    c.add_argument("--points", type=int, default=200)
    common(c, ("text", "csv"))
    return p


COMMANDS = {"bounds": cmd_bounds, "run": cmd_run, "kstep": cmd_kstep, "verify": cmd_verify,
            "witnesses": cmd_witnesses, "counterexamples": cmd_counterexamples}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except UsageError as exc:
        print(f"landauer {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            print(f"landauer: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
