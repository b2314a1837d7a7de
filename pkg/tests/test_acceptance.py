"""Acceptance criteria 1-13; each test prints one PASS/FAIL line to the terminal."""
import math
import time

import numpy as np
import pytest

from landauer.bounds import compute_M, compute_N, relent_floor_check
from landauer.cli import main as cli_main
from landauer.cli import random_process
from landauer.processes import (KStepSpec, ProcessSpec, build_kstep_process, build_swap_process,
                                build_tight_process, correlation_counterexamples,
                                deltaS_range_witnesses, integral_version_check, kstep_dense_spec,
                                memory_erasure_spec, memory_process_report,
                                pure_erasure_truncated, pureness_bound_check, run_process)
from landauer.quantum import (HermitianOp, QState, embed, haar_unitary, partial_trace, random_state,
                              relative_entropy, swap_unitary, von_neumann_entropy)
from landauer.thermo import Reservoir

from oracles import n_grid

SWEEP_SEEDS = range(200)


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return _report


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    out = []
    for seed in SWEEP_SEEDS:
        spec = random_process(seed)
        out.append((spec, run_process(spec)))
    return out, time.perf_counter() - t0


def test_criterion_01_equality_form(sweep, report):
    runs, elapsed = sweep
    worst = max(rep.equality_residual for _, rep in runs)
    dims_ok = all(s.rho_S.dim <= 6 and s.d <= 6 for s, _ in runs)
    betas = {s.reservoir.beta for s, _ in runs}
    ok = worst <= 1e-8 and elapsed < 30 and dims_ok and betas <= {-2.0, 0.5, 3.0}
    report(1, ok, f"max |bdQ - dS - I - D| = {worst:.3g} over {len(runs)} processes, {elapsed:.1f} s")


def test_criterion_02_second_law_identity(sweep, report):
    runs, _ = sweep
    worst = max(rep.second_law_residual for _, rep in runs)
    min_i = min(rep.mutual_info_final for _, rep in runs)
    report(2, worst <= 1e-9 and min_i >= -1e-12,
           f"max |Delta - dS - I| = {worst:.3g}, min I = {min_i:.3g}")


def test_criterion_03_bound_function_anchors(report):
    zero = all(compute_M(0.0, d).value == 0.0 for d in (2, 4, 16))
    lower = max(abs(compute_M(-math.log(d), d).value - math.log(d)) for d in (2, 4, 16))
    below = all(compute_N(d) < 0.25 * math.log(d - 1) ** 2 + 1 for d in range(2, 1025))
    oracle = max(abs(compute_N(d) - n_grid(d)) for d in (2, 3, 4, 16, 1024))
    ok = zero and lower <= 1e-8 and below and oracle <= 1e-6
    report(3, ok, f"M(0,d)=0: {zero}, max |M(-log d)-log d| = {lower:.3g}, "
                  f"N < log^2(d-1)/4 + 1 on 2..1024: {below}, |N - grid| = {oracle:.3g}")


def test_criterion_04_relative_entropy_floor(report):
    worst = math.inf
    for d in (2, 3, 4, 8):
        for i in range(500):
            sigma = random_state(d, seed=10_000 * d + 2 * i)
            rho = random_state(d, seed=10_000 * d + 2 * i + 1)
            worst = min(worst, relent_floor_check(sigma, rho))
    spec = build_tight_process(0.5, 4)
    tight = abs(relent_floor_check(spec.rho_S, spec.reservoir.state))
    report(4, worst >= -1e-8 and tight <= 1e-6,
           f"min D - M over 2000 pairs = {worst:.3g}, extremal pair |D - M| = {tight:.3g}")


def test_criterion_05_theorem2(sweep, report):
    runs, _ = sweep
    worst = min(rep.theorem2_margin for _, rep in runs)
    quad_ok = True
    for spec, rep in runs:
        x, d = rep.delta_S, spec.d
        if x >= 0 and d >= 2:
            quad_ok &= x * x / (2 * compute_N(d)) <= compute_M(min(x, math.log(d)), d).value + 1e-12
    for d in (2, 4, 16):
        for x in np.linspace(0, 0.999 * math.log(d), 50):
            quad_ok &= x * x / (2 * compute_N(d)) <= compute_M(float(x), d).value + 1e-12
    report(5, worst >= -1e-8 and quad_ok,
           f"min branch margin = {worst:.3g}, quadratic <= M everywhere: {quad_ok}")


def _heat_extracting_processes():
    # swapping in a system that is thermal for the same H at beta_S moves heat
    # dQ = E(beta_S) - E(beta); beta_S < beta < 0 or beta_S > beta > 0 gives beta*dQ <= 0
    rng = np.random.default_rng(2024)
    specs = []
    for seed in range(60):
        d = int(rng.integers(2, 7))
        h = HermitianOp.diagonal(np.sort(rng.uniform(0, 3, d)))
        beta = float(rng.uniform(0.1, 3))
        if seed % 2:
            beta, beta_S = -beta, -beta - float(rng.uniform(0.1, 3))
        else:
            beta_S = beta + float(rng.uniform(0.1, 3))
        rho_S = Reservoir(h, beta_S).state
        u = swap_unitary((d, d), 0, 1)
        if seed % 3 == 0:
            # a local rotation first makes the exchange non-diagonal
            u = u @ embed(haar_unitary(d, seed=seed), (d, d), [0])
        specs.append(ProcessSpec(rho_S, Reservoir(h, beta), u))
    for seed in range(20):
        d = int(rng.integers(2, 6))
        res = Reservoir(HermitianOp.diagonal(np.sort(rng.uniform(0, 3, d))), -float(rng.uniform(0.2, 3)))
        specs.append(ProcessSpec(random_state(d, seed=seed), res, swap_unitary((d, d), 0, 1)))
    return specs


def test_criterion_06_theorem3(report):
    margins = []
    for spec in _heat_extracting_processes():
        rep = run_process(spec)
        if rep.beta_delta_Q <= 0:
            N = compute_N(spec.d)
            b = rep.beta_delta_Q
            margins.append(b - b * b / (2 * N) + 1e-8 - rep.delta)
    worst = min(margins)
    report(6, len(margins) >= 20 and worst >= 0,
           f"{len(margins)} processes with bdQ <= 0, min slack = {worst - 1e-8:.3g}")


def test_criterion_07_kstep(report):
    t0 = time.perf_counter()
    q0, q1 = QState.from_spectrum([0.5, 0.5]), QState.from_spectrum([0.9, 0.1])
    sym = relative_entropy(q0, q1) + relative_entropy(q1, q0)
    bracket = True
    for k in (10, 100, 1000):
        rep = build_kstep_process(KStepSpec(q0, q1, k))
        lo = k * compute_M(rep.delta_S / k, 2).value
        bracket &= lo <= rep.gap <= sym / k
    ratio = (build_kstep_process(KStepSpec(q0, q1, 100)).gap
             / build_kstep_process(KStepSpec(q0, q1, 200)).gap)
    dense = 0.0
    for k in (1, 2, 3):
        spec = KStepSpec(q0, q1, k)
        dense = max(dense, abs(run_process(kstep_dense_spec(spec)).beta_delta_Q
                               - build_kstep_process(spec).beta_delta_Q))
    elapsed = time.perf_counter() - t0
    ok = bracket and 1.8 <= ratio <= 2.2 and dense <= 1e-8 and elapsed < 10
    report(7, ok, f"bracket holds: {bracket}, gap(100)/gap(200) = {ratio:.4f}, "
                  f"dense mismatch = {dense:.3g}, {elapsed:.1f} s")


def test_criterion_08_curve_reproduction(report, capsys):
    ld = math.log(16)
    code = cli_main(["bounds", "--d", "16", "--at", repr(math.log(2))])
    out = capsys.readouterr().out.strip().splitlines()
    header, rows = out[0].split(","), [dict(zip(out[0].split(","), r.split(","))) for r in out[1:]]
    order = all(float(r["landauer"]) <= float(r["quadratic"]) + 1e-9
                and float(r["quadratic"]) <= float(r["best"]) + 1e-9 for r in rows)
    diverges = any(float(r["delta_s"]) >= ld - 1e-3 and float(r["best"]) > 10 for r in rows)
    row = next(r for r in rows if abs(float(r["delta_s"]) - math.log(2)) < 1e-12)
    diff = abs(float(row["best"]) - float(row["landauer"]) - compute_M(math.log(2), 16).value)
    ok = code == 0 and header[:4] == ["delta_s", "landauer", "quadratic", "best"] and order \
        and diverges and diff <= 1e-9
    report(8, ok, f"{len(rows)} rows ordered: {order}, red > 10 near log 16: {diverges}, "
                  f"|red - black - M(log 2, 16)| = {diff:.3g}")


def test_criterion_09_pureness(report):
    worst, n = math.inf, 0
    for seed in range(200):
        spec = random_process(10_000 + seed, max_dim=5, betas=(0.0, 0.5, 2.0, 8.0))
        m = pureness_bound_check(spec, run_process(spec))
        worst, n = min(worst, m), n + 1
    report(9, worst >= -1e-10, f"min lambda_min margin over {n} processes = {worst:.3g}")


def test_criterion_10_pure_erasure(report):
    rep = pure_erasure_truncated(0.3, 0.1)
    dev = abs(rep.rel_ent + math.log(0.9))
    report(10, dev <= 1e-6 and rep.purity_deficit <= 1e-8,
           f"|D + log 0.9| = {dev:.3g}, 1 - lambda_max = {rep.purity_deficit:.3g}")


def test_criterion_11_memory_and_correlation(report):
    mem = memory_process_report(memory_erasure_spec([0.5, 0.5], "classical"))
    s_final = von_neumann_entropy(partial_trace(mem.final, [0]))
    ce = correlation_counterexamples(d=16, points=200)
    ld = math.log(16)
    scan_min = float(ce.mixing.values.min())
    ok = (abs(mem.delta_Q) <= 1e-12 and s_final <= 1e-12
          and ce.mixing.beta_delta_Q_star < -0.4 * ld and scan_min > 0.2 - ld)
    report(11, ok, f"memory dQ = {mem.delta_Q:.3g}, S(S') = {s_final:.3g}; "
                   f"min bdQ = {ce.mixing.beta_delta_Q_star:.5f} < {-0.4 * ld:.5f}, "
                   f"scan floor {scan_min:.5f} > {0.2 - ld:.5f}")


def test_criterion_12_range_witnesses(report):
    worst = 0.0
    heat = 0.0
    for d in (2, 4):
        ld = math.log(d)
        w = {k: run_process(v) for k, v in deltaS_range_witnesses(d).items()}
        worst = max(worst, abs(w["upper"].delta_S - ld), abs(w["classical_lower"].delta_S + ld),
                    abs(w["quantum_lower"].delta_S + 2 * ld))
        heat = max(heat, abs(w["quantum_lower"].delta_Q))
    report(12, worst <= 1e-8 and heat <= 1e-8,
           f"max |dS - target| = {worst:.3g}, |dQ| at -2 log d = {heat:.3g}")


def test_criterion_13_integral_version(report):
    worst, n = 0.0, 0
    seed = 20_000
    while n < 50:
        spec = random_process(seed, max_dim=4, betas=(-2.0, -0.3, 0.5, 3.0))
        seed += 1
        worst = max(worst, integral_version_check(spec).residual)
        n += 1
    inf_spec = build_swap_process(QState.from_spectrum([0.6, 0.4]), QState.from_spectrum([0.7, 0.3]))
    inf_spec = ProcessSpec(inf_spec.rho_S, Reservoir(HermitianOp.diagonal([0.0, 1.0]), math.inf),
                           inf_spec.u)
    rep = run_process(inf_spec)
    chk = integral_version_check(inf_spec, rep)
    ok = (worst <= 1e-6 and rep.delta_Q > 0 and rep.rel_ent_final == math.inf
          and math.isfinite(chk.lhs) and chk.residual <= 1e-6)
    report(13, ok, f"max residual over {n} processes = {worst:.3g}; beta = inf: dQ = {rep.delta_Q:.3g}, "
                   f"D = {rep.rel_ent_final}, integral residual = {chk.residual:.3g}")
