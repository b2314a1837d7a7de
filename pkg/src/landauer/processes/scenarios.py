"""Processes with a memory register, correlation scenarios, several systems and pure-state erasure."""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from ..bounds import golden_section_min
from ..quantum import (HermitianOp, QState, Unitary, apply_unitary, conditional_entropy, embed,
                       mutual_information, partial_trace, permute_factors, relative_entropy,
                       swap_unitary, tensor, von_neumann_entropy)
from ..thermo import Reservoir, integrate_beta_dE, pythagoras_decompose, quadrature_beta_dE
from .constructions import KStepReport, KStepSpec, build_kstep_process, build_swap_process
from .core import ProcessReport, ProcessSpec, _beta_times_heat, run_process

S_, R_, M_ = 0, 1, 2


# --- memory -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MemoryProcessSpec:
    """System and memory in a joint state, an uncorrelated thermal reservoir, and a
    unitary on S (x) R (x) M. With ``ancilla_dim > 1`` the unitary also acts on a
    maximally mixed ancilla, which realizes a noisy (unital) operation."""

    rho_SM: QState
    reservoir: Reservoir
    u: Unitary
    ancilla_dim: int = 1

    def __post_init__(self):
        if len(self.rho_SM.dims) != 2:
            raise ValueError("rho_SM must carry dims (d_S, d_M)")
        if self.u.dim != self.rho_SM.dim * self.reservoir.dim * self.ancilla_dim:
            raise ValueError("unitary dimension does not match S (x) R (x) M (x) ancilla")

    @property
    def dims(self) -> tuple[int, ...]:
        d_S, d_M = self.rho_SM.dims
        out = (d_S, self.reservoir.dim, d_M)
        return out + ((self.ancilla_dim,) if self.ancilla_dim > 1 else ())


class MemoryReport(NamedTuple):
    delta_S: float
    delta_S_cond: float
    delta: float
    delta_Q: float
    beta_delta_Q: float
    mutual_info_final: float
    rel_ent_final: float
    S_M_initial: float
    S_M_final: float
    delta_I: float
    memory_condition: bool
    second_law_margin: float
    landauer_margin: float
    general_margin: float
    final: QState


def memory_process_report(spec: MemoryProcessSpec) -> MemoryReport:
    sm = spec.rho_SM
    joint = permute_factors(tensor(sm, spec.reservoir.state), [0, 2, 1])
    if spec.ancilla_dim > 1:
        joint = tensor(joint, QState.maximally_mixed(spec.ancilla_dim))
    out = apply_unitary(joint, spec.u)
    if spec.ancilla_dim > 1:
        out = partial_trace(out, [S_, R_, M_])
    init = partial_trace(joint, [S_, R_, M_])

    ent = lambda s, keep: von_neumann_entropy(partial_trace(s, keep))  # noqa: E731
    rho_R_f = partial_trace(out, [R_])
    d_cond = conditional_entropy(init, [S_], [M_]) - conditional_entropy(out, [S_], [M_])
    delta = ent(out, [R_]) - ent(init, [R_])
    mi = mutual_information(out, [S_, M_], [R_])
    rel = relative_entropy(rho_R_f, spec.reservoir.state)
    heat = spec.reservoir.heat(rho_R_f)
    bq = _beta_times_heat(spec.reservoir.beta, heat, rel)
    s_m, s_m_f = ent(init, [M_]), ent(out, [M_])
    # I(SM:R) vanishes for the product initial state
    general = delta - (d_cond + mi + s_m - s_m_f - mutual_information(init, [S_, M_], [R_]))
    return MemoryReport(
        delta_S=ent(init, [S_]) - ent(out, [S_]), delta_S_cond=d_cond, delta=delta,
        delta_Q=heat, beta_delta_Q=bq, mutual_info_final=mi, rel_ent_final=rel,
        S_M_initial=s_m, S_M_final=s_m_f,
        delta_I=mutual_information(init, [S_], [M_]) - mutual_information(out, [S_], [M_]),
        memory_condition=bool(s_m_f <= s_m + 1e-12),
        second_law_margin=delta - d_cond - mi,
        landauer_margin=bq - (d_cond + mi + rel),
        general_margin=general, final=out,
    )


def controlled_shift(d: int) -> Unitary:
    """|a>|m> -> |a - m mod d>|m> on S (x) M."""
    m = np.zeros((d * d, d * d))
    for a in range(d):
        for mem in range(d):
            m[((a - mem) % d) * d + mem, a * d + mem] = 1.0
    return Unitary(m)


def classical_memory_state(p: Sequence[float]) -> QState:
    """sum_i p_i |i><i| (x) |i><i|."""
    p = np.asarray(p, dtype=float)
    d = p.size
    diag = np.zeros(d * d)
    diag[np.arange(d) * (d + 1)] = p
    return QState.from_spectrum(diag, dims=(d, d))


def entangled_memory_state(p: Sequence[float]) -> QState:
    """sum_i sqrt(p_i) |i>|i>."""
    p = np.asarray(p, dtype=float)
    d = p.size
    psi = np.zeros(d * d)
    psi[np.arange(d) * (d + 1)] = np.sqrt(p)
    return QState.pure(psi, dims=(d, d))


def _ladder_reservoir(d: int, beta: float = 1.0) -> Reservoir:
    return Reservoir(HermitianOp.diagonal(np.arange(d, dtype=float)), beta)


def memory_erasure_spec(p: Sequence[float], kind: str = "classical",
                        reservoir: Reservoir | None = None) -> MemoryProcessSpec:
    """Erase S using its correlations with M through a controlled shift; R is untouched."""
    states = {"classical": classical_memory_state, "entangled": entangled_memory_state}
    if kind not in states:
        raise ValueError(f"kind must be one of {sorted(states)}")
    rho_SM = states[kind](p)
    d = rho_SM.dims[0]
    reservoir = _ladder_reservoir(d) if reservoir is None else reservoir
    dims = (d, reservoir.dim, d)
    return MemoryProcessSpec(rho_SM, reservoir, embed(controlled_shift(d), dims, [S_, M_]))


class TwoStageReport(NamedTuple):
    erasure: MemoryReport
    recharge: KStepReport
    beta_delta_Q: float
    target: float
    S_M_restored: float


def two_stage_entangled_erasure(p: Sequence[float], k: int) -> TwoStageReport:
    """Entangled-memory erasure followed by a k-step chain that returns M' to its old spectrum.

    The second stage swaps the purified memory through k engineered thermal
    slots; its heat approaches -S(S) from above as k grows.
    """
    first = memory_erasure_spec(p, "entangled")
    rep = memory_process_report(first)
    m_final = partial_trace(rep.final, [M_])
    m_initial = partial_trace(first.rho_SM, [1])
    second = build_kstep_process(KStepSpec(m_final, m_initial, k))
    target = -von_neumann_entropy(partial_trace(first.rho_SM, [0]))
    return TwoStageReport(rep, second, rep.beta_delta_Q + second.beta_delta_Q, target,
                          von_neumann_entropy(m_initial))


# --- correlation counterexamples ----------------------------------------------------------

def mixing_heat(lam: float, d: int) -> float:
    """beta*dQ of the swap of a pure state with (1 - lam) psi + lam 1/d."""
    a = 1 - lam + lam / d
    b = lam / d
    return a * log(a) + (d - 1) * b * log(b) - log(a)


class MixingScan(NamedTuple):
    lambdas: np.ndarray
    values: np.ndarray
    lambda_star: float
    beta_delta_Q_star: float
    dense_beta_delta_Q: float
    dense_delta_I: float


class CorrelationCounterexamples(NamedTuple):
    shared_delta_I: float
    shared_beta_delta_Q: float
    mixing: MixingScan


def _mixing_scan(d: int, points: int) -> MixingScan:
    lams = np.linspace(0.0, 1.0, points + 2)[1:-1]
    vals = np.array([mixing_heat(x, d) for x in lams])
    i = int(np.argmin(vals))
    lo, hi = lams[max(i - 1, 0)], lams[min(i + 1, points - 1)]
    lam_star, val = golden_section_min(lambda x: mixing_heat(x, d), lo, hi, tol=1e-10)

    psi = QState.pure(np.eye(d)[0])
    rho_R = QState((1 - lam_star) * psi.matrix + lam_star * np.eye(d) / d)
    swap = build_swap_process(psi, rho_R)
    memory = QState.from_spectrum([0.7, 0.3])
    rho_SM = tensor(psi, memory)
    dims = (d, d, 2)
    rep = memory_process_report(MemoryProcessSpec(rho_SM, swap.reservoir,
                                                  embed(swap.u, dims, [S_, R_])))
    return MixingScan(lams, vals, lam_star, val, rep.beta_delta_Q, rep.delta_I)


def correlation_counterexamples(d: int = 16, points: int = 200,
                                p: Sequence[float] = (0.5, 0.5)) -> CorrelationCounterexamples:
    """Two processes showing beta*dQ >= dI fails.

    (i) S perfectly correlated with M is swapped with a reservoir in the
    state of S: all correlations vanish yet no heat flows.
    (ii) A pure S swapped with a slightly mixed reservoir: dI = 0 while the
    heat is negative.
    """
    rho_SM = classical_memory_state(p)
    rho_S = partial_trace(rho_SM, [0])
    swap = build_swap_process(rho_S, rho_S)
    q = len(p)
    spec = MemoryProcessSpec(rho_SM, swap.reservoir, embed(swap.u, (q, q, q), [S_, R_]))
    rep = memory_process_report(spec)
    return CorrelationCounterexamples(rep.delta_I, rep.beta_delta_Q, _mixing_scan(d, points))


class CorrelatedStartCheck(NamedTuple):
    delta: float
    conditional_form: float
    lower_bound: float
    initial_mutual_info: float
    trace_distance_bound: float


def correlated_start_check(rho_SR: QState, u: Unitary) -> CorrelatedStartCheck:
    """Entropy bookkeeping when S and R start correlated (no thermal assumption).

    delta = S(S|R) - S(S'|R') >= dS - I(S:R), and
    I(S:R) <= ||rho_SR - rho_S (x) rho_R||_1 (log d_S + log d_R).
    """
    if len(rho_SR.dims) != 2:
        raise ValueError("rho_SR must carry dims (d_S, d_R)")
    out = apply_unitary(rho_SR, u)
    ent = lambda s, keep: von_neumann_entropy(partial_trace(s, keep))  # noqa: E731
    delta = ent(out, [1]) - ent(rho_SR, [1])
    d_S_ent = ent(rho_SR, [0]) - ent(out, [0])
    cond = conditional_entropy(rho_SR, [0], [1]) - conditional_entropy(out, [0], [1])
    mi = mutual_information(rho_SR, [0], [1])
    prod_ = np.kron(partial_trace(rho_SR, [0]).matrix, partial_trace(rho_SR, [1]).matrix)
    trace_norm = float(np.sum(np.abs(np.linalg.eigvalsh(rho_SR.matrix - prod_))))
    d_S, d_R = rho_SR.dims
    return CorrelatedStartCheck(delta, cond, d_S_ent - mi, mi, trace_norm * (log(d_S) + log(d_R)))


# --- integral version ---------------------------------------------------------------------

class IntegralCheck(NamedTuple):
    lhs: float
    rhs: float
    residual: float
    quadrature: float | None


def integral_version_check(spec: ProcessSpec, report: ProcessReport | None = None,
                           with_quadrature: bool = False) -> IntegralCheck:
    """dS + I(S':R') + D(rho'_R || thermal at equal energy) against the integral of beta(E) dE."""
    if spec.reservoir.infinite_mask:
        raise ValueError("the integral form needs a reservoir without infinite levels")
    rep = run_process(spec) if report is None else report
    split = pythagoras_decompose(rep.rho_R_final, spec.reservoir)
    lhs = rep.delta_S + rep.mutual_info_final + split.nonthermal
    e0 = spec.reservoir.energy
    e1 = rep.rho_R_final.expectation(spec.reservoir.h)
    rhs = integrate_beta_dE(spec.reservoir.h, e0, e1)
    quad = quadrature_beta_dE(spec.reservoir.h, e0, e1) if with_quadrature else None
    return IntegralCheck(lhs, rhs, abs(lhs - rhs), quad)


# --- several systems ------------------------------------------------------------------------

class MultiSystemComparison(NamedTuple):
    joint_beta_delta_Q: float
    joint_delta_S: float
    sum_delta_S: float
    sum_beta_delta_Q: float
    margin: float
    chaining_residual: float
    final_entropy: float
    sum_marginal_entropies: float


def multi_system_check(specs: Sequence[ProcessSpec], joint: ProcessSpec,
                       tol: float = 1e-8) -> MultiSystemComparison:
    """Compare one joint process on S_1 ... S_k against separate processes with the same marginals."""
    k = len(specs)
    if len(joint.rho_S.dims) != k:
        raise ValueError(f"joint system has {len(joint.rho_S.dims)} factors, expected {k}")
    reps = [run_process(s) for s in specs]
    jrep = run_process(joint)
    final = jrep.rho_S_final
    for i, (s, r) in enumerate(zip(specs, reps)):
        if s.rho_S.dim != joint.rho_S.dims[i]:
            raise ValueError(f"system {i} dimension mismatch")
        initial_i = partial_trace(joint.rho_S, [i]) if k > 1 else joint.rho_S
        final_i = partial_trace(final, [i]) if k > 1 else final
        if (np.max(np.abs(initial_i.matrix - s.rho_S.matrix)) > tol
                or np.max(np.abs(final_i.matrix - r.rho_S_final.matrix)) > tol):
            raise ValueError(f"marginal of system {i} does not match its separate process")
    marg = [von_neumann_entropy(partial_trace(final, [i])) for i in range(k)]
    chain = sum(marg) - sum(mutual_information(final, [i], list(range(i + 1, k)))
                            for i in range(k - 1))
    s_final = von_neumann_entropy(final)
    sum_dS = sum(r.delta_S for r in reps)
    return MultiSystemComparison(
        jrep.beta_delta_Q, jrep.delta_S, sum_dS, sum(r.beta_delta_Q for r in reps),
        jrep.beta_delta_Q - sum_dS, abs(chain - s_final), s_final, sum(marg))


def _trivial_reservoir() -> Reservoir:
    return Reservoir(HermitianOp(np.zeros((1, 1))), 1.0)


def correlated_pair_example(beta: float = 2.0) -> tuple[list[ProcessSpec], ProcessSpec]:
    """Two maximally mixed qubits end correlated while each marginal stays maximally mixed.

    Joint process: swap S_2 with a thermal qubit, then CNOT from S_1 to S_2.
    """
    half = QState.maximally_mixed(2)
    sep = [ProcessSpec(half, _trivial_reservoir(), Unitary.identity(2)) for _ in range(2)]
    res = Reservoir(HermitianOp.diagonal([0.0, 1.0]), beta)
    dims = (2, 2, 2)
    cnot = Unitary(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float))
    u = embed(cnot, dims, [0, 1]) @ swap_unitary(dims, 1, 2)
    joint = ProcessSpec(QState.maximally_mixed(4, dims=(2, 2)), res, u)
    return sep, joint


# --- erasure towards a pure state ---------------------------------------------------------

PURE_ERASURE_TAIL = 1e-10


def required_depth(epsilon: float, tail: float = PURE_ERASURE_TAIL) -> int:
    """Smallest depth K with (1 - epsilon)^K < tail."""
    return int(ceil(log(tail) / log(1 - epsilon))) + 1


class PureErasureReport(NamedTuple):
    epsilon: float
    s1: float
    depth: int
    tail_mass: float
    delta_S: float
    entropy_change: float
    rel_ent: float
    beta_delta_Q: float
    equality_residual: float
    purity_deficit: float
    S_R: float


def _levels(epsilon: float, s1: float, depth: int):
    """Grouped reservoir populations: per (level, a) the log value and multiplicity."""
    ell = np.arange(depth + 1)
    rows, cols = np.meshgrid(ell, ell, indexing="ij")
    valid = cols <= rows
    lv, a = rows[valid], cols[valid]
    log_mult = gammaln(lv + 1) - gammaln(a + 1) - gammaln(lv - a + 1)
    s2 = 1 - s1
    log_v = log(epsilon) + lv * np.log1p(-epsilon) + a * log(s1) + (lv - a) * log(s2)
    return lv, log_mult, log_v


def pure_erasure_truncated(s1: float, epsilon: float, depth: int | None = None,
                           tail: float = 1e-13) -> PureErasureReport:
    """Erase diag(s1, 1 - s1) to a pure state with a reservoir of infinitely many
    unoccupied (infinite-energy) levels, evaluated level by level up to ``depth``.

    Occupied reservoir levels form a binary tree: the root holds epsilon and
    each node of value v has children (1 - epsilon) s1 v and (1 - epsilon) s2 v.
    The process moves each occupied level into its children while resetting S.
    """
    if not 0 < s1 < 1:
        raise ValueError("s1 must lie in (0, 1)")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    need = required_depth(epsilon, PURE_ERASURE_TAIL)
    if depth is None:
        depth = required_depth(epsilon, tail)
    elif depth < need:
        raise ValueError(f"depth {depth} leaves a tail above {PURE_ERASURE_TAIL:g}; "
                         f"use depth >= {need}")
    lv, log_mult, log_v = _levels(epsilon, s1, depth)
    mass = np.exp(log_mult + log_v)
    # the final reservoir is the initial one without the root, renormalized by 1 - epsilon
    log_vp = log_v - np.log1p(-epsilon)
    mass_p = np.where(lv >= 1, np.exp(log_mult + log_vp), 0.0)
    S_R = float(-np.sum(mass * log_v))
    S_Rp = float(-np.sum(mass_p * log_vp))
    rel = float(np.sum(mass_p * (log_vp - log_v)))
    bq = float(np.sum((mass - mass_p) * log_v))
    s2 = 1 - s1
    delta_S = float(-(s1 * log(s1) + s2 * log(s2)))
    tail_mass = (1 - epsilon) ** (depth + 1)
    # nodes at the last level have no represented children: their S-part stays put
    m_last = epsilon * (1 - epsilon) ** depth
    deficit = s2 * m_last / (1 - tail_mass)
    return PureErasureReport(epsilon, s1, depth, tail_mass, delta_S, S_Rp - S_R, rel, bq,
                             bq - delta_S - rel, deficit, S_R)


def pure_erasure_dense_spec(s1: float, epsilon: float, depth: int = 2) -> ProcessSpec:
    """Small explicit realization: occupied levels down to ``depth``, everything else masked.

    Deeper children are infinite-energy levels, so this finite process
    populates them and reports beta*dQ = +inf.
    """
    n_nodes = 2 ** (depth + 2)               # node labels 1 .. 2^(depth+2)
    dim = 2 * n_nodes                        # node j sits at position 2j - 2, its empty partner next
    r = np.zeros(n_nodes + 1)
    r[2] = epsilon
    for j in range(3, n_nodes + 1):
        parent = (j + 1) // 2
        r[j] = (1 - epsilon) * (s1 if j % 2 else 1 - s1) * r[parent]
    occupied = [j for j in range(2, n_nodes + 1) if j < 2 ** (depth + 1) + 1]
    energies = np.zeros(dim)
    mask = set(range(dim))
    total = sum(r[j] for j in occupied)
    for j in occupied:
        energies[2 * j - 2] = -log(r[j] / total)
        mask.discard(2 * j - 2)
    reservoir = Reservoir(HermitianOp.diagonal(energies), 1.0, tuple(sorted(mask)))

    def idx(s, pos):
        return s * dim + pos

    perm = {}
    for j in range(1, n_nodes // 2 + 1):
        perm[idx(0, 2 * j - 2)] = idx(0, 2 * (2 * j - 1) - 2)
        perm[idx(1, 2 * j - 2)] = idx(0, 2 * (2 * j) - 2)
    free_src = [i for i in range(2 * dim) if i not in perm]
    free_dst = sorted(set(range(2 * dim)) - set(perm.values()))
    perm.update(zip(free_src, free_dst))
    m = np.zeros((2 * dim, 2 * dim))
    for src, dst in perm.items():
        m[dst, src] = 1.0
    return ProcessSpec(QState.from_spectrum([s1, 1 - s1]), reservoir, Unitary(m))
