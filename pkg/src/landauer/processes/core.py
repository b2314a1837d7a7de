"""Running a system-reservoir process and checking the identities it obeys."""
from __future__ import annotations

from dataclasses import dataclass
from math import exp, inf, isfinite, log
from typing import NamedTuple

import numpy as np

from ..bounds import BoundCheck, BoundParams, deltaQ_bound_check, finite_size_bound
from ..quantum import (QState, Unitary, apply_unitary, partial_trace, relative_entropy,
                       tensor, von_neumann_entropy)
from ..thermo import Reservoir

TOL_EQ = 1e-7


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """Initial system state, thermal reservoir and a unitary on S (x) R."""

    rho_S: QState
    reservoir: Reservoir
    u: Unitary

    def __post_init__(self):
        if self.u.dim != self.rho_S.dim * self.reservoir.dim:
            raise ValueError(f"unitary of dimension {self.u.dim} does not act on "
                             f"S (x) R = {self.rho_S.dim} x {self.reservoir.dim}")

    @property
    def d_S(self) -> int:
        return self.rho_S.dim

    @property
    def d(self) -> int:
        return self.reservoir.dim

    @property
    def beta(self) -> float:
        return self.reservoir.beta

    def initial_state(self) -> QState:
        return tensor(self.rho_S.with_dims((self.d_S,)), self.reservoir.state)


@dataclass(frozen=True, eq=False)
class ProcessReport:
    delta_S: float
    delta_Q: float
    delta: float
    mutual_info_final: float
    rel_ent_final: float
    beta_delta_Q: float
    equality_residual: float
    second_law_residual: float
    landauer_margin: float
    theorem2_margin: float
    theorem3: BoundCheck
    rho_S_final: QState
    rho_R_final: QState

    @property
    def gap(self) -> float:
        """beta*dQ - dS, the excess over the Landauer bound."""
        return self.beta_delta_Q - self.delta_S


def _beta_times_heat(beta: float, heat: float, rel_ent: float) -> float:
    if heat == inf:
        return inf
    if isfinite(beta):
        return beta * heat
    # zero temperature (either sign): finite iff the final reservoir state stays
    # inside the extreme eigenspace, and then no heat flows
    return inf if rel_ent == inf else 0.0


def _inf_aware_residual(lhs: float, rhs: float) -> float:
    if isfinite(lhs) and isfinite(rhs):
        return abs(lhs - rhs)
    return 0.0 if lhs == rhs else inf


def run_process(spec: ProcessSpec) -> ProcessReport:
    final = apply_unitary(spec.initial_state(), spec.u)
    rho_S_f = partial_trace(final, [0]).with_dims(spec.rho_S.dims)
    rho_R_f = partial_trace(final, [1])
    s_S, s_Sf = von_neumann_entropy(spec.rho_S), von_neumann_entropy(rho_S_f)
    s_R, s_Rf = von_neumann_entropy(spec.reservoir.state), von_neumann_entropy(rho_R_f)
    delta_S = s_S - s_Sf
    delta = s_Rf - s_R
    mi = s_Sf + s_Rf - von_neumann_entropy(final)
    rel = relative_entropy(rho_R_f, spec.reservoir.state)
    heat = spec.reservoir.heat(rho_R_f)
    bq = _beta_times_heat(spec.beta, heat, rel)

    d = spec.d
    if d >= 2:
        ld = log(d)
        clipped = min(max(delta_S, -2 * ld), ld)
        floor = finite_size_bound(clipped, BoundParams(d))
    else:
        floor = 0.0
    return ProcessReport(
        delta_S=delta_S, delta_Q=heat, delta=delta, mutual_info_final=mi,
        rel_ent_final=rel, beta_delta_Q=bq,
        equality_residual=_inf_aware_residual(bq, delta_S + mi + rel),
        second_law_residual=abs(delta - delta_S - mi),
        landauer_margin=bq - delta_S,
        theorem2_margin=bq - floor if isfinite(floor) else (0.0 if bq == inf else -inf),
        theorem3=deltaQ_bound_check(delta, bq, d),
        rho_S_final=rho_S_f, rho_R_final=rho_R_f,
    )


class EqualityDiagnosis(NamedTuple):
    is_equality: bool
    gap: float
    witnesses_hold: bool
    reservoir_deviation: float
    mutual_info: float
    spectrum_deviation: float


def check_equality_case(report: ProcessReport, spec: ProcessSpec, tol_eq: float = TOL_EQ,
                        witness_tol: float = 1e-6) -> EqualityDiagnosis:
    """Detect equality in beta*dQ >= dS and test its structural witnesses.

    Equality forces an untouched reservoir, a product final state and a
    system spectrum preserved by the process.
    """
    gap = report.beta_delta_Q - report.delta_S
    res_dev = float(np.max(np.abs(report.rho_R_final.matrix - spec.reservoir.state.matrix)))
    spec_dev = float(np.max(np.abs(report.rho_S_final.spectrum - spec.rho_S.spectrum)))
    is_eq = bool(isfinite(gap) and abs(gap) <= tol_eq)
    witnesses = (res_dev <= witness_tol and report.mutual_info_final <= witness_tol
                 and spec_dev <= witness_tol)
    return EqualityDiagnosis(is_eq, gap, bool(witnesses) if is_eq else False,
                             res_dev, report.mutual_info_final, spec_dev)


def pureness_bound_check(spec: ProcessSpec, report: ProcessReport) -> float | None:
    """lambda_min(rho'_S) - exp(-beta (H_max - H_min)) lambda_min(rho_S); None for beta < 0."""
    beta = spec.beta
    if beta < 0:
        return None
    if spec.reservoir.infinite_mask:
        prefactor = 0.0
    else:
        w = spec.reservoir.h.eigenvalues
        spread = float(w[-1] - w[0])
        x = beta * spread if spread > 0 else 0.0
        prefactor = exp(-x) if isfinite(x) else 0.0
    lam_f = float(report.rho_S_final.spectrum[-1])
    lam_i = float(spec.rho_S.spectrum[-1])
    return lam_f - prefactor * lam_i
