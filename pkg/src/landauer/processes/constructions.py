"""Explicit processes: swaps, bound-attaining swaps, range witnesses and k-step chains."""
from __future__ import annotations

from dataclasses import dataclass
from math import log
from typing import NamedTuple

import numpy as np

from ..bounds import compute_M
from ..quantum import (SUPPORT_TOL, HermitianOp, QState, Unitary, partial_trace,
                       random_state, relative_entropy, swap_unitary,
                       tensor_all, von_neumann_entropy)
from ..thermo import Reservoir
from .core import ProcessSpec

FULL_RANK_TOL = 1e-12


def _entropy(s: QState) -> float:
    return von_neumann_entropy(s)


# --- swaps --------------------------------------------------------------------

def _split(total: int, d_sw: int, what: str) -> int:
    if d_sw < 1 or total % d_sw:
        raise ValueError(f"{what} dimension {total} is not divisible by the swap dimension {d_sw}")
    return total // d_sw


def build_swap_process(rho_S: QState, rho_R_target: QState, d_sw: int | None = None) -> ProcessSpec:
    """Swap the first ``d_sw``-dimensional factor of S with that of R.

    The reservoir is H = -log(rho_R_target) at beta = 1. ``d_sw`` defaults to
    a full swap (d_S = d).
    """
    d_S, d = rho_S.dim, rho_R_target.dim
    d_sw = d_S if d_sw is None else int(d_sw)
    d_S2 = _split(d_S, d_sw, "system")
    d_R2 = _split(d, d_sw, "reservoir")
    if rho_R_target.spectrum[-1] <= FULL_RANK_TOL:
        raise ValueError("the reservoir state must have full rank to be thermal at beta = 1")
    reservoir = Reservoir.from_state(rho_R_target, beta=1.0)
    u = swap_unitary((d_sw, d_S2, d_sw, d_R2), 0, 2)
    return ProcessSpec(rho_S, reservoir, u)


class SwapClosedForms(NamedTuple):
    delta_S: float
    delta: float
    delta_Q: float
    mutual_info: float


def swap_closed_forms(rho_S: QState, rho_R: QState, d_sw: int | None = None) -> SwapClosedForms:
    """Process quantities of a partial swap from the reduced initial states alone."""
    d_S, d = rho_S.dim, rho_R.dim
    d_sw = d_S if d_sw is None else int(d_sw)
    d_S2, d_R2 = _split(d_S, d_sw, "system"), _split(d, d_sw, "reservoir")
    s = rho_S.with_dims((d_sw, d_S2))
    r = rho_R.with_dims((d_sw, d_R2))
    s1, s2 = partial_trace(s, [0]), partial_trace(s, [1])
    r1, r2 = partial_trace(r, [0]), partial_trace(r, [1])
    h = Reservoir.from_state(rho_R).h.matrix
    swapped = np.kron(s1.matrix, r2.matrix)
    return SwapClosedForms(
        delta_S=_entropy(rho_S) - _entropy(s2) - _entropy(r1),
        delta=-_entropy(rho_R) + _entropy(r2) + _entropy(s1),
        delta_Q=float(np.real(np.trace(h @ (swapped - rho_R.matrix)))),
        mutual_info=(_entropy(s1) + _entropy(s2) - _entropy(rho_S))
        + (_entropy(r1) + _entropy(r2) - _entropy(rho_R)),
    )


def _binary_spectrum(t: float, d: int) -> np.ndarray:
    return np.concatenate([[1 - t], np.full(d - 1, t / (d - 1))])


def build_tight_process(delta_S: float, d: int) -> ProcessSpec:
    """Full swap whose heat equals dS + M(dS, d)."""
    if delta_S < 0 or delta_S > log(d) - 1e-6:
        raise ValueError(f"dS = {delta_S!r} must lie in [0, log d - 1e-6]")
    opt = compute_M(delta_S, d)
    rho_S = QState.from_spectrum(_binary_spectrum(opt.s_star, d))
    rho_R = QState.from_spectrum(_binary_spectrum(opt.r_star, d))
    return build_swap_process(rho_S, rho_R)


def _max_entangled(d: int) -> QState:
    return QState.pure(np.eye(d).ravel() / np.sqrt(d), dims=(d, d))


def deltaS_range_witnesses(d: int, seed=0) -> dict[str, ProcessSpec]:
    """Processes attaining the extremes of the entropy decrease at reservoir dimension d."""
    if d < 2:
        raise ValueError("d must be at least 2")
    ground = HermitianOp.diagonal([0.0] + [1.0] * (d - 1))
    ladder = HermitianOp.diagonal(np.arange(d, dtype=float))
    mixed_R = Reservoir(ladder, 0.0)
    pure = QState.pure(np.eye(d)[0])
    full_swap = swap_unitary((d, d), 0, 1)

    phi = random_state(d * d, rank=1, seed=seed, dims=(d, d))
    sigma = partial_trace(phi, [0])
    return {
        "upper": ProcessSpec(QState.maximally_mixed(d), Reservoir(ground, np.inf), full_swap),
        "classical_lower": ProcessSpec(pure, mixed_R, full_swap),
        "quantum_lower": ProcessSpec(_max_entangled(d), mixed_R, swap_unitary((d, d, d), 0, 2)),
        "quantum_intermediate": ProcessSpec(phi, Reservoir.from_state(sigma),
                                            swap_unitary((d, d, d), 0, 2)),
    }


# --- k-step processes --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KStepSpec:
    """Chain of k swaps from rho_S to rho_prime_S.

    ``points`` optionally fixes the k - 1 intermediate states; otherwise the
    linear mixture (1 - i/k) rho_0 + (i/k) rho'_S is used.
    """

    rho_S: QState
    rho_prime_S: QState
    k: int
    points: tuple[QState, ...] | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.rho_S.dim != self.rho_prime_S.dim:
            raise ValueError("initial and target states differ in dimension")
        if self.rho_prime_S.rank < self.rho_S.rank:
            raise ValueError("rank-decreasing targets need a reservoir with infinite energy "
                             "levels; see pure_erasure_truncated")
        if self.points is not None and len(self.points) != self.k - 1:
            raise ValueError(f"expected {self.k - 1} intermediate states, got {len(self.points)}")

    @property
    def interpolation(self) -> str:
        return "linear_mixture" if self.points is None else "custom"


class KStepReport(NamedTuple):
    k: int
    r: int
    delta_S: float
    beta_delta_Q: float
    gap: float
    step_relents: np.ndarray
    heat_sum_residual: float
    upper_bound: float
    lower_bound: float
    rho_0: np.ndarray
    rho_final_S: QState


def _support_basis(rho: QState) -> np.ndarray:
    w, v = rho.eig
    return v[:, w > SUPPORT_TOL]


def initial_support_rotation(rho_S: QState, rho_prime_S: QState) -> Unitary:
    """Unitary moving supp(rho_S) into supp(rho'_S); identity if it already lies there."""
    p = _support_basis(rho_prime_S)
    proj = p @ p.conj().T
    q = _support_basis(rho_S)
    if np.max(np.abs(q - proj @ q), initial=0.0) <= SUPPORT_TOL:
        return Unitary.identity(rho_S.dim)
    # both eigenbases are sorted by decreasing eigenvalue
    return Unitary(rho_prime_S.eig[1] @ rho_S.eig[1].conj().T)


def _matrix_log_psd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(m)
    return w, v, (v * np.log(np.clip(w, 1e-300, None))) @ v.conj().T


def _relent_full_rank(a: np.ndarray, b: np.ndarray) -> float:
    """D(a||b) for r x r matrices with b of full rank."""
    wa, va = np.linalg.eigh(a)
    wb, vb = np.linalg.eigh(b)
    mask = wa > 1e-15
    la = (va[:, mask] * np.log(wa[mask])) @ va[:, mask].conj().T
    lb = (vb * np.log(wb)) @ vb.conj().T
    return max(float(np.real(np.trace(a @ (la - lb)))), 0.0)


def kstep_chain(spec: KStepSpec) -> tuple[list[np.ndarray], Unitary, np.ndarray]:
    """States rho_0, ..., rho_k restricted to the r-dimensional support of rho'_S."""
    u0 = initial_support_rotation(spec.rho_S, spec.rho_prime_S)
    p = _support_basis(spec.rho_prime_S)
    restrict = lambda m: p.conj().T @ m @ p  # noqa: E731
    rho_0 = restrict(u0.matrix @ spec.rho_S.matrix @ u0.matrix.conj().T)
    target = restrict(spec.rho_prime_S.matrix)
    if spec.points is None:
        mids = [(1 - i / spec.k) * rho_0 + (i / spec.k) * target for i in range(1, spec.k)]
    else:
        mids = [restrict(q.matrix) for q in spec.points]
        for q in spec.points:
            if np.linalg.eigvalsh(restrict(q.matrix))[0] <= SUPPORT_TOL:
                raise ValueError("intermediate states must have full support on supp(rho'_S)")
    return [rho_0, *mids, target], u0, p


def build_kstep_process(spec: KStepSpec) -> KStepReport:
    """Heat of the k-step swap chain from single-slot marginals only."""
    chain, _, p = kstep_chain(spec)
    r = p.shape[1]
    k = spec.k
    step_relents = np.array([_relent_full_rank(chain[i - 1], chain[i]) for i in range(1, k + 1)])
    delta_S = _entropy(spec.rho_S) - _entropy(spec.rho_prime_S)
    heat_sum = 0.0
    for i in range(1, k + 1):
        heat_sum += float(np.real(np.trace((chain[i] - chain[i - 1]) @ _matrix_log_psd(chain[i])[2])))
    beta_dQ = delta_S + float(step_relents.sum())

    rho_0 = QState(chain[0])
    target = QState(chain[-1])
    if spec.points is None:
        upper = (relative_entropy(rho_0, target) + relative_entropy(target, rho_0)) / k
    else:
        # symmetric sum along the custom curve; infinite if rho_0 is rank-deficient
        upper = sum(relative_entropy(QState(chain[i - 1]), QState(chain[i]))
                    + relative_entropy(QState(chain[i]), QState(chain[i - 1])) for i in range(1, k + 1))
    if r >= 2:
        x = delta_S / k
        lower = k * compute_M(min(max(x, -log(r)), log(r)), r).value
    else:
        lower = 0.0
    return KStepReport(k=k, r=r, delta_S=delta_S, beta_delta_Q=beta_dQ, gap=beta_dQ - delta_S,
                       step_relents=step_relents, heat_sum_residual=abs(heat_sum - beta_dQ),
                       upper_bound=upper, lower_bound=lower, rho_0=chain[0],
                       rho_final_S=spec.rho_prime_S)


def kstep_dense_spec(spec: KStepSpec, max_k: int = 3) -> ProcessSpec:
    """Explicit joint process S (x) R_1 (x) ... (x) R_k for the k-step chain.

    Only for small k and full-rank targets (r = d_S); the joint dimension is d_S^(k+1).
    """
    if spec.k > max_k:
        raise ValueError(f"dense k-step simulation is limited to k <= {max_k}")
    chain, u0, p = kstep_chain(spec)
    d_S = spec.rho_S.dim
    if p.shape[1] != d_S:
        raise ValueError("dense simulation requires a full-rank target state")
    # express the slot states in the computational basis of S
    slots = [QState(p @ c @ p.conj().T) for c in chain[1:]]
    k = spec.k
    dims = (d_S,) * (k + 1)
    u = Unitary.identity(d_S ** (k + 1))
    for i in range(1, k + 1):
        u = swap_unitary(dims, 0, i) @ u
    u0_full = np.kron(u0.matrix, np.eye(d_S ** k))
    return ProcessSpec(spec.rho_S, Reservoir.from_state(tensor_all(slots)), Unitary(u.matrix @ u0_full))

