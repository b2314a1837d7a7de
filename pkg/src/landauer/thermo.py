"""Thermodynamics of a finite-dimensional system with Hamiltonian ``H``.

Inverse temperatures are plain floats, so ``float('inf')`` and
``-float('inf')`` are valid values of ``beta``. At ``beta = +inf`` (``-inf``)
the thermal state is the maximally mixed state on the lowest (highest)
eigenspace of ``H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import inf, isfinite
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from .quantum import HermitianOp, QState, relative_entropy, von_neumann_entropy

DEGENERACY_TOL = 1e-9
PROPORTIONAL_TOL = 1e-10
MASK_TOL = 1e-12


class UndefinedTemperatureError(ValueError):
    """beta(E) does not exist because H is proportional to the identity."""


def as_hamiltonian(h) -> HermitianOp:
    return h if isinstance(h, HermitianOp) else HermitianOp(np.asarray(h))


def is_trivial(h) -> bool:
    """True when H is proportional to the identity (spectral spread below tolerance)."""
    w = as_hamiltonian(h).eigenvalues
    return bool(w[-1] - w[0] < PROPORTIONAL_TOL * max(1.0, float(np.max(np.abs(w)))))


def gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """Thermal populations of the given energy levels at inverse temperature ``beta``."""
    e = np.asarray(energies, dtype=float)
    if np.isnan(beta):
        raise ValueError("beta is NaN")
    if beta == inf or beta == -inf:
        ref = e.min() if beta > 0 else e.max()
        level = np.abs(e - ref) <= DEGENERACY_TOL
        return level / level.sum()
    if beta == 0:
        return np.full(e.size, 1.0 / e.size)
    logw = -beta * e
    return np.exp(logw - logsumexp(logw))


def thermal_state(h, beta: float, mask=None) -> QState:
    """Gibbs state of ``h`` at ``beta``.

    ``mask`` lists basis indices whose energy is formally infinite; those
    levels get exactly zero population and must not be coupled to the rest.
    """
    h = as_hamiltonian(h)
    if mask:
        return _masked_thermal_state(h, beta, sorted(set(mask)))
    w, v = h.eig
    p = gibbs_weights(w, beta)
    return QState.from_spectrum(p, v)


def _masked_thermal_state(h: HermitianOp, beta: float, mask: list[int]) -> QState:
    d = h.dim
    if not (beta > 0):
        raise ValueError("masked (infinite-energy) levels require beta > 0")
    keep = np.array([i for i in range(d) if i not in mask])
    m = h.matrix
    if np.any(np.abs(m[np.ix_(mask, keep)]) > 0):
        raise ValueError("masked levels must not couple to the finite levels")
    w, v = np.linalg.eigh(m[np.ix_(keep, keep)])
    p = np.zeros(d)
    vecs = np.zeros((d, d), dtype=complex)
    p[: keep.size] = gibbs_weights(w, beta)
    vecs[np.ix_(keep, np.arange(keep.size))] = v
    vecs[mask, np.arange(keep.size, d)] = 1.0
    return QState.from_spectrum(p, vecs)


def thermal_energy(h, beta: float) -> float:
    w = as_hamiltonian(h).eigenvalues
    return float(gibbs_weights(w, beta) @ w)


def thermal_entropy(h, beta: float) -> float:
    p = gibbs_weights(as_hamiltonian(h).eigenvalues, beta)
    p = p[p > 0]
    return max(float(-p @ np.log(p)), 0.0) + 0.0


def thermal_variance(h, beta: float) -> float:
    w = as_hamiltonian(h).eigenvalues
    p = gibbs_weights(w, beta)
    e = p @ w
    return float(max(p @ (w - e) ** 2, 0.0))


def heat_capacity_T(h, beta: float) -> float:
    """var_beta(beta H); zero at beta = 0 and beta = +-inf."""
    if beta == 0 or not isfinite(beta):
        return 0.0
    return beta**2 * thermal_variance(h, beta)


def beta_of_energy(h, energy: float) -> float:
    """Inverse temperature of the thermal state with the given mean energy."""
    h = as_hamiltonian(h)
    if is_trivial(h):
        raise UndefinedTemperatureError("beta(E) is undefined for H proportional to the identity")
    w = h.eigenvalues
    e_min, e_max = float(w[0]), float(w[-1])
    spread = e_max - e_min
    edge = 1e-10 * spread
    if energy < e_min - edge or energy > e_max + edge:
        raise ValueError(f"energy {energy!r} outside [{e_min!r}, {e_max!r}]")
    if energy <= e_min + edge:
        return inf
    if energy >= e_max - edge:
        return -inf
    e0 = float(np.mean(w))
    if energy == e0:
        return 0.0

    def f(b):
        return thermal_energy(h, b) - energy

    # energy decreases with beta: expand away from 0 until the sign flips
    direction = 1.0 if energy < e0 else -1.0
    lo, hi = 0.0, direction / spread
    while f(hi) * direction > 0:
        lo, hi = hi, 2 * hi
    a, b = sorted((lo, hi))
    return float(optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))


def free_energy(rho: QState, h, beta: float) -> float:
    """Dimensionless free energy beta*tr[H rho] - S(rho)."""
    e = rho.expectation(as_hamiltonian(h))
    be = 0.0 if e == 0 else beta * e
    return be - von_neumann_entropy(rho)


@dataclass(frozen=True, eq=False)
class Reservoir:
    """Thermal reservoir: Hamiltonian, inverse temperature and cached Gibbs state."""

    h: HermitianOp
    beta: float
    infinite_mask: tuple[int, ...] = ()
    state: QState = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "h", as_hamiltonian(self.h))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "infinite_mask", tuple(sorted(set(self.infinite_mask))))
        object.__setattr__(self, "state", thermal_state(self.h, self.beta, self.infinite_mask))

    @property
    def dim(self) -> int:
        return self.h.dim

    @property
    def energy(self) -> float:
        return self.state.expectation(self.h)

    def heat(self, final: QState) -> float:
        """tr[H(final - initial)], ``inf`` if a masked level gets populated."""
        if self.infinite_mask:
            pop = np.real(np.diag(final.matrix))[list(self.infinite_mask)]
            if np.any(pop > MASK_TOL):
                return inf
        return final.expectation(self.h) - self.energy

    @classmethod
    def from_state(cls, rho: QState, beta: float = 1.0) -> "Reservoir":
        """Reservoir whose thermal state is the given full-rank ``rho``: H = -log(rho)/beta."""
        w, v = rho.eig
        if w.min() <= 1e-12:
            raise ValueError("target reservoir state must have full rank")
        h = (v * (-np.log(w) / beta)) @ v.conj().T
        return cls(HermitianOp((h + h.conj().T) / 2), beta)


class PythagorasSplit(NamedTuple):
    total: float
    nonthermal: float
    thermal: float
    beta_prime: float


def pythagoras_decompose(rho_prime_R: QState, reservoir: Reservoir) -> PythagorasSplit:
    """Split D(rho'||rho_beta) through the thermal state of equal energy."""
    if rho_prime_R.dim != reservoir.dim:
        raise ValueError("state and reservoir dimensions differ")
    total = relative_entropy(rho_prime_R, reservoir.state)
    if is_trivial(reservoir.h):
        return PythagorasSplit(total, total, 0.0, reservoir.beta)
    b_prime = beta_of_energy(reservoir.h, rho_prime_R.expectation(reservoir.h))
    rho_th = thermal_state(reservoir.h, b_prime)
    return PythagorasSplit(total, relative_entropy(rho_prime_R, rho_th),
                           relative_entropy(rho_th, reservoir.state), b_prime)


def entropy_of_energy(h, energy: float) -> float:
    """Entropy of the thermal state with mean energy ``energy``."""
    if is_trivial(h):
        return thermal_entropy(h, 0.0)
    return thermal_entropy(h, beta_of_energy(h, energy))


def integrate_beta_dE(h, e_start: float, e_end: float) -> float:
    """Integral of beta(E) dE between two energies, evaluated as S(E_end) - S(E_start)."""
    h = as_hamiltonian(h)
    if is_trivial(h):
        return 0.0
    if e_start == e_end:
        return 0.0
    return entropy_of_energy(h, e_end) - entropy_of_energy(h, e_start)


def quadrature_beta_dE(h, e_start: float, e_end: float) -> float:
    """Direct adaptive quadrature of beta(E); a cross-check for ``integrate_beta_dE``.

    Endpoints where beta diverges are integrable but converge slowly.
    """
    h = as_hamiltonian(h)
    if is_trivial(h) or e_start == e_end:
        return 0.0

    def beta(e):
        b = beta_of_energy(h, e)
        return b if isfinite(b) else np.sign(b) * 1e300

    val, _ = integrate.quad(beta, e_start, e_end, limit=200, epsabs=1e-12, epsrel=1e-10)
    return float(val)
