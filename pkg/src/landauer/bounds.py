"""Finite-size bound functions N(d) and M(x, d) and the heat bounds built on them.

``d`` is always the reservoir dimension. All entropies are in nats.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import inf, isfinite, log, log1p, sqrt
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize
from scipy.special import rel_entr, xlogy

from .quantum import QState, relative_entropy, von_neumann_entropy

M_GRID = 2000
N_GRID = 4000
GOLDEN_TOL = 1e-12
ENDPOINT_TOL = 1e-9
_INV_PHI = (sqrt(5.0) - 1.0) / 2.0


def _check_unit(*vals):
    for v in vals:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"argument {v!r} outside [0, 1]")


def binary_entropy(s: float) -> float:
    _check_unit(s)
    return float(-xlogy(s, s) - xlogy(1 - s, 1 - s))


def binary_relative_entropy(s: float, r: float) -> float:
    """D(diag(s,1-s) || diag(r,1-r)); ``inf`` when r is 0 or 1 and s differs."""
    _check_unit(s, r)
    return float(max(rel_entr(s, r) + rel_entr(1 - s, 1 - r), 0.0))


def golden_section_min(f: Callable[[float], float], a: float, b: float,
                       tol: float = GOLDEN_TOL, max_iter: int = 200) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on [a, b]; returns (argmin, min)."""
    c = b - _INV_PHI * (b - a)
    e = a + _INV_PHI * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _INV_PHI * (b - a)
            fe = f(e)
    cands = [(fa, xa) for xa, fa in ((a, f(a)), (c, fc), (e, fe), (b, f(b)))]
    fbest, xbest = min(cands)
    return xbest, fbest


# --- N(d) -----------------------------------------------------------------

class NOptimum(NamedTuple):
    value: float
    r_star: float
    residual: float


def _n_objective(r, d):
    return r * (1 - r) * np.log((1 - r) * (d - 1) / r) ** 2


@lru_cache(maxsize=None)
def compute_N_full(d: int) -> NOptimum:
    """N(d) with its maximizer r* and the stationarity residual (1-2r)L - 2."""
    if int(d) != d or d < 2:
        raise ValueError(f"N(d) requires an integer d >= 2, got {d!r}")
    d = int(d)
    grid = np.logspace(-12, np.log10(0.5), N_GRID, endpoint=False)
    vals = _n_objective(grid, d)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, N_GRID - 1)]

    def stationarity(r):
        return (1 - 2 * r) * log((1 - r) * (d - 1) / r) - 2

    r_star = optimize.brentq(stationarity, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return NOptimum(float(_n_objective(r_star, d)), float(r_star), abs(stationarity(r_star)))


def compute_N(d: int) -> float:
    return compute_N_full(d).value


class NChoice(enum.Enum):
    EXACT = "exact"
    QUARTER_LOG2_PLUS_1 = "quarter_log2_plus_1"
    LOG2_D = "log2_d"


def n_value(d: int, choice: NChoice = NChoice.EXACT) -> float:
    """One of the admissible constants N >= N(d)."""
    choice = NChoice(choice)
    if choice is NChoice.EXACT:
        return compute_N(d)
    if choice is NChoice.QUARTER_LOG2_PLUS_1:
        return 0.25 * log(d - 1) ** 2 + 1
    return log(d) ** 2


@dataclass(frozen=True)
class BoundParams:
    d: int
    N_choice: NChoice = NChoice.EXACT

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        object.__setattr__(self, "N_choice", NChoice(self.N_choice))

    @property
    def N(self) -> float:
        return n_value(self.d, self.N_choice)


# --- M(x, d) ----------------------------------------------------------------

class MOptimum(NamedTuple):
    x: float
    value: float
    s_star: float
    r_star: float


def _phi(s, d):
    """Entropy of the spectrum (1-s, s/(d-1), ..., s/(d-1)); increasing on [0, (d-1)/d]."""
    s = np.asarray(s, dtype=float)
    return -xlogy(s, s) - xlogy(1 - s, 1 - s) + s * log(d - 1)


def _phi_scalar(s: float, d: int) -> float:
    h = 0.0
    if s > 0:
        h -= s * log(s)
    if s < 1:
        h -= (1 - s) * log1p(-s)
    return h + s * log(d - 1)


def _phi_inv_grid(t: np.ndarray, d: int, iters: int = 40) -> np.ndarray:
    # only locates the grid minimum; the refinement uses the exact inverse
    lo = np.zeros_like(t)
    hi = np.full_like(t, (d - 1) / d)
    for _ in range(iters):
        mid = (lo + hi) / 2
        below = _phi(mid, d) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return (lo + hi) / 2


def _phi_inv(t: float, d: int) -> float:
    top = (d - 1) / d
    if t <= 0:
        return 0.0
    if t >= log(d):
        return top
    return optimize.brentq(lambda s: _phi_scalar(s, d) - t, 0.0, top,
                           xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _binrel_vec(s, r):
    return np.maximum(rel_entr(s, r) + rel_entr(1 - s, 1 - r), 0.0)


@lru_cache(maxsize=8192)
def compute_M(x: float, d: int) -> MOptimum:
    """Minimal binary relative entropy at entropy difference ``x`` in dimension ``d``."""
    if int(d) != d or d < 2:
        raise ValueError(f"M(x, d) requires an integer d >= 2, got {d!r}")
    d = int(d)
    x = float(x)
    ld = log(d)
    if not np.isfinite(x) or x < -ld - ENDPOINT_TOL or x > ld + ENDPOINT_TOL:
        raise ValueError(f"x = {x!r} outside [-log d, log d] = [{-ld!r}, {ld!r}]")
    top = (d - 1) / d
    if x == 0.0:
        return MOptimum(0.0, 0.0, top / 2, top / 2)
    if x >= ld - ENDPOINT_TOL:
        return MOptimum(x, inf, top, 0.0)
    if x <= -ld:
        return MOptimum(x, ld, 0.0, top)

    # parametrize by t = phi(r); the constraint pins phi(s) = t + x
    t_lo, t_hi = max(0.0, -x), min(ld, ld - x)
    ts = np.linspace(t_lo, t_hi, M_GRID)
    vals = _binrel_vec(_phi_inv_grid(ts + x, d), _phi_inv_grid(ts, d))
    i = int(np.argmin(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, M_GRID - 1)]

    def objective(t):
        return binary_relative_entropy(_phi_inv(t + x, d), _phi_inv(t, d))

    t_star, value = golden_section_min(objective, a, b, tol=GOLDEN_TOL * max(1.0, t_hi - t_lo))
    return MOptimum(x, value, _phi_inv(t_star + x, d), _phi_inv(t_star, d))


def constraint_residual(opt: MOptimum, d: int) -> float:
    if not isfinite(opt.value):
        return 0.0
    return abs(float(_phi(opt.s_star, d) - _phi(opt.r_star, d)) - opt.x)


def lower_bound_chain(x: float, N: float) -> tuple[float, float, float]:
    """(N e^{x/N} - N - x, x^2/2N + x^3/6N^2, x^2/2N).

    The first two are successive lower bounds on M(x, d) for N >= N(d); the
    third is the quadratic term alone, below the cubic one for x >= 0.
    """
    if not N > 0:
        raise ValueError("N must be positive")
    y = x / N
    exp_bound = N * (np.expm1(y) - y)
    quad = x * x / (2 * N)
    return float(exp_bound), float(quad + x**3 / (6 * N * N)), float(quad)


# --- heat bounds --------------------------------------------------------------

def theorem2_negative_branch(delta_S: float, N: float) -> float:
    """N - sqrt(N^2 - 2 N dS) for dS <= 0, written without cancellation."""
    return 2 * N * delta_S / (N + sqrt(N * N - 2 * N * delta_S))


def finite_size_bound(delta_S: float, params: BoundParams) -> float:
    """Lower bound on beta*dQ given the entropy decrease of the system."""
    d = params.d
    if d == 1:
        if abs(delta_S) > ENDPOINT_TOL:
            warnings.warn("a one-dimensional reservoir forces dS = 0", RuntimeWarning, stacklevel=2)
        return 0.0
    ld = log(d)
    if delta_S > ld + ENDPOINT_TOL or delta_S < -2 * ld - ENDPOINT_TOL:
        raise ValueError(f"dS = {delta_S!r} outside [-2 log d, log d]")
    N = params.N
    if delta_S >= 0:
        m = compute_M(min(delta_S, ld), d).value
        return max(delta_S + m, delta_S + delta_S**2 / (2 * N))
    return theorem2_negative_branch(delta_S, N)


class BoundCheck(NamedTuple):
    applicable: bool
    holds: bool
    margin: float


def deltaQ_bound_check(delta: float, beta_deltaQ: float, d: int, tol: float = 1e-8) -> BoundCheck:
    """Check dS_R <= b - b^2/2N(d) for b = beta*dQ <= 0."""
    if not beta_deltaQ <= 0 or d < 2:
        return BoundCheck(False, True, float("nan"))
    if beta_deltaQ == -inf:
        return BoundCheck(True, True, inf)
    rhs = beta_deltaQ - beta_deltaQ**2 / (2 * compute_N(d))
    margin = rhs - delta
    return BoundCheck(True, margin >= -tol, margin)


def relent_floor_check(sigma: QState, rho: QState) -> float:
    """D(sigma||rho) - M(S(sigma) - S(rho), d)."""
    if sigma.dim != rho.dim or sigma.dim < 2:
        raise ValueError("states must share a dimension d >= 2")
    d = sigma.dim
    x = von_neumann_entropy(sigma) - von_neumann_entropy(rho)
    x = min(max(x, -log(d)), log(d))
    D = relative_entropy(sigma, rho)
    m = compute_M(x, d).value
    if D == inf:
        return inf
    return D - m
