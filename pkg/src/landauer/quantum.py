"""Dense finite-dimensional quantum states and entropic functionals.

Everything here is a pure function over immutable values. Entropies are in
nats (natural logarithm).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
UNITARY_TOL = 1e-10
ZERO_TOL = 1e-15
SUPPORT_TOL = 1e-10

MAX_DIM = 4096


class DimensionError(ValueError):
    """A tensor product would exceed ``MAX_DIM``."""


class InvalidStateError(ValueError):
    """Matrix violates a density-matrix invariant."""


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def _max_dev(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class HermitianOp:
    """Hermitian operator with a lazily cached eigendecomposition."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if _max_dev(m) > HERMITIAN_TOL:
            raise ValueError(f"operator is not Hermitian (deviation {_max_dev(m):.3g})")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator has non-finite entries")
        object.__setattr__(self, "matrix", (m + m.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues in ascending order and matching eigenvectors."""
        w, v = np.linalg.eigh(self.matrix)
        return w, v

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig[0]

    @property
    def norm(self) -> float:
        w = self.eigenvalues
        return float(np.max(np.abs(w))) if w.size else 0.0

    @classmethod
    def diagonal(cls, energies: Iterable[float]) -> "HermitianOp":
        return cls(np.diag(np.asarray(list(energies), dtype=float)))


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (deviation {err:.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "Unitary") -> "Unitary":
        return Unitary(self.matrix @ other.matrix)

    def dagger(self) -> "Unitary":
        return Unitary(self.matrix.conj().T)

    @classmethod
    def identity(cls, d: int) -> "Unitary":
        return cls(np.eye(d))


@dataclass(frozen=True, eq=False)
class QState:
    """Density matrix with tensor-factor dimensions.

    ``spectrum`` is available in descending order; eigenvalues in
    ``[-PSD_TOL, 0)`` are clamped to zero. A trusted eigendecomposition can be
    supplied through ``eig`` (used by thermal states, whose spectrum is known
    exactly).
    """

    matrix: np.ndarray
    dims: tuple[int, ...] = None
    eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        d = m.shape[0]
        dims = (d,) if self.dims is None else tuple(int(x) for x in self.dims)
        if prod(dims) != d:
            raise InvalidStateError(f"dims {dims} do not multiply to matrix size {d}")
        dev = _max_dev(m)
        if dev > HERMITIAN_TOL:
            raise InvalidStateError(f"state is not Hermitian (deviation {dev:.3g})")
        m = (m + m.conj().T) / 2
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1) > TRACE_TOL:
            raise InvalidStateError(f"state has trace {tr!r}")
        if self.eig is None:
            w, v = np.linalg.eigh(m)
            w, v = w[::-1], v[:, ::-1]
        else:
            w, v = (np.asarray(a) for a in self.eig)
            order = np.argsort(w, kind="stable")[::-1]
            w, v = w[order], v[:, order]
        if w.size and w[-1] < -PSD_TOL:
            raise InvalidStateError(f"state has negative eigenvalue {w[-1]:.3g}")
        w = np.where(w < 0, 0.0, w)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "eig", (w, v))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> np.ndarray:
        return self.eig[0]

    @property
    def rank(self) -> int:
        return int(np.sum(self.spectrum > SUPPORT_TOL))

    def expectation(self, op) -> float:
        m = op.matrix if isinstance(op, HermitianOp) else np.asarray(op)
        return float(np.real(np.trace(m @ self.matrix)))

    def with_dims(self, dims: Sequence[int]) -> "QState":
        return QState(self.matrix, dims, eig=self.eig)

    @classmethod
    def from_spectrum(cls, spectrum, basis=None, dims=None) -> "QState":
        p = np.asarray(spectrum, dtype=float)
        v = np.eye(p.size) if basis is None else np.asarray(basis, dtype=complex)
        return cls((v * p) @ v.conj().T, dims, eig=(p, v))

    @classmethod
    def pure(cls, psi, dims=None) -> "QState":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    @classmethod
    def maximally_mixed(cls, d: int, dims=None) -> "QState":
        return cls.from_spectrum(np.full(d, 1.0 / d), dims=dims)


def tensor(a: QState, b: QState, max_dim: int = MAX_DIM) -> QState:
    d = a.dim * b.dim
    if d > max_dim:
        raise DimensionError(f"tensor product dimension {d} exceeds limit {max_dim}")
    wa, va = a.eig
    wb, vb = b.eig
    return QState(np.kron(a.matrix, b.matrix), a.dims + b.dims,
                  eig=(np.kron(wa, wb), np.kron(va, vb)))


def tensor_all(states: Sequence[QState], max_dim: int = MAX_DIM) -> QState:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s, max_dim=max_dim)
    return out


def _check_factors(dims: Sequence[int], idx: Iterable[int]) -> list[int]:
    idx = list(idx)
    n = len(dims)
    if any(not (0 <= i < n) for i in idx) or len(set(idx)) != len(idx):
        raise ValueError(f"invalid factor indices {idx} for {n} factors")
    return idx


def partial_trace(s: QState, keep: Iterable[int]) -> QState:
    """Reduced state on the factors in ``keep`` (kept in ascending order)."""
    keep = sorted(_check_factors(s.dims, keep))
    if not keep:
        raise ValueError("keep must be a nonempty set of factor indices")
    n = len(s.dims)
    if keep == list(range(n)):
        return s
    drop = [i for i in range(n) if i not in keep]
    dk = prod(s.dims[i] for i in keep)
    dt = prod(s.dims[i] for i in drop)
    t = s.matrix.reshape(s.dims + s.dims)
    t = t.transpose(keep + drop + [n + i for i in keep] + [n + i for i in drop])
    t = t.reshape(dk, dt, dk, dt)
    return QState(np.einsum("ajbj->ab", t), tuple(s.dims[i] for i in keep))


def permute_factors(s: QState, order: Sequence[int]) -> QState:
    """Reorder tensor factors so that new factor ``k`` is old factor ``order[k]``."""
    order = _check_factors(s.dims, order)
    if len(order) != len(s.dims):
        raise ValueError("order must list every factor exactly once")
    n = len(order)
    d = s.dim
    t = s.matrix.reshape(s.dims + s.dims)
    t = t.transpose(list(order) + [n + i for i in order]).reshape(d, d)
    return QState(t, tuple(s.dims[i] for i in order))


def _entropy_of(p: np.ndarray) -> float:
    p = p[p > ZERO_TOL]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(s: QState) -> float:
    return max(_entropy_of(s.spectrum), 0.0) + 0.0


def relative_entropy(sigma: QState, rho: QState) -> float:
    """D(sigma||rho) in nats; ``inf`` when sigma leaves the support of rho."""
    if sigma.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {sigma.dim} vs {rho.dim}")
    ws, vs = sigma.eig
    wr, vr = rho.eig
    # overlaps[i, k] = |<sigma_i|rho_k>|^2
    overlaps = np.abs(vs.conj().T @ vr) ** 2
    kernel = wr <= ZERO_TOL
    if np.any(kernel):
        leak = overlaps[:, kernel].sum(axis=1)
        if np.any((ws > SUPPORT_TOL) & (leak > SUPPORT_TOL)):
            return float("inf")
    log_r = np.zeros_like(wr)
    log_r[~kernel] = np.log(wr[~kernel])
    cross = float(ws @ overlaps @ log_r)
    return max(-_entropy_of(ws) - cross, 0.0)


def _groups(s: QState, groups: Sequence[Iterable[int]]) -> list[list[int]]:
    out = [_check_factors(s.dims, g) for g in groups]
    flat = [i for g in out for i in g]
    if len(set(flat)) != len(flat):
        raise ValueError("factor groups must be disjoint")
    if any(not g for g in out):
        raise ValueError("factor groups must be nonempty")
    return out


def mutual_information(s: QState, a: Iterable[int], b: Iterable[int]) -> float:
    """I(A:B) for disjoint factor groups; factors in neither group are traced out."""
    a, b = _groups(s, [a, b])
    sa = von_neumann_entropy(partial_trace(s, a))
    sb = von_neumann_entropy(partial_trace(s, b))
    sab = von_neumann_entropy(partial_trace(s, a + b))
    return sa + sb - sab


def conditional_entropy(s: QState, target: Iterable[int], condition: Iterable[int]) -> float:
    """S(A|B) = S(AB) - S(B). May be negative for entangled states."""
    a, b = _groups(s, [target, condition])
    return (von_neumann_entropy(partial_trace(s, a + b))
            - von_neumann_entropy(partial_trace(s, b)))


def apply_unitary(s: QState, u: Unitary) -> QState:
    if u.dim != s.dim:
        raise ValueError(f"unitary of dimension {u.dim} cannot act on state of dimension {s.dim}")
    w, v = s.eig
    return QState(u.matrix @ s.matrix @ u.matrix.conj().T, s.dims, eig=(w, u.matrix @ v))


def permutation_unitary(dims: Sequence[int], order: Sequence[int]) -> Unitary:
    """Unitary that moves tensor factor ``order[k]`` into slot ``k``.

    The output factor dimensions are ``[dims[i] for i in order]``.
    """
    dims = tuple(dims)
    order = list(order)
    if sorted(order) != list(range(len(dims))):
        raise ValueError("order must be a permutation of the factor indices")
    d = prod(dims)
    out_idx = np.arange(d).reshape([dims[i] for i in order])
    target = np.transpose(out_idx, np.argsort(order)).ravel()
    m = np.zeros((d, d))
    m[target, np.arange(d)] = 1.0
    return Unitary(m)


def swap_unitary(dims: Sequence[int], i: int, j: int) -> Unitary:
    """Flip operator exchanging tensor factors ``i`` and ``j``."""
    dims = tuple(dims)
    _check_factors(dims, {i, j})
    if dims[i] != dims[j]:
        raise ValueError(f"cannot swap factors of dimensions {dims[i]} and {dims[j]}")
    order = list(range(len(dims)))
    order[i], order[j] = order[j], order[i]
    return permutation_unitary(dims, order)


def embed(u: Unitary, dims: Sequence[int], factors: Sequence[int]) -> Unitary:
    """Lift ``u`` acting on ``factors`` (in that order) to the full product space."""
    dims = tuple(dims)
    factors = _check_factors(dims, factors)
    if u.dim != prod(dims[k] for k in factors):
        raise ValueError("unitary dimension does not match the selected factors")
    rest = [k for k in range(len(dims)) if k not in factors]
    layout = factors + rest
    full = np.kron(u.matrix, np.eye(prod(dims[k] for k in rest)))
    to_layout = permutation_unitary(dims, layout).matrix
    return Unitary(to_layout.T @ full @ to_layout)


def random_state(d: int, rank: int | None = None, seed=None, dims=None) -> QState:
    """Random density matrix of the requested rank (Ginibre construction)."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in [1, {d}]")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return QState(rho / np.real(np.trace(rho)), dims)


def haar_unitary(d: int, seed=None) -> Unitary:
    if d == 1:
        return Unitary.identity(1)
    return Unitary(unitary_group.rvs(d, random_state=np.random.default_rng(seed)))
