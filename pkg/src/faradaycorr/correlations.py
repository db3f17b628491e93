"""Time-ordered correlations of a target model via superoperator chains.

A K-th order time-ordered correlation is the trace of a chain of branch
superoperators applied to the initial state,

    C^{eta_K ... eta_1} = Tr[ B^{eta_K}_K ... B^{eta_1}_1 rho ],

where each B^{+} is the symmetrized product (anticommutator / 2), each B^{-}
the commutator divided by i, and the k-th operator is the coupling taken in
the interaction picture at time t_k. If the last sign is "-" the value is
identically zero (trace of a commutator).

``liouville_correlation`` is an independent cross-implementation that builds
each superoperator as a dense d^2 x d^2 matrix acting on the column-major
vectorization of rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, NumericalGuardError
from .quantum_core import Array, as_operator, hermitian_expm, identity, TargetModel
from .tolerances import TOL


class BranchSign(Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class CorrelationQuery:
    """Times (non-decreasing, seconds) and branch signs, index k paired with t_k."""

    times: tuple[float, ...]
    signs: tuple[BranchSign, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        signs = tuple(self.signs)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "signs", signs)
        if len(times) != len(signs):
            raise ValueError("times and signs must have the same length")
        if len(times) < 1:
            raise ValueError("need at least one shot")
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("times must be non-decreasing")

    @property
    def order(self) -> int:
        return len(self.times)

    def label(self) -> str:
        """Sign string in the conventional (last shot first) reading order."""
        return "".join(s.value for s in reversed(self.signs))


def apply_branch(b: Array, sign: BranchSign, rho: Array) -> Array:
    """Apply B^+ (anticommutator/2) or B^- (commutator/i) to rho."""
    b, rho = as_operator(b), as_operator(rho)
    if b.shape[0] != rho.shape[0]:
        raise DimensionMismatchError("operator and state dims differ")
    if sign is BranchSign.PLUS:
        return (b @ rho + rho @ b) / 2
    return (b @ rho - rho @ b) / 1j


def heisenberg_coupling(model: TargetModel, t: float) -> Array:
    """Interaction-picture coupling B(t) = exp(+iHt) B exp(-iHt)."""
    u = hermitian_expm(model.hamiltonian, t)  # exp(-iHt)
    return u.conj().T @ model.coupling @ u


def _real_trace(value: complex) -> float:
    if abs(value.imag) > TOL.trace_imag:
        raise NumericalGuardError(
            f"correlation trace has imaginary residue {value.imag:.3e} above tolerance"
        )
    return float(value.real)


def correlation(model: TargetModel, q: CorrelationQuery) -> float:
    """Evaluate C^{eta_K...eta_1} by direct superoperator application."""
    if q.signs[-1] is BranchSign.MINUS:
        return 0.0
    rho = model.initial_state.matrix
    for t, sign in zip(q.times, q.signs):
        rho = apply_branch(heisenberg_coupling(model, t), sign, rho)
    return _real_trace(np.trace(rho))


def vectorize(rho: Array) -> Array:
    """Column-major (Fortran-order) vectorization of a matrix."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(v: Array, dim: int) -> Array:
    return np.asarray(v, dtype=complex).reshape(dim, dim, order="F")


def branch_superoperator(b: Array, sign: BranchSign) -> Array:
    """Dense d^2 x d^2 matrix of B^{sign} on column-vectorized states.

    With column-major vectorization, left multiplication by B maps to
    I ⊗ B and right multiplication to B^T ⊗ I.
    """
    b = as_operator(b)
    d = b.shape[0]
    left = np.kron(identity(d), b)
    right = np.kron(b.T, identity(d))
    if sign is BranchSign.PLUS:
        return (left + right) / 2
    return (left - right) / 1j


def liouville_correlation(model: TargetModel, q: CorrelationQuery) -> float:
    """Cross-implementation of ``correlation`` in Liouville space."""
    if q.signs[-1] is BranchSign.MINUS:
        return 0.0
    d = model.dim
    v = vectorize(model.initial_state.matrix)
    for t, sign in zip(q.times, q.signs):
        v = branch_superoperator(heisenberg_coupling(model, t), sign) @ v
    return _real_trace(np.trace(unvectorize(v, d)))
