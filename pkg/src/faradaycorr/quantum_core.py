"""Dense complex operator algebra and spin-system constructors.

Everything here works on small dense matrices (target dimensions of a few
tens at most), stored as ``numpy`` complex arrays. The global tensor-product
ordering convention is sensor ⊗ target: in any joint operator the sensor
factor comes first.

All functions are pure; returned arrays are fresh and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NonHermitianError
from .tolerances import TOL

Array = np.ndarray


def as_operator(entries) -> Array:
    """Coerce input to a square complex matrix."""
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    return a


def identity(dim: int) -> Array:
    return np.eye(dim, dtype=complex)


def is_hermitian(a: Array, tol: float = TOL.structural) -> bool:
    a = as_operator(a)
    return float(np.max(np.abs(a - a.conj().T))) <= tol


def is_unitary(u: Array, tol: float = TOL.unitarity) -> bool:
    u = as_operator(u)
    return float(np.max(np.abs(u.conj().T @ u - identity(u.shape[0])))) <= tol


def require_hermitian(a: Array, what: str = "operator", tol: float = TOL.structural) -> Array:
    a = as_operator(a)
    if not is_hermitian(a, tol):
        raise NonHermitianError(f"{what} is not Hermitian within {tol}")
    return a


def matmul(a: Array, b: Array) -> Array:
    """Matrix product with an explicit dimension check."""
    a, b = as_operator(a), as_operator(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"dims {a.shape[0]} and {b.shape[0]} differ")
    return a @ b


def kron(a: Array, b: Array) -> Array:
    """Kronecker product (first factor is the slow index)."""
    return np.kron(as_operator(a), as_operator(b))


def hermitian_expm(h: Array, t: float) -> Array:
    """exp(-i h t) for Hermitian h, via eigendecomposition.

    The result is unitary up to roundoff because the eigenvector matrix of a
    Hermitian operator is unitary and the eigenphases have unit modulus.
    """
    h = require_hermitian(h, "generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def spin_operators(two_j: int) -> tuple[Array, Array, Array]:
    """Standard spin-j matrices (Jx, Jy, Jz), dim = two_j + 1.

    Satisfy [Ja, Jb] = i eps_abc Jc and Jx^2+Jy^2+Jz^2 = j(j+1) I.
    """
    if two_j < 0 or int(two_j) != two_j:
        raise ValueError("two_j must be a non-negative integer")
    j = two_j / 2.0
    m = np.arange(j, -j - 1, -1.0)  # j, j-1, ..., -j
    jz = np.diag(m).astype(complex)
    # <j, m+1| J+ |j, m> = sqrt(j(j+1) - m(m+1)); basis ordered by decreasing m
    lower = m[1:]
    jp = np.zeros((two_j + 1, two_j + 1), dtype=complex)
    jp[np.arange(two_j), np.arange(1, two_j + 1)] = np.sqrt(j * (j + 1) - lower * (lower + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


def thermal_state(h: Array, beta: float) -> "DensityMatrix":
    """Gibbs state exp(-beta h)/Z via eigendecomposition."""
    h = require_hermitian(h, "hamiltonian")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    w, v = np.linalg.eigh(h)
    p = np.exp(-beta * (w - w.min()))
    p /= p.sum()
    return DensityMatrix((v * p) @ v.conj().T)


def partial_trace_sensor(joint: Array, sensor_dim: int) -> Array:
    """Trace out the sensor factor of a sensor ⊗ target operator."""
    joint = as_operator(joint)
    d = joint.shape[0]
    if sensor_dim < 1 or d % sensor_dim != 0:
        raise DimensionMismatchError(f"joint dim {d} not divisible by sensor dim {sensor_dim}")
    t = d // sensor_dim
    blocks = joint.reshape(sensor_dim, t, sensor_dim, t)
    return np.trace(blocks, axis1=0, axis2=2)


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian, unit-trace, positive-semidefinite operator."""

    matrix: Array

    def __post_init__(self):
        m = as_operator(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not is_hermitian(m, TOL.structural):
            raise NonHermitianError("density matrix is not Hermitian within tolerance")
        tr = np.trace(m)
        if abs(tr - 1.0) > TOL.structural:
            raise ValueError(f"density matrix trace {tr} is not 1 within tolerance")
        if np.linalg.eigvalsh(m).min() < -TOL.structural:
            raise ValueError("density matrix has a significantly negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def pure_state(ket) -> DensityMatrix:
    """Density matrix of a (normalized) state vector."""
    v = np.asarray(ket, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


@dataclass(frozen=True)
class TargetModel:
    """Target spin system: Hamiltonian, coupling operator, initial state.

    ``hamiltonian`` and ``coupling`` are Hermitian, in rad/s (hbar = 1).
    """

    hamiltonian: Array
    coupling: Array
    initial_state: DensityMatrix

    def __post_init__(self):
        h = require_hermitian(self.hamiltonian, "hamiltonian")
        b = require_hermitian(self.coupling, "coupling")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "coupling", b)
        if not (h.shape[0] == b.shape[0] == self.initial_state.dim):
            raise DimensionMismatchError("hamiltonian, coupling and state dims differ")

    @property
    def dim(self) -> int:
        return self.initial_state.dim
