"""Photon-polarization pseudo-spin sensor: Stokes operators, coherent pulses,
and the interferometer network.

Conventions fixed here, once, for the whole package:

* Two-mode Fock space ordering is H ⊗ V; a pure state is stored either as a
  flat vector of length (n_max+1)^2 or as a grid psi[n_H, n_V].
* A magnetization eigenvalue b acting for a pulse of duration tau rotates the
  polarization plane by theta = b*tau/2 (the generator is exp(-i S3 b tau),
  and S3 is defined with a 1/2 prefactor).
* The interferometer phase is applied to the transmitted (V) arm, and the
  detector labeling is the one that makes the linear response of the recorded
  observable in b come out with coefficient +alpha^2*tau/2.
* Recorded observable per basis: the D/A basis (phase pi/2) records the
  *half* count difference (n_d - n_c)/2, which coincides with S2; the R/L
  basis (phase 0) records the *raw* difference n_d - n_c, i.e. 2*S3. This
  per-basis normalization gives both bases the same linear-response
  coefficient alpha^2/2 per unit (tau*b), which is what makes the K-shot
  count correlation exactly proportional to a single target correlation.
  (A uniform half-count convention would make the R/L coefficient alpha^2/4
  and break that proportionality; see the README.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .correlations import BranchSign
from .errors import TruncationError
from .quantum_core import Array

PHASE_S2 = math.pi / 2
PHASE_S3 = 0.0


class MeasurementBasis(Enum):
    """Polarization readout basis of one measurement shot."""

    S2 = "S2"  # D/A linear basis, phase pi/2, selects the anticommutator branch
    S3 = "S3"  # R/L circular basis, phase 0, selects the commutator branch

    @property
    def phase(self) -> float:
        return PHASE_S2 if self is MeasurementBasis.S2 else PHASE_S3

    @property
    def eta(self) -> BranchSign:
        return BranchSign.PLUS if self is MeasurementBasis.S2 else BranchSign.MINUS

    @property
    def record_scale(self) -> float:
        """Factor applied to the raw count difference n_d - n_c when recording."""
        return 0.5 if self is MeasurementBasis.S2 else 1.0


@dataclass(frozen=True)
class SensorConfig:
    """Coherent pulse amplitude (photons/pulse = alpha^2), duration, phase."""

    alpha: float
    tau: float
    phase: float = PHASE_S2

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive (real amplitudes only)")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


def required_cutoff(alpha: float) -> int:
    """Per-mode cutoff keeping coherent tail population below tolerance."""
    return int(math.ceil(alpha * alpha + 10 * alpha + 10))


@dataclass(frozen=True)
class FockTruncation:
    """Per-mode photon-number cutoff of the numerical sensor space."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @classmethod
    def for_alpha(cls, alpha: float) -> "FockTruncation":
        return cls(required_cutoff(alpha))

    @property
    def mode_dim(self) -> int:
        return self.n_max + 1

    @property
    def fock_dim(self) -> int:
        return self.mode_dim * self.mode_dim

    def check_alpha(self, alpha: float) -> None:
        if self.n_max < required_cutoff(alpha):
            raise TruncationError(
                f"n_max={self.n_max} too small for alpha={alpha} "
                f"(need >= {required_cutoff(alpha)})"
            )


@dataclass(frozen=True)
class OutputAmplitudes:
    """Coherent amplitudes at the two detectors after the network."""

    beta_c: complex
    beta_d: complex

    @property
    def mean_c(self) -> float:
        return abs(self.beta_c) ** 2

    @property
    def mean_d(self) -> float:
        return abs(self.beta_d) ** 2

    @property
    def raw_difference_mean(self) -> float:
        """Mean of the unhalved difference count n_d - n_c."""
        return self.mean_d - self.mean_c


def plane_rotation_angle(b: float, tau: float) -> float:
    """Polarization-plane rotation produced by field eigenvalue b over tau."""
    return 0.5 * tau * b


@lru_cache(maxsize=16)
def _mode_annihilation(mode_dim: int) -> Array:
    a = np.zeros((mode_dim, mode_dim), dtype=complex)
    n = np.arange(1, mode_dim)
    a[n - 1, n] = np.sqrt(n)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=8)
def _two_mode_ops(n_max: int) -> tuple[Array, Array]:
    """Dense two-mode annihilation operators (a_H, a_V), H ⊗ V ordering."""
    a = _mode_annihilation(n_max + 1)
    eye = np.eye(n_max + 1)
    a_h = np.kron(a, eye)
    a_v = np.kron(eye, a)
    a_h.setflags(write=False)
    a_v.setflags(write=False)
    return a_h, a_v


@lru_cache(maxsize=8)
def stokes_operators(tr: FockTruncation) -> tuple[Array, Array, Array]:
    """Dense Stokes operators (S1, S2, S3) on the truncated two-mode space.

    Heavy for large cutoffs (dim = (n_max+1)^2); the matrix-free helpers
    below are preferred for expectation values at large alpha.
    """
    a_h, a_v = _two_mode_ops(tr.n_max)
    hd, vd = a_h.conj().T, a_v.conj().T
    s1 = (hd @ a_h - vd @ a_v) / 2
    s2 = (hd @ a_v + vd @ a_h) / 2
    s3 = -0.5j * (hd @ a_v - vd @ a_h)
    for s in (s1, s2, s3):
        s.setflags(write=False)
    return s1, s2, s3


def _coherent_mode(alpha: float, mode_dim: int) -> Array:
    """Single-mode coherent amplitudes, computed stably in log space."""
    if alpha == 0:
        c = np.zeros(mode_dim, dtype=complex)
        c[0] = 1.0
        return c
    n = np.arange(mode_dim)
    log_c = -0.5 * alpha * alpha + n * math.log(abs(alpha)) - 0.5 * _log_factorial(n)
    c = np.exp(log_c)
    if alpha < 0:
        c *= (-1.0) ** n
    return c.astype(complex)


def _log_factorial(n: np.ndarray) -> np.ndarray:
    top = int(np.max(n))
    table = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, top + 1)))])
    return table[np.asarray(n, dtype=int)]


def coherent_grid(alpha_h: float, alpha_v: float, tr: FockTruncation) -> Array:
    """Two-mode coherent state |alpha_h, alpha_v> as a grid psi[n_H, n_V]."""
    tr.check_alpha(math.hypot(alpha_h, alpha_v))
    return np.outer(_coherent_mode(alpha_h, tr.mode_dim), _coherent_mode(alpha_v, tr.mode_dim))


def coherent_state(alpha: float, tr: FockTruncation) -> Array:
    """H-polarized coherent pulse |alpha, H> as a flat vector."""
    return coherent_grid(alpha, 0.0, tr).ravel()


# -- matrix-free applications on psi[n_H, n_V] grids -------------------------

def _aH(psi: Array) -> Array:
    a = _mode_annihilation(psi.shape[0])
    return a @ psi


def _aH_dag(psi: Array) -> Array:
    a = _mode_annihilation(psi.shape[0])
    return a.conj().T @ psi


def _aV(psi: Array) -> Array:
    a = _mode_annihilation(psi.shape[1])
    return psi @ a.T


def _aV_dag(psi: Array) -> Array:
    a = _mode_annihilation(psi.shape[1])
    return psi @ a.conj()


def apply_s1(psi: Array) -> Array:
    n_h = np.arange(psi.shape[0])[:, None]
    n_v = np.arange(psi.shape[1])[None, :]
    return (n_h - n_v) / 2 * psi


def apply_s2(psi: Array) -> Array:
    return (_aH_dag(_aV(psi)) + _aV_dag(_aH(psi))) / 2


def apply_s3(psi: Array) -> Array:
    return -0.5j * (_aH_dag(_aV(psi)) - _aV_dag(_aH(psi)))


def _record_apply(basis: MeasurementBasis, psi: Array) -> Array:
    """Apply the recorded observable: S2, or 2*S3 for the raw R/L count."""
    if basis is MeasurementBasis.S2:
        return apply_s2(psi)
    return 2.0 * apply_s3(psi)


@dataclass(frozen=True)
class SelectionTraces:
    """The three sensor traces determining what a measurement basis selects.

    t0      = Tr[Lambda rho_s]            (must vanish: no standing signal)
    t_plus  = Tr[Lambda S3+ rho_s]        (coefficient of the commutator branch)
    t_minus = Tr[Lambda S3- rho_s]        (coefficient of the anticommutator branch)
    """

    t0: float
    t_plus: float
    t_minus: float


def selection_traces(alpha: float, tr: FockTruncation, basis: MeasurementBasis) -> SelectionTraces:
    """Numerically evaluate the selection traces on the truncated space.

    Computed matrix-free: for the pure pulse |v>, with u = Lambda|v> and
    w = S3|v>, one has t_plus = Re<u|w> and t_minus = 2 Im<u|w>.
    """
    tr.check_alpha(alpha)
    v = coherent_grid(alpha, 0.0, tr)
    u = _record_apply(basis, v)
    w = apply_s3(v)
    z = complex(np.vdot(u, w))
    t0 = complex(np.vdot(v, u))
    return SelectionTraces(t0=float(t0.real), t_plus=float(z.real), t_minus=float(2 * z.imag))


def grid_expectation(apply_op, alpha_h: float, alpha_v: float, tr: FockTruncation) -> complex:
    """<op> in the two-mode coherent state (alpha_h, alpha_v), truncated."""
    psi = coherent_grid(alpha_h, alpha_v, tr)
    return complex(np.vdot(psi, apply_op(psi)))


def interferometer_amplitudes(
    cfg: SensorConfig, faraday_angle: float, swap_detectors: bool = False
) -> OutputAmplitudes:
    """Propagate the pulse amplitudes through the PBS / phase / BS network.

    The input (alpha, 0) is rotated in the polarization plane by
    ``faraday_angle``; the PBS splits H (reflected) from V (transmitted); the
    phase exp(i*phase) is applied to the transmitted arm; the 1:1 BS mixes
    (a, b) -> ((a + i b)/sqrt2, (i a + b)/sqrt2).
    """
    theta = faraday_angle
    beta_h = cfg.alpha * math.cos(theta)
    beta_v = cfg.alpha * math.sin(theta)
    b = beta_v * complex(math.cos(cfg.phase), math.sin(cfg.phase))
    beta_c = (beta_h + 1j * b) / math.sqrt(2)
    beta_d = (1j * beta_h + b) / math.sqrt(2)
    if swap_detectors:
        beta_c, beta_d = beta_d, beta_c
    return OutputAmplitudes(beta_c=complex(beta_c), beta_d=complex(beta_d))
