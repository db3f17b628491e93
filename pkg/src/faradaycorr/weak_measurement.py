"""Sequential weak-measurement pipeline.

Each shot couples a fresh coherent pulse to the target through
exp(-i (S3 ⊗ B(t_j)) tau), reads out the count difference in a chosen
polarization basis, and thereby applies a measurement superoperator to the
target state. Two evaluation paths are provided:

* ``gk_leading`` keeps only the leading order in tau: every shot applies
  (tau*alpha^2/2) times the branch superoperator selected by its basis, so
  the K-shot correlation is exactly 2^-K tau^K alpha^2K times the matching
  target correlation.
* ``gk_exact_unitary`` keeps all orders in tau. Because the pulse is
  coherent and S3 generates a passive polarization rotation, the joint
  unitary maps the pulse to a rotated coherent state conditioned on each
  eigenvalue of B(t_j); the shot then multiplies the target state (in the
  B(t_j) eigenbasis) elementwise by the matrix of recorded-observable
  coherent matrix elements. The default engine evaluates those matrix
  elements in closed form (exact, no truncation); ``engine="fock"``
  re-derives them numerically on a truncated two-mode Fock space as an
  independent cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .correlations import CorrelationQuery, apply_branch, correlation, heisenberg_coupling
from .errors import NumericalGuardError, ResourceGuardError
from .quantum_core import Array, TargetModel
from .sensor_optics import (
    FockTruncation,
    MeasurementBasis,
    SensorConfig,
    apply_s2,
    apply_s3,
    coherent_state,
    stokes_operators,
)
from .tolerances import TOL

MEMORY_GUARD_BYTES = 2 * 1024**3


class ProtocolWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ShotSpec:
    """One measurement shot: nominal start time (s) and readout basis."""

    time: float
    basis: MeasurementBasis


@dataclass(frozen=True)
class ProtocolSpec:
    """Ordered shots sharing one sensor configuration."""

    shots: tuple[ShotSpec, ...]
    sensor: SensorConfig

    def __post_init__(self):
        shots = tuple(self.shots)
        object.__setattr__(self, "shots", shots)
        if len(shots) < 1:
            raise ValueError("protocol needs at least one shot")
        times = [s.time for s in shots]
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("shot times must be non-decreasing")
        if shots[-1].basis is not MeasurementBasis.S2:
            warnings.warn(
                "last shot is an S3 (commutator) readout: the expected signal "
                "vanishes identically",
                ProtocolWarning,
                stacklevel=2,
            )

    @property
    def order(self) -> int:
        return len(self.shots)

    def query(self) -> CorrelationQuery:
        return CorrelationQuery(
            times=tuple(s.time for s in self.shots),
            signs=tuple(s.basis.eta for s in self.shots),
        )


@dataclass(frozen=True)
class GkResult:
    """K-shot count correlation (counts^K) and its leading-order prediction."""

    value: float
    order: int
    predicted_from_C: float


def measurement_superoperator(model: TargetModel, shot: ShotSpec, sensor: SensorConfig):
    """Leading-order map rho -> (tau alpha^2 / 2) * branch(B(t_j)) rho."""
    coeff = 0.5 * sensor.tau * sensor.alpha**2
    b_t = heisenberg_coupling(model, shot.time)
    sign = shot.basis.eta

    def apply(rho: Array) -> Array:
        return coeff * apply_branch(b_t, sign, rho)

    return apply


def _real_trace(value: complex, what: str) -> float:
    if abs(value.imag) > TOL.trace_imag:
        raise NumericalGuardError(f"{what} has imaginary residue {value.imag:.3e}")
    return float(value.real)


def _predicted_from_c(model: TargetModel, proto: ProtocolSpec) -> float:
    k = proto.order
    alpha, tau = proto.sensor.alpha, proto.sensor.tau
    return 2.0**-k * tau**k * alpha ** (2 * k) * correlation(model, proto.query())


def gk_leading(model: TargetModel, proto: ProtocolSpec) -> GkResult:
    """Compose the leading-order measurement maps in shot order and trace."""
    rho = model.initial_state.matrix
    for shot in proto.shots:
        rho = measurement_superoperator(model, shot, proto.sensor)(rho)
    value = _real_trace(np.trace(rho), "leading-order count correlation")
    return GkResult(value=value, order=proto.order, predicted_from_C=_predicted_from_c(model, proto))


def _coherent_record_matrix(alpha: float, tau: float, eigvals: Array, basis: MeasurementBasis) -> Array:
    """Matrix m[i,k] = <chi_k| Lambda |chi_i> of the recorded observable
    between the coherent pulses rotated by each eigenvalue of B(t_j).

    chi_b = (alpha cos(theta_b), alpha sin(theta_b)) with theta_b = tau*b/2;
    overlaps and quadratic-form matrix elements are closed-form.
    """
    theta = 0.5 * tau * np.asarray(eigvals, dtype=float)
    diff = theta[:, None] - theta[None, :]
    overlap = np.exp(-(alpha**2) * (1.0 - np.cos(diff)))
    if basis is MeasurementBasis.S2:
        return 0.5 * alpha**2 * np.sin(theta[:, None] + theta[None, :]) * overlap
    return -1j * alpha**2 * np.sin(diff) * overlap


@lru_cache(maxsize=4)
def _s3_eigendecomposition(n_max: int):
    _, _, s3 = stokes_operators(FockTruncation(n_max))
    w, f = np.linalg.eigh(s3)
    return w, f


def _fock_record_matrix(
    alpha: float, tau: float, eigvals: Array, basis: MeasurementBasis, tr: FockTruncation
) -> Array:
    """Truncated-Fock cross-check of ``_coherent_record_matrix``."""
    tr.check_alpha(alpha)
    s, f = _s3_eigendecomposition(tr.n_max)
    v0 = f.conj().T @ coherent_state(alpha, tr)
    chis = []
    for b in np.asarray(eigvals, dtype=float):
        chis.append(f @ (np.exp(-1j * s * tau * b) * v0))
    d = len(chis)
    shape = (tr.mode_dim, tr.mode_dim)
    applied = []
    for chi in chis:
        grid = chi.reshape(shape)
        out = apply_s2(grid) if basis is MeasurementBasis.S2 else 2.0 * apply_s3(grid)
        applied.append(out.ravel())
    m = np.empty((d, d), dtype=complex)
    for i in range(d):
        for k in range(d):
            m[i, k] = np.vdot(chis[k], applied[i])
    return m


def gk_exact_unitary(
    model: TargetModel,
    proto: ProtocolSpec,
    tr: FockTruncation | None = None,
    *,
    engine: str = "coherent",
    time_convention: str = "start",
) -> GkResult:
    """All-orders K-shot count correlation with a fresh pulse per shot.

    Sensor-target entanglement is discarded between shots (each shot uses a
    new pulse). ``time_convention`` chooses where B is frozen during a pulse:
    at the shot's nominal start time (default) or at its midpoint.
    """
    if engine not in ("coherent", "fock"):
        raise ValueError(f"unknown engine {engine!r}")
    if time_convention not in ("start", "midpoint"):
        raise ValueError(f"unknown time convention {time_convention!r}")
    alpha, tau = proto.sensor.alpha, proto.sensor.tau
    if engine == "fock":
        if tr is None:
            tr = FockTruncation.for_alpha(alpha)
        joint_bytes = (tr.fock_dim * model.dim) ** 2 * 16
        if joint_bytes > MEMORY_GUARD_BYTES:
            raise ResourceGuardError(
                f"joint space would need ~{joint_bytes / 1024**3:.1f} GiB (> 2 GiB guard)"
            )
    rho = model.initial_state.matrix
    for shot in proto.shots:
        t_eval = shot.time + (0.5 * tau if time_convention == "midpoint" else 0.0)
        b_t = heisenberg_coupling(model, t_eval)
        w, v = np.linalg.eigh(b_t)
        rho_eig = v.conj().T @ rho @ v
        if engine == "coherent":
            m = _coherent_record_matrix(alpha, tau, w, shot.basis)
        else:
            m = _fock_record_matrix(alpha, tau, w, shot.basis, tr)
        rho = v @ (m * rho_eig) @ v.conj().T
    value = _real_trace(np.trace(rho), "exact count correlation")
    return GkResult(value=value, order=proto.order, predicted_from_C=_predicted_from_c(model, proto))
