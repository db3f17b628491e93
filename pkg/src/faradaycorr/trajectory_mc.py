"""Stochastic shot-by-shot simulation of the counting experiment.

Two modes:

* ``kraus_quantum``: exact quantum trajectories. Per shot, the coupling
  B(t_j) is diagonalized; conditioned on an eigenvalue b the detectors see
  independent Poisson counts with means given by the interferometer
  amplitudes, and the post-measurement state is updated with the full Kraus
  element (which is diagonal in the B(t_j) eigenbasis and keeps the
  interference between eigenvalue branches). The marginal count distribution
  of a mixed state is therefore a mixture of Poisson products, while the
  state update is exact.
* ``semiclassical_field``: the target is a classical stochastic field; each
  shot draws Poisson counts around the deflected interferometer means. Only
  the all-anticommutator correlation survives in this mode.

Reproducibility: the master seed is split into fixed-size chunks of
sequences via ``numpy.random.SeedSequence.spawn``; results are combined in
chunk-index order, so they do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .correlations import heisenberg_coupling
from .errors import NonHermitianError
from .quantum_core import Array, DensityMatrix, TargetModel, require_hermitian
from .sensor_optics import MeasurementBasis, SensorConfig, plane_rotation_angle
from .tolerances import TOL
from .weak_measurement import ProtocolSpec

CHUNK_SIZE = 16384


class FieldKind(Enum):
    CONSTANT = "constant"
    ORNSTEIN_UHLENBECK = "ornstein_uhlenbeck"
    TELEGRAPH = "telegraph"


@dataclass(frozen=True)
class ClassicalFieldModel:
    """Classical magnetization field b(t) in rad/s.

    ``amplitude`` is the constant value, the stationary standard deviation
    (Ornstein-Uhlenbeck) or the two-state level (telegraph).
    """

    kind: FieldKind
    amplitude: float
    correlation_time: float = math.inf

    def __post_init__(self):
        if self.kind is not FieldKind.CONSTANT and not self.correlation_time > 0:
            raise ValueError("stochastic field kinds need a positive correlation time")


@dataclass(frozen=True)
class TrajectoryConfig:
    sequences: int
    seed: int
    mode: str  # "kraus_quantum" | "semiclassical_field"
    proto: ProtocolSpec
    model: TargetModel | ClassicalFieldModel
    workers: int = 1

    def __post_init__(self):
        if self.sequences < 1:
            raise ValueError("need at least one sequence")
        if self.mode not in ("kraus_quantum", "semiclassical_field"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "kraus_quantum" and not isinstance(self.model, TargetModel):
            raise ValueError("kraus_quantum mode requires a TargetModel")
        if self.mode == "semiclassical_field" and not isinstance(self.model, ClassicalFieldModel):
            raise ValueError("semiclassical_field mode requires a ClassicalFieldModel")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate of the K-shot count correlation.

    ``per_shot_variance`` is the variance of the half count difference
    (n_d - n_c)/2, independent of the per-basis record normalization;
    ``per_shot_variance_raw`` is the variance of the unhalved difference.
    """

    mean: float
    std_error: float
    per_shot_variance: float
    per_shot_variance_raw: float
    n_sequences: int


def cluster_eigenvalues(w: Array, tol: float = TOL.eigen_cluster) -> Array:
    """Snap near-degenerate (sorted) eigenvalues to their cluster means."""
    w = np.asarray(w, dtype=float)
    out = w.copy()
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > tol:
            out[start:i] = w[start:i].mean()
            start = i
    return out


def _detector_means(alpha: float, theta: Array, phase: float) -> tuple[Array, Array, Array, Array]:
    """Coherent detector amplitudes for plane rotations theta (vectorized).

    Returns (beta_c, beta_d, mean_c, mean_d). Same network as
    ``sensor_optics.interferometer_amplitudes``.
    """
    theta = np.asarray(theta, dtype=float)
    beta_h = alpha * np.cos(theta)
    beta_v = alpha * np.sin(theta)
    b = beta_v * np.exp(1j * phase)
    beta_c = (beta_h + 1j * b) / math.sqrt(2)
    beta_d = (1j * beta_h + b) / math.sqrt(2)
    return beta_c, beta_d, np.abs(beta_c) ** 2, np.abs(beta_d) ** 2


def _log_poisson(n: np.ndarray, mean: float) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if mean == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return n * math.log(mean) - mean - np.vectorize(math.lgamma)(n + 1)


def _power_factors(beta_scaled: Array, counts: Array) -> Array:
    """beta^n factors (n, branches) with 0^0 = 1 handling."""
    counts = np.asarray(counts, dtype=float)
    nz = np.abs(beta_scaled) > 0
    logb = np.zeros(beta_scaled.shape, dtype=complex)
    logb[nz] = np.log(beta_scaled[nz])
    out = np.exp(counts[:, None] * logb[None, :])
    for j in np.nonzero(~nz)[0]:
        out[:, j] = (counts == 0).astype(complex)
    return out


class KrausOutcomeSampler:
    """Photon-count outcome distribution of a single shot, with state update."""

    def __init__(self, rho: DensityMatrix, b: Array, cfg: SensorConfig, basis_phase: float):
        b = require_hermitian(b, "coupling")
        if b.shape[0] != rho.dim:
            raise NonHermitianError("coupling and state dims differ")
        w, v = np.linalg.eigh(b)
        self.eigvals = cluster_eigenvalues(w)
        self.eigvecs = v
        self.alpha = cfg.alpha
        self.rho_eig = v.conj().T @ rho.matrix @ v
        self.branch_probs = np.clip(np.real(np.diag(self.rho_eig)), 0.0, None)
        self.branch_probs = self.branch_probs / self.branch_probs.sum()
        theta = plane_rotation_angle(self.eigvals, cfg.tau)
        bc, bd, mc, md = _detector_means(cfg.alpha, theta, basis_phase)
        self.beta_c, self.beta_d = bc, bd
        self.means_c, self.means_d = mc, md

    def sample(self, rng: np.random.Generator) -> tuple[int, int]:
        i = rng.choice(len(self.branch_probs), p=self.branch_probs)
        n_c = int(rng.poisson(self.means_c[i]))
        n_d = int(rng.poisson(self.means_d[i]))
        return n_c, n_d

    def branch_count_probability(self, i: int, n_c: int, n_d: int) -> float:
        return float(
            np.exp(
                _log_poisson(np.array([n_c]), self.means_c[i])
                + _log_poisson(np.array([n_d]), self.means_d[i])
            )[0]
        )

    def probability(self, n_c: int, n_d: int) -> float:
        """P(n_c, n_d) = sum_i rho_ii Pois(n_c; mu_c(b_i)) Pois(n_d; mu_d(b_i))."""
        return float(
            sum(
                p * self.branch_count_probability(i, n_c, n_d)
                for i, p in enumerate(self.branch_probs)
            )
        )

    def _amplitude_factors(self, n_c: int, n_d: int) -> Array:
        """Kraus amplitudes per branch, up to a branch-independent factor."""
        gc = _power_factors(self.beta_c / self.alpha, np.array([n_c]))[0]
        gd = _power_factors(self.beta_d / self.alpha, np.array([n_d]))[0]
        return gc * gd

    def post_state(self, n_c: int, n_d: int) -> DensityMatrix:
        """Normalized post-measurement state K rho K† / P."""
        g = self._amplitude_factors(n_c, n_d)
        rho = (g[:, None] * g.conj()[None, :]) * self.rho_eig
        norm = np.real(np.trace(rho))
        if norm <= 0:
            raise ValueError("outcome has zero probability for this state")
        rho = self.eigvecs @ (rho / norm) @ self.eigvecs.conj().T
        rho = (rho + rho.conj().T) / 2
        return DensityMatrix(rho)


def kraus_outcome_distribution(
    rho: DensityMatrix, b: Array, cfg: SensorConfig, basis_phase: float
) -> KrausOutcomeSampler:
    return KrausOutcomeSampler(rho, b, cfg, basis_phase)


# -- batched sequence simulation ---------------------------------------------


def _quantum_shot_tables(model: TargetModel, proto: ProtocolSpec):
    """Per-shot eigendata and detector statistics, shared by all sequences."""
    alpha, tau = proto.sensor.alpha, proto.sensor.tau
    tables = []
    for shot in proto.shots:
        b_t = heisenberg_coupling(model, shot.time)
        w, v = np.linalg.eigh(b_t)
        b_cl = cluster_eigenvalues(w)
        theta = plane_rotation_angle(b_cl, tau)
        bc, bd, mc, md = _detector_means(alpha, theta, shot.basis.phase)
        tables.append(
            dict(
                v=v,
                vh=v.conj().T,
                means_c=mc,
                means_d=md,
                bc_scaled=bc / alpha,
                bd_scaled=bd / alpha,
                scale=shot.basis.record_scale,
            )
        )
    return tables


def _run_quantum_chunk(n: int, rng: np.random.Generator, rho0: Array, tables) -> tuple:
    d = rho0.shape[0]
    states = np.broadcast_to(rho0, (n, d, d)).copy()
    prod = np.ones(n)
    s_half = 0.0
    s_half2 = 0.0
    count = 0
    for tb in tables:
        rp = np.einsum("ab,nbc,cd->nad", tb["vh"], states, tb["v"], optimize=True)
        p = np.clip(np.real(np.einsum("nii->ni", rp)), 0.0, None)
        p = p / p.sum(axis=1, keepdims=True)
        u = rng.random(n)
        idx = (np.cumsum(p, axis=1) > u[:, None]).argmax(axis=1)
        n_c = rng.poisson(tb["means_c"][idx]).astype(float)
        n_d = rng.poisson(tb["means_d"][idx]).astype(float)
        half = (n_d - n_c) / 2
        prod = prod * (2.0 * tb["scale"]) * half
        s_half += half.sum()
        s_half2 += (half * half).sum()
        count += n
        g = _power_factors(tb["bc_scaled"], n_c) * _power_factors(tb["bd_scaled"], n_d)
        rp = rp * (g[:, :, None] * g.conj()[:, None, :])
        norm = np.real(np.einsum("nii->n", rp))
        rp = rp / norm[:, None, None]
        states = np.einsum("ab,nbc,cd->nad", tb["v"], rp, tb["vh"], optimize=True)
    return prod.sum(), (prod * prod).sum(), s_half, s_half2, count, n


def _sample_field_paths(
    field: ClassicalFieldModel, times: np.ndarray, n: int, rng: np.random.Generator
) -> Array:
    k = len(times)
    if field.kind is FieldKind.CONSTANT:
        return np.full((n, k), field.amplitude)
    gaps = np.diff(times)
    if field.kind is FieldKind.ORNSTEIN_UHLENBECK:
        b = np.empty((n, k))
        b[:, 0] = field.amplitude * rng.standard_normal(n)
        for j, dt in enumerate(gaps):
            r = math.exp(-dt / field.correlation_time)
            b[:, j + 1] = b[:, j] * r + field.amplitude * math.sqrt(1 - r * r) * rng.standard_normal(n)
        return b
    # telegraph: stationary start, flip probability set by the gap length
    b = np.empty((n, k))
    b[:, 0] = np.where(rng.random(n) < 0.5, 1.0, -1.0) * field.amplitude
    for j, dt in enumerate(gaps):
        p_flip = 0.5 * (1.0 - math.exp(-dt / field.correlation_time))
        flip = rng.random(n) < p_flip
        b[:, j + 1] = np.where(flip, -b[:, j], b[:, j])
    return b


def _run_semiclassical_chunk(
    n: int, rng: np.random.Generator, field: ClassicalFieldModel, proto: ProtocolSpec
) -> tuple:
    alpha, tau = proto.sensor.alpha, proto.sensor.tau
    times = np.array([s.time for s in proto.shots])
    paths = _sample_field_paths(field, times, n, rng)
    prod = np.ones(n)
    s_half = 0.0
    s_half2 = 0.0
    count = 0
    for j, shot in enumerate(proto.shots):
        theta = plane_rotation_angle(paths[:, j], tau)
        _, _, mc, md = _detector_means(alpha, theta, shot.basis.phase)
        n_c = rng.poisson(mc).astype(float)
        n_d = rng.poisson(md).astype(float)
        half = (n_d - n_c) / 2
        prod = prod * (2.0 * shot.basis.record_scale) * half
        s_half += half.sum()
        s_half2 += (half * half).sum()
        count += n
    return prod.sum(), (prod * prod).sum(), s_half, s_half2, count, n


def run_sequences(cfg: TrajectoryConfig) -> McEstimate:
    """Estimate the K-shot count correlation over L independent sequences."""
    L = cfg.sequences
    n_chunks = (L + CHUNK_SIZE - 1) // CHUNK_SIZE
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks)
    sizes = [min(CHUNK_SIZE, L - i * CHUNK_SIZE) for i in range(n_chunks)]

    if cfg.mode == "kraus_quantum":
        tables = _quantum_shot_tables(cfg.model, cfg.proto)
        rho0 = cfg.model.initial_state.matrix

        def job(args):
            size, seed = args
            return _run_quantum_chunk(size, np.random.default_rng(seed), rho0, tables)

    else:

        def job(args):
            size, seed = args
            return _run_semiclassical_chunk(size, np.random.default_rng(seed), cfg.model, cfg.proto)

    work = list(zip(sizes, seeds))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(job, work))
    else:
        results = [job(w) for w in work]

    s1 = sum(r[0] for r in results)
    s2 = sum(r[1] for r in results)
    sh = sum(r[2] for r in results)
    sh2 = sum(r[3] for r in results)
    n_rec = sum(r[4] for r in results)

    mean = s1 / L
    if L > 1:
        var = max((s2 - L * mean * mean) / (L - 1), 0.0)
        std_error = math.sqrt(var / L)
    else:
        std_error = math.inf
    half_mean = sh / n_rec
    half_var = max(sh2 / n_rec - half_mean * half_mean, 0.0)
    return McEstimate(
        mean=float(mean),
        std_error=float(std_error),
        per_shot_variance=float(half_var),
        per_shot_variance_raw=float(4.0 * half_var),
        n_sequences=L,
    )


def empirical_snr(est: McEstimate) -> float:
    """sqrt(L)-included SNR of the estimate: mean / standard error."""
    if not math.isfinite(est.std_error):
        return 0.0
    return est.mean / est.std_error


def snr_convention_factor(proto: ProtocolSpec) -> float:
    """Ratio between the empirical SNR of the per-basis records and the
    closed-form SNR formulas (which assume mean coefficient alpha^2/2 and
    per-shot noise alpha at every shot): one factor 2 per D/A (S2) shot.
    """
    n_s2 = sum(1 for s in proto.shots if s.basis is MeasurementBasis.S2)
    return 2.0**n_s2
