import numpy as np
import pytest

from faradaycorr.quantum_core import DensityMatrix, TargetModel, pure_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
UP = pure_state([1, 0])
DOWN = pure_state([0, 1])


@pytest.fixture
def paulis():
    return SX, SY, SZ


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_density(rng: np.random.Generator, d: int) -> DensityMatrix:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho))


def random_model(rng: np.random.Generator, d: int) -> TargetModel:
    return TargetModel(
        hamiltonian=random_hermitian(rng, d),
        coupling=random_hermitian(rng, d),
        initial_state=random_density(rng, d),
    )


def precession_model(omega: float = 1.0) -> TargetModel:
    """Spin-1/2 pointing up, precessing coupling B(t) = cos(wt) sx - sin(wt) sy."""
    return TargetModel(hamiltonian=omega * SZ / 2, coupling=SX, initial_state=UP)
