"""Two-level operators, states and small dense helpers shared across modules."""

import numpy as np

# basis order: index 0 = excited (sigma_z = +1), index 1 = ground
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
IDENTITY_2 = np.eye(2, dtype=complex)

EXCITED = np.array([1, 0], dtype=complex)
GROUND = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2.0)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2).conj()


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def is_hermitian(m: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.allclose(m, dagger(m), rtol=0, atol=atol))


def projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def normalized(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / norm


def operator_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def trace_distance(rho_1: np.ndarray, rho_2: np.ndarray) -> float:
    """(1/2) sum |eig(rho_1 - rho_2)| of the Hermitian part of the difference."""
    eigenvalues = np.linalg.eigvalsh(hermitian_part(rho_1 - rho_2))
    return 0.5 * float(np.sum(np.abs(eigenvalues)))
