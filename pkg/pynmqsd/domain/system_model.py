from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.calculations.operators import (
    EXCITED,
    PLUS,
    SIGMA_MINUS,
    SIGMA_Z,
    is_hermitian,
)
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.enums import AnsatzType


@dataclass(frozen=True)
class SystemModel:
    """One open-system instance: H, L, the bath kernel and the ansatz family."""

    ansatz: AnsatzType
    hamiltonian: np.ndarray = field(repr=False)
    lindblad: np.ndarray = field(repr=False)
    kernel: CorrelationKernel
    omega: Optional[float] = None
    r: Optional[float] = None
    kappa: Optional[float] = None

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        coupling = np.asarray(self.lindblad, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"H must be square, got shape {h.shape}")
        if coupling.shape != h.shape:
            raise ValueError(f"L shape {coupling.shape} does not match H {h.shape}")
        if not is_hermitian(h, atol=1e-12):
            raise ValueError("H must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblad", coupling)

    @classmethod
    def jaynes_cummings(
        cls, omega: float, kernel: CorrelationKernel
    ) -> "SystemModel":
        return cls(
            AnsatzType.JAYNES_CUMMINGS,
            0.5 * omega * SIGMA_Z,
            SIGMA_MINUS,
            kernel,
            omega=float(omega),
        )

    @classmethod
    def dephasing(
        cls, omega: float, r: float, kappa: float, kernel: CorrelationKernel
    ) -> "SystemModel":
        if not kappa > 0:
            raise ValueError(f"dephasing time scale kappa must be > 0, got {kappa}")
        return cls(
            AnsatzType.DEPHASING,
            0.5 * omega * SIGMA_Z,
            (r / kappa) * SIGMA_Z,
            kernel,
            omega=float(omega),
            r=float(r),
            kappa=float(kappa),
        )

    @classmethod
    def static_l(
        cls, hamiltonian, lindblad, kernel: CorrelationKernel
    ) -> "SystemModel":
        # the caller asserts that O(t, s) = L is exact for this pair
        return cls(AnsatzType.STATIC_L, hamiltonian, lindblad, kernel)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def coupling_scale(self) -> float:
        """r / kappa for the dephasing model."""
        return self.r / self.kappa

    def default_initial_state(self) -> np.ndarray:
        if self.ansatz == AnsatzType.JAYNES_CUMMINGS:
            return EXCITED.copy()
        if self.dim == 2:
            return PLUS.copy()
        return np.ones(self.dim, dtype=complex) / np.sqrt(self.dim)

    def describe(self) -> dict:
        return {
            "ansatz": self.ansatz.value,
            "dim": self.dim,
            "omega": self.omega,
            "r": self.r,
            "kappa": self.kappa,
            "kernel": self.kernel.describe(),
        }


@dataclass(frozen=True)
class AnsatzTable:
    """
    Ansatz O(t_i, s_j) = f[i, j] L and the memory rate F(t_i) on a grid.

    `f` is the dense lower-triangular table, or None when f is identically 1
    (Dephasing and StaticL, where F is the kernel integral K). `F` holds node
    values with F[0] = 0; `step_F[i]` is the rate frozen on [t_i, t_{i+1}),
    equal to F[i] for i >= 1 and to the lattice limit alpha(0) dt / 2 at i = 0.
    """

    grid: TimeGrid
    f: Optional[np.ndarray] = field(repr=False)
    F: np.ndarray = field(repr=False)
    step_F: np.ndarray = field(repr=False)
    lindblad: np.ndarray = field(repr=False)

    @property
    def is_constant(self) -> bool:
        return self.f is None

    def f_at(self, i: int, j: int) -> complex:
        if j > i:
            raise ValueError("f(t_i, s_j) is defined for s_j <= t_i only")
        return 1.0 + 0j if self.f is None else complex(self.f[i, j])

    @property
    def M(self) -> np.ndarray:
        """Memory operators M(t_i) = F(t_i) L, shape (n_nodes, dim, dim)."""
        return self.F[:, None, None] * self.lindblad[None, :, :]

    def drift_operators(self) -> np.ndarray:
        """L^dagger M frozen per step, shape (n_nodes, dim, dim)."""
        l_dag_l = self.lindblad.conj().T @ self.lindblad
        return self.step_F[:, None, None] * l_dag_l[None, :, :]
