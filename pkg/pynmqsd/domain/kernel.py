from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.enums import KernelFamily
from pynmqsd.exceptions import KernelRangeError


@dataclass(frozen=True)
class CorrelationKernel:
    """
    Hermitian environment correlation function alpha(tau).

    Build instances with the family constructors (`dirac`, `ornstein_uhlenbeck`,
    `mode_sum`, `tabulated`). A Dirac kernel has no pointwise values; use
    `lattice_alpha` to get its grid representation kappa/dt at zero lag.
    """

    family: KernelFamily
    kappa: Optional[float] = None
    gamma: Optional[float] = None
    couplings: np.ndarray = field(default=None, repr=False)
    frequencies: np.ndarray = field(default=None, repr=False)
    tau: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)

    @classmethod
    def dirac(cls, kappa: float) -> "CorrelationKernel":
        if not kappa > 0:
            raise ValueError(f"Dirac kernel needs kappa > 0, got {kappa}")
        return cls(KernelFamily.DIRAC, kappa=float(kappa))

    @classmethod
    def ornstein_uhlenbeck(cls, kappa: float, gamma: float) -> "CorrelationKernel":
        if not (kappa > 0 and gamma > 0):
            raise ValueError(f"OU kernel needs kappa, gamma > 0, got {kappa}, {gamma}")
        return cls(
            KernelFamily.ORNSTEIN_UHLENBECK, kappa=float(kappa), gamma=float(gamma)
        )

    @classmethod
    def mode_sum(cls, modes) -> "CorrelationKernel":
        """`modes` is an iterable of (g, omega) pairs."""
        modes = list(modes)
        if not modes:
            raise ValueError("mode-sum kernel needs at least one mode")
        couplings = np.array([complex(g) for g, _ in modes])
        frequencies = np.array([float(w) for _, w in modes])
        return cls(KernelFamily.MODE_SUM, couplings=couplings, frequencies=frequencies)

    @classmethod
    def tabulated(cls, tau, values) -> "CorrelationKernel":
        tau = np.asarray(tau, dtype=float)
        values = np.asarray(values, dtype=complex)
        if tau.ndim != 1 or tau.shape != values.shape or len(tau) < 2:
            raise ValueError("tabulated kernel needs matching 1-d tau and values")
        if tau[0] != 0 or np.any(np.diff(tau) <= 0):
            raise ValueError("tabulated tau must start at 0 and increase")
        if abs(values[0].imag) > 1e-12 * max(1.0, abs(values[0])):
            raise ValueError("alpha(0) must be real for a Hermitian kernel")
        return cls(KernelFamily.TABULATED, tau=tau, values=values)

    @property
    def is_dirac(self) -> bool:
        return self.family == KernelFamily.DIRAC

    def alpha(self, tau) -> np.ndarray:
        """Pointwise alpha(tau) for the non-Dirac families."""
        tau = np.asarray(tau, dtype=float)
        if self.family == KernelFamily.ORNSTEIN_UHLENBECK:
            rate = 0.5 * self.kappa * self.gamma
            return (rate * np.exp(-self.gamma * np.abs(tau))).astype(complex)
        if self.family == KernelFamily.MODE_SUM:
            weights = np.abs(self.couplings) ** 2
            phases = np.exp(-1j * np.multiply.outer(tau, self.frequencies))
            return phases @ weights
        if self.family == KernelFamily.TABULATED:
            return self._interpolate(tau)
        raise ValueError("Dirac kernel has no pointwise values; use lattice_alpha")

    def lattice_alpha(self, tau, dt: float) -> np.ndarray:
        """alpha on a lattice of spacing dt; Dirac becomes (kappa/dt) at zero lag."""
        if self.is_dirac:
            tau = np.asarray(tau, dtype=float)
            at_zero = np.abs(tau) < 1e-9 * dt
            return np.where(at_zero, self.kappa / dt, 0.0).astype(complex)
        return self.alpha(tau)

    def _interpolate(self, tau: np.ndarray) -> np.ndarray:
        magnitude = np.abs(tau)
        tau_max = self.tau[-1]
        if magnitude.size and magnitude.max() > tau_max * (1 + 1e-12):
            raise KernelRangeError(float(magnitude.max()), float(tau_max))
        re = np.interp(magnitude, self.tau, self.values.real)
        im = np.interp(magnitude, self.tau, self.values.imag)
        # alpha(-tau) = conj(alpha(tau))
        return re + 1j * np.where(tau < 0, -im, im)

    def describe(self) -> dict:
        if self.family == KernelFamily.DIRAC:
            return {"family": self.family.value, "kappa": self.kappa}
        if self.family == KernelFamily.ORNSTEIN_UHLENBECK:
            return {
                "family": self.family.value,
                "kappa": self.kappa,
                "gamma": self.gamma,
            }
        if self.family == KernelFamily.MODE_SUM:
            return {
                "family": self.family.value,
                "couplings": self.couplings,
                "frequencies": self.frequencies,
            }
        return {"family": self.family.value, "tau_max": float(self.tau[-1])}
