from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.calculations.operators import hermitian_part
from pynmqsd.domain.time_grid import TimeGrid

# top-level Fock population above which the truncated bath is flagged
LEAKAGE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced state rho(t_j) on every grid node."""

    grid: TimeGrid
    rho: np.ndarray = field(repr=False)
    # set by the few-mode oracle only
    cutoff_leakage: Optional[float] = None

    @property
    def leakage_flagged(self) -> bool:
        return (
            self.cutoff_leakage is not None
            and self.cutoff_leakage > LEAKAGE_THRESHOLD
        )

    def at(self, t: float) -> np.ndarray:
        return self.rho[self.grid.index_of(t)]

    def populations(self) -> np.ndarray:
        return np.real(np.einsum("tii->ti", self.rho))

    def check_physical(self, atol: float = 1e-8) -> list[str]:
        """Violations of Hermiticity, unit trace and positivity."""
        issues = []
        asymmetry = np.max(np.abs(self.rho - np.swapaxes(self.rho, 1, 2).conj()))
        if asymmetry > atol:
            issues.append(f"not Hermitian (max deviation {asymmetry:.2e})")
        traces = np.real(np.trace(self.rho, axis1=1, axis2=2))
        drift = np.max(np.abs(traces - 1.0))
        if drift > atol:
            issues.append(f"trace deviates from 1 by {drift:.2e}")
        lowest = min(np.linalg.eigvalsh(hermitian_part(r))[0] for r in self.rho)
        if lowest < -atol:
            issues.append(f"negative eigenvalue {lowest:.2e}")
        return issues


@dataclass(frozen=True)
class ModeBath:
    """Discrete bosonic modes (g_lambda, omega_lambda) truncated at `cutoffs` levels."""

    couplings: np.ndarray
    frequencies: np.ndarray
    cutoffs: tuple

    def __post_init__(self):
        couplings = np.atleast_1d(np.asarray(self.couplings, dtype=complex))
        frequencies = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        cutoffs = tuple(int(c) for c in self.cutoffs)
        if not (len(couplings) == len(frequencies) == len(cutoffs)):
            raise ValueError("bath needs one coupling, frequency and cutoff per mode")
        if any(c < 2 for c in cutoffs):
            raise ValueError("every Fock cutoff must be >= 2")
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "cutoffs", cutoffs)

    @classmethod
    def from_modes(cls, modes, cutoff: int = 2) -> "ModeBath":
        """`modes` holds (g, omega) or (g, omega, cutoff) tuples."""
        modes = list(modes)
        return cls(
            couplings=[m[0] for m in modes],
            frequencies=[m[1] for m in modes],
            cutoffs=tuple(m[2] if len(m) > 2 else cutoff for m in modes),
        )

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def bath_dim(self) -> int:
        return int(np.prod(self.cutoffs))
