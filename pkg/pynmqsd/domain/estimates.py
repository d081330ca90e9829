from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.calculations.operators import trace_distance
from pynmqsd.domain.density_matrix import DensityMatrix
from pynmqsd.domain.time_grid import NoisePath, TimeGrid
from pynmqsd.enums import EstimatorMode

# more than this fraction of aborted trajectories invalidates an estimate
ABORT_TOLERANCE = 0.01


def abort_fraction_ok(n_aborted: int, n_total: int) -> bool:
    return n_total > 0 and n_aborted <= ABORT_TOLERANCE * n_total


@dataclass(frozen=True)
class UnravelEstimate:
    """
    Monte Carlo estimate of the reduced state on every grid node.

    `stderr[j]` is the largest entrywise standard error of `rho_hat[j]`.
    `n_traj` counts the trajectories that entered the average.
    """

    grid: TimeGrid
    rho_hat: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    n_traj: int
    mode: EstimatorMode
    n_aborted: int = 0
    valid: bool = True

    def at(self, t: float) -> np.ndarray:
        return self.rho_hat[self.grid.index_of(t)]

    def stderr_at(self, t: float) -> float:
        return float(self.stderr[self.grid.index_of(t)])

    def traces(self) -> np.ndarray:
        return np.real(np.trace(self.rho_hat, axis1=1, axis2=2))

    def as_density_matrix(self) -> DensityMatrix:
        return DensityMatrix(grid=self.grid, rho=self.rho_hat)

    def distance_to(self, reference: DensityMatrix) -> np.ndarray:
        """Trace distance to `reference` at every node."""
        return np.array(
            [trace_distance(a, b) for a, b in zip(self.rho_hat, reference.rho)]
        )


@dataclass(frozen=True)
class ConditionalNormReport:
    """E[|psi_t|^2 | past held on [0, s)] for one fixed past against |psi_s|^2."""

    past_index: int
    s: float
    t: float
    norm_sq_s: float
    conditional_mean: float
    stderr: float
    n_cond: int
    n_aborted: int = 0
    past: Optional[NoisePath] = field(default=None, repr=False)

    @property
    def deviation(self) -> float:
        return abs(self.conditional_mean - self.norm_sq_s)

    def deviates(self, k: float = 5.0) -> bool:
        return self.deviation > k * self.stderr


@dataclass(frozen=True)
class NormStats:
    """Unconditional mean squared norm and the conditional martingale panel."""

    grid: TimeGrid
    mean_sq_norm: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    n_traj: int
    conditional: list[ConditionalNormReport] = field(default_factory=list)
    n_aborted: int = 0
    valid: bool = True

    @property
    def martingale_violated(self) -> bool:
        return any(report.deviates() for report in self.conditional)

    def max_unconditional_deviation(self) -> float:
        """max_j |E|psi_j|^2 - 1| in units of the stderr (0 where stderr vanishes)."""
        gap = np.abs(self.mean_sq_norm - 1.0)
        scaled = np.divide(
            gap, self.stderr, out=np.zeros_like(gap), where=self.stderr > 0
        )
        return float(np.max(scaled))


@dataclass(frozen=True)
class EstimatorComparison:
    """The three estimators on one model with matched seeds."""

    estimates: dict = field(repr=False)
    # (mode_a, mode_b) -> trace distance per node
    distances: dict = field(repr=False)
    # (mode_a, mode_b) -> sqrt(stderr_a^2 + stderr_b^2) per node
    combined_stderr: dict = field(repr=False)

    def agree(self, k: float = 5.0) -> bool:
        return all(
            np.all(self.distances[pair] <= k * self.combined_stderr[pair] + 1e-12)
            for pair in self.distances
        )

    def worst_ratio(self) -> float:
        """Largest distance / combined stderr over pairs and nodes with stderr > 0."""
        worst = 0.0
        for pair, distance in self.distances.items():
            scale = self.combined_stderr[pair]
            mask = scale > 0
            if np.any(mask):
                worst = max(worst, float(np.max(distance[mask] / scale[mask])))
        return worst
