from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.domain.time_grid import NoisePath, TimeGrid
from pynmqsd.enums import TrajectoryMode


@dataclass(frozen=True)
class Trajectory:
    """
    State vectors at every grid node together with the noise that produced them.

    `driving` is the z* fed to the linear flow (for nonlinear runs the shifted
    process plus <L^dagger> F) and `raw_noise` the unshifted sample.
    NormalizedLinear runs keep the squared norms of the unnormalized solution in
    `weights`.
    """

    grid: TimeGrid
    states: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    driving: NoisePath = field(repr=False)
    raw_noise: NoisePath = field(repr=False)
    mode: TrajectoryMode = TrajectoryMode.LINEAR
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def normalized_states(self) -> np.ndarray:
        return self.states / self.norms[:, None]


@dataclass(frozen=True)
class TwoTimesPropagator:
    """A_s^t, carrying the linear solution from node s to node t along one path."""

    s: float
    t: float
    A: np.ndarray

    @property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.A, compute_uv=False)

    def condition_number(self) -> float:
        values = self.singular_values
        return float(values[0] / values[-1])

    def compose(self, earlier: "TwoTimesPropagator") -> "TwoTimesPropagator":
        """A_r^t A_s^r for self = A_r^t and earlier = A_s^r."""
        if not np.isclose(earlier.t, self.s):
            raise ValueError("propagators do not chain")
        return TwoTimesPropagator(earlier.s, self.t, self.A @ earlier.A)
