from dataclasses import dataclass, field

import numpy as np

# node times are matched to the grid within this fraction of dt
_NODE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = t0 + j*dt, j = 0..n_steps."""

    t0: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"grid step must be positive, got dt={self.dt}")
        if self.n_steps < 0:
            raise ValueError(f"grid needs n_steps >= 0, got {self.n_steps}")

    @classmethod
    def from_span(cls, t0: float, t_max: float, dt: float) -> "TimeGrid":
        n = (t_max - t0) / dt
        n_steps = int(round(n))
        if abs(n - n_steps) > 1e-6:
            raise ValueError(
                f"span [{t0}, {t_max}] is not a whole number of steps dt={dt}"
            )
        return cls(t0=float(t0), dt=float(dt), n_steps=n_steps)

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_nodes)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.n_steps

    def index_of(self, t: float) -> int:
        j = (t - self.t0) / self.dt
        index = int(round(j))
        if abs(j - index) > _NODE_TOLERANCE * max(1.0, abs(j)) or not (
            0 <= index <= self.n_steps
        ):
            raise ValueError(f"t={t} is not a node of {self}")
        return index

    def prefix(self, i_end: int) -> "TimeGrid":
        """Grid of nodes 0..i_end."""
        return TimeGrid(self.t0, self.dt, i_end)

    def after(self, i_start: int, i_end: int) -> "TimeGrid":
        """Grid of nodes i_start+1..i_end (the open-left segment)."""
        if i_end <= i_start:
            raise ValueError("empty future segment")
        return TimeGrid(
            self.t0 + (i_start + 1) * self.dt, self.dt, i_end - i_start - 1
        )

    def abuts(self, other: "TimeGrid") -> bool:
        """True if `other` starts one step after this grid ends."""
        return np.isclose(self.dt, other.dt, rtol=1e-12) and np.isclose(
            other.t0, self.t_end + self.dt, rtol=0, atol=_NODE_TOLERANCE * self.dt
        )


@dataclass(frozen=True)
class NoisePath:
    """Samples z*_j at the grid nodes, held constant on [t_j, t_{j+1})."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"noise path needs {self.grid.n_nodes} values, got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "NoisePath":
        return cls(grid, np.zeros(grid.n_nodes, dtype=complex))

    def head(self, i_end: int) -> "NoisePath":
        return NoisePath(self.grid.prefix(i_end), self.values[: i_end + 1])

    def extend(self, future: "NoisePath") -> "NoisePath":
        if not self.grid.abuts(future.grid):
            raise ValueError("future path does not abut this path")
        n_steps = self.grid.n_steps + future.grid.n_nodes
        grid = TimeGrid(self.grid.t0, self.grid.dt, n_steps)
        return NoisePath(grid, np.concatenate([self.values, future.values]))
