"""
Covariance assembly and Gaussian sampling of the complex noise z*_t.

Sampled paths store z*_j. Internally the circular complex Gaussian z with
E[z_j z*_k] = alpha(t_j - t_k) and E[z_j z_k] = 0 is drawn as
z = chol(C) w, with w having independent real and imaginary parts of variance
1/2, and the stored values are conj(z).

Every sample index draws from its own substream (seed, stream, index), so the
n-th path is the same whether one or many paths are requested and no matter
how the work is split over processes.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.time_grid import NoisePath, TimeGrid
from pynmqsd.enums import KernelFamily
from pynmqsd.exceptions import CovarianceFactorizationError

log = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-6

# substream families, see `substream`
PATH_STREAM = 0
PAST_STREAM = 1
CONTINUATION_STREAM = 2


def substream(seed: int, index: int, stream: int = PATH_STREAM) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream, index))
    return np.random.default_rng(sequence)


def circular_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Covariance
# ---------------------------------------------------------------------------


def build_covariance(kernel: CorrelationKernel, grid: TimeGrid) -> np.ndarray:
    if kernel.is_dirac:
        return (kernel.kappa / grid.dt) * np.eye(grid.n_nodes, dtype=complex)
    times = grid.times
    cov = kernel.alpha(np.subtract.outer(times, times))
    return 0.5 * (cov + cov.conj().T)


def lag_alphas(kernel: CorrelationKernel, grid: TimeGrid) -> np.ndarray:
    """alpha(m*dt) for m = 0..n_steps on the lattice of `grid`."""
    lags = grid.dt * np.arange(grid.n_nodes)
    return kernel.lattice_alpha(lags, grid.dt)


def factorize(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, regularized with escalating diagonal jitter."""
    size = cov.shape[0]
    if size == 0:
        return np.zeros((0, 0), dtype=complex)
    try:
        return linalg.cholesky(cov, lower=True, check_finite=False)
    except linalg.LinAlgError:
        pass
    scale = float(np.max(np.abs(np.diag(cov)))) or 1.0
    identity = np.eye(size)
    epsilon = JITTER_START
    while epsilon <= JITTER_MAX * (1 + 1e-9):
        try:
            factor = linalg.cholesky(
                cov + epsilon * scale * identity, lower=True, check_finite=False
            )
        except linalg.LinAlgError:
            log.debug("Cholesky failed with relative jitter %g", epsilon)
            epsilon *= 10
            continue
        if epsilon > JITTER_START:
            log.warning("Covariance needed relative jitter %g to factorize", epsilon)
        return factor
    raise CovarianceFactorizationError(size, JITTER_MAX)


def gaussian_conditional(
    cov: np.ndarray,
    observed: np.ndarray,
    hidden: np.ndarray,
    observed_z: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Mean and covariance of z[hidden] given z[observed] = observed_z.

    Schur complement of the joint covariance: mean = C_ho C_oo^-1 z_o and
    cov = C_hh - C_ho C_oo^-1 C_oh.
    """
    c_oo = cov[np.ix_(observed, observed)]
    c_ho = cov[np.ix_(hidden, observed)]
    c_hh = cov[np.ix_(hidden, hidden)]
    if len(observed) == 0:
        return np.zeros(len(hidden), dtype=complex), c_hh
    factor = factorize(c_oo)
    # gain^H = C_oo^-1 C_oh
    gain_h = linalg.cho_solve((factor, True), c_ho.conj().T, check_finite=False)
    gain = gain_h.conj().T
    mean = gain @ observed_z
    cond = c_hh - gain @ c_ho.conj().T
    return mean, 0.5 * (cond + cond.conj().T)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def draw_values(
    factor: np.ndarray,
    indices: Sequence[int],
    seed: int,
    stream: int = PATH_STREAM,
    mean: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Rows of z* values, one row per sample index."""
    size = factor.shape[0]
    rows = np.empty((len(indices), size), dtype=complex)
    for row, index in enumerate(indices):
        rows[row] = circular_normals(substream(seed, index, stream), size)
    z = rows @ factor.T
    if mean is not None:
        z = z + mean
    return z.conj()


def sample_paths(
    kernel: CorrelationKernel, grid: TimeGrid, n: int, seed: int
) -> list[NoisePath]:
    if n == 0:
        return []
    factor = factorize(build_covariance(kernel, grid))
    values = draw_values(factor, range(n), seed, PATH_STREAM)
    return [NoisePath(grid, row) for row in values]


class ConditionalLaw:
    """Gaussian law of the noise on `future_grid` given a fixed past path."""

    def __init__(
        self,
        kernel: CorrelationKernel,
        past: Optional[NoisePath],
        future_grid: TimeGrid,
    ):
        self.future_grid = future_grid
        if past is None:
            self.mean = None
            self.factor = factorize(build_covariance(kernel, future_grid))
            return
        if not past.grid.abuts(future_grid):
            raise ValueError("past and future grids must share dt and abut")
        n_past = past.grid.n_nodes
        joint = TimeGrid(past.grid.t0, past.grid.dt, n_past + future_grid.n_steps)
        cov = build_covariance(kernel, joint)
        observed = np.arange(n_past)
        hidden = np.arange(n_past, joint.n_nodes)
        self.mean, cond = gaussian_conditional(
            cov, observed, hidden, past.values.conj()
        )
        self.factor = factorize(cond)

    def draw(self, indices: Sequence[int], seed: int) -> np.ndarray:
        return draw_values(
            self.factor, indices, seed, CONTINUATION_STREAM, mean=self.mean
        )

    def node_moments(self, k: int = 0) -> tuple[complex, float]:
        """Conditional mean of z*_k and E|z_k - mean|^2 on the future grid."""
        mean = 0j if self.mean is None else complex(np.conj(self.mean[k]))
        variance = float(np.sum(np.abs(self.factor[k, : k + 1]) ** 2))
        return mean, variance


def conditional_sample(
    kernel: CorrelationKernel,
    past: Optional[NoisePath],
    future_grid: TimeGrid,
    n: int,
    seed: int,
) -> list[NoisePath]:
    """Continuations of `past` on `future_grid`; no past reduces to sample_paths."""
    if past is None:
        return sample_paths(kernel, future_grid, n, seed)
    if n == 0:
        return []
    values = ConditionalLaw(kernel, past, future_grid).draw(range(n), seed)
    return [NoisePath(future_grid, row) for row in values]


def pinned_past(
    kernel: CorrelationKernel, grid: TimeGrid, endpoint: complex, seed: int
) -> NoisePath:
    """A past on `grid` drawn from the process law given its last value."""
    last = grid.n_steps
    if last == 0:
        return NoisePath(grid, np.array([endpoint], dtype=complex))
    cov = build_covariance(kernel, grid)
    mean, cond = gaussian_conditional(
        cov,
        np.array([last]),
        np.arange(last),
        np.array([np.conj(endpoint)]),
    )
    head = draw_values(factorize(cond), [0], seed, PAST_STREAM, mean=mean)[0]
    return NoisePath(grid, np.append(head, endpoint))


# ---------------------------------------------------------------------------
# Kernel integrals
# ---------------------------------------------------------------------------


def kernel_integral(
    kernel: CorrelationKernel, grid: TimeGrid
) -> tuple[np.ndarray, np.ndarray]:
    """
    K(t) = int_0^t alpha(s) ds on the grid.

    Returns (node, step). `step[i]` is the lattice sum
    sum_{m=1..i} alpha(m dt) dt + alpha(0) dt / 2 that freezes the drift on
    [t_i, t_{i+1}); `node` equals `step` except node[0] = 0.
    """
    alphas = lag_alphas(kernel, grid)
    dt = grid.dt
    step = 0.5 * alphas[0] * dt + np.concatenate([[0.0], np.cumsum(alphas[1:]) * dt])
    node = step.copy()
    node[0] = 0.0
    return node, step


def double_integral(step_rates: np.ndarray, grid: TimeGrid, s: float, t: float):
    """Theta(t, s) = int_s^t K(tau) dtau by the left-point sum of step rates."""
    i_s, i_t = grid.index_of(s), grid.index_of(t)
    return grid.dt * np.sum(step_rates[i_s:i_t])


def ou_kernel_integral(kappa: float, gamma: float, t) -> np.ndarray:
    return 0.5 * kappa * (1.0 - np.exp(-gamma * np.asarray(t)))


def ou_double_integral(kappa: float, gamma: float, s: float, t: float) -> float:
    return 0.5 * kappa * ((t - s) + (np.exp(-gamma * t) - np.exp(-gamma * s)) / gamma)


def covariance_scale(kernel: CorrelationKernel, grid: TimeGrid) -> float:
    """max |C_jk|, the yardstick for sample-moment tolerances."""
    if kernel.family == KernelFamily.DIRAC:
        return kernel.kappa / grid.dt
    return float(np.max(np.abs(lag_alphas(kernel, grid))))


def moment_errors(
    kernel: CorrelationKernel, grid: TimeGrid, paths: Sequence[NoisePath]
) -> tuple[float, float]:
    """
    Sample-moment errors of `paths` relative to the covariance scale.

    Returns (max |E[z_j z*_k] - C_jk|, max |E[z_j z_k]|), both divided by
    `covariance_scale`.
    """
    if not paths:
        raise ValueError("moment_errors needs at least one path")
    z = np.array([path.values for path in paths]).conj()
    n = z.shape[0]
    sample = z.T @ z.conj() / n
    pseudo = z.T @ z / n
    scale = covariance_scale(kernel, grid)
    cov_error = np.max(np.abs(sample - build_covariance(kernel, grid))) / scale
    return float(cov_error), float(np.max(np.abs(pseudo)) / scale)
