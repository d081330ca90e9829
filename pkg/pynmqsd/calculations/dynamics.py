"""
Linear and nonlinear NMQSD trajectories, two-times propagators and noise recovery.

The linear flow is d/dt psi = (-iH + z*_t L - L^dagger M(t)) psi. On each step
[t_i, t_{i+1}) the generator is frozen with the held noise value z*_i and the
step rate of the ansatz table, and advanced with one classical RK4 step.
All batch routines act on arrays of shape (batch, dim, k): k = 1 for state
vectors and k = dim for propagator matrices.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.calculations.kernels import (
    double_integral,
    kernel_integral,
    lag_alphas,
    ou_double_integral,
)
from pynmqsd.calculations.models import build_ansatz
from pynmqsd.calculations.operators import SIGMA_Z
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import AnsatzTable, SystemModel
from pynmqsd.domain.time_grid import NoisePath, TimeGrid
from pynmqsd.domain.trajectory import Trajectory, TwoTimesPropagator
from pynmqsd.enums import KernelFamily, RecoveryMethod, TrajectoryMode
from pynmqsd.exceptions import TrajectoryOverflowError, UnidentifiableNoiseError

log = logging.getLogger(__name__)

OVERFLOW_NORM = 1e150
IDENTIFIABILITY_FLOOR = 1e-10
_NEWTON_ITERATIONS = 8


@dataclass(frozen=True)
class GeneratorSeries:
    """Noise-free part -iH - L^dagger M(t_i) of the generator for every step."""

    grid: TimeGrid
    base: np.ndarray = field(repr=False)
    lindblad: np.ndarray = field(repr=False)
    # alpha(m dt), the memory of the nonlinear shift
    shift_alphas: np.ndarray = field(repr=False)
    # F frozen per step: M = step_F L on [t_i, t_{i+1})
    step_F: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.lindblad.shape[0]


def prepare_generator(
    model: SystemModel, grid: TimeGrid, table: Optional[AnsatzTable] = None
) -> GeneratorSeries:
    if table is None:
        table = build_ansatz(model, grid)
    if table.grid.n_nodes < grid.n_nodes or table.grid.dt != grid.dt:
        raise ValueError("ansatz table does not cover the trajectory grid")
    drift = table.drift_operators()[: grid.n_nodes]
    base = -1j * model.hamiltonian[None, :, :] - drift
    return GeneratorSeries(
        grid=grid,
        base=base,
        lindblad=model.lindblad,
        shift_alphas=lag_alphas(model.kernel, grid),
        step_F=table.step_F[: grid.n_nodes],
    )


def _rk4_step(
    y: np.ndarray, base: np.ndarray, lindblad: np.ndarray, z: np.ndarray, dt: float
) -> np.ndarray:
    held = z[:, None, None]

    def g(v):
        return base @ v + held * (lindblad @ v)

    k1 = g(y)
    k2 = g(y + 0.5 * dt * k1)
    k3 = g(y + 0.5 * dt * k2)
    k4 = g(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class BatchResult:
    states: np.ndarray  # (batch, n_nodes, dim) for nodes start..stop
    driving: np.ndarray  # (batch, n_nodes) z* fed to the linear flow
    aborted: np.ndarray  # (batch,) bool
    abort_index: np.ndarray  # (batch,) node index of blow-up, -1 if none

    @property
    def n_aborted(self) -> int:
        return int(np.count_nonzero(self.aborted))


def integrate_batch(
    series: GeneratorSeries,
    noise: np.ndarray,
    psi0: np.ndarray,
    nonlinear: bool = False,
    start: int = 0,
    stop: Optional[int] = None,
) -> BatchResult:
    """
    March a batch of trajectories from node `start` to node `stop`.

    `noise` holds z* on the full grid, shape (batch, n_nodes). `psi0` is one
    state or one state per trajectory.

    Nonlinear runs start at node 0 and renormalize every step. They solve
        d/dt psi = (-iH + z~*_t L - (L^dagger - <L^dagger>) M(t)) psi,
        z~*_t = z*_t + conj(int_0^t alpha(t - s) <L>_s ds),
    as the linear flow driven by z~*_t + <L^dagger>_t F(t), since M = F L.
    The memory integral uses the lattice weights of the ansatz table (half
    weight on the diagonal) and both expectations are frozen at the left node.
    `driving` records the process fed to the linear flow.
    """
    n_nodes = series.grid.n_nodes
    stop = n_nodes - 1 if stop is None else stop
    if nonlinear and start != 0:
        raise ValueError("nonlinear trajectories start at the first grid node")
    noise = np.asarray(noise, dtype=complex)
    batch = noise.shape[0]
    dim = series.dim
    dt = series.grid.dt
    psi0 = np.broadcast_to(np.asarray(psi0, dtype=complex), (batch, dim))

    m = stop - start + 1
    states = np.zeros((batch, m, dim), dtype=complex)
    driving = np.array(noise[:, start : stop + 1], dtype=complex)
    aborted = np.zeros(batch, dtype=bool)
    abort_index = np.full(batch, -1)
    y = psi0[:, :, None].copy()
    if nonlinear:
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        expectations = np.zeros((batch, m), dtype=complex)
    states[:, 0] = y[:, :, 0]

    def shifted(k):
        v = y[:, :, 0]
        current = np.einsum("bi,ij,bj->b", v.conj(), series.lindblad, v)
        expectations[:, k] = current
        history = expectations[:, : k + 1] @ series.shift_alphas[k::-1]
        history -= 0.5 * series.shift_alphas[0] * current
        memory = history.conj() * dt + current.conj() * series.step_F[k]
        return noise[:, start + k] + memory

    for k in range(m - 1):
        i = start + k
        if nonlinear:
            driving[:, k] = shifted(k)
        y = _rk4_step(y, series.base[i], series.lindblad, driving[:, k], dt)
        norms = np.linalg.norm(y[:, :, 0], axis=1)
        blown = ~aborted & ~(np.isfinite(norms) & (norms < OVERFLOW_NORM))
        if nonlinear:
            blown |= ~aborted & (norms == 0)
        if np.any(blown):
            aborted |= blown
            abort_index[blown] = k + 1
            y[blown] = 0.0
            norms[blown] = 1.0
        if nonlinear:
            y /= np.where(aborted, 1.0, norms)[:, None, None]
        states[:, k + 1] = y[:, :, 0]
    if nonlinear:
        driving[:, m - 1] = shifted(m - 1)
    return BatchResult(states, driving, aborted, abort_index)


def _single(
    model: SystemModel,
    path: NoisePath,
    psi0,
    grid: Optional[TimeGrid],
    table: Optional[AnsatzTable],
    nonlinear: bool,
) -> BatchResult:
    if grid is not None and grid != path.grid:
        raise ValueError("noise path is not defined on the requested grid")
    grid = path.grid
    psi0 = model.default_initial_state() if psi0 is None else np.asarray(psi0)
    if not np.isclose(np.linalg.norm(psi0), 1.0, rtol=0, atol=1e-10):
        raise ValueError("initial state must be normalized")
    series = prepare_generator(model, grid, table)
    result = integrate_batch(series, path.values[None, :], psi0, nonlinear)
    if result.aborted[0]:
        index = int(result.abort_index[0])
        raise TrajectoryOverflowError(float(grid.times[index]), OVERFLOW_NORM)
    return result


def integrate_linear(
    model: SystemModel,
    path: NoisePath,
    psi0=None,
    grid: Optional[TimeGrid] = None,
    table: Optional[AnsatzTable] = None,
) -> Trajectory:
    result = _single(model, path, psi0, grid, table, nonlinear=False)
    states = result.states[0]
    return Trajectory(
        grid=path.grid,
        states=states,
        norms=np.linalg.norm(states, axis=1),
        driving=path,
        raw_noise=path,
        mode=TrajectoryMode.LINEAR,
    )


def integrate_normalized_linear(
    model: SystemModel,
    path: NoisePath,
    psi0=None,
    grid: Optional[TimeGrid] = None,
    table: Optional[AnsatzTable] = None,
) -> Trajectory:
    linear = integrate_linear(model, path, psi0, grid, table)
    return Trajectory(
        grid=linear.grid,
        states=linear.normalized_states(),
        norms=np.ones(linear.grid.n_nodes),
        driving=path,
        raw_noise=path,
        mode=TrajectoryMode.NORMALIZED_LINEAR,
        weights=linear.norms**2,
    )


def integrate_nonlinear(
    model: SystemModel,
    raw_path: NoisePath,
    psi0=None,
    grid: Optional[TimeGrid] = None,
    table: Optional[AnsatzTable] = None,
) -> Trajectory:
    result = _single(model, raw_path, psi0, grid, table, nonlinear=True)
    states = result.states[0]
    return Trajectory(
        grid=raw_path.grid,
        states=states,
        norms=np.linalg.norm(states, axis=1),
        driving=NoisePath(raw_path.grid, result.driving[0]),
        raw_noise=raw_path,
        mode=TrajectoryMode.NONLINEAR,
    )


def integrate_trajectory(
    model: SystemModel,
    path: NoisePath,
    mode: TrajectoryMode,
    psi0=None,
    table: Optional[AnsatzTable] = None,
) -> Trajectory:
    if mode == TrajectoryMode.LINEAR:
        return integrate_linear(model, path, psi0, table=table)
    if mode == TrajectoryMode.NORMALIZED_LINEAR:
        return integrate_normalized_linear(model, path, psi0, table=table)
    if mode == TrajectoryMode.NONLINEAR:
        return integrate_nonlinear(model, path, psi0, table=table)
    raise ValueError(f"Invalid trajectory mode {mode}")


# ---------------------------------------------------------------------------
# Two-times propagators
# ---------------------------------------------------------------------------


def propagate_batch(
    series: GeneratorSeries, noise: np.ndarray, i_s: int, i_t: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    A_s^t for every row of `noise` (z* on the full grid).

    Returns (A, aborted) with A of shape (batch, dim, dim).
    """
    batch = noise.shape[0]
    dim = series.dim
    y = np.broadcast_to(np.eye(dim, dtype=complex), (batch, dim, dim)).copy()
    aborted = np.zeros(batch, dtype=bool)
    for i in range(i_s, i_t):
        y = _rk4_step(y, series.base[i], series.lindblad, noise[:, i], series.grid.dt)
        scale = np.max(np.abs(y), axis=(1, 2))
        blown = ~(np.isfinite(scale) & (scale < OVERFLOW_NORM))
        if np.any(blown):
            aborted |= blown
            y[blown] = np.eye(dim)
    return y, aborted


def propagator_numeric(
    model: SystemModel,
    path: NoisePath,
    s: float,
    t: float,
    table: Optional[AnsatzTable] = None,
) -> TwoTimesPropagator:
    grid = path.grid
    i_s, i_t = grid.index_of(s), grid.index_of(t)
    if i_t < i_s:
        raise ValueError("propagator needs s <= t")
    series = prepare_generator(model, grid, table)
    A, aborted = propagate_batch(series, path.values[None, :], i_s, i_t)
    if aborted[0]:
        raise TrajectoryOverflowError(t, OVERFLOW_NORM)
    return TwoTimesPropagator(grid.times[i_s], grid.times[i_t], A[0])


def jc_propagators(
    omega: float, table: AnsatzTable, noise: np.ndarray, i_s: int, i_t: int
) -> np.ndarray:
    """
    Closed-form JC propagators for every row of `noise`, shape (batch, 2, 2).

    Each held interval is integrated exactly:
    A10 = e^{i omega (s+t)/2} sum_k z*_k e^{-i omega t_k - C_k} (1 - e^{-a_k dt}) / a_k
    with a_k = i omega + F_k and C_k = sum_{m=s..k-1} F_m dt.
    This is the exact flow of the held generator that `propagator_numeric`
    advances by RK4, so the two agree to integrator order. A left-point sum
    sum_k z*_k e^{-i omega t_k - C_k} dt would differ from both by O(dt).
    """
    grid = table.grid
    dt = grid.dt
    times = grid.times
    s, t = times[i_s], times[i_t]
    rates = table.step_F[i_s:i_t]
    cumulative = np.concatenate([[0.0], np.cumsum(rates) * dt])
    a = 1j * omega + rates
    a_dt = a * dt
    small = np.abs(a_dt) < 1e-12
    safe = np.where(small, 1.0, a)
    held = np.where(small, dt, -np.expm1(-a_dt) / safe)
    phases = np.exp(-1j * omega * times[i_s:i_t] - cumulative[:-1]) * held
    lower = np.exp(0.5j * omega * (s + t)) * (noise[:, i_s:i_t] @ phases)
    batch = noise.shape[0]
    A = np.zeros((batch, 2, 2), dtype=complex)
    A[:, 0, 0] = np.exp(-0.5j * omega * (t - s) - cumulative[-1])
    A[:, 1, 1] = np.exp(0.5j * omega * (t - s))
    A[:, 1, 0] = lower
    return A


def propagator_analytic_jc(
    omega: float, table: AnsatzTable, path: NoisePath, s: float, t: float
) -> TwoTimesPropagator:
    grid = path.grid
    i_s, i_t = grid.index_of(s), grid.index_of(t)
    if i_t < i_s:
        raise ValueError("propagator needs s <= t")
    A = jc_propagators(omega, table, path.values[None, :], i_s, i_t)[0]
    return TwoTimesPropagator(grid.times[i_s], grid.times[i_t], A)


def dephasing_theta(
    kernel: CorrelationKernel,
    grid: TimeGrid,
    s: float,
    t: float,
    table: Optional[AnsatzTable] = None,
    closed_form: bool = False,
) -> complex:
    """Theta(t, s) = int_s^t K, by lattice quadrature or the OU closed form."""
    if closed_form:
        if kernel.family != KernelFamily.ORNSTEIN_UHLENBECK:
            raise ValueError("Theta has a closed form for the OU kernel only")
        return ou_double_integral(kernel.kappa, kernel.gamma, s - grid.t0, t - grid.t0)
    step = table.step_F if table is not None else kernel_integral(kernel, grid)[1]
    return double_integral(step, grid, s, t)


def dephasing_propagators(
    omega: float,
    coupling: float,
    theta: complex,
    noise: np.ndarray,
    grid: TimeGrid,
    i_s: int,
    i_t: int,
) -> np.ndarray:
    """Diagonal dephasing propagators for every row of `noise`, shape (batch, 2, 2)."""
    duration = grid.dt * (i_t - i_s)
    integral = grid.dt * np.sum(noise[:, i_s:i_t], axis=1)
    common = -coupling**2 * theta
    batch = noise.shape[0]
    A = np.zeros((batch, 2, 2), dtype=complex)
    for k, sign in enumerate(np.diag(SIGMA_Z).real):
        A[:, k, k] = np.exp(
            -0.5j * omega * duration * sign + common + sign * coupling * integral
        )
    return A


def propagator_analytic_dephasing(
    omega: float,
    r: float,
    kappa: float,
    kernel: CorrelationKernel,
    path: NoisePath,
    s: float,
    t: float,
    table: Optional[AnsatzTable] = None,
    closed_form_theta: bool = False,
) -> TwoTimesPropagator:
    grid = path.grid
    i_s, i_t = grid.index_of(s), grid.index_of(t)
    if i_t < i_s:
        raise ValueError("propagator needs s <= t")
    theta = dephasing_theta(kernel, grid, s, t, table, closed_form_theta)
    A = dephasing_propagators(
        omega, r / kappa, theta, path.values[None, :], grid, i_s, i_t
    )[0]
    return TwoTimesPropagator(grid.times[i_s], grid.times[i_t], A)


# ---------------------------------------------------------------------------
# Noise recovery
# ---------------------------------------------------------------------------


def _check_identifiable(lindblad: np.ndarray, psi: np.ndarray, step: int):
    l_psi = lindblad @ psi
    psi_norm = np.linalg.norm(psi)
    l_norm = np.linalg.norm(l_psi)
    if l_norm < IDENTIFIABILITY_FLOOR * max(psi_norm, 1.0):
        raise UnidentifiableNoiseError(step, "L psi vanishes")
    columns = np.column_stack([psi / psi_norm, l_psi / l_norm])
    if np.linalg.svd(columns, compute_uv=False)[-1] < IDENTIFIABILITY_FLOOR:
        raise UnidentifiableNoiseError(step, "L psi is parallel to psi")


def _step_map(base, lindblad, z, dt, psi):
    y = _rk4_step(psi[None, :, None], base, lindblad, np.array([z]), dt)
    return y[0, :, 0]


def _invert_step(base, lindblad, dt, psi, following) -> complex:
    """
    Solve c * following = RK4(z) psi for (c, z) by Gauss-Newton.

    The complex scale c absorbs renormalization, so normalized and raw states
    are treated alike. Start from the forward-difference estimate.
    """
    design = np.column_stack([following, -dt * (lindblad @ psi)])
    (c, z), *_ = np.linalg.lstsq(design, psi + dt * (base @ psi), rcond=None)
    for _ in range(_NEWTON_ITERATIONS):
        residual = c * following - _step_map(base, lindblad, z, dt, psi)
        h = 1e-6 * (1.0 + abs(z))
        slope = (
            _step_map(base, lindblad, z + h, dt, psi)
            - _step_map(base, lindblad, z - h, dt, psi)
        ) / (2 * h)
        jacobian = np.column_stack([following, -slope])
        (dc, dz), *_ = np.linalg.lstsq(jacobian, -residual, rcond=None)
        c += dc
        z += dz
        if abs(dz) < 1e-14 * (1.0 + abs(z)):
            break
    return complex(z)


def recover_noise(
    model: SystemModel,
    trajectory: Trajectory,
    method: RecoveryMethod = RecoveryMethod.STEP_INVERSION,
    table: Optional[AnsatzTable] = None,
) -> NoisePath:
    """
    Recover the driving z* from a trajectory of the linear flow of `model`.

    STEP_INVERSION inverts each RK4 step, so it returns the held values that
    produced the states up to round-off. CENTRAL_DIFFERENCE fits the equation of
    motion to finite-difference derivatives (one-sided at the ends); at interior
    nodes it returns the mean of the two adjacent held values to O(dt).
    The last node repeats the previous value since no step follows it.
    """
    grid = trajectory.grid
    series = prepare_generator(model, grid, table)
    states = trajectory.states
    n = grid.n_nodes
    dt = grid.dt
    lindblad = series.lindblad
    values = np.zeros(n, dtype=complex)
    if n == 1:
        _check_identifiable(lindblad, states[0], 0)
        return NoisePath(grid, values)

    if method == RecoveryMethod.STEP_INVERSION:
        for j in range(n - 1):
            _check_identifiable(lindblad, states[j], j)
            values[j] = _invert_step(
                series.base[j], lindblad, dt, states[j], states[j + 1]
            )
        values[-1] = values[-2]
    elif method == RecoveryMethod.CENTRAL_DIFFERENCE:
        derivative = np.gradient(states, dt, axis=0, edge_order=1)
        for j in range(n):
            psi = states[j]
            _check_identifiable(lindblad, psi, j)
            design = np.column_stack([lindblad @ psi, psi])
            target = derivative[j] - series.base[j] @ psi
            (z, _), *_ = np.linalg.lstsq(design, target, rcond=None)
            values[j] = z
    else:
        raise ValueError(f"Invalid recovery method {method}")
    log.debug("Recovered %d noise values with %s", n, method.value)
    return NoisePath(grid, values)
