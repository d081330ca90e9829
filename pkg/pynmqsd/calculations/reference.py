"""
Independent references for the reduced dynamics.

The time-dependent master equations
    d rho/dt = -i[H_eff(t), rho] + rate(t) (2 J rho J^dagger - {J^dagger J, rho})
are marched with RK4, holding the rates of the ansatz table fixed on each
step. The few-mode oracle integrates the total Schroedinger equation with
the bath in the interaction picture and traces the modes out.
"""

import logging
import warnings

import numpy as np

from pynmqsd.calculations.operators import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    dagger,
    hermitian_part,
    projector,
)
from pynmqsd.domain.density_matrix import LEAKAGE_THRESHOLD, DensityMatrix, ModeBath
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import AnsatzTable, SystemModel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.enums import AnsatzType
from pynmqsd.exceptions import HilbertSpaceTooLargeError, NumericalWarning

log = logging.getLogger(__name__)

DEFAULT_MAX_TOTAL_DIM = 4096


def _as_density(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return projector(state)
    return state


def _evolve_lindblad(
    grid: TimeGrid,
    rho0: np.ndarray,
    h_eff: np.ndarray,
    jump: np.ndarray,
    rates: np.ndarray,
) -> DensityMatrix:
    jump_dag = dagger(jump)
    jump_sq = jump_dag @ jump
    dt = grid.dt

    def rhs(rho, h, rate):
        unitary = -1j * (h @ rho - rho @ h)
        dissipator = 2.0 * jump @ rho @ jump_dag - jump_sq @ rho - rho @ jump_sq
        return unitary + rate * dissipator

    rho = np.empty((grid.n_nodes,) + rho0.shape, dtype=complex)
    rho[0] = rho0
    for i in range(grid.n_steps):
        h, rate = h_eff[i], rates[i]
        current = rho[i]
        k1 = rhs(current, h, rate)
        k2 = rhs(current + 0.5 * dt * k1, h, rate)
        k3 = rhs(current + 0.5 * dt * k2, h, rate)
        k4 = rhs(current + dt * k3, h, rate)
        rho[i + 1] = hermitian_part(current + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
    return DensityMatrix(grid=grid, rho=rho)


def evolve_jc_master(
    omega: float, table: AnsatzTable, rho0, grid: TimeGrid = None
) -> DensityMatrix:
    """JC master equation with rate Re F(t) and energy shift Im F(t) sigma_+ sigma_-."""
    grid = table.grid if grid is None else grid
    rates = table.step_F[: grid.n_nodes]
    excited = SIGMA_PLUS @ SIGMA_MINUS
    h_eff = 0.5 * omega * SIGMA_Z[None] + rates.imag[:, None, None] * excited[None]
    return _evolve_lindblad(grid, _as_density(rho0), h_eff, SIGMA_MINUS, rates.real)


def evolve_dephasing_master(
    omega: float,
    r: float,
    kappa: float,
    table: AnsatzTable,
    rho0,
    grid: TimeGrid = None,
) -> DensityMatrix:
    """Dephasing master equation with rate (r/kappa)^2 Re K(t) on sigma_z."""
    grid = table.grid if grid is None else grid
    rates = (r / kappa) ** 2 * table.step_F[: grid.n_nodes].real
    h_eff = np.broadcast_to(0.5 * omega * SIGMA_Z, (grid.n_nodes, 2, 2))
    return _evolve_lindblad(grid, _as_density(rho0), h_eff, SIGMA_Z, rates)


def evolve_static_master(
    model: SystemModel, table: AnsatzTable, rho0, grid: TimeGrid = None
) -> DensityMatrix:
    """Master equation for O = L: rate Re K(t) on L, shift Im K(t) L^dagger L."""
    grid = table.grid if grid is None else grid
    rates = table.step_F[: grid.n_nodes]
    l_dag_l = dagger(model.lindblad) @ model.lindblad
    h_eff = model.hamiltonian[None] + rates.imag[:, None, None] * l_dag_l[None]
    return _evolve_lindblad(
        grid, _as_density(rho0), h_eff, model.lindblad, rates.real
    )


# ---------------------------------------------------------------------------
# Few-mode total-system oracle
# ---------------------------------------------------------------------------


def kernel_of(bath: ModeBath) -> CorrelationKernel:
    return CorrelationKernel.mode_sum(zip(bath.couplings, bath.frequencies))


def _lower(psi: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(psi, axis, 0)
    out = np.zeros_like(moved)
    levels = moved.shape[0]
    factors = np.sqrt(np.arange(1, levels)).reshape((-1,) + (1,) * (moved.ndim - 1))
    out[:-1] = factors * moved[1:]
    return np.moveaxis(out, 0, axis)


def _raise(psi: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(psi, axis, 0)
    out = np.zeros_like(moved)
    levels = moved.shape[0]
    factors = np.sqrt(np.arange(1, levels)).reshape((-1,) + (1,) * (moved.ndim - 1))
    out[1:] = factors * moved[:-1]
    return np.moveaxis(out, 0, axis)


def _on_system(op: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return np.tensordot(op, psi, axes=(1, 0))


def _top_level_leakage(lindblad: np.ndarray, psi: np.ndarray) -> float:
    coupled = _on_system(lindblad, psi)
    total = 0.0
    for axis in range(1, psi.ndim):
        top = np.take(coupled, -1, axis=axis)
        total += float(np.sum(np.abs(top) ** 2))
    return total


def exact_few_mode(
    model: SystemModel,
    bath: ModeBath,
    grid: TimeGrid,
    psi0=None,
    max_total_dim: int = DEFAULT_MAX_TOTAL_DIM,
) -> DensityMatrix:
    """
    Reduced state of H (x) 1 + sum_l (g_l* L (x) a_l^dag e^{i w_l t} + h.c.).

    The bath starts in the vacuum. `cutoff_leakage` is the largest, over the
    grid, of sum_l |(L (x) P_top,l) Psi|^2, the weight the coupling would push
    past the truncation.
    """
    total_dim = model.dim * bath.bath_dim
    if total_dim > max_total_dim:
        raise HilbertSpaceTooLargeError(total_dim, max_total_dim)
    psi0 = model.default_initial_state() if psi0 is None else np.asarray(psi0)
    H = model.hamiltonian
    L = model.lindblad
    L_dag = dagger(L)
    g = bath.couplings
    w = bath.frequencies
    dt = grid.dt

    state = np.zeros((model.dim,) + bath.cutoffs, dtype=complex)
    state[(slice(None),) + (0,) * bath.n_modes] = psi0

    def rhs(t, psi):
        out = _on_system(H, psi)
        emit = _on_system(L, psi)
        absorb = _on_system(L_dag, psi)
        for k in range(bath.n_modes):
            axis = k + 1
            out += np.conj(g[k]) * np.exp(1j * w[k] * t) * _raise(emit, axis)
            out += g[k] * np.exp(-1j * w[k] * t) * _lower(absorb, axis)
        return -1j * out

    rho = np.empty((grid.n_nodes, model.dim, model.dim), dtype=complex)
    leakage = 0.0
    times = grid.times
    for i in range(grid.n_nodes):
        flat = state.reshape(model.dim, -1)
        rho[i] = flat @ flat.conj().T
        leakage = max(leakage, _top_level_leakage(L, state))
        if i == grid.n_steps:
            break
        t = times[i]
        k1 = rhs(t, state)
        k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2)
        k4 = rhs(t + dt, state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if leakage > LEAKAGE_THRESHOLD:
        warnings.warn(
            f"Fock cutoff leakage {leakage:.2e} exceeds {LEAKAGE_THRESHOLD:.0e}",
            NumericalWarning,
        )
    return DensityMatrix(grid=grid, rho=rho, cutoff_leakage=leakage)


def evolve_master(model: SystemModel, table: AnsatzTable, rho0) -> DensityMatrix:
    """The master equation matching the ansatz family of `model`."""
    if model.ansatz == AnsatzType.JAYNES_CUMMINGS:
        return evolve_jc_master(model.omega, table, rho0)
    if model.ansatz == AnsatzType.DEPHASING:
        return evolve_dephasing_master(model.omega, model.r, model.kappa, table, rho0)
    if model.ansatz == AnsatzType.STATIC_L:
        return evolve_static_master(model, table, rho0)
    raise ValueError(f"Invalid ansatz {model.ansatz}")
