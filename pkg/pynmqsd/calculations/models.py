"""
Noise-independent ansatz O(t, s) and memory operator M(t) for the supported models.

Jaynes-Cummings: O(t, s) = f(t, s) sigma_-, with f(s, s) = 1 and
d/dt f(t, s) = (i omega + F(t)) f(t, s), F(t) = int_0^t alpha(t - s) f(t, s) ds.
Dephasing and StaticL: O(t, s) = L, so F reduces to K(t) = int_0^t alpha(s) ds.

Memory integrals use the lattice weights alpha(t_i - t_j) dt for s_j < t_i and
alpha(0) dt / 2 on the diagonal, so a Dirac kernel gives exactly kappa / 2.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from pynmqsd.calculations.kernels import kernel_integral, lag_alphas
from pynmqsd.calculations.operators import SIGMA_MINUS
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import AnsatzTable, SystemModel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.enums import AnsatzType
from pynmqsd.exceptions import NumericalError

log = logging.getLogger(__name__)


def solve_jc_ansatz(
    omega: float, kernel: CorrelationKernel, grid: TimeGrid
) -> AnsatzTable:
    n = grid.n_nodes
    dt = grid.dt
    alphas = lag_alphas(kernel, grid)
    f = np.zeros((n, n), dtype=complex)
    step_F = np.zeros(n, dtype=complex)
    # exponent[i] = sum_{m < i} (i omega + F_m) dt
    # f[i, j] = exp(exponent[i] - exponent[j])
    exponent = np.zeros(n, dtype=complex)
    for i in range(n):
        row = np.exp(exponent[i] - exponent[: i + 1])
        f[i, : i + 1] = row
        weights = alphas[i::-1] * dt
        weights[-1] *= 0.5
        step_F[i] = weights @ row
        if not np.isfinite(step_F[i]):
            raise NumericalError(f"ansatz table overflowed at t = {grid.times[i]:g}")
        if i + 1 < n:
            exponent[i + 1] = exponent[i] + (1j * omega + step_F[i]) * dt
    F = step_F.copy()
    F[0] = 0.0
    log.debug("Solved JC ansatz on %d nodes", n)
    return AnsatzTable(grid=grid, f=f, F=F, step_F=step_F, lindblad=SIGMA_MINUS)


def build_ansatz(model: SystemModel, grid: TimeGrid) -> AnsatzTable:
    if model.ansatz == AnsatzType.JAYNES_CUMMINGS:
        return solve_jc_ansatz(model.omega, model.kernel, grid)
    node, step = kernel_integral(model.kernel, grid)
    return AnsatzTable(grid=grid, f=None, F=node, step_F=step, lindblad=model.lindblad)


def memory_operator(
    model: SystemModel, grid: TimeGrid, table: Optional[AnsatzTable] = None
) -> np.ndarray:
    """M(t_i) for every node, shape (n_nodes, dim, dim)."""
    if table is None:
        table = build_ansatz(model, grid)
    return table.M


# ---------------------------------------------------------------------------
# Riccati oracle for the OU kernel
# ---------------------------------------------------------------------------


@dataclass
class RiccatiSolution:
    """Dense solution of dF/dt = kappa gamma / 2 + (i omega - gamma) F + F^2."""

    solution: object

    def F(self, t):
        return self.solution.sol(t)[0]

    def integral(self, t):
        """int_0^t F."""
        return self.solution.sol(t)[1]


def riccati_reference(
    omega: float, kappa: float, gamma: float, t_max: float, rtol: float = 1e-11
) -> RiccatiSolution:
    def rhs(_, y):
        F = y[0]
        return [0.5 * kappa * gamma + (1j * omega - gamma) * F + F * F, F]

    solution = solve_ivp(
        rhs,
        (0.0, t_max),
        np.zeros(2, dtype=complex),
        method="DOP853",
        rtol=rtol,
        atol=1e-13,
        dense_output=True,
    )
    if not solution.success:
        raise NumericalError(f"Riccati reference failed: {solution.message}")
    return RiccatiSolution(solution)
