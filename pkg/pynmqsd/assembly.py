"""Builders turning validated config blocks into domain objects."""

import numpy as np

from pynmqsd.calculations.operators import normalized
from pynmqsd.domain.density_matrix import ModeBath
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import SystemModel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.enums import AnsatzType, KernelFamily
from pynmqsd.inputs.bath_input import BathInput
from pynmqsd.inputs.grid_input import GridInput
from pynmqsd.inputs.kernel_input import KernelInput, ModeInput
from pynmqsd.inputs.model_input import ModelInput
from pynmqsd.serializable import matrix_from_pairs, pair_to_complex, vector_from_pairs


def build_grid(grid: GridInput) -> TimeGrid:
    t0 = grid.t0 if grid.t0 is not None else 0.0
    return TimeGrid.from_span(t0, grid.t_max, grid.dt)


def _mode_pairs(modes: list[ModeInput]):
    return [(pair_to_complex(m.g), float(m.omega)) for m in modes]


def build_kernel(kernel: KernelInput) -> CorrelationKernel:
    if kernel.family == KernelFamily.DIRAC:
        return CorrelationKernel.dirac(kernel.kappa)
    elif kernel.family == KernelFamily.ORNSTEIN_UHLENBECK:
        return CorrelationKernel.ornstein_uhlenbeck(kernel.kappa, kernel.gamma)
    elif kernel.family == KernelFamily.MODE_SUM:
        return CorrelationKernel.mode_sum(_mode_pairs(kernel.modes))
    elif kernel.family == KernelFamily.TABULATED:
        return CorrelationKernel.tabulated(kernel.tau, vector_from_pairs(kernel.alpha))
    raise ValueError("Invalid kernel family")


def build_bath(bath: BathInput) -> ModeBath:
    return ModeBath.from_modes(
        (pair_to_complex(m.g), float(m.omega), m.cutoff) for m in bath.modes
    )


def build_model(model: ModelInput, kernel: CorrelationKernel) -> SystemModel:
    if model.ansatz == AnsatzType.JAYNES_CUMMINGS:
        return SystemModel.jaynes_cummings(model.omega, kernel)
    elif model.ansatz == AnsatzType.DEPHASING:
        kappa = model.kappa if model.kappa is not None else kernel.kappa
        return SystemModel.dephasing(model.omega, model.r, kappa, kernel)
    elif model.ansatz == AnsatzType.STATIC_L:
        return SystemModel.static_l(
            matrix_from_pairs(model.hamiltonian),
            matrix_from_pairs(model.lindblad),
            kernel,
        )
    raise ValueError("Invalid ansatz")


def initial_state(model_input: ModelInput, model: SystemModel) -> np.ndarray:
    if model_input.psi0 is None:
        return model.default_initial_state()
    return normalized(vector_from_pairs(model_input.psi0))
