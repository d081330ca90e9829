"""Tests for the master equations and the few-mode oracle."""

import numpy as np
import pytest

from pynmqsd.calculations.models import build_ansatz, solve_jc_ansatz
from pynmqsd.calculations.operators import (
    EXCITED,
    GROUND,
    PLUS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    projector,
    trace_distance,
)
from pynmqsd.calculations.reference import (
    evolve_dephasing_master,
    evolve_jc_master,
    evolve_master,
    evolve_static_master,
    exact_few_mode,
    kernel_of,
)
from pynmqsd.domain.density_matrix import DensityMatrix, ModeBath
from pynmqsd.domain.system_model import SystemModel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.exceptions import HilbertSpaceTooLargeError, NumericalWarning


@pytest.fixture(scope="module")
def grid():
    return TimeGrid(0.0, 0.01, 100)


class TestMasterEquations:
    def test_jc_markov_decay(self, dirac_kernel, grid):
        table = solve_jc_ansatz(1.0, dirac_kernel, grid)
        density = evolve_jc_master(1.0, table, EXCITED)
        assert density.populations()[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-8)

    def test_dephasing_markov_coherence(self, dirac_kernel, grid):
        model = SystemModel.dephasing(1.0, 0.5, 1.0, dirac_kernel)
        table = build_ansatz(model, grid)
        density = evolve_dephasing_master(1.0, 0.5, 1.0, table, PLUS)
        assert abs(density.rho[-1, 0, 1]) == pytest.approx(
            0.5 * np.exp(-0.5), abs=1e-8
        )
        np.testing.assert_allclose(density.populations()[-1], 0.5, atol=1e-12)

    def test_results_are_physical(self, jc_ou_model, grid):
        density = evolve_master(jc_ou_model, build_ansatz(jc_ou_model, grid), EXCITED)
        assert density.check_physical() == []

    def test_static_l_reduces_to_jc(self, dirac_kernel, grid):
        model = SystemModel.static_l(0.5 * SIGMA_Z, SIGMA_MINUS, dirac_kernel)
        static = evolve_static_master(model, build_ansatz(model, grid), EXCITED)
        jc = evolve_jc_master(1.0, solve_jc_ansatz(1.0, dirac_kernel, grid), EXCITED)
        np.testing.assert_allclose(static.rho, jc.rho, atol=1e-12)

    def test_accepts_density_input(self, dephasing_ou_model, grid):
        table = build_ansatz(dephasing_ou_model, grid)
        from_state = evolve_master(dephasing_ou_model, table, PLUS)
        from_rho = evolve_master(dephasing_ou_model, table, projector(PLUS))
        np.testing.assert_allclose(from_state.rho, from_rho.rho)

    def test_jc_ground_state_is_stationary(self, jc_ou_model, grid):
        table = build_ansatz(jc_ou_model, grid)
        density = evolve_jc_master(1.0, table, GROUND)
        expected = np.broadcast_to(projector(GROUND), density.rho.shape)
        np.testing.assert_allclose(density.rho, expected, atol=1e-14)

    def test_dephasing_keeps_populations(self, dephasing_ou_model, grid):
        table = build_ansatz(dephasing_ou_model, grid)
        psi0 = np.array([0.8, 0.6])
        density = evolve_dephasing_master(1.0, 0.5, 1.0, table, psi0)
        expected = np.tile([0.64, 0.36], (grid.n_nodes, 1))
        np.testing.assert_allclose(density.populations(), expected, atol=1e-10)

    def test_dephasing_coherence_follows_rate_integral(self, dephasing_ou_model, grid):
        table = build_ansatz(dephasing_ou_model, grid)
        density = evolve_dephasing_master(1.0, 0.5, 1.0, table, PLUS)
        rates = 0.25 * table.step_F.real[:-1]
        exponent = 4.0 * grid.dt * np.concatenate([[0.0], np.cumsum(rates)])
        np.testing.assert_allclose(
            np.abs(density.rho[:, 0, 1]), 0.5 * np.exp(-exponent), atol=1e-6
        )

    def test_uncoupled_dephasing_only_rotates(self, ou_kernel, grid):
        model = SystemModel.dephasing(1.0, 0.0, 1.0, ou_kernel)
        density = evolve_master(model, build_ansatz(model, grid), PLUS)
        np.testing.assert_allclose(
            density.rho[:, 0, 1], 0.5 * np.exp(-1j * grid.times), atol=1e-9
        )
        np.testing.assert_allclose(density.populations(), 0.5, atol=1e-12)


class TestCheckPhysical:
    def test_flags_every_violation(self):
        rho = np.array([[[1.5, 0.2], [0.0, -0.2]]], dtype=complex)
        issues = DensityMatrix(TimeGrid(0.0, 0.1, 0), rho).check_physical()
        assert len(issues) == 3


class TestFewModeOracle:
    def test_vacuum_rabi(self, dirac_kernel):
        """One resonant mode, g = 1: P_e(t) = cos^2(t) with no leakage."""
        grid = TimeGrid(0.0, 1e-3, 1000)
        bath = ModeBath.from_modes([(1.0, 0.0)])
        model = SystemModel.jaynes_cummings(0.0, kernel_of(bath))
        density = exact_few_mode(model, bath, grid=grid)
        assert density.populations()[-1, 0] == pytest.approx(np.cos(1.0) ** 2, abs=1e-8)
        assert density.cutoff_leakage == pytest.approx(0.0, abs=1e-14)
        assert not density.leakage_flagged

    def test_leakage_is_flagged(self, grid):
        bath = ModeBath.from_modes([(1.0, 0.0)])
        model = SystemModel.static_l(
            np.zeros((2, 2)), SIGMA_MINUS + SIGMA_PLUS, kernel_of(bath)
        )
        with pytest.warns(NumericalWarning, match="leakage"):
            density = exact_few_mode(model, bath, psi0=EXCITED, grid=grid)
        assert density.leakage_flagged

    def test_too_large_bath_raises(self, jc_ou_model, grid):
        bath = ModeBath.from_modes([(0.1, 1.0)] * 13)
        with pytest.raises(HilbertSpaceTooLargeError):
            exact_few_mode(jc_ou_model, bath, grid=grid)

    def test_grid_is_required(self):
        bath = ModeBath.from_modes([(1.0, 0.0)])
        model = SystemModel.jaynes_cummings(0.0, kernel_of(bath))
        with pytest.raises(TypeError):
            exact_few_mode(model, bath)

    def test_kernel_of_bath(self):
        bath = ModeBath.from_modes([(0.5, 1.0), (1.0, 2.0, 3)])
        assert kernel_of(bath).alpha(0.0) == pytest.approx(1.25)
        assert bath.cutoffs == (2, 3)

    def test_bath_rejects_small_cutoff(self):
        with pytest.raises(ValueError, match="cutoff"):
            ModeBath.from_modes([(1.0, 1.0, 1)])


class TestTraceDistance:
    def test_pure_states(self):
        excited = projector(EXCITED)
        ground = projector(np.array([0.0, 1.0]))
        assert trace_distance(excited, excited) == pytest.approx(0.0, abs=1e-15)
        assert trace_distance(excited, ground) == pytest.approx(1.0)
        assert trace_distance(excited, projector(PLUS)) == pytest.approx(np.sqrt(0.5))

    def test_symmetric(self):
        rho = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
        sigma = np.eye(2) / 2
        assert trace_distance(rho, sigma) == pytest.approx(trace_distance(sigma, rho))
