"""Tests for the ansatz tables and the Riccati reference."""

import numpy as np
import pytest

from pynmqsd.calculations.kernels import kernel_integral
from pynmqsd.calculations.models import (
    build_ansatz,
    memory_operator,
    riccati_reference,
    solve_jc_ansatz,
)
from pynmqsd.calculations.operators import SIGMA_MINUS, SIGMA_Z
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import SystemModel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.enums import AnsatzType


def _riccati_error(dt: float, t: float = 1.0) -> float:
    grid = TimeGrid.from_span(0.0, t, dt)
    table = solve_jc_ansatz(1.0, CorrelationKernel.ornstein_uhlenbeck(1.0, 2.0), grid)
    reference = riccati_reference(1.0, 1.0, 2.0, t)
    return abs(table.F[-1] - reference.F(t))


def _riccati_sup_error(dt: float, t: float = 1.0) -> float:
    grid = TimeGrid.from_span(0.0, t, dt)
    table = solve_jc_ansatz(1.0, CorrelationKernel.ornstein_uhlenbeck(1.0, 2.0), grid)
    reference = riccati_reference(1.0, 1.0, 2.0, t)
    return float(np.max(np.abs(table.F[1:] - reference.F(grid.times[1:]))))


class TestJaynesCummingsAnsatz:
    def test_markov_rate_is_half_kappa(self):
        """A Dirac kernel gives F(t) = kappa / 2 for every t > 0."""
        grid = TimeGrid(0.0, 0.01, 100)
        table = solve_jc_ansatz(1.0, CorrelationKernel.dirac(2.0), grid)
        assert table.F[0] == 0.0
        np.testing.assert_allclose(table.F[1:], 1.0, atol=1e-8)
        np.testing.assert_allclose(table.step_F, 1.0, atol=1e-8)

    def test_diagonal_is_one(self, jc_ou_table):
        np.testing.assert_allclose(np.diag(jc_ou_table.f), 1.0)

    def test_upper_triangle_is_empty(self, jc_ou_table):
        assert np.all(np.triu(jc_ou_table.f, k=1) == 0)

    def test_f_at_rejects_future_source(self, jc_ou_table):
        with pytest.raises(ValueError):
            jc_ou_table.f_at(3, 5)

    def test_first_step_rate(self, jc_ou_table):
        assert jc_ou_table.step_F[0] == pytest.approx(0.5 * 1.0 * 1e-3)

    def test_ou_matches_riccati(self, jc_ou_table):
        reference = riccati_reference(1.0, 1.0, 2.0, 1.0)
        times = jc_ou_table.grid.times
        np.testing.assert_allclose(
            jc_ou_table.F[1:], reference.F(times[1:]), rtol=5e-3, atol=2e-3
        )

    def test_error_shrinks_with_dt(self):
        assert _riccati_error(0.002) < _riccati_error(0.004) / 1.5

    def test_error_halves_with_dt(self):
        """The lattice scheme is first order in dt."""
        ratio = _riccati_sup_error(0.002) / _riccati_sup_error(0.001)
        assert 1.7 <= ratio <= 2.3

    def test_single_node_grid(self, ou_kernel):
        table = solve_jc_ansatz(1.0, ou_kernel, TimeGrid(0.0, 0.1, 0))
        assert table.f.shape == (1, 1)
        assert table.F[0] == 0.0


class TestConstantAnsatz:
    def test_dephasing_table(self, dephasing_ou_model):
        grid = TimeGrid(0.0, 0.01, 50)
        table = build_ansatz(dephasing_ou_model, grid)
        node, step = kernel_integral(dephasing_ou_model.kernel, grid)
        assert table.is_constant
        assert table.f_at(4, 2) == 1.0
        np.testing.assert_allclose(table.F, node)
        np.testing.assert_allclose(table.step_F, step)

    def test_jc_dispatch(self, jc_ou_model):
        table = build_ansatz(jc_ou_model, TimeGrid(0.0, 0.01, 10))
        assert not table.is_constant
        np.testing.assert_allclose(table.lindblad, SIGMA_MINUS)

    def test_memory_operator(self, dephasing_ou_model):
        grid = TimeGrid(0.0, 0.01, 10)
        M = memory_operator(dephasing_ou_model, grid)
        table = build_ansatz(dephasing_ou_model, grid)
        assert M.shape == (11, 2, 2)
        np.testing.assert_allclose(M[5], table.F[5] * 0.5 * SIGMA_Z)


class TestSystemModel:
    def test_dephasing_coupling(self, ou_kernel):
        model = SystemModel.dephasing(0.0, 2.0, 4.0, ou_kernel)
        assert model.coupling_scale == pytest.approx(0.5)
        np.testing.assert_allclose(model.lindblad, 0.5 * SIGMA_Z)

    def test_static_l_rejects_non_hermitian(self, ou_kernel):
        with pytest.raises(ValueError, match="Hermitian"):
            SystemModel.static_l(SIGMA_MINUS, SIGMA_MINUS, ou_kernel)

    def test_static_l_rejects_shape_mismatch(self, ou_kernel):
        with pytest.raises(ValueError, match="does not match"):
            SystemModel.static_l(np.eye(3), SIGMA_MINUS, ou_kernel)

    def test_default_states(self, jc_ou_model, dephasing_ou_model):
        np.testing.assert_allclose(jc_ou_model.default_initial_state(), [1, 0])
        np.testing.assert_allclose(
            dephasing_ou_model.default_initial_state(), [2**-0.5, 2**-0.5]
        )
        assert dephasing_ou_model.ansatz == AnsatzType.DEPHASING
