"""Tests for the compatibility audits and the JC kernel residual."""

import numpy as np
import pytest
from helpers import held_grid

from pynmqsd.calculations.compat import (
    audit_compatibility,
    check_normalization,
    closed_form_dephasing_ou,
    compat_sweep,
    jc_conditional_moments,
    jc_functional_samples,
    jc_kernel_residual,
    jc_residual_oracle,
    jc_residual_panel,
)
from pynmqsd.calculations.kernels import pinned_past, sample_paths
from pynmqsd.calculations.models import solve_jc_ansatz
from pynmqsd.calculations.operators import SIGMA_MINUS, SIGMA_Z
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import SystemModel
from pynmqsd.domain.time_grid import TimeGrid

CLOSED_FORM_AT_ZERO = 0.54916


@pytest.fixture(scope="module")
def ou_11():
    return CorrelationKernel.ornstein_uhlenbeck(1.0, 1.0)


@pytest.fixture(scope="module")
def ou_dephasing(ou_11):
    return SystemModel.dephasing(0.0, 1.0, 1.0, ou_11)


@pytest.fixture(scope="module")
def ou_past(ou_11):
    """Values held on [0, 1) at dt = 0.05, the last one pinned to zero."""
    return pinned_past(ou_11, held_grid(1.0, 0.05), 0.0, seed=11)


# ---------------------------------------------------------------------------
# Closed form
# ---------------------------------------------------------------------------


class TestClosedForm:
    def test_value_at_zero_noise(self):
        closed = closed_form_dephasing_ou(1.0, 1.0, 1.0, 1.0, 2.0, 0.0)
        np.testing.assert_allclose(np.diag(closed).real, CLOSED_FORM_AT_ZERO, atol=1e-4)
        assert closed[0, 1] == 0

    def test_sign_of_noise_splits_diagonal(self):
        closed = closed_form_dephasing_ou(1.0, 1.0, 1.0, 1.0, 2.0, 0.5)
        assert closed[0, 0].real > CLOSED_FORM_AT_ZERO > closed[1, 1].real

    def test_uncoupled_is_identity(self):
        np.testing.assert_allclose(
            closed_form_dephasing_ou(1.0, 1.0, 0.0, 1.0, 2.0, 0.3), np.eye(2)
        )

    def test_markov_limit_is_identity(self):
        closed = closed_form_dephasing_ou(1.0, 1e4, 1.0, 1.0, 2.0, 0.0)
        np.testing.assert_allclose(closed, np.eye(2), atol=1e-3)

    def test_spread_of_re_z_s_averages_the_exponential(self):
        sharp = closed_form_dephasing_ou(1.0, 1.0, 1.0, 1.0, 2.0, 0.0)
        spread = closed_form_dephasing_ou(1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.1)
        slope = 2.0 * (1.0 - np.exp(-1.0))
        np.testing.assert_allclose(spread, sharp * np.exp(0.5 * slope**2 * 0.1))

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            closed_form_dephasing_ou(0.0, 1.0, 1.0, 1.0, 2.0, 0.0)
        with pytest.raises(ValueError, match="variance"):
            closed_form_dephasing_ou(1.0, 1.0, 1.0, 1.0, 2.0, 0.0, -1.0)


# ---------------------------------------------------------------------------
# Conditional audits
# ---------------------------------------------------------------------------


class TestAuditCompatibility:
    def test_ou_dephasing_follows_closed_form(self, ou_dephasing, ou_past):
        report = audit_compatibility(ou_dephasing, ou_past, 1.0, 2.0, 2000, seed=11)
        assert report.closed_form_residual <= max(5 * report.stderr, 0.01)
        assert not report.compatible()
        assert report.analytic
        assert report.is_hermitian
        assert report.min_eigenvalue > 0
        assert report.n_cond == 2000

    def test_markov_dephasing_is_compatible(self, dirac_kernel):
        model = SystemModel.dephasing(0.0, 0.5, 1.0, dirac_kernel)
        past = pinned_past(dirac_kernel, held_grid(0.5, 0.01), 0.0, seed=2)
        report = audit_compatibility(model, past, 0.5, 1.0, 1000, seed=2)
        assert report.compatible()
        assert report.closed_form is None

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_markov_dephasing_is_compatible_for_drawn_pasts(self, dirac_kernel, seed):
        # the value at s belongs to the continuation
        model = SystemModel.dephasing(0.0, 1.0, 1.0, dirac_kernel)
        (past,) = sample_paths(dirac_kernel, held_grid(1.0, 0.01), 1, seed)
        report = audit_compatibility(model, past, 1.0, 1.5, 5000, seed=seed)
        assert report.residual <= 5 * report.stderr

    def test_uncoupled_dephasing_is_exactly_identity(self, ou_11, ou_past):
        model = SystemModel.dephasing(1.0, 0.0, 1.0, ou_11)
        report = audit_compatibility(model, ou_past, 1.0, 2.0, 20, seed=3)
        np.testing.assert_allclose(report.estimate, np.eye(2), atol=1e-12)
        assert report.residual < 1e-12

    def test_static_l_uses_numeric_propagators(self, dirac_kernel):
        model = SystemModel.static_l(0.5 * SIGMA_Z, SIGMA_MINUS, dirac_kernel)
        past = pinned_past(dirac_kernel, held_grid(0.2, 0.02), 0.0, seed=6)
        report = audit_compatibility(model, past, 0.2, 0.4, 200, seed=6)
        assert not report.analytic
        assert report.estimate.shape == (2, 2)

    def test_past_must_end_before_s(self, ou_dephasing, ou_past):
        with pytest.raises(ValueError, match="expected s"):
            audit_compatibility(ou_dephasing, ou_past, 0.5, 2.0, 10, seed=1)
        full = pinned_past(ou_dephasing.kernel, TimeGrid(0.0, 0.05, 20), 0.0, 1)
        with pytest.raises(ValueError, match="expected s"):
            audit_compatibility(ou_dephasing, full, 1.0, 2.0, 10, seed=1)

    def test_weight_hook_scales_estimate(self, ou_dephasing, ou_past):
        plain = audit_compatibility(ou_dephasing, ou_past, 1.0, 1.5, 50, seed=3)
        doubled = audit_compatibility(
            ou_dephasing,
            ou_past,
            1.0,
            1.5,
            50,
            seed=3,
            weight=lambda noise: np.full(noise.shape[0], 2.0),
        )
        np.testing.assert_allclose(doubled.estimate, 2.0 * plain.estimate)

    def test_summary_carries_closed_form(self, ou_dephasing, ou_past):
        report = audit_compatibility(ou_dephasing, ou_past, 1.0, 2.0, 20, seed=4)
        summary = report.summary()
        assert summary["closed_form_diagonal"][0] == pytest.approx(
            CLOSED_FORM_AT_ZERO, abs=1e-4
        )
        # Re z_s given z_{s - dt} = 0: mean 0, variance alpha(0)(1 - e^{-2 gamma dt})/2
        assert summary["re_z_s"] == pytest.approx(0.0, abs=1e-10)
        assert summary["var_re_z_s"] == pytest.approx(0.25 * (1 - np.exp(-0.1)))
        expected = closed_form_dephasing_ou(
            1.0, 1.0, 1.0, 1.0, 2.0, 0.0, summary["var_re_z_s"]
        )
        np.testing.assert_allclose(
            summary["closed_form_reference_diagonal"], np.diag(expected).real
        )

    def test_compatibility_improves_with_short_correlation_time(self):
        residuals = {}
        for gamma in (1.0, 100.0):
            kernel = CorrelationKernel.ornstein_uhlenbeck(1.0, gamma)
            model = SystemModel.dephasing(0.0, 1.0, 1.0, kernel)
            past = pinned_past(kernel, held_grid(0.2, 0.001), 0.0, seed=21)
            report = audit_compatibility(model, past, 0.2, 1.2, 4000, seed=21)
            residuals[gamma] = report.residual
        assert residuals[100.0] < residuals[1.0]

    def test_short_times_are_compatible(self, ou_11, ou_dephasing):
        past = pinned_past(ou_11, held_grid(0.5, 0.001), 0.0, seed=22)
        report = audit_compatibility(ou_dephasing, past, 0.5, 0.51, 1000, seed=22)
        assert report.residual < 1e-2


class TestCheckNormalization:
    def test_ou_dephasing_is_normalized(self, ou_dephasing):
        check = check_normalization(
            ou_dephasing, 2000, seed=8, t=1.0, grid=TimeGrid(0.0, 0.05, 20)
        )
        assert check.residual <= max(5 * check.stderr, 0.02)
        assert check.t == pytest.approx(1.0)
        assert check.valid


class TestSweep:
    def test_sweep_rows(self):
        frame = compat_sweep(
            1.0, [1.0, 2.0], [0.5], [0.5], s=0.5, dt=0.05, n_cond=20, seed=1
        )
        assert len(frame) == 2
        assert {"estimate_00", "closed_form_00", "residual"} <= set(frame.columns)

    def test_closed_form_agrees_across_panel(self):
        frame = compat_sweep(
            1.0,
            [0.5, 1.0, 2.0],
            [0.25, 0.5, 1.0],
            [0.5],
            s=0.5,
            dt=0.02,
            n_cond=2000,
            seed=5,
        )
        assert len(frame) == 9
        bound = np.maximum(5 * frame["stderr"], 0.02)
        assert (frame["closed_form_residual"] <= bound).all()


# ---------------------------------------------------------------------------
# Jaynes-Cummings residual and moments
# ---------------------------------------------------------------------------


class TestJCKernelResidual:
    def test_markov_residual_vanishes(self, dirac_kernel, fine_grid):
        table = solve_jc_ansatz(1.0, dirac_kernel, fine_grid)
        assert jc_kernel_residual(1.0, table, dirac_kernel, 0.5, 1.0, 0.2) == 0

    def test_ou_residual_matches_oracle(self, jc_ou_table, ou_kernel):
        residual = jc_kernel_residual(1.0, jc_ou_table, ou_kernel, 0.5, 1.0, 0.2)
        oracle = jc_residual_oracle(1.0, 1.0, 2.0, 0.5, 1.0, 0.2)
        assert abs(residual) > 0.01
        assert abs(residual - oracle) < 2e-3

    def test_u_must_precede_s(self, jc_ou_table, ou_kernel):
        with pytest.raises(ValueError, match="0 <= u < s"):
            jc_kernel_residual(1.0, jc_ou_table, ou_kernel, 0.5, 1.0, 0.5)

    def test_panel(self, jc_ou_table, ou_kernel):
        panel = jc_residual_panel(1.0, jc_ou_table, ou_kernel, 0.5, 1.0, n_u=4)
        assert list(panel["u"]) == pytest.approx([0.0, 0.125, 0.25, 0.375])
        assert panel["abs_error"].max() < 2e-3

    def test_panel_without_oracle(self, dirac_kernel, fine_grid):
        table = solve_jc_ansatz(1.0, dirac_kernel, fine_grid)
        panel = jc_residual_panel(1.0, table, dirac_kernel, 0.5, 1.0, u_values=[0.1])
        assert "abs_error" not in panel.columns
        assert panel["abs_residual"].iloc[0] == 0


class TestJCMoments:
    @pytest.fixture(scope="class")
    def markov_table(self, dirac_kernel):
        return solve_jc_ansatz(1.0, dirac_kernel, TimeGrid(0.0, 0.002, 500))

    def test_markov_moments_are_consistent(self, markov_table, dirac_kernel):
        past = pinned_past(dirac_kernel, held_grid(0.5, 0.002), 0.0, seed=12)
        moments = jc_conditional_moments(
            1.0, markov_table, past, 0.5, 1.0, 1000, seed=12, kernel=dirac_kernel
        )
        assert moments.consistent()
        assert moments.n == 1000

    def test_equal_times_are_trivial(self, markov_table, dirac_kernel):
        past = pinned_past(dirac_kernel, held_grid(0.5, 0.002), 0.0, seed=12)
        moments = jc_conditional_moments(
            1.0, markov_table, past, 0.5, 0.5, 10, seed=12, kernel=dirac_kernel
        )
        assert moments.mean_h == 1.0
        assert moments.consistent()

    def test_functional_samples(self, markov_table, dirac_kernel):
        past = pinned_past(dirac_kernel, held_grid(0.5, 0.002), 0.0, seed=13)
        samples = jc_functional_samples(
            1.0, markov_table, dirac_kernel, past, 0.6, 25, seed=13
        )
        assert len(samples) == 25
        assert all(sample.h >= 0 for sample in samples)

    def test_ou_moments_show_violation(self, jc_ou_table, ou_kernel):
        past = pinned_past(ou_kernel, held_grid(0.5, 1e-3), 3.0, seed=14)
        moments = jc_conditional_moments(
            1.0, jc_ou_table, past, 0.5, 1.0, 500, seed=14, kernel=ou_kernel
        )
        assert abs(moments.mean_j) > 5 * moments.stderr_j
        assert not moments.consistent()
