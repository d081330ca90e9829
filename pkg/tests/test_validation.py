"""Tests for run configuration validation."""

import warnings

import pytest

from helpers import (
    compat_document,
    load_study_document,
    make_config,
    noise_document,
    unravel_document,
)
from pynmqsd.exceptions import ValidationError
from pynmqsd.validation import validate_config


def _error_paths(document: dict) -> list[str]:
    with pytest.raises(ValidationError) as excinfo:
        validate_config(make_config(document))
    return [error.path for error in excinfo.value.errors]


class TestValidConfigs:
    @pytest.mark.parametrize(
        "study,task",
        [
            ("ou_dephasing", "noise"),
            ("ou_dephasing", "compat"),
            ("ou_dephasing", "unravel"),
            ("ou_dephasing", "norms"),
            ("ou_dephasing", "trajectory"),
            ("jaynes_cummings", "unravel"),
            ("jaynes_cummings", "oracle"),
            ("jaynes_cummings", "jc-residual"),
            ("markov", "jc-residual"),
            ("markov", "compat"),
        ],
    )
    def test_study_configs_validate(self, study, task):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            validate_config(make_config(load_study_document(study, task)))

    def test_helper_documents_validate(self):
        for document in (noise_document(), unravel_document(), compat_document()):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                validate_config(make_config(document))


class TestRequiredBlocks:
    def test_missing_task(self):
        document = noise_document()
        del document["task"]
        assert _error_paths(document) == ["config.task"]

    def test_missing_block(self):
        document = unravel_document()
        del document["model"]
        assert "config.model" in _error_paths(document)

    def test_missing_field(self):
        document = noise_document(ensemble={"n_traj": 3})
        assert "ensemble.seed" in _error_paths(document)

    def test_oracle_needs_seed_with_ensemble(self):
        document = load_study_document("jaynes_cummings", "oracle")
        document["ensemble"] = {"n_traj": 100}
        assert "ensemble.seed" in _error_paths(document)


class TestFieldRules:
    def test_zero_trajectories(self):
        document = noise_document(ensemble={"n_traj": 0, "seed": 1})
        assert "ensemble.n_traj" in _error_paths(document)

    def test_single_trajectory_estimator(self):
        document = unravel_document(ensemble={"n_traj": 1, "seed": 1})
        assert "ensemble.n_traj" in _error_paths(document)

    def test_single_noise_path_is_fine(self):
        validate_config(make_config(noise_document(ensemble={"n_traj": 1, "seed": 1})))

    def test_negative_dt(self):
        document = noise_document(grid={"t_max": 1.0, "dt": -0.1})
        assert "grid.dt" in _error_paths(document)

    def test_small_ensemble_warns_for_estimators(self):
        with pytest.warns(UserWarning, match="noisy"):
            document = unravel_document(ensemble={"n_traj": 10, "seed": 1})
            validate_config(make_config(document))

    def test_error_message_names_field(self):
        document = noise_document(ensemble={"n_traj": 0, "seed": 1})
        with pytest.raises(ValidationError) as excinfo:
            validate_config(make_config(document))
        assert "ensemble.n_traj = 0 -- expected: >= 1" in str(excinfo.value.errors[0])


class TestFamilies:
    def test_ou_needs_gamma(self):
        document = noise_document(kernel={"family": "ornstein_uhlenbeck", "kappa": 1.0})
        assert "kernel.gamma" in _error_paths(document)

    def test_tabulated_needs_real_alpha0(self):
        document = noise_document(
            kernel={
                "family": "tabulated",
                "tau": [0.0, 1.0, 2.0],
                "alpha": [[1.0, 0.5], [0.5, 0.0], [0.1, 0.0]],
            }
        )
        assert "kernel.alpha" in _error_paths(document)

    def test_tabulated_must_cover_grid(self):
        document = noise_document(
            kernel={"family": "tabulated", "tau": [0.0, 1.0], "alpha": [[1, 0], [0, 0]]}
        )
        assert "kernel.tau" in _error_paths(document)

    def test_dephasing_kappa_from_kernel(self):
        validate_config(make_config(unravel_document()))

    def test_static_l_needs_hermitian_h(self):
        document = unravel_document(
            model={
                "ansatz": "static_l",
                "hamiltonian": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
                "lindblad": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
            }
        )
        assert "model.hamiltonian" in _error_paths(document)

    def test_psi0_dimension(self):
        document = unravel_document(
            model={"ansatz": "dephasing", "omega": 1.0, "r": 0.5, "psi0": [[1, 0]]}
        )
        assert "model.psi0" in _error_paths(document)

    def test_bath_too_large(self):
        document = load_study_document("jaynes_cummings", "oracle")
        document["bath"]["max_total_dim"] = 2
        assert "bath.modes" in _error_paths(document)


class TestCrossField:
    def test_t_max_off_grid(self):
        document = noise_document(grid={"t_max": 1.05, "dt": 0.1})
        assert "grid.t_max" in _error_paths(document)

    def test_compat_times_ordered(self):
        document = compat_document(
            compat={"s": 2.0, "t": 1.0, "n_cond": 10, "re_z_s": 0.0}
        )
        assert "compat.t" in _error_paths(document)

    def test_compat_time_on_grid(self):
        document = compat_document(
            compat={"s": 1.01, "t": 2.0, "n_cond": 10, "re_z_s": 0.0}
        )
        assert "compat.s" in _error_paths(document)

    def test_compat_sweep_needs_all_axes(self):
        document = compat_document(
            compat={"s": 1.0, "t": 2.0, "n_cond": 10, "sweep_gamma": [1.0]}
        )
        assert "compat.sweep_gamma/sweep_r/sweep_duration" in _error_paths(document)

    def test_norms_s_after_start(self):
        document = unravel_document(task="norms", norms={"s": 0.0, "t": 0.2})
        assert "norms.s" in _error_paths(document)

    def test_jc_residual_u_before_s(self):
        document = load_study_document("jaynes_cummings", "jc-residual")
        document["jc_residual"]["u"] = [document["jc_residual"]["s"]]
        assert "jc_residual.u" in _error_paths(document)

    def test_jc_residual_needs_jc_model(self):
        document = load_study_document("jaynes_cummings", "jc-residual")
        document["model"] = {"ansatz": "dephasing", "omega": 1.0, "r": 0.5}
        assert "model.ansatz" in _error_paths(document)

    def test_coarse_grid_warns(self):
        document = noise_document(grid={"t_max": 2.0, "dt": 0.1})
        document["kernel"]["gamma"] = 5.0
        with pytest.warns(UserWarning, match="coarse"):
            validate_config(make_config(document))
