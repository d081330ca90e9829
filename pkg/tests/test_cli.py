"""End-to-end tests of the nmqsd command line."""

import json
import os

import pandas as pd
import pytest

from helpers import (
    compat_document,
    max_trace_distance_ratio,
    noise_document,
    unravel_document,
    write_config,
)
from pynmqsd.cli import (
    EXIT_INVALID,
    EXIT_NUMERICAL,
    EXIT_OK,
    apply_overrides,
    build_parser,
    main,
)
from pynmqsd.file_utils import config_hash
from pynmqsd.inputs.run_config import RunConfig


def _run(tmp_path, document: dict, out: str = "out", extra=()) -> tuple[int, str]:
    config_path = write_config(tmp_path, document, name=f"{out}.json")
    directory = os.path.join(str(tmp_path), out)
    status = main(
        [document["task"], "--config", config_path, "--out", directory, *extra]
    )
    return status, directory


def _manifest(directory: str) -> dict:
    with open(os.path.join(directory, "manifest.json"), encoding="utf-8") as f:
        return json.load(f)


class TestNoise:
    def test_same_seed_gives_identical_files(self, tmp_path):
        status_a, first = _run(tmp_path, noise_document(), out="a")
        status_b, second = _run(tmp_path, noise_document(), out="b")
        assert status_a == status_b == EXIT_OK
        with open(os.path.join(first, "noise.csv"), "rb") as f:
            a = f.read()
        with open(os.path.join(second, "noise.csv"), "rb") as f:
            b = f.read()
        assert a == b

    def test_long_format_columns(self, tmp_path):
        _, directory = _run(tmp_path, noise_document())
        frame = pd.read_csv(os.path.join(directory, "noise.csv"))
        assert list(frame.columns) == ["t", "path_id", "re", "im"]
        assert len(frame) == 3 * 20

    def test_per_path_files(self, tmp_path):
        document = noise_document(output={"long_format": False})
        _, directory = _run(tmp_path, document)
        assert _manifest(directory)["artifacts"] == [
            "noise_0.csv",
            "noise_1.csv",
            "noise_2.csv",
        ]

    def test_manifest_contents(self, tmp_path):
        _, directory = _run(tmp_path, noise_document())
        manifest = _manifest(directory)
        for key in (
            "task",
            "config_hash",
            "seed",
            "versions",
            "warnings",
            "artifacts",
            "summary",
            "wall_time_s",
        ):
            assert key in manifest
        assert manifest["task"] == "noise"
        assert manifest["seed"] == 7
        assert "numpy" in manifest["versions"]
        assert manifest["summary"]["n_paths"] == 3

    def test_seed_override(self, tmp_path):
        _, directory = _run(tmp_path, noise_document(), extra=("--seed", "99"))
        assert _manifest(directory)["seed"] == 99


class TestExitCodes:
    def test_invalid_config_exits_two(self, tmp_path, capsys):
        document = noise_document(ensemble={"n_traj": 0, "seed": 1})
        status, _ = _run(tmp_path, document)
        assert status == EXIT_INVALID
        assert "ensemble.n_traj" in capsys.readouterr().err

    def test_missing_config_exits_two(self, tmp_path, capsys):
        missing = os.path.join(str(tmp_path), "missing.json")
        assert main(["noise", "--config", missing]) == EXIT_INVALID
        assert "Cannot read config" in capsys.readouterr().err

    def test_numerical_failure_exits_one(self, tmp_path):
        document = noise_document(
            kernel={
                "family": "tabulated",
                "tau": [0.0, 1.0, 2.0],
                "alpha": [[1.0, 0.0], [2.0, 0.0], [0.0, 0.0]],
            },
            grid={"t_max": 2.0, "dt": 1.0},
            ensemble={"n_traj": 2, "seed": 1},
        )
        status, directory = _run(tmp_path, document)
        assert status == EXIT_NUMERICAL
        manifest = _manifest(directory)
        assert manifest["error"].startswith("CovarianceFactorizationError")
        assert manifest["artifacts"] == []


class TestOverrides:
    def test_overrides_reach_config(self):
        args = build_parser().parse_args(
            ["unravel", "--config", "x.json", "--dt", "0.01", "--n-traj", "50"]
        )
        config = apply_overrides(RunConfig.fromDict(unravel_document()), args)
        assert config.grid.dt == 0.01
        assert config.ensemble.n_traj == 50

    def test_hash_ignores_output(self):
        first = RunConfig.fromDict(noise_document(output={"directory": "a"}))
        second = RunConfig.fromDict(noise_document(output={"directory": "b"}))
        assert config_hash(first) == config_hash(second)

    def test_hash_tracks_seed(self):
        first = RunConfig.fromDict(noise_document())
        second = RunConfig.fromDict(noise_document(ensemble={"n_traj": 3, "seed": 8}))
        assert config_hash(first) != config_hash(second)


class TestTasks:
    def test_unravel(self, tmp_path):
        status, directory = _run(tmp_path, unravel_document())
        assert status == EXIT_OK
        frame = pd.read_csv(os.path.join(directory, "rho.csv"))
        assert {"re_rho_01", "ref_re_rho_01", "stderr", "trace_distance"} <= set(
            frame.columns
        )
        ratio = max_trace_distance_ratio(frame["trace_distance"], frame["stderr"], 0.05)
        assert ratio <= 1.0
        summary = _manifest(directory)["summary"]
        assert summary["mode"] == "linear"

    def test_compat(self, tmp_path):
        status, directory = _run(tmp_path, compat_document())
        assert status == EXIT_OK
        summary = _manifest(directory)["summary"]
        assert summary["closed_form_diagonal"][0] == pytest.approx(0.549, abs=1e-3)
        assert os.path.exists(os.path.join(directory, "compat_report.json"))
        assert os.path.exists(os.path.join(directory, "past.csv"))

    def test_trajectory(self, tmp_path):
        document = {
            "task": "trajectory",
            "kernel": {"family": "ornstein_uhlenbeck", "kappa": 1.0, "gamma": 2.0},
            "model": {"ansatz": "dephasing", "omega": 1.0, "r": 0.5},
            "grid": {"t_max": 0.5, "dt": 0.01},
            "ensemble": {"seed": 1},
            "trajectory": {"n_paths": 1, "recover_noise": True},
        }
        status, directory = _run(tmp_path, document)
        assert status == EXIT_OK
        manifest = _manifest(directory)
        assert "recovered_noise_0.csv" in manifest["artifacts"]
        assert "ansatz_F.csv" in manifest["artifacts"]
        assert manifest["summary"]["max_recovery_error"] < 1e-3

    def test_norms(self, tmp_path):
        document = unravel_document(
            task="norms",
            grid={"t_max": 0.4, "dt": 0.02},
            norms={"s": 0.2, "t": 0.4, "n_pasts": 2, "n_cond": 100},
        )
        status, directory = _run(tmp_path, document)
        assert status == EXIT_OK
        artifacts = _manifest(directory)["artifacts"]
        assert artifacts == ["conditional_norms.csv", "norms.csv"]

    def test_oracle(self, tmp_path):
        document = {
            "task": "oracle",
            "model": {"ansatz": "jaynes_cummings", "omega": 1.0},
            "bath": {"modes": [{"g": [0.5, 0.0], "omega": 1.0, "cutoff": 2}]},
            "grid": {"t_max": 0.5, "dt": 0.01},
        }
        status, directory = _run(tmp_path, document)
        assert status == EXIT_OK
        assert "oracle_rho.csv" in _manifest(directory)["artifacts"]

    def test_jc_residual(self, tmp_path):
        document = {
            "task": "jc-residual",
            "kernel": {"family": "dirac", "kappa": 1.0},
            "model": {"ansatz": "jaynes_cummings", "omega": 1.0},
            "grid": {"t_max": 1.0, "dt": 0.01},
            "jc_residual": {"s": 0.5, "t": 1.0, "n_u": 4},
        }
        status, directory = _run(tmp_path, document)
        assert status == EXIT_OK
        frame = pd.read_csv(os.path.join(directory, "jc_residual.csv"))
        assert len(frame) == 4
        assert frame["abs_residual"].max() == 0
