"""Shared helpers for pynmqsd tests.

Standalone functions that can be imported by any test module.
For pytest fixtures, see conftest.py.
"""

import copy
import json
import os

import numpy as np

from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.inputs.run_config import RunConfig

STUDIES_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "studies"))


def load_study_document(study: str, task: str) -> dict:
    """Raw JSON document of studies/<study>/<task>.json."""
    with open(os.path.join(STUDIES_DIR, study, f"{task}.json"), encoding="utf-8") as f:
        return json.load(f)


def make_config(document: dict) -> RunConfig:
    """Fresh RunConfig from a document (the document is not mutated)."""
    return RunConfig.fromDict(copy.deepcopy(document))


def write_config(directory, document: dict, name: str = "run.json") -> str:
    path = os.path.join(str(directory), name)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f)
    return path


def noise_document(**overrides) -> dict:
    document = {
        "task": "noise",
        "kernel": {"family": "ornstein_uhlenbeck", "kappa": 1.0, "gamma": 2.0},
        "grid": {"t_max": 1.9, "dt": 0.1},
        "ensemble": {"n_traj": 3, "seed": 7},
    }
    document.update(overrides)
    return document


def unravel_document(**overrides) -> dict:
    document = {
        "task": "unravel",
        "kernel": {"family": "dirac", "kappa": 1.0},
        "model": {"ansatz": "dephasing", "omega": 1.0, "r": 0.5},
        "grid": {"t_max": 0.2, "dt": 0.02},
        "ensemble": {"n_traj": 200, "seed": 3, "workers": 1},
    }
    document.update(overrides)
    return document


def compat_document(**overrides) -> dict:
    document = {
        "task": "compat",
        "kernel": {"family": "ornstein_uhlenbeck", "kappa": 1.0, "gamma": 1.0},
        "model": {"ansatz": "dephasing", "omega": 0.0, "r": 1.0},
        "grid": {"t_max": 2.0, "dt": 0.05},
        "ensemble": {"seed": 11, "workers": 1},
        "compat": {"s": 1.0, "t": 2.0, "n_cond": 200, "re_z_s": 0.0},
    }
    document.update(overrides)
    return document


def max_trace_distance_ratio(distances, stderr, floor: float) -> float:
    """Largest distance / max(5 stderr, floor) over the nodes."""
    bound = np.maximum(5.0 * np.asarray(stderr), floor)
    return float(np.max(np.asarray(distances) / bound))


def held_grid(s: float, dt: float) -> TimeGrid:
    """Nodes 0..s - dt: the left-point values held on [0, s)."""
    return TimeGrid(0.0, dt, int(round(s / dt)) - 1)
