import hashlib
import json
import os

import numpy as np
import pandas as pd

from pynmqsd.domain.estimates import NormStats
from pynmqsd.domain.system_model import AnsatzTable
from pynmqsd.domain.time_grid import NoisePath
from pynmqsd.domain.trajectory import Trajectory
from pynmqsd.enums import Task
from pynmqsd.inputs.output_input import OutputInput
from pynmqsd.inputs.run_config import RunConfig
from pynmqsd.serializable import NmqsdEncoder

FLOAT_FORMAT = "%.17g"


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, cls=NmqsdEncoder)


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as file:
        file.write(dumps(obj))
        file.write("\n")


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as file:
        return RunConfig.fromDict(json.load(file))


def load_study_config(study_folder: str, task: Task) -> RunConfig:
    """Config of <study_folder>/<task>.json writing to <study_folder>/output/<task>."""
    config = load_config(os.path.join(study_folder, f"{task.value}.json"))
    config.task = task
    if config.output is None:
        config.output = OutputInput()
    config.output.directory = os.path.join(study_folder, "output", task.value)
    return config


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the sorted-key JSON of the config, excluding output paths."""
    document = config.toDict()
    document.pop("output", None)
    canonical = json.dumps(
        document, sort_keys=True, separators=(",", ":"), cls=NmqsdEncoder
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


def write_frame(path: str, frame: pd.DataFrame) -> None:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def noise_frame(paths: list[NoisePath]) -> pd.DataFrame:
    """Long layout t, path_id, re, im."""
    frames = [
        pd.DataFrame(
            {
                "t": path.grid.times,
                "path_id": path_id,
                "re": path.values.real,
                "im": path.values.imag,
            }
        )
        for path_id, path in enumerate(paths)
    ]
    return pd.concat(frames, ignore_index=True)


def single_noise_frame(path: NoisePath) -> pd.DataFrame:
    return pd.DataFrame(
        {"t": path.grid.times, "re": path.values.real, "im": path.values.imag}
    )


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    columns = {"t": trajectory.grid.times, "norm": trajectory.norms}
    for k in range(trajectory.dim):
        columns[f"re_{k}"] = trajectory.states[:, k].real
        columns[f"im_{k}"] = trajectory.states[:, k].imag
    if trajectory.weights is not None:
        columns["weight"] = trajectory.weights
    return pd.DataFrame(columns)


def trajectory_noise_frame(trajectory: Trajectory) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": trajectory.grid.times,
            "re_driving": trajectory.driving.values.real,
            "im_driving": trajectory.driving.values.imag,
            "re_raw": trajectory.raw_noise.values.real,
            "im_raw": trajectory.raw_noise.values.imag,
        }
    )


def ansatz_frames(table: AnsatzTable) -> dict[str, pd.DataFrame]:
    times = table.grid.times
    frames = {
        "ansatz_F": pd.DataFrame(
            {"t": times, "re_F": table.F.real, "im_F": table.F.imag}
        )
    }
    if table.f is not None:
        rows, cols = np.tril_indices(table.grid.n_nodes)
        values = table.f[rows, cols]
        frames["ansatz_f"] = pd.DataFrame(
            {
                "t": times[rows],
                "s": times[cols],
                "re_f": values.real,
                "im_f": values.imag,
            }
        )
    return frames


def norms_frame(stats: NormStats) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": stats.grid.times,
            "mean_sq_norm": stats.mean_sq_norm,
            "stderr": stats.stderr,
        }
    )


def density_frame(grid_times, rho: np.ndarray, prefix: str = "") -> pd.DataFrame:
    """Wide layout t, re_rho_ij, im_rho_ij for every entry."""
    columns = {"t": grid_times}
    dim = rho.shape[1]
    for i in range(dim):
        for j in range(dim):
            columns[f"{prefix}re_rho_{i}{j}"] = rho[:, i, j].real
            columns[f"{prefix}im_rho_{i}{j}"] = rho[:, i, j].imag
    return pd.DataFrame(columns)
