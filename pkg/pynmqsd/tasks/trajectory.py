import logging
import warnings

import numpy as np
import pandas as pd

from pynmqsd.calculations.dynamics import integrate_trajectory, recover_noise
from pynmqsd.calculations.kernels import sample_paths
from pynmqsd.enums import Task
from pynmqsd.exceptions import NumericalWarning, UnidentifiableNoiseError
from pynmqsd.file_utils import (
    ansatz_frames,
    trajectory_frame,
    trajectory_noise_frame,
)
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput

log = logging.getLogger(__name__)


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    settings = context.config.trajectory
    n_paths = int(settings.n_paths)
    model = context.model
    table = context.table
    output = TaskOutput(Task.RUN_TRAJECTORIES)
    output.frames.update(ansatz_frames(table))
    paths = sample_paths(model.kernel, context.grid, n_paths, context.seed)
    final_norms = []
    recovery_errors = []
    for k, path in enumerate(paths):
        trajectory = integrate_trajectory(
            model, path, settings.mode, context.psi0, table
        )
        output.frames[f"trajectory_{k}"] = trajectory_frame(trajectory)
        output.frames[f"trajectory_noise_{k}"] = trajectory_noise_frame(trajectory)
        final_norms.append(float(trajectory.norms[-1]))
        if not settings.recover_noise:
            continue
        # recovery inverts the linear flow, so it reads the driving noise
        try:
            recovered = recover_noise(
                model, trajectory, settings.recovery_method, table
            )
        except UnidentifiableNoiseError as error:
            warnings.warn(f"path {k}: {error}", NumericalWarning)
            continue
        output.frames[f"recovered_noise_{k}"] = pd.DataFrame(
            {
                "t": context.grid.times,
                "re": recovered.values.real,
                "im": recovered.values.imag,
            }
        )
        if context.grid.n_steps > 0:
            gap = recovered.values[:-1] - trajectory.driving.values[:-1]
            recovery_errors.append(float(np.max(np.abs(gap))))
    log.info("Integrated %d %s trajectories", n_paths, settings.mode.value)
    output.summary = {
        "n_paths": n_paths,
        "mode": settings.mode,
        "final_norms": final_norms,
    }
    if recovery_errors:
        output.summary["max_recovery_error"] = max(recovery_errors)
    return output
