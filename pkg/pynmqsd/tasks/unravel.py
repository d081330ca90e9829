import logging

import numpy as np

from pynmqsd.calculations.ensemble import estimate_rho
from pynmqsd.calculations.operators import projector
from pynmqsd.calculations.reference import evolve_master
from pynmqsd.enums import Task
from pynmqsd.file_utils import density_frame
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput

log = logging.getLogger(__name__)


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    ensemble = context.config.ensemble
    estimate = estimate_rho(
        context.model,
        int(ensemble.n_traj),
        context.seed,
        context.grid,
        ensemble.mode,
        context.psi0,
        context.table,
        context.workers,
        context.chunk_size,
    )
    reference = evolve_master(context.model, context.table, projector(context.psi0))
    distances = estimate.distance_to(reference)

    frame = density_frame(context.grid.times, estimate.rho_hat)
    frame["stderr"] = estimate.stderr
    reference_frame = density_frame(context.grid.times, reference.rho, prefix="ref_")
    frame = frame.join(reference_frame.drop(columns="t"))
    frame["trace_distance"] = distances

    output = TaskOutput(Task.UNRAVEL)
    output.frames["rho"] = frame
    output.summary = {
        "mode": ensemble.mode,
        "n_traj": estimate.n_traj,
        "n_aborted": estimate.n_aborted,
        "valid": estimate.valid,
        "max_trace_distance": float(np.nanmax(distances)),
        "max_stderr": float(np.nanmax(estimate.stderr)),
        "final_trace": float(estimate.traces()[-1]),
    }
    log.info(
        "Unraveling vs master equation: max trace distance %.3g",
        output.summary["max_trace_distance"],
    )
    return output
