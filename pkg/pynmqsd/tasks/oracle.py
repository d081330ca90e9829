import logging

import numpy as np

from pynmqsd.assembly import build_bath, build_model, initial_state
from pynmqsd.calculations.ensemble import estimate_rho
from pynmqsd.calculations.models import build_ansatz
from pynmqsd.calculations.operators import projector, trace_distance
from pynmqsd.calculations.reference import evolve_master, exact_few_mode, kernel_of
from pynmqsd.enums import Task
from pynmqsd.file_utils import density_frame
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput

log = logging.getLogger(__name__)


def _distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([trace_distance(x, y) for x, y in zip(a, b)])


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    config = context.config
    bath = build_bath(config.bath)
    # the NMQSD side sees the bath only through its correlation function
    kernel = kernel_of(bath)
    model = build_model(config.model, kernel)
    psi0 = initial_state(config.model, model)
    grid = context.grid
    log.info(
        "Exact few-mode evolution: %d modes, total dimension %d",
        bath.n_modes,
        model.dim * bath.bath_dim,
    )
    exact = exact_few_mode(
        model, bath, grid, psi0, max_total_dim=int(config.bath.max_total_dim)
    )
    table = build_ansatz(model, grid)
    master = evolve_master(model, table, projector(psi0))

    frame = density_frame(grid.times, exact.rho)
    frame = frame.join(
        density_frame(grid.times, master.rho, prefix="master_").drop(columns="t")
    )
    frame["master_distance"] = _distances(exact.rho, master.rho)
    output = TaskOutput(Task.ORACLE)
    output.summary = {
        "n_modes": bath.n_modes,
        "total_dim": model.dim * bath.bath_dim,
        "cutoff_leakage": exact.cutoff_leakage,
        "leakage_flagged": exact.leakage_flagged,
        "max_master_distance": float(np.max(frame["master_distance"])),
    }

    ensemble = config.ensemble
    if ensemble is not None and ensemble.n_traj is not None and ensemble.n_traj >= 2:
        estimate = estimate_rho(
            model,
            int(ensemble.n_traj),
            context.seed,
            grid,
            ensemble.mode,
            psi0,
            table,
            context.workers,
            context.chunk_size,
        )
        frame = frame.join(
            density_frame(grid.times, estimate.rho_hat, prefix="unravel_").drop(
                columns="t"
            )
        )
        frame["unravel_stderr"] = estimate.stderr
        frame["unravel_distance"] = estimate.distance_to(exact)
        output.summary["max_unravel_distance"] = float(
            np.nanmax(frame["unravel_distance"])
        )
        output.summary["unravel_valid"] = estimate.valid
    output.frames["oracle_rho"] = frame
    return output
