import numpy as np

from pynmqsd.calculations.compat import jc_conditional_moments, jc_residual_panel
from pynmqsd.calculations.kernels import pinned_past
from pynmqsd.enums import Task
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    settings = context.config.jc_residual
    model = context.model
    table = context.table
    panel = jc_residual_panel(
        model.omega,
        table,
        context.kernel,
        settings.s,
        settings.t,
        u_values=settings.u,
        n_u=int(settings.n_u),
    )
    output = TaskOutput(Task.JC_RESIDUAL_SWEEP)
    output.frames["jc_residual"] = panel
    output.summary = {
        "n_u": len(panel),
        "max_abs_residual": float(np.max(panel["abs_residual"])),
    }
    if "abs_error" in panel:
        output.summary["max_oracle_error"] = float(np.max(panel["abs_error"]))

    if settings.n_cond:
        grid = context.grid
        past_grid = grid.prefix(grid.index_of(settings.s) - 1)
        re_z_s = 0.0 if settings.re_z_s is None else settings.re_z_s
        endpoint = complex(re_z_s, settings.im_z_s or 0.0)
        past = pinned_past(context.kernel, past_grid, endpoint, context.seed)
        moments = jc_conditional_moments(
            model.omega,
            table,
            past,
            settings.s,
            settings.t,
            int(settings.n_cond),
            context.seed,
            context.kernel,
            context.workers,
            context.chunk_size,
        )
        output.summary.update(
            {
                "mean_h": moments.mean_h,
                "mean_j": moments.mean_j,
                "stderr_h": moments.stderr_h,
                "stderr_j": moments.stderr_j,
                "n_cond": moments.n,
                "moments_consistent": moments.consistent(5.0),
            }
        )
    return output
