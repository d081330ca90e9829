import pandas as pd

from pynmqsd.calculations.ensemble import norm_statistics
from pynmqsd.enums import Task
from pynmqsd.file_utils import norms_frame
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    settings = context.config.norms
    stats = norm_statistics(
        context.model,
        int(context.config.ensemble.n_traj),
        context.seed,
        context.grid,
        settings.s,
        settings.t,
        int(settings.n_pasts),
        None if settings.n_cond is None else int(settings.n_cond),
        context.psi0,
        context.table,
        context.workers,
        context.chunk_size,
    )
    conditional = pd.DataFrame(
        [
            {
                "past_index": report.past_index,
                "s": report.s,
                "t": report.t,
                "norm_sq_s": report.norm_sq_s,
                "conditional_mean": report.conditional_mean,
                "stderr": report.stderr,
                "n_cond": report.n_cond,
                "n_aborted": report.n_aborted,
            }
            for report in stats.conditional
        ]
    )
    output = TaskOutput(Task.NORM_STATS)
    output.frames["norms"] = norms_frame(stats)
    output.frames["conditional_norms"] = conditional
    output.summary = {
        "n_traj": stats.n_traj,
        "n_aborted": stats.n_aborted,
        "valid": stats.valid,
        "max_unconditional_deviation_in_stderr": stats.max_unconditional_deviation(),
        "martingale_violated": stats.martingale_violated,
    }
    return output
