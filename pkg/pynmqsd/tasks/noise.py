import logging

from pynmqsd.calculations.kernels import moment_errors, sample_paths
from pynmqsd.enums import Task
from pynmqsd.file_utils import noise_frame, single_noise_frame
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput

log = logging.getLogger(__name__)


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    n = int(context.config.ensemble.n_traj)
    log.info("Sampling %d noise paths on %d nodes", n, context.grid.n_nodes)
    paths = sample_paths(context.kernel, context.grid, n, context.seed)
    output = TaskOutput(Task.SAMPLE_NOISE)
    if context.config.output.long_format:
        output.frames["noise"] = noise_frame(paths)
    else:
        for k, path in enumerate(paths):
            output.frames[f"noise_{k}"] = single_noise_frame(path)
    output.summary = {
        "n_paths": n,
        "n_nodes": context.grid.n_nodes,
        "kernel": context.kernel.describe(),
    }
    if n >= 2:
        cov_error, pseudo_error = moment_errors(context.kernel, context.grid, paths)
        output.summary["covariance_error"] = cov_error
        output.summary["pseudo_covariance_error"] = pseudo_error
    return output
