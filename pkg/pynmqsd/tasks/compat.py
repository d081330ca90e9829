import logging

import numpy as np

from pynmqsd.calculations.compat import (
    audit_compatibility,
    check_normalization,
    compat_sweep,
)
from pynmqsd.calculations.kernels import (
    PAST_STREAM,
    build_covariance,
    draw_values,
    factorize,
    pinned_past,
)
from pynmqsd.domain.time_grid import NoisePath
from pynmqsd.enums import Task
from pynmqsd.file_utils import single_noise_frame
from pynmqsd.tasks.context import TaskContext
from pynmqsd.tasks.task_output import TaskOutput

log = logging.getLogger(__name__)


def _past(context: TaskContext, s: float) -> NoisePath:
    """Values held on [t0, s); `re_z_s` pins the last one, at s - dt."""
    past_grid = context.grid.prefix(context.grid.index_of(s) - 1)
    settings = context.config.compat
    if settings.re_z_s is not None:
        return pinned_past(
            context.kernel, past_grid, complex(settings.re_z_s), context.seed
        )
    factor = factorize(build_covariance(context.kernel, past_grid))
    values = draw_values(factor, [0], context.seed, PAST_STREAM)[0]
    return NoisePath(past_grid, values)


def GenerateTaskOutput(context: TaskContext) -> TaskOutput:
    settings = context.config.compat
    n_cond = int(settings.n_cond)
    past = _past(context, settings.s)
    report = audit_compatibility(
        context.model,
        past,
        settings.s,
        settings.t,
        n_cond,
        context.seed,
        context.table,
        workers=context.workers,
        chunk_size=context.chunk_size,
    )
    output = TaskOutput(Task.COMPAT_AUDIT)
    output.frames["past"] = single_noise_frame(past)
    document = report.summary()
    document["model"] = report.model
    document["estimate"] = report.estimate
    output.documents["compat_report"] = document
    output.summary = dict(report.summary())

    if settings.check_normalization:
        check = check_normalization(
            context.model,
            n_cond,
            context.seed,
            settings.t,
            context.grid,
            context.table,
            context.workers,
            context.chunk_size,
        )
        output.summary["normalization_residual"] = check.residual
        output.summary["normalization_stderr"] = check.stderr
        output.summary["normalization_valid"] = check.valid

    if settings.sweep_gamma:
        log.info(
            "Compatibility sweep over %d x %d x %d points",
            len(settings.sweep_gamma),
            len(settings.sweep_r),
            len(settings.sweep_duration),
        )
        re_z_s = 0.0 if settings.re_z_s is None else float(settings.re_z_s)
        sweep = compat_sweep(
            context.kernel.kappa,
            settings.sweep_gamma,
            settings.sweep_r,
            settings.sweep_duration,
            settings.s,
            context.grid.dt,
            n_cond,
            context.seed,
            omega=context.model.omega or 0.0,
            re_z_s=re_z_s,
            workers=context.workers,
        )
        output.frames["compat_sweep"] = sweep
        output.summary["sweep_max_closed_form_residual"] = float(
            np.max(sweep["closed_form_residual"])
        )
    return output
