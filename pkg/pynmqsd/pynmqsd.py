from pynmqsd.enums import Task
from pynmqsd.inputs.run_config import RunConfig
from pynmqsd.tasks.compat import GenerateTaskOutput as GenerateCompatOutput
from pynmqsd.tasks.context import build_context
from pynmqsd.tasks.jc_residual import GenerateTaskOutput as GenerateJCResidualOutput
from pynmqsd.tasks.noise import GenerateTaskOutput as GenerateNoiseOutput
from pynmqsd.tasks.norms import GenerateTaskOutput as GenerateNormsOutput
from pynmqsd.tasks.oracle import GenerateTaskOutput as GenerateOracleOutput
from pynmqsd.tasks.task_output import TaskOutput
from pynmqsd.tasks.trajectory import GenerateTaskOutput as GenerateTrajectoryOutput
from pynmqsd.tasks.unravel import GenerateTaskOutput as GenerateUnravelOutput
from pynmqsd.validation import validate_config


def RunTask(config: RunConfig) -> TaskOutput:
    """
    Validate `config` and run its task.
    :param config: The full run configuration.
    :return: Frames, documents and summary of the task, ready to be written.
    """
    validate_config(config)
    context = build_context(config)
    if config.task == Task.SAMPLE_NOISE:
        return GenerateNoiseOutput(context)
    elif config.task == Task.RUN_TRAJECTORIES:
        return GenerateTrajectoryOutput(context)
    elif config.task == Task.UNRAVEL:
        return GenerateUnravelOutput(context)
    elif config.task == Task.NORM_STATS:
        return GenerateNormsOutput(context)
    elif config.task == Task.COMPAT_AUDIT:
        return GenerateCompatOutput(context)
    elif config.task == Task.ORACLE:
        return GenerateOracleOutput(context)
    elif config.task == Task.JC_RESIDUAL_SWEEP:
        return GenerateJCResidualOutput(context)
    raise ValueError("Invalid task")
