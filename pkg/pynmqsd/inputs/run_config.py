from dataclasses import dataclass, field

from pynmqsd.enums import Task
from pynmqsd.inputs.bath_input import BathInput
from pynmqsd.inputs.compat_input import CompatInput
from pynmqsd.inputs.ensemble_input import EnsembleInput
from pynmqsd.inputs.grid_input import GridInput
from pynmqsd.inputs.jc_residual_input import JCResidualInput
from pynmqsd.inputs.kernel_input import KernelInput
from pynmqsd.inputs.model_input import ModelInput
from pynmqsd.inputs.norms_input import NormsInput
from pynmqsd.inputs.output_input import OutputInput
from pynmqsd.inputs.trajectory_input import TrajectoryInput
from pynmqsd.serializable import SerializableToJSON


# Container for every block of a run; blocks a task does not read may stay None
@dataclass
class RunConfig(SerializableToJSON):
    task: Task = None
    kernel: KernelInput = field(default=None)
    model: ModelInput = field(default=None)
    grid: GridInput = field(default=None)
    ensemble: EnsembleInput = field(default=None)
    trajectory: TrajectoryInput = field(default=None)
    norms: NormsInput = field(default=None)
    compat: CompatInput = field(default=None)
    bath: BathInput = field(default=None)
    jc_residual: JCResidualInput = field(default=None)
    output: OutputInput = field(default_factory=OutputInput)
