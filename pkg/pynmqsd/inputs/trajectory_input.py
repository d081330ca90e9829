from dataclasses import dataclass

from pynmqsd.enums import RecoveryMethod, TrajectoryMode
from pynmqsd.units import Count


@dataclass
class TrajectoryInput:
    mode: TrajectoryMode = TrajectoryMode.LINEAR
    n_paths: Count = Count(1)
    recover_noise: bool = False
    recovery_method: RecoveryMethod = RecoveryMethod.STEP_INVERSION
