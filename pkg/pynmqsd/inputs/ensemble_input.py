from dataclasses import dataclass

from pynmqsd.enums import EstimatorMode
from pynmqsd.units import Count


@dataclass
class EnsembleInput:
    n_traj: Count = None
    seed: int = None
    mode: EstimatorMode = EstimatorMode.LINEAR
    # trajectories per reduction chunk; fixed so results do not depend on workers
    chunk_size: Count = Count(512)
    workers: Count = None
