from dataclasses import dataclass, field

from pynmqsd.inputs.kernel_input import ModeInput
from pynmqsd.units import Count


@dataclass
class BathInput:
    modes: list[ModeInput] = field(default=None)
    max_total_dim: Count = Count(4096)
