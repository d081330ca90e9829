from dataclasses import dataclass, field

from pynmqsd.enums import KernelFamily
from pynmqsd.units import Frequency, Rate, Time


@dataclass
class ModeInput:
    # complex coupling as [re, im]
    g: list[float] = None
    omega: Frequency = None
    # Fock space dimension, only read by the exact few-mode oracle
    cutoff: int = 2


@dataclass
class KernelInput:
    family: KernelFamily = None
    # Dirac strength, or OU rate scale (alpha(0) = kappa * gamma / 2)
    kappa: Rate = None
    # OU inverse correlation time
    gamma: Rate = None
    modes: list[ModeInput] = field(default=None)
    # tabulated alpha(tau) on tau >= 0, values as [re, im]
    tau: list[Time] = field(default=None)
    alpha: list[list[float]] = field(default=None)
