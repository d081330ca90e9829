from dataclasses import dataclass, field

from pynmqsd.units import Count, Rate, Ratio, Time


@dataclass
class CompatInput:
    s: Time = None
    t: Time = None
    n_cond: Count = None
    # pin the last held value of the past (at s - dt); None draws it freely
    re_z_s: float = None
    check_normalization: bool = False
    # (gamma, r, t - s) panel; empty lists skip the sweep
    sweep_gamma: list[Rate] = field(default_factory=list)
    sweep_r: list[Ratio] = field(default_factory=list)
    sweep_duration: list[Time] = field(default_factory=list)
