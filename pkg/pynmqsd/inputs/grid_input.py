from dataclasses import dataclass

from pynmqsd.units import Time


@dataclass
class GridInput:
    t0: Time = Time(0.0)
    t_max: Time = None
    dt: Time = None
