from dataclasses import dataclass

from pynmqsd.units import Count, Time


@dataclass
class NormsInput:
    s: Time = None
    t: Time = None
    n_pasts: Count = Count(4)
    # continuations per past
    n_cond: Count = None
