from dataclasses import dataclass, field

from pynmqsd.units import Count, Time


@dataclass
class JCResidualInput:
    s: Time = None
    t: Time = None
    n_u: Count = Count(8)
    # explicit u panel, overrides n_u
    u: list[Time] = field(default=None)
    # conditional h/j moments; 0 skips sampling
    n_cond: Count = Count(0)
    re_z_s: float = None
    im_z_s: float = 0.0
