from enum import Enum


class KernelFamily(Enum):
    DIRAC = ("dirac", "Dirac delta (Markov)")
    ORNSTEIN_UHLENBECK = ("ornstein_uhlenbeck", "Ornstein-Uhlenbeck")
    MODE_SUM = ("mode_sum", "Discrete mode sum")
    TABULATED = ("tabulated", "Tabulated")

    def __new__(cls, value, display_name):
        obj = object.__new__(cls)
        obj._value_ = value
        obj.display_name = display_name
        return obj


class AnsatzType(Enum):
    JAYNES_CUMMINGS = ("jaynes_cummings", "Jaynes-Cummings")
    DEPHASING = ("dephasing", "Pure dephasing")
    STATIC_L = ("static_l", "Static coupling operator")

    def __new__(cls, value, display_name):
        obj = object.__new__(cls)
        obj._value_ = value
        obj.display_name = display_name
        return obj


class TrajectoryMode(Enum):
    LINEAR = "linear"
    NORMALIZED_LINEAR = "normalized_linear"
    NONLINEAR = "nonlinear"


class EstimatorMode(Enum):
    LINEAR = "linear"
    NORMALIZED_WEIGHTED = "normalized_weighted"
    NONLINEAR = "nonlinear"


class RecoveryMethod(Enum):
    STEP_INVERSION = "step_inversion"
    CENTRAL_DIFFERENCE = "central_difference"


class Task(Enum):
    # value is the CLI subcommand
    SAMPLE_NOISE = ("noise", "Sample noise paths")
    RUN_TRAJECTORIES = ("trajectory", "Run trajectories")
    UNRAVEL = ("unravel", "Unravel the reduced state")
    NORM_STATS = ("norms", "Norm and martingale statistics")
    COMPAT_AUDIT = ("compat", "Compatibility audit")
    ORACLE = ("oracle", "Reference dynamics")
    JC_RESIDUAL_SWEEP = ("jc-residual", "Jaynes-Cummings kernel residual")

    def __new__(cls, value, display_name):
        obj = object.__new__(cls)
        obj._value_ = value
        obj.display_name = display_name
        return obj
