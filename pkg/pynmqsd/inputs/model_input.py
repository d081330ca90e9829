from dataclasses import dataclass, field

from pynmqsd.enums import AnsatzType
from pynmqsd.units import Frequency, Rate, Ratio


@dataclass
class ModelInput:
    ansatz: AnsatzType = None
    omega: Frequency = None
    # dephasing coupling L = (r / kappa) sigma_z
    r: Ratio = None
    kappa: Rate = None  # defaults to kernel.kappa
    # StaticL only: row-major matrices of [re, im]
    hamiltonian: list[list[list[float]]] = field(default=None)
    lindblad: list[list[list[float]]] = field(default=None)
    # initial state as [re, im] amplitudes, normalized on load
    psi0: list[list[float]] = field(default=None)
