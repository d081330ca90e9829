from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pynmqsd.domain.time_grid import NoisePath


@dataclass(frozen=True)
class CompatReport:
    """
    Conditional mean of (A_s^t)^dagger A_s^t over continuations of one past.

    `reference` is the identity. For OU dephasing `closed_form` carries the
    printed expression averaged over the conditional law of Re z_s, with
    `closed_form_residual` measured against it, and `closed_form_at_mean` the
    expression at the conditional mean `re_z_s`.
    """

    model: dict
    s: float
    t: float
    past: NoisePath = field(repr=False)
    n_cond: int
    estimate: np.ndarray
    reference: np.ndarray
    residual: float
    stderr: float
    n_aborted: int = 0
    valid: bool = True
    closed_form: Optional[np.ndarray] = None
    closed_form_residual: Optional[float] = None
    closed_form_at_mean: Optional[np.ndarray] = None
    re_z_s: Optional[float] = None
    var_re_z_s: Optional[float] = None
    analytic: bool = False

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.estimate, self.estimate.conj().T, atol=1e-12))

    @property
    def min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.estimate + self.estimate.conj().T)
        return float(np.linalg.eigvalsh(hermitian)[0])

    def compatible(self, k: float = 5.0) -> bool:
        return self.residual < k * self.stderr

    def summary(self) -> dict:
        summary = {
            "s": self.s,
            "t": self.t,
            "n_cond": self.n_cond,
            "residual": self.residual,
            "stderr": self.stderr,
            "n_aborted": self.n_aborted,
            "valid": self.valid,
            "analytic_propagator": self.analytic,
        }
        if self.closed_form is not None:
            summary["closed_form_diagonal"] = np.real(
                np.diag(self.closed_form_at_mean)
            )
            summary["closed_form_reference_diagonal"] = np.real(
                np.diag(self.closed_form)
            )
            summary["closed_form_residual"] = self.closed_form_residual
            summary["re_z_s"] = self.re_z_s
            summary["var_re_z_s"] = self.var_re_z_s
        return summary


@dataclass(frozen=True)
class JCFunctionalSample:
    """h = (A^dagger A)_00 and j = (A^dagger A)_01 for one continuation."""

    h: float
    j: complex

    def __post_init__(self):
        if self.h < 0:
            raise ValueError(f"h must be non-negative, got {self.h}")


@dataclass(frozen=True)
class JCMoments:
    mean_h: float
    mean_j: complex
    stderr_h: float
    stderr_j: float
    n: int
    n_aborted: int = 0

    def consistent(self, k: float = 5.0) -> bool:
        """E[h] = 1 and E[j] = 0 within k standard errors."""
        return (
            abs(self.mean_h - 1.0) <= k * self.stderr_h
            and abs(self.mean_j) <= k * self.stderr_j
        )


@dataclass(frozen=True)
class NormalizationCheck:
    """Unconditional mean of (A_0^t)^dagger A_0^t against the identity."""

    t: float
    estimate: np.ndarray
    residual: float
    stderr: float
    n: int
    n_aborted: int = 0
    valid: bool = True
