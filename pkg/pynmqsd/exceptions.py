class FieldError:
    """A single field-level validation failure."""

    def __init__(self, block: str, field_name: str, value, constraint: str):
        self.block = block
        self.field_name = field_name
        self.value = value
        self.constraint = constraint

    @property
    def path(self) -> str:
        return f"{self.block}.{self.field_name}"

    def __str__(self):
        return f"{self.path} = {self.value!r} -- expected: {self.constraint}"


class ValidationWarning:
    """A non-fatal validation concern."""

    def __init__(self, block: str, field_name: str, value, message: str):
        self.block = block
        self.field_name = field_name
        self.value = value
        self.message = message

    def __str__(self):
        return (
            f"WARNING: {self.block}.{self.field_name} = {self.value!r} "
            f"-- {self.message}"
        )


class ValidationError(Exception):
    """Raised when a run configuration fails validation."""

    def __init__(self, errors: list[FieldError]):
        self.errors = errors
        msg = f"{len(errors)} validation error(s):\n"
        msg += "\n".join(f"  - {e}" for e in errors)
        super().__init__(msg)


class NumericalError(Exception):
    """Base class for failures inside a numerical routine."""


class CovarianceFactorizationError(NumericalError):
    def __init__(self, size: int, max_jitter: float):
        self.size = size
        self.max_jitter = max_jitter
        super().__init__(
            f"covariance of size {size} is not positive semidefinite "
            f"(Cholesky failed up to relative jitter {max_jitter:g})"
        )


class KernelRangeError(NumericalError):
    def __init__(self, tau: float, tau_max: float):
        self.tau = tau
        self.tau_max = tau_max
        super().__init__(
            f"tabulated kernel covers |tau| <= {tau_max:g}, requested {tau:g}"
        )


class TrajectoryOverflowError(NumericalError):
    """State norm exceeded the overflow guard."""

    def __init__(self, time: float, norm: float):
        self.time = time
        self.norm = norm
        super().__init__(f"trajectory norm {norm:.3e} overflowed at t = {time:g}")


class UnidentifiableNoiseError(NumericalError):
    def __init__(self, step: int, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"noise not identifiable at step {step}: {reason}")


class HilbertSpaceTooLargeError(NumericalError):
    def __init__(self, dimension: int, bound: int):
        self.dimension = dimension
        self.bound = bound
        super().__init__(
            f"total Hilbert space dimension {dimension} exceeds bound {bound}"
        )


class NumericalWarning(UserWarning):
    """Aborted trajectories, cutoff leakage and similar flags on a finished run."""
