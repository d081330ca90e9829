"""
Run configuration validation for pynmqsd.

Layered validation:
  1. Required blocks and fields for the chosen task
  2. Field-level: range checks per individual field
  3. Per-family / per-ansatz checks of the kernel, model and bath blocks
  4. Cross-field: grid consistency, time ordering, dimensions

Usage:
    from pynmqsd.validation import validate_config
    validate_config(config)  # raises ValidationError or emits warnings
"""

import warnings

import numpy as np

from pynmqsd.enums import AnsatzType, KernelFamily, Task
from pynmqsd.exceptions import FieldError, ValidationError, ValidationWarning
from pynmqsd.inputs.run_config import RunConfig


class ValidationResult:
    """Accumulates errors and warnings during validation."""

    def __init__(self):
        self.errors: list[FieldError] = []
        self.warnings: list[ValidationWarning] = []

    def error(self, block, field, value, constraint):
        self.errors.append(FieldError(block, field, value, constraint))

    def warn(self, block, field, value, message):
        self.warnings.append(ValidationWarning(block, field, value, message))

    def raise_if_errors(self):
        if self.errors:
            raise ValidationError(self.errors)
        for w in self.warnings:
            warnings.warn(str(w), stacklevel=3)


# ---------------------------------------------------------------------------
# Required blocks and fields per task
# ---------------------------------------------------------------------------

_REQUIRED_BLOCKS = {
    Task.SAMPLE_NOISE: ["kernel", "grid", "ensemble"],
    Task.RUN_TRAJECTORIES: ["kernel", "model", "grid", "ensemble", "trajectory"],
    Task.UNRAVEL: ["kernel", "model", "grid", "ensemble"],
    Task.NORM_STATS: ["kernel", "model", "grid", "ensemble", "norms"],
    Task.COMPAT_AUDIT: ["kernel", "model", "grid", "ensemble", "compat"],
    Task.ORACLE: ["model", "bath", "grid"],
    Task.JC_RESIDUAL_SWEEP: ["kernel", "model", "grid", "jc_residual"],
}

_GRID_FIELDS = ["t_max", "dt"]

_REQUIRED_FIELDS = {
    Task.SAMPLE_NOISE: {"grid": _GRID_FIELDS, "ensemble": ["n_traj", "seed"]},
    Task.RUN_TRAJECTORIES: {"grid": _GRID_FIELDS, "ensemble": ["seed"]},
    Task.UNRAVEL: {"grid": _GRID_FIELDS, "ensemble": ["n_traj", "seed"]},
    Task.NORM_STATS: {
        "grid": _GRID_FIELDS,
        "ensemble": ["n_traj", "seed"],
        "norms": ["s", "t"],
    },
    Task.COMPAT_AUDIT: {
        "grid": _GRID_FIELDS,
        "ensemble": ["seed"],
        "compat": ["s", "t", "n_cond"],
    },
    Task.ORACLE: {"grid": _GRID_FIELDS, "bath": ["modes"]},
    Task.JC_RESIDUAL_SWEEP: {"grid": _GRID_FIELDS, "jc_residual": ["s", "t"]},
}

# ---------------------------------------------------------------------------
# Field-level range rules (data-driven table)
# (block, field_name, check_fn, constraint_description, is_error)
# ---------------------------------------------------------------------------

FIELD_RULES = [
    # --- Grid ---
    ("grid", "dt", lambda v: v > 0, "> 0", True),
    ("grid", "t_max", lambda v: v > 0, "> 0", True),
    ("grid", "t0", lambda v: v >= 0, ">= 0", True),
    # --- Kernel ---
    ("kernel", "kappa", lambda v: v > 0, "> 0", True),
    ("kernel", "gamma", lambda v: v > 0, "> 0", True),
    # --- Model ---
    ("model", "kappa", lambda v: v > 0, "> 0", True),
    ("model", "r", lambda v: v >= 0, ">= 0", True),
    # --- Ensemble ---
    ("ensemble", "n_traj", lambda v: v >= 1, ">= 1", True),
    ("ensemble", "seed", lambda v: v >= 0, ">= 0", True),
    ("ensemble", "chunk_size", lambda v: v >= 1, ">= 1", True),
    ("ensemble", "workers", lambda v: v >= 1, ">= 1", True),
    # --- Trajectory ---
    ("trajectory", "n_paths", lambda v: v >= 1, ">= 1", True),
    # --- Norms ---
    ("norms", "n_pasts", lambda v: v >= 1, ">= 1", True),
    ("norms", "n_cond", lambda v: v >= 2, ">= 2", True),
    ("norms", "s", lambda v: v > 0, "> 0", True),
    # --- Compat ---
    ("compat", "n_cond", lambda v: v >= 2, ">= 2", True),
    ("compat", "s", lambda v: v > 0, "> 0", True),
    # --- Bath ---
    ("bath", "max_total_dim", lambda v: v >= 2, ">= 2", True),
    # --- JC residual ---
    ("jc_residual", "s", lambda v: v > 0, "> 0", True),
    ("jc_residual", "n_u", lambda v: v >= 1, ">= 1", True),
    ("jc_residual", "n_cond", lambda v: v == 0 or v >= 2, "0 or >= 2", True),
    # --- Warnings (unusual but possible) ---
    (
        "ensemble",
        "n_traj",
        lambda v: v >= 100,
        "fewer than 100 trajectories give a very noisy estimate",
        False,
    ),
]

# tasks whose ensemble feeds an estimator rather than a handful of samples
_ESTIMATOR_TASKS = {Task.UNRAVEL, Task.NORM_STATS}


# ---------------------------------------------------------------------------
# Main entry point
# ---------------------------------------------------------------------------


def validate_config(config: RunConfig) -> None:
    """
    Validate a run configuration before any numerical work.

    Raises ValidationError if any hard errors found.
    Emits warnings.warn() for soft concerns.
    """
    result = ValidationResult()

    task = _get_task(config, result)
    if task is None:
        result.raise_if_errors()
        return

    _validate_required_blocks(config, task, result)
    _validate_required_fields(config, task, result)
    _validate_field_rules(config, task, result)
    _validate_kernel(config, result)
    _validate_model(config, result)
    _validate_bath(config, result)
    _validate_cross_field(config, task, result)

    result.raise_if_errors()


# ---------------------------------------------------------------------------
# Tier 0: Extract the task (needed for everything else)
# ---------------------------------------------------------------------------


def _get_task(config: RunConfig, result: ValidationResult):
    if config.task is None:
        result.error("config", "task", None, "required (cannot be None)")
        return None
    return config.task


# ---------------------------------------------------------------------------
# Tier 1a: Required blocks
# ---------------------------------------------------------------------------


def _validate_required_blocks(config: RunConfig, task: Task, result: ValidationResult):
    for block in _REQUIRED_BLOCKS[task]:
        if getattr(config, block, None) is None:
            result.error("config", block, None, f"required for task {task.value}")
    if (
        task == Task.JC_RESIDUAL_SWEEP
        and config.jc_residual is not None
        and (config.jc_residual.n_cond or 0) > 0
        and (config.ensemble is None or config.ensemble.seed is None)
    ):
        result.error("ensemble", "seed", None, "required when jc_residual.n_cond > 0")
    if (
        task == Task.ORACLE
        and config.ensemble is not None
        and config.ensemble.n_traj is not None
        and config.ensemble.seed is None
    ):
        result.error("ensemble", "seed", None, "required with ensemble.n_traj")


# ---------------------------------------------------------------------------
# Tier 1b: Required fields within each block
# ---------------------------------------------------------------------------


def _validate_required_fields(
    config: RunConfig, task: Task, result: ValidationResult
):
    required = {block: list(names) for block, names in _REQUIRED_FIELDS[task].items()}
    if config.kernel is not None:
        required.setdefault("kernel", []).append("family")
    if config.model is not None:
        required.setdefault("model", []).append("ansatz")
    for block, field_names in required.items():
        obj = getattr(config, block, None)
        if obj is None:
            continue  # already caught by _validate_required_blocks
        for field_name in field_names:
            if getattr(obj, field_name, None) is None:
                result.error(block, field_name, None, "required (cannot be None)")


# ---------------------------------------------------------------------------
# Tier 2: Field-level range checks
# ---------------------------------------------------------------------------


def _validate_field_rules(config: RunConfig, task: Task, result: ValidationResult):
    for block, field_name, check_fn, constraint, is_error in FIELD_RULES:
        obj = getattr(config, block, None)
        if obj is None:
            continue
        value = getattr(obj, field_name, None)
        if value is None:
            continue
        if not is_error and block == "ensemble" and task not in _ESTIMATOR_TASKS:
            continue
        try:
            passed = check_fn(value)
        except (TypeError, ValueError):
            passed = False
        if not passed:
            if is_error:
                result.error(block, field_name, value, constraint)
            else:
                result.warn(block, field_name, value, constraint)
    if (
        task in _ESTIMATOR_TASKS
        and config.ensemble is not None
        and config.ensemble.n_traj is not None
        and config.ensemble.n_traj == 1
    ):
        result.error("ensemble", "n_traj", 1, ">= 2 for an estimator")


# ---------------------------------------------------------------------------
# Tier 2b: Kernel families
# ---------------------------------------------------------------------------


def _is_pair(value) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    )


def _validate_modes(block: str, modes, result: ValidationResult, need_cutoff=False):
    if not modes:
        result.error(block, "modes", modes, "at least one mode")
        return
    for i, mode in enumerate(modes):
        prefix = f"{block}.modes[{i}]"
        if not _is_pair(mode.g):
            result.error(prefix, "g", mode.g, "[re, im] pair")
        if mode.omega is None:
            result.error(prefix, "omega", None, "required (cannot be None)")
        if need_cutoff and (mode.cutoff is None or mode.cutoff < 2):
            result.error(prefix, "cutoff", mode.cutoff, ">= 2")


def _validate_kernel(config: RunConfig, result: ValidationResult):
    kernel = config.kernel
    if kernel is None or kernel.family is None:
        return
    family = kernel.family
    if family in (KernelFamily.DIRAC, KernelFamily.ORNSTEIN_UHLENBECK):
        if kernel.kappa is None:
            result.error("kernel", "kappa", None, f"required for {family.value}")
    if family == KernelFamily.ORNSTEIN_UHLENBECK and kernel.gamma is None:
        result.error("kernel", "gamma", None, "required for ornstein_uhlenbeck")
    if family == KernelFamily.MODE_SUM:
        _validate_modes("kernel", kernel.modes, result)
    if family == KernelFamily.TABULATED:
        _validate_tabulated(kernel, result)


def _validate_tabulated(kernel, result: ValidationResult):
    tau, alpha = kernel.tau, kernel.alpha
    if tau is None or alpha is None:
        result.error("kernel", "tau/alpha", None, "both required for tabulated")
        return
    if len(tau) != len(alpha):
        result.error(
            "kernel", "alpha", f"{len(alpha)} values", f"{len(tau)} values (as tau)"
        )
        return
    if len(tau) < 2:
        result.error("kernel", "tau", tau, "at least two points")
        return
    if tau[0] != 0:
        result.error("kernel", "tau", tau[0], "first point at tau = 0")
    if np.any(np.diff(tau) <= 0):
        result.error("kernel", "tau", tau, "strictly increasing")
    if not all(_is_pair(a) for a in alpha):
        result.error("kernel", "alpha", alpha, "list of [re, im] pairs")
    elif abs(alpha[0][1]) > 1e-12 * max(1.0, abs(alpha[0][0])):
        result.error("kernel", "alpha", alpha[0], "real alpha(0)")


# ---------------------------------------------------------------------------
# Tier 2c: Model and bath
# ---------------------------------------------------------------------------


def _matrix_shape(block: str, name: str, rows, result: ValidationResult):
    if not rows or not all(isinstance(r, (list, tuple)) for r in rows):
        result.error(block, name, rows, "row-major matrix of [re, im] pairs")
        return None
    n = len(rows)
    if any(len(r) != n for r in rows) or not all(_is_pair(v) for r in rows for v in r):
        result.error(block, name, f"{n} rows", "square matrix of [re, im] pairs")
        return None
    return n


def _validate_model(config: RunConfig, result: ValidationResult):
    model = config.model
    if model is None or model.ansatz is None:
        return
    dim = 2
    if model.ansatz in (AnsatzType.JAYNES_CUMMINGS, AnsatzType.DEPHASING):
        if model.omega is None:
            result.error("model", "omega", None, f"required for {model.ansatz.value}")
    if model.ansatz == AnsatzType.DEPHASING:
        if model.r is None:
            result.error("model", "r", None, "required for dephasing")
        # the oracle builds its own mode-sum kernel, which has no kappa
        kernel_kappa = None
        if config.kernel is not None and config.task != Task.ORACLE:
            kernel_kappa = config.kernel.kappa
        if model.kappa is None and kernel_kappa is None:
            result.error("model", "kappa", None, "required when kernel.kappa is unset")
    if model.ansatz == AnsatzType.STATIC_L:
        n_h = _matrix_shape("model", "hamiltonian", model.hamiltonian, result)
        n_l = _matrix_shape("model", "lindblad", model.lindblad, result)
        if n_h is not None and n_l is not None:
            if n_h != n_l:
                result.error("model", "lindblad", f"{n_l}x{n_l}", f"{n_h}x{n_h} (as H)")
            h = np.array([[complex(*v) for v in row] for row in model.hamiltonian])
            if not np.allclose(h, h.conj().T, atol=1e-12):
                result.error("model", "hamiltonian", "non-Hermitian", "Hermitian")
            dim = n_h
    if model.psi0 is not None:
        if not all(_is_pair(v) for v in model.psi0):
            result.error("model", "psi0", model.psi0, "list of [re, im] amplitudes")
        elif len(model.psi0) != dim:
            result.error("model", "psi0", f"{len(model.psi0)} amplitudes", f"{dim}")
        elif sum(re * re + im * im for re, im in model.psi0) == 0:
            result.error("model", "psi0", model.psi0, "non-zero vector")
    if (
        config.task == Task.JC_RESIDUAL_SWEEP
        and model.ansatz != AnsatzType.JAYNES_CUMMINGS
    ):
        result.error(
            "model", "ansatz", model.ansatz.value, "jaynes_cummings for jc-residual"
        )


def _validate_bath(config: RunConfig, result: ValidationResult):
    bath = config.bath
    if bath is None or bath.modes is None:
        return
    _validate_modes("bath", bath.modes, result, need_cutoff=True)
    cutoffs = [m.cutoff for m in bath.modes if m.cutoff is not None]
    if len(cutoffs) != len(bath.modes):
        return
    dim = 2
    if config.model is not None and config.model.hamiltonian is not None:
        dim = len(config.model.hamiltonian)
    total = dim * int(np.prod(cutoffs))
    bound = bath.max_total_dim if bath.max_total_dim is not None else 4096
    if total > bound:
        result.error("bath", "modes", f"total dimension {total}", f"<= {bound}")


# ---------------------------------------------------------------------------
# Tier 3: Cross-field validation
# ---------------------------------------------------------------------------


def _on_grid(value, t0, dt) -> bool:
    steps = (value - t0) / dt
    return abs(steps - round(steps)) <= 1e-6


def _check_times(block: str, s, t, grid, result: ValidationResult):
    if s is None or t is None:
        return
    if not s < t:
        result.error(block, "t", t, f"> s ({s})")
    if grid is None or grid.t_max is None or grid.dt is None or grid.dt <= 0:
        return
    t0 = grid.t0 or 0.0
    if t > grid.t_max + 1e-9 * grid.dt:
        result.error(block, "t", t, f"<= grid.t_max ({grid.t_max})")
    for name, value in (("s", s), ("t", t)):
        if not _on_grid(value, t0, grid.dt):
            result.error(
                block, name, value, f"a grid node (multiple of dt = {grid.dt})"
            )


def _validate_cross_field(config: RunConfig, task: Task, result: ValidationResult):
    grid = config.grid
    if grid is not None and grid.dt is not None and grid.t_max is not None:
        t0 = grid.t0 or 0.0
        if grid.dt > 0 and grid.t_max - t0 < grid.dt * (1 - 1e-9):
            result.error("grid", "t_max", grid.t_max, f">= t0 + dt ({t0 + grid.dt})")
        elif grid.dt > 0 and not _on_grid(grid.t_max, t0, grid.dt):
            result.error(
                "grid", "t_max", grid.t_max, f"a whole number of steps dt = {grid.dt}"
            )
        kernel = config.kernel
        if (
            kernel is not None
            and kernel.family == KernelFamily.ORNSTEIN_UHLENBECK
            and kernel.gamma is not None
            and kernel.gamma > 0
            and grid.dt > 0.1 / kernel.gamma
        ):
            result.warn(
                "grid",
                "dt",
                grid.dt,
                f"coarse against the correlation time 1/gamma = {1 / kernel.gamma:.4g}",
            )
        if (
            kernel is not None
            and kernel.family == KernelFamily.TABULATED
            and kernel.tau
            and grid.t_max - t0 > kernel.tau[-1]
        ):
            result.error(
                "kernel", "tau", kernel.tau[-1], f">= grid span ({grid.t_max - t0})"
            )

    if task == Task.NORM_STATS and config.norms is not None:
        _check_times("norms", config.norms.s, config.norms.t, grid, result)
        t0 = (grid.t0 or 0.0) if grid is not None else 0.0
        if config.norms.s is not None and config.norms.s <= t0:
            result.error("norms", "s", config.norms.s, f"> grid.t0 ({t0})")
    if task == Task.COMPAT_AUDIT and config.compat is not None:
        compat = config.compat
        _check_times("compat", compat.s, compat.t, grid, result)
        sweeps = [compat.sweep_gamma, compat.sweep_r, compat.sweep_duration]
        if any(sweeps) and not all(sweeps):
            result.error(
                "compat",
                "sweep_gamma/sweep_r/sweep_duration",
                [len(s) for s in sweeps],
                "all three non-empty, or all empty",
            )
        if any(sweeps) and (
            config.kernel is None
            or config.kernel.family != KernelFamily.ORNSTEIN_UHLENBECK
        ):
            result.error(
                "kernel", "family", None, "ornstein_uhlenbeck for a compat sweep"
            )
        if any(v <= 0 for v in compat.sweep_duration or []):
            result.error("compat", "sweep_duration", compat.sweep_duration, "all > 0")
    if task == Task.JC_RESIDUAL_SWEEP and config.jc_residual is not None:
        residual = config.jc_residual
        _check_times("jc_residual", residual.s, residual.t, grid, result)
        if residual.u is not None and residual.s is not None:
            bad = [u for u in residual.u if not 0 <= u < residual.s]
            if bad:
                result.error("jc_residual", "u", bad, f"in [0, s = {residual.s})")
