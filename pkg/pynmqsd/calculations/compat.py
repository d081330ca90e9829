"""
Audits of the normalization and conditional compatibility identities for the
constant weight functional f = 1.

For a past [z*]_0^s, held on [0, s) under left-point holding, the conditional
mean of (A_s^t)^dagger A_s^t over continuations on [s, t] must equal the
identity. The audits sample the continuations from the Gaussian conditional
law of the noise, build the propagators (closed form for Jaynes-Cummings and
dephasing, RK4 otherwise) and compare the mean with the identity and, for OU
dephasing, with its closed form.
"""

import logging
import warnings
from functools import partial
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy.integrate import quad

from pynmqsd.calculations.dynamics import (
    dephasing_propagators,
    dephasing_theta,
    jc_propagators,
    prepare_generator,
    propagate_batch,
)
from pynmqsd.calculations.kernels import (
    PATH_STREAM,
    ConditionalLaw,
    build_covariance,
    draw_values,
    factorize,
    pinned_past,
)
from pynmqsd.calculations.models import build_ansatz, riccati_reference
from pynmqsd.calculations.operators import SIGMA_Z, dagger, operator_norm
from pynmqsd.calculations.parallel import DEFAULT_CHUNK_SIZE, chunk_ranges, map_chunks
from pynmqsd.domain.compat_report import (
    CompatReport,
    JCFunctionalSample,
    JCMoments,
    NormalizationCheck,
)
from pynmqsd.domain.estimates import abort_fraction_ok
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import AnsatzTable, SystemModel
from pynmqsd.domain.time_grid import NoisePath, TimeGrid
from pynmqsd.enums import AnsatzType, KernelFamily
from pynmqsd.exceptions import NumericalWarning

log = logging.getLogger(__name__)

# weight hook: full z* rows (batch, n_nodes) on [0, t] -> real weights (batch,)
WeightHook = Callable[[np.ndarray], np.ndarray]


def closed_form_dephasing_ou(
    kappa: float,
    gamma: float,
    r: float,
    s: float,
    t: float,
    re_z_s: float,
    var_re_z_s: float = 0.0,
) -> np.ndarray:
    """
    Conditional mean of (A_s^t)^dagger A_s^t for OU dephasing, as a diagonal matrix.

    exp{-(1/kappa gamma) [r^2 (e^{-gamma t} - e^{-gamma s})
        - 2 r (sigma Re z_s - r)(1 - e^{-gamma (t-s)})
        - (r^2 / 2)(1 - e^{-2 gamma (t-s)})]} with sigma = +1, -1 on the diagonal.

    With `var_re_z_s` > 0 the expression is averaged over a Gaussian Re z_s of
    mean `re_z_s` and that variance.
    """
    if not (kappa > 0 and gamma > 0):
        raise ValueError("OU parameters kappa and gamma must be positive")
    if var_re_z_s < 0:
        raise ValueError(f"variance of Re z_s must be >= 0, got {var_re_z_s}")
    duration = t - s
    decay = -np.expm1(-gamma * duration)
    sigma = np.real(np.diag(SIGMA_Z))
    bracket = (
        r**2 * (np.exp(-gamma * t) - np.exp(-gamma * s))
        - 2.0 * r * (sigma * re_z_s - r) * decay
        - 0.5 * r**2 * (-np.expm1(-2.0 * gamma * duration))
    )
    # exponent is affine in Re z_s with slope 2 r sigma decay / (kappa gamma)
    spread = 0.5 * (2.0 * r * decay / (kappa * gamma)) ** 2 * var_re_z_s
    return np.diag(np.exp(-bracket / (kappa * gamma) + spread)).astype(complex)


def _has_closed_form(model: SystemModel) -> bool:
    kernel = model.kernel
    return (
        model.ansatz == AnsatzType.DEPHASING
        and kernel.family == KernelFamily.ORNSTEIN_UHLENBECK
        and np.isclose(model.kappa, kernel.kappa)
    )


class PropagatorSource:
    """Batched A_s^t for one model on one grid; picklable for worker processes."""

    def __init__(
        self,
        model: SystemModel,
        grid: TimeGrid,
        table: AnsatzTable,
        i_s: int,
        i_t: int,
    ):
        self.i_s = i_s
        self.i_t = i_t
        self.ansatz = model.ansatz
        self.omega = model.omega
        self.table = table
        self.grid = grid
        if self.ansatz == AnsatzType.DEPHASING:
            self.coupling = model.coupling_scale
            s, t = grid.times[i_s], grid.times[i_t]
            self.theta = dephasing_theta(model.kernel, grid, s, t, table)
        elif self.ansatz == AnsatzType.STATIC_L:
            self.series = prepare_generator(model, grid, table)

    @property
    def analytic(self) -> bool:
        return self.ansatz != AnsatzType.STATIC_L

    def __call__(self, noise: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.ansatz == AnsatzType.JAYNES_CUMMINGS:
            A = jc_propagators(self.omega, self.table, noise, self.i_s, self.i_t)
        elif self.ansatz == AnsatzType.DEPHASING:
            A = dephasing_propagators(
                self.omega,
                self.coupling,
                self.theta,
                noise,
                self.grid,
                self.i_s,
                self.i_t,
            )
        else:
            return propagate_batch(self.series, noise, self.i_s, self.i_t)
        aborted = ~np.all(np.isfinite(A), axis=(1, 2))
        A[aborted] = np.eye(A.shape[1])
        return A, aborted


def _gram_sums(A: np.ndarray, aborted: np.ndarray, weights=None) -> dict:
    kept = ~aborted
    gram = dagger(A[kept]) @ A[kept]
    if weights is not None:
        gram = np.asarray(weights)[kept][:, None, None] * gram
    return {
        "sum": gram.sum(axis=0),
        "sum_sq": (np.abs(gram) ** 2).sum(axis=0),
        "count": int(np.count_nonzero(kept)),
        "aborted": int(np.count_nonzero(aborted)),
        "h": np.real(gram[:, 0, 0]),
        "j": gram[:, 0, 1] if gram.shape[1] > 1 else np.zeros(len(gram)),
    }


def _reduce(parts: list[dict]) -> dict:
    total = dict(parts[0])
    for part in parts[1:]:
        for key, value in part.items():
            if isinstance(value, np.ndarray) and key in ("h", "j"):
                total[key] = np.concatenate([total[key], value])
            else:
                total[key] = total[key] + value
    return total


def _mean_and_stderr(total: dict) -> tuple[np.ndarray, float]:
    n = total["count"]
    mean = total["sum"] / max(n, 1)
    if n < 2:
        return mean, float("nan")
    variance = np.maximum(total["sum_sq"] / n - np.abs(mean) ** 2, 0.0)
    return mean, float(np.max(np.sqrt(variance / (n - 1))))


def _continuation_chunk(
    source: PropagatorSource,
    law: ConditionalLaw,
    past_values: np.ndarray,
    seed: int,
    weight: Optional[WeightHook],
    indices: range,
) -> dict:
    i_s = len(past_values)
    noise = np.empty((len(indices), source.grid.n_nodes), dtype=complex)
    noise[:, :i_s] = past_values
    noise[:, i_s:] = law.draw(indices, seed)
    A, aborted = source(noise)
    weights = None if weight is None else weight(noise)
    return _gram_sums(A, aborted, weights)


def _path_chunk(
    source: PropagatorSource, factor: np.ndarray, seed: int, indices: range
) -> dict:
    return _gram_sums(*source(draw_values(factor, indices, seed, PATH_STREAM)))


def _conditional_gram(
    model: SystemModel,
    past: NoisePath,
    t: float,
    n_cond: int,
    seed: int,
    table: Optional[AnsatzTable],
    weight: Optional[WeightHook],
    workers: Optional[int],
    chunk_size: int,
) -> tuple[dict, PropagatorSource, ConditionalLaw]:
    s = _past_end(past)
    if not t > s:
        raise ValueError(f"compatibility needs s < t, got s={s}, t={t}")
    grid = TimeGrid.from_span(past.grid.t0, t, past.grid.dt)
    i_s, i_t = past.grid.n_nodes, grid.n_steps
    if table is None or table.grid.n_nodes < grid.n_nodes:
        table = build_ansatz(model, grid)
    source = PropagatorSource(model, grid, table, i_s, i_t)
    law = ConditionalLaw(model.kernel, past, grid.after(i_s - 1, i_t))
    worker = partial(_continuation_chunk, source, law, past.values, seed, weight)
    parts = map_chunks(worker, chunk_ranges(n_cond, chunk_size), workers)
    return _reduce(parts), source, law


def _past_end(past: NoisePath) -> float:
    """s for a past holding the values on [t0, s), nodes up to s - dt."""
    return past.grid.t_end + past.grid.dt


def _check_past(past: NoisePath, s: float):
    end = _past_end(past)
    if not np.isclose(end, s, rtol=0, atol=1e-9 * past.grid.dt):
        raise ValueError(
            f"past holds values on [{past.grid.t0}, {end}), expected s={s}"
        )


def _flag(what: str, n_aborted: int, n_total: int) -> bool:
    valid = abort_fraction_ok(n_aborted, n_total)
    if not valid:
        warnings.warn(
            f"{what}: {n_aborted} of {n_total} propagations aborted, "
            "result flagged invalid",
            NumericalWarning,
        )
    return valid


def audit_compatibility(
    model: SystemModel,
    past: NoisePath,
    s: float,
    t: float,
    n_cond: int,
    seed: int,
    table: Optional[AnsatzTable] = None,
    weight: Optional[WeightHook] = None,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> CompatReport:
    """
    Monte Carlo conditional mean of (A_s^t)^dagger A_s^t given the path on [0, s).

    `past` holds the left-point values on [t0, s), nodes up to s - dt. The value
    at s drives [s, s + dt) and is drawn with the continuation. The OU dephasing
    closed form is evaluated at the conditional law of Re z_s given `past`:
    `closed_form_at_mean` at its mean, `closed_form` averaged over its spread.

    `weight` multiplies each continuation's (A)^dagger A, leaving room for a
    non-constant weight functional; by default every continuation weighs 1.
    """
    _check_past(past, s)
    log.info("Compatibility audit on [%g, %g) with %d continuations", s, t, n_cond)
    total, source, law = _conditional_gram(
        model, past, t, n_cond, seed, table, weight, workers, chunk_size
    )
    estimate, stderr = _mean_and_stderr(total)
    estimate = 0.5 * (estimate + dagger(estimate))
    reference = np.eye(model.dim, dtype=complex)
    closed_form = None
    closed_form_at_mean = None
    closed_form_residual = None
    re_z_s = None
    var_re_z_s = None
    if _has_closed_form(model):
        mean, variance = law.node_moments(0)
        re_z_s, var_re_z_s = float(mean.real), 0.5 * variance
        kappa, gamma = model.kernel.kappa, model.kernel.gamma
        closed_form_at_mean = closed_form_dephasing_ou(
            kappa, gamma, model.r, s, t, re_z_s
        )
        closed_form = closed_form_dephasing_ou(
            kappa, gamma, model.r, s, t, re_z_s, var_re_z_s
        )
        closed_form_residual = operator_norm(estimate - closed_form)
    report = CompatReport(
        model=model.describe(),
        s=float(s),
        t=float(t),
        past=past,
        n_cond=int(total["count"]),
        estimate=estimate,
        reference=reference,
        residual=operator_norm(estimate - reference),
        stderr=stderr,
        n_aborted=int(total["aborted"]),
        valid=_flag("audit_compatibility", int(total["aborted"]), n_cond),
        closed_form=closed_form,
        closed_form_residual=closed_form_residual,
        closed_form_at_mean=closed_form_at_mean,
        re_z_s=re_z_s,
        var_re_z_s=var_re_z_s,
        analytic=source.analytic,
    )
    log.info("residual %.4g (stderr %.2g)", report.residual, report.stderr)
    return report


def check_normalization(
    model: SystemModel,
    n: int,
    seed: int,
    t: float,
    grid: Optional[TimeGrid] = None,
    table: Optional[AnsatzTable] = None,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NormalizationCheck:
    """Unconditional mean of (A_0^t)^dagger A_0^t over `n` full paths."""
    if grid is None:
        grid = TimeGrid(0.0, t / 100 if t > 0 else 1.0, 100 if t > 0 else 0)
    i_t = grid.index_of(t)
    grid = grid.prefix(i_t)
    if table is None or table.grid.n_nodes < grid.n_nodes:
        table = build_ansatz(model, grid)
    source = PropagatorSource(model, grid, table, 0, i_t)
    factor = factorize(build_covariance(model.kernel, grid))

    worker = partial(_path_chunk, source, factor, seed)
    parts = map_chunks(worker, chunk_ranges(n, chunk_size), workers)
    total = _reduce(parts)
    estimate, stderr = _mean_and_stderr(total)
    estimate = 0.5 * (estimate + dagger(estimate))
    return NormalizationCheck(
        t=float(grid.times[i_t]),
        estimate=estimate,
        residual=operator_norm(estimate - np.eye(model.dim)),
        stderr=stderr,
        n=int(total["count"]),
        n_aborted=int(total["aborted"]),
        valid=_flag("check_normalization", int(total["aborted"]), n),
    )


# ---------------------------------------------------------------------------
# Jaynes-Cummings functionals and kernel residual
# ---------------------------------------------------------------------------


def jc_functional_samples(
    omega: float,
    table: AnsatzTable,
    kernel: CorrelationKernel,
    past: NoisePath,
    t: float,
    n_cond: int,
    seed: int,
) -> list[JCFunctionalSample]:
    """h and j of (A_s^t)^dagger A_s^t per continuation of `past` on [0, s)."""
    model = SystemModel.jaynes_cummings(omega, kernel)
    total, _, _ = _conditional_gram(
        model, past, t, n_cond, seed, table, None, None, DEFAULT_CHUNK_SIZE
    )
    return [
        JCFunctionalSample(float(h), complex(j)) for h, j in zip(total["h"], total["j"])
    ]


def jc_conditional_moments(
    omega: float,
    table: AnsatzTable,
    past: NoisePath,
    s: float,
    t: float,
    n_cond: int,
    seed: int,
    kernel: CorrelationKernel,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> JCMoments:
    """
    Sample means of h and j over continuations of `past`.

    A compatible kernel gives E[h] = 1 and E[j] = 0.
    """
    _check_past(past, s)
    model = SystemModel.jaynes_cummings(omega, kernel)
    if np.isclose(t, s):
        return JCMoments(1.0, 0j, 0.0, 0.0, n_cond)
    total, _, _ = _conditional_gram(
        model, past, t, n_cond, seed, table, None, workers, chunk_size
    )
    h, j = total["h"], total["j"]
    n = len(h)
    if n < 2:
        raise ValueError("jc_conditional_moments needs at least two continuations")
    _flag("jc_conditional_moments", int(total["aborted"]), n_cond)
    return JCMoments(
        mean_h=float(np.mean(h)),
        mean_j=complex(np.mean(j)),
        stderr_h=float(np.std(h, ddof=1) / np.sqrt(n)),
        stderr_j=float(
            np.sqrt(np.var(j.real, ddof=1) + np.var(j.imag, ddof=1)) / np.sqrt(n)
        ),
        n=n,
        n_aborted=int(total["aborted"]),
    )


def jc_kernel_residual(
    omega: float,
    table: AnsatzTable,
    kernel: CorrelationKernel,
    s: float,
    t: float,
    u: float,
) -> complex:
    """
    Left-point sum of int_s^t alpha(tau - u) exp(i omega tau - int_s^tau F*) dtau.

    Zero for every 0 <= u < s < t is necessary for compatibility of the JC
    ansatz with f = 1.
    """
    if not 0 <= u < s:
        raise ValueError(f"kernel residual needs 0 <= u < s, got u={u}, s={s}")
    grid = table.grid
    i_s, i_t = grid.index_of(s), grid.index_of(t)
    if i_t <= i_s:
        return 0j
    dt = grid.dt
    times = grid.times[i_s:i_t]
    rates = np.conj(table.step_F[i_s : i_t - 1])
    decay = np.concatenate([[0.0], np.cumsum(rates)]) * dt
    alphas = kernel.lattice_alpha(times - u, dt)
    return complex(np.sum(alphas * np.exp(1j * omega * times - decay)) * dt)


def jc_residual_oracle(
    omega: float, kappa: float, gamma: float, s: float, t: float, u: float
) -> complex:
    """The same integral with the Riccati F and adaptive quadrature (OU kernel)."""
    riccati = riccati_reference(omega, kappa, gamma, t)
    kernel = CorrelationKernel.ornstein_uhlenbeck(kappa, gamma)
    base = riccati.integral(s)

    def integrand(tau):
        decay = np.conj(riccati.integral(tau) - base)
        return complex(kernel.alpha(tau - u)) * np.exp(1j * omega * tau - decay)

    re, _ = quad(lambda tau: integrand(tau).real, s, t, limit=200, epsabs=1e-12)
    im, _ = quad(lambda tau: integrand(tau).imag, s, t, limit=200, epsabs=1e-12)
    return complex(re, im)


def jc_residual_panel(
    omega: float,
    table: AnsatzTable,
    kernel: CorrelationKernel,
    s: float,
    t: float,
    u_values=None,
    n_u: int = 8,
    with_oracle: bool = True,
) -> pd.DataFrame:
    """Residual on a panel of u (default `n_u` points uniform in [0, s))."""
    if u_values is None:
        u_values = np.linspace(0.0, s, n_u, endpoint=False)
    oracle = with_oracle and kernel.family == KernelFamily.ORNSTEIN_UHLENBECK
    rows = []
    for u in u_values:
        residual = jc_kernel_residual(omega, table, kernel, s, t, float(u))
        row = {
            "u": float(u),
            "re_residual": residual.real,
            "im_residual": residual.imag,
            "abs_residual": abs(residual),
        }
        if oracle:
            reference = jc_residual_oracle(omega, kernel.kappa, kernel.gamma, s, t, u)
            row["re_oracle"] = reference.real
            row["im_oracle"] = reference.imag
            row["abs_error"] = abs(residual - reference)
        rows.append(row)
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def compat_sweep(
    kappa: float,
    gammas,
    rs,
    durations,
    s: float,
    dt: float,
    n_cond: int,
    seed: int,
    omega: float = 0.0,
    re_z_s: float = 0.0,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Audits of OU dephasing over a (gamma, r, t - s) panel, next to the closed form.

    Every point uses a past on [0, s) whose last value, at s - dt, is pinned to
    `re_z_s`, drawn with the same seed.
    """
    rows = []
    span = TimeGrid.from_span(0.0, s, dt)
    past_grid = span.prefix(span.n_steps - 1)
    for gamma in gammas:
        kernel = CorrelationKernel.ornstein_uhlenbeck(kappa, gamma)
        past = pinned_past(kernel, past_grid, complex(re_z_s), seed)
        for r in rs:
            model = SystemModel.dephasing(omega, r, kappa, kernel)
            for duration in durations:
                t = s + duration
                report = audit_compatibility(
                    model, past, s, t, n_cond, seed, workers=workers
                )
                closed = np.real(np.diag(report.closed_form))
                estimate = np.real(np.diag(report.estimate))
                rows.append(
                    {
                        "gamma": float(gamma),
                        "r": float(r),
                        "duration": float(duration),
                        "estimate_00": estimate[0],
                        "estimate_11": estimate[1],
                        "closed_form_00": closed[0],
                        "closed_form_11": closed[1],
                        "residual": report.residual,
                        "closed_form_residual": report.closed_form_residual,
                        "stderr": report.stderr,
                        "n_aborted": report.n_aborted,
                    }
                )
    return pd.DataFrame(rows)
