"""
Monte Carlo estimators of the reduced state and of norm statistics.

Trajectories are generated in chunks of consecutive sample indices. Every
chunk returns running sums per grid node; the sums are added in chunk order,
so a run is reproducible for a given seed whatever the worker count.
"""

import logging
import warnings
from functools import partial
from itertools import combinations
from typing import Optional

import numpy as np

from pynmqsd.calculations.dynamics import (
    GeneratorSeries,
    integrate_batch,
    prepare_generator,
)
from pynmqsd.calculations.kernels import (
    PAST_STREAM,
    PATH_STREAM,
    ConditionalLaw,
    build_covariance,
    draw_values,
    factorize,
)
from pynmqsd.calculations.models import build_ansatz
from pynmqsd.calculations.operators import trace_distance
from pynmqsd.calculations.parallel import DEFAULT_CHUNK_SIZE, chunk_ranges, map_chunks
from pynmqsd.domain.estimates import (
    ConditionalNormReport,
    EstimatorComparison,
    NormStats,
    UnravelEstimate,
    abort_fraction_ok,
)
from pynmqsd.domain.system_model import AnsatzTable, SystemModel
from pynmqsd.domain.time_grid import NoisePath, TimeGrid
from pynmqsd.enums import EstimatorMode
from pynmqsd.exceptions import NumericalWarning

log = logging.getLogger(__name__)


def _reduce(parts: list[dict]) -> dict:
    total = dict(parts[0])
    for part in parts[1:]:
        for key, value in part.items():
            total[key] = total[key] + value
    return total


def _entry_stderr(total: np.ndarray, total_sq: np.ndarray, n: int) -> np.ndarray:
    """Largest entrywise standard error per node from sums of x and |x|^2."""
    if n < 2:
        return np.full(total.shape[0], np.nan)
    mean = total / n
    variance = np.maximum(total_sq / n - np.abs(mean) ** 2, 0.0)
    entry = np.sqrt(variance / (n - 1))
    return entry.reshape(entry.shape[0], -1).max(axis=1)


def _flag_aborts(what: str, n_aborted: int, n_total: int) -> bool:
    valid = abort_fraction_ok(n_aborted, n_total)
    if n_aborted:
        log.info("%s: %d of %d trajectories aborted", what, n_aborted, n_total)
    if not valid:
        warnings.warn(
            f"{what}: {n_aborted} of {n_total} trajectories aborted, "
            "result flagged invalid",
            NumericalWarning,
        )
    return valid


# ---------------------------------------------------------------------------
# Reduced-state estimators
# ---------------------------------------------------------------------------


def _rho_chunk(
    series: GeneratorSeries,
    factor: np.ndarray,
    psi0: np.ndarray,
    seed: int,
    mode: EstimatorMode,
    indices: range,
) -> dict:
    noise = draw_values(factor, indices, seed, PATH_STREAM)
    result = integrate_batch(
        series, noise, psi0, nonlinear=mode == EstimatorMode.NONLINEAR
    )
    states = result.states[~result.aborted]
    outer = np.einsum("bmi,bmj->bmij", states, states.conj())
    sums = {
        "sum": outer.sum(axis=0),
        "sum_sq": (np.abs(outer) ** 2).sum(axis=0),
        "count": states.shape[0],
        "aborted": result.n_aborted,
    }
    if mode == EstimatorMode.NORMALIZED_WEIGHTED:
        # w = |psi|^2, P = psi psi^dagger / w: w P = outer, w^2 |P|^2 = |outer|^2
        weights = np.sum(np.abs(states) ** 2, axis=2)
        sums["weight"] = weights.sum(axis=0)
        sums["weight_sq"] = (weights**2).sum(axis=0)
        sums["weighted_outer"] = (weights[:, :, None, None] * outer).sum(axis=0)
    return sums


def _weighted_estimate(total: dict, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Self-normalized sum_k w_k P_k / sum_k w_k and its delta-method stderr."""
    weight = total["weight"][:, None, None]
    rho = total["sum"] / weight
    residual_sq = (
        total["sum_sq"]
        - 2.0 * np.real(rho.conj() * total["weighted_outer"])
        + np.abs(rho) ** 2 * total["weight_sq"][:, None, None]
    )
    entry = np.sqrt(np.maximum(residual_sq, 0.0) * n / max(n - 1, 1)) / weight
    return rho, entry.reshape(entry.shape[0], -1).max(axis=1)


def estimate_rho(
    model: SystemModel,
    n_traj: int,
    seed: int,
    grid: TimeGrid,
    mode: EstimatorMode = EstimatorMode.LINEAR,
    psi0=None,
    table: Optional[AnsatzTable] = None,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> UnravelEstimate:
    """
    Reduced state from `n_traj` trajectories sampled under the unshifted measure.

    LINEAR averages psi psi^dagger of the linear flow. NORMALIZED_WEIGHTED
    reuses the same linear trajectories and averages normalized projectors
    weighted by |psi|^2, normalized by the total weight. NONLINEAR averages
    projectors of the nonlinear flow driven by the Girsanov-shifted noise.
    """
    if n_traj < 2:
        raise ValueError(f"estimate_rho needs n_traj >= 2, got {n_traj}")
    psi0 = model.default_initial_state() if psi0 is None else np.asarray(psi0)
    if table is None:
        table = build_ansatz(model, grid)
    series = prepare_generator(model, grid, table)
    factor = factorize(build_covariance(model.kernel, grid))
    log.info(
        "Estimating rho (%s) from %d trajectories on %d nodes",
        mode.value,
        n_traj,
        grid.n_nodes,
    )
    worker = partial(_rho_chunk, series, factor, psi0, seed, mode)
    total = _reduce(map_chunks(worker, chunk_ranges(n_traj, chunk_size), workers))
    n = int(total["count"])
    n_aborted = int(total["aborted"])
    valid = _flag_aborts(f"estimate_rho[{mode.value}]", n_aborted, n_traj)
    if n == 0:
        shape = (grid.n_nodes, model.dim, model.dim)
        return UnravelEstimate(
            grid,
            np.full(shape, np.nan + 0j),
            np.full(grid.n_nodes, np.nan),
            0,
            mode,
            n_aborted,
            False,
        )
    if mode == EstimatorMode.NORMALIZED_WEIGHTED:
        rho_hat, stderr = _weighted_estimate(total, n)
    else:
        rho_hat = total["sum"] / n
        stderr = _entry_stderr(total["sum"], total["sum_sq"], n)
    rho_hat = 0.5 * (rho_hat + np.swapaxes(rho_hat, 1, 2).conj())
    return UnravelEstimate(
        grid=grid,
        rho_hat=rho_hat,
        stderr=stderr,
        n_traj=n,
        mode=mode,
        n_aborted=n_aborted,
        valid=valid,
    )


def compare_estimators(
    model: SystemModel,
    n_traj: int,
    seed: int,
    grid: TimeGrid,
    psi0=None,
    table: Optional[AnsatzTable] = None,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> EstimatorComparison:
    if table is None:
        table = build_ansatz(model, grid)
    estimates = {
        mode: estimate_rho(
            model, n_traj, seed, grid, mode, psi0, table, workers, chunk_size
        )
        for mode in EstimatorMode
    }
    distances = {}
    combined = {}
    for a, b in combinations(EstimatorMode, 2):
        first, second = estimates[a], estimates[b]
        distances[(a, b)] = np.array(
            [trace_distance(x, y) for x, y in zip(first.rho_hat, second.rho_hat)]
        )
        combined[(a, b)] = np.sqrt(first.stderr**2 + second.stderr**2)
    return EstimatorComparison(estimates, distances, combined)


# ---------------------------------------------------------------------------
# Norm statistics
# ---------------------------------------------------------------------------


def _norm_chunk(
    series: GeneratorSeries,
    factor: np.ndarray,
    psi0: np.ndarray,
    seed: int,
    indices: range,
) -> dict:
    noise = draw_values(factor, indices, seed, PATH_STREAM)
    result = integrate_batch(series, noise, psi0)
    kept = result.states[~result.aborted]
    sq_norms = np.sum(np.abs(kept) ** 2, axis=2)
    return {
        "sum": sq_norms.sum(axis=0),
        "sum_sq": (sq_norms**2).sum(axis=0),
        "count": kept.shape[0],
        "aborted": result.n_aborted,
    }


def _continuation_chunk(
    series: GeneratorSeries,
    law: ConditionalLaw,
    past_values: np.ndarray,
    psi_s: np.ndarray,
    i_t: int,
    seed: int,
    indices: range,
) -> dict:
    i_s = len(past_values)
    future = law.draw(indices, seed)
    noise = np.zeros((len(indices), series.grid.n_nodes), dtype=complex)
    noise[:, :i_s] = past_values
    noise[:, i_s : i_t + 1] = future
    result = integrate_batch(series, noise, psi_s, start=i_s, stop=i_t)
    final = result.states[~result.aborted, -1]
    sq_norms = np.sum(np.abs(final) ** 2, axis=1)
    return {
        "sum": sq_norms.sum(),
        "sum_sq": (sq_norms**2).sum(),
        "count": final.shape[0],
        "aborted": result.n_aborted,
    }


def conditional_norm(
    model: SystemModel,
    past: NoisePath,
    t: float,
    n_cond: int,
    seed: int,
    grid: TimeGrid,
    psi0=None,
    table: Optional[AnsatzTable] = None,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    past_index: int = 0,
) -> ConditionalNormReport:
    """
    E[|psi_t|^2 | past] from `n_cond` continuations of `past`, next to |psi_s|^2.

    `past` holds the values held on [t0, s), nodes up to s - dt, which fix psi_s
    under left-point holding. The value at s drives [s, s + dt) and is drawn
    with the rest of the continuation.
    """
    psi0 = model.default_initial_state() if psi0 is None else np.asarray(psi0)
    if table is None:
        table = build_ansatz(model, grid)
    series = prepare_generator(model, grid, table)
    i_s = past.grid.n_nodes
    i_t = grid.index_of(t)
    if not i_s < i_t:
        raise ValueError("conditional norm needs s < t")
    row = np.zeros((1, grid.n_nodes), dtype=complex)
    row[0, :i_s] = past.values
    head = integrate_batch(series, row, psi0, stop=i_s)
    psi_s = head.states[0, -1]
    norm_sq_s = float(np.sum(np.abs(psi_s) ** 2))
    law = ConditionalLaw(model.kernel, past, grid.after(i_s - 1, i_t))
    # each past draws its continuations from a disjoint block of substreams
    offset = past_index * n_cond
    chunks = [
        range(offset + c.start, offset + c.stop)
        for c in chunk_ranges(n_cond, chunk_size)
    ]
    worker = partial(_continuation_chunk, series, law, past.values, psi_s, i_t, seed)
    total = _reduce(map_chunks(worker, chunks, workers))
    n = int(total["count"])
    mean = float(total["sum"] / n) if n else float("nan")
    stderr = (
        float(np.sqrt(max(total["sum_sq"] / n - mean**2, 0.0) / (n - 1)))
        if n > 1
        else float("nan")
    )
    return ConditionalNormReport(
        past_index=past_index,
        s=float(grid.times[i_s]),
        t=float(grid.times[i_t]),
        norm_sq_s=norm_sq_s,
        conditional_mean=mean,
        stderr=stderr,
        n_cond=n,
        n_aborted=int(total["aborted"]),
        past=past,
    )


def norm_statistics(
    model: SystemModel,
    n_traj: int,
    seed: int,
    grid: TimeGrid,
    s: float,
    t: float,
    n_pasts: int,
    n_cond: Optional[int] = None,
    psi0=None,
    table: Optional[AnsatzTable] = None,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NormStats:
    """
    Mean squared norm of the linear solution and the conditional martingale test.

    Pasts on [t0, s) are drawn from their own substream family; each is
    continued `n_cond` times (default `n_traj`) from the conditional law.
    """
    if n_traj < 2:
        raise ValueError(f"norm_statistics needs n_traj >= 2, got {n_traj}")
    psi0 = model.default_initial_state() if psi0 is None else np.asarray(psi0)
    i_s, i_t = grid.index_of(s), grid.index_of(t)
    if not 0 < i_s < i_t:
        raise ValueError("norm statistics need t0 < s < t")
    if table is None:
        table = build_ansatz(model, grid)
    n_cond = n_traj if n_cond is None else n_cond
    series = prepare_generator(model, grid, table)
    factor = factorize(build_covariance(model.kernel, grid))
    log.info(
        "Norm statistics: %d trajectories, %d pasts x %d continuations",
        n_traj,
        n_pasts,
        n_cond,
    )
    worker = partial(_norm_chunk, series, factor, psi0, seed)
    total = _reduce(map_chunks(worker, chunk_ranges(n_traj, chunk_size), workers))
    n = int(total["count"])
    n_aborted = int(total["aborted"])
    valid = _flag_aborts("norm_statistics", n_aborted, n_traj)
    mean = total["sum"] / max(n, 1)
    stderr = _entry_stderr(total["sum"][:, None], total["sum_sq"][:, None], n)
    mean[0] = float(np.sum(np.abs(psi0) ** 2))

    past_grid = grid.prefix(i_s - 1)
    past_factor = factorize(build_covariance(model.kernel, past_grid))
    past_values = draw_values(past_factor, range(n_pasts), seed, PAST_STREAM)
    reports = []
    for k, values in enumerate(past_values):
        report = conditional_norm(
            model,
            NoisePath(past_grid, values),
            t,
            n_cond,
            seed,
            grid,
            psi0,
            table,
            workers,
            chunk_size,
            past_index=k,
        )
        log.debug(
            "past %d: |psi_s|^2 = %.4f, conditional mean %.4f +- %.4f",
            k,
            report.norm_sq_s,
            report.conditional_mean,
            report.stderr,
        )
        reports.append(report)
    stats = NormStats(
        grid=grid,
        mean_sq_norm=mean,
        stderr=stderr,
        n_traj=n,
        conditional=reports,
        n_aborted=n_aborted,
        valid=valid,
    )
    if stats.martingale_violated:
        warnings.warn(
            "conditional mean of |psi_t|^2 departs from |psi_s|^2 by more than "
            "5 stderr for at least one past",
            NumericalWarning,
        )
    return stats
