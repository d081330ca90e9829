from dataclasses import dataclass
from typing import Optional

import numpy as np

from pynmqsd.assembly import build_grid, build_kernel, build_model, initial_state
from pynmqsd.calculations.models import build_ansatz
from pynmqsd.calculations.parallel import DEFAULT_CHUNK_SIZE, default_workers
from pynmqsd.domain.kernel import CorrelationKernel
from pynmqsd.domain.system_model import AnsatzTable, SystemModel
from pynmqsd.domain.time_grid import TimeGrid
from pynmqsd.inputs.run_config import RunConfig


@dataclass
class TaskContext:
    """Domain objects shared by the task runners, built once from a valid config."""

    config: RunConfig
    grid: TimeGrid
    kernel: Optional[CorrelationKernel] = None
    model: Optional[SystemModel] = None
    psi0: Optional[np.ndarray] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    chunk_size: int = DEFAULT_CHUNK_SIZE
    _table: Optional[AnsatzTable] = None

    @property
    def table(self) -> AnsatzTable:
        if self._table is None:
            self._table = build_ansatz(self.model, self.grid)
        return self._table


def build_context(config: RunConfig) -> TaskContext:
    context = TaskContext(config=config, grid=build_grid(config.grid))
    if config.kernel is not None:
        context.kernel = build_kernel(config.kernel)
    if config.model is not None and context.kernel is not None:
        context.model = build_model(config.model, context.kernel)
        context.psi0 = initial_state(config.model, context.model)
    if config.ensemble is not None:
        context.seed = config.ensemble.seed
        context.workers = config.ensemble.workers or default_workers()
        if config.ensemble.chunk_size is not None:
            context.chunk_size = int(config.ensemble.chunk_size)
    return context
