"""
Chunked fan-out of independent trajectory work.

Work is cut into index ranges of `chunk_size`; each chunk draws its noise
from per-index substreams, so results do not depend on the worker count.
Results come back in chunk order and are reduced in that order.
"""

import logging
from multiprocessing import Pool, cpu_count
from typing import Callable, Iterable, Optional, TypeVar

log = logging.getLogger(__name__)

T = TypeVar("T")
DEFAULT_CHUNK_SIZE = 512


def default_workers() -> int:
    return max(1, cpu_count())


def chunk_ranges(n: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[range]:
    if chunk_size < 1:
        raise ValueError(f"chunk size must be >= 1, got {chunk_size}")
    return [
        range(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)
    ]


def map_chunks(
    worker: Callable[[range], T],
    chunks: Iterable[range],
    workers: Optional[int] = None,
) -> list[T]:
    """
    Apply `worker` to every chunk, in order.

    `worker` must be picklable (a module-level function or a partial of one)
    when more than one process is used.
    """
    chunks = list(chunks)
    workers = 1 if workers is None else int(workers)
    if workers <= 1 or len(chunks) <= 1:
        results = []
        for number, chunk in enumerate(chunks):
            log.debug(
                "chunk %d/%d: indices %d..%d",
                number + 1,
                len(chunks),
                chunk.start,
                chunk.stop - 1,
            )
            results.append(worker(chunk))
        return results
    processes = min(workers, len(chunks))
    log.info("Dispatching %d chunks to %d processes", len(chunks), processes)
    with Pool(processes=processes) as pool:
        return pool.map(worker, chunks)
