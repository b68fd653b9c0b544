"""
Worker Pools
============
Fork-join execution of P logical workers.

    with worker_pool('thread', 4) as pool:
        results = pool.map(fn, chunks)       # order preserved, one barrier

Backends:
  - thread:  ThreadPoolExecutor; scales only the numpy block work (brute
             force, bucket sorts); pure-Python sweeps and tree queries
             hold the GIL
  - process: ProcessPoolExecutor (fn and arguments must be picklable);
             needed for the Python-level phases to run concurrently
  - serial:  workers run one after another on the calling thread
"""

import logging
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterator, List, Sequence, Tuple

from ddm_config import get_worker_backend
from ddm_core import ContractError

logger = logging.getLogger(__name__)


class SerialPool:
    """Runs every task inline; same interface as the executor-backed pool."""

    workers = 1

    def map(self, fn: Callable, *iterables) -> List:
        return [fn(*args) for args in zip(*iterables)]


class ExecutorPool:
    def __init__(self, executor, workers: int):
        self._executor = executor
        self.workers = workers

    def map(self, fn: Callable, *iterables) -> List:
        # list() is the barrier: every task has finished when it returns
        return list(self._executor.map(fn, *iterables))


@contextmanager
def worker_pool(backend: str, workers: int) -> Iterator:
    """Yield a pool with an order-preserving map over `workers` workers."""
    if workers < 1:
        raise ContractError(f"Worker count must be >= 1, got {workers}")
    backend = get_worker_backend(backend)

    if backend == 'serial' or workers == 1:
        yield SerialPool()
        return

    executor_cls = ThreadPoolExecutor if backend == 'thread' else ProcessPoolExecutor
    logger.debug("Starting %s pool with %d workers", backend, workers)
    with executor_cls(max_workers=workers) as executor:
        yield ExecutorPool(executor, workers)


def split_range(length: int, parts: int) -> List[Tuple[int, int]]:
    """Split range(length) into `parts` contiguous chunks whose sizes differ by at most 1."""
    if parts < 1:
        raise ContractError(f"Cannot split into {parts} parts")
    base, extra = divmod(length, parts)
    bounds = [0]
    for p in range(parts):
        bounds.append(bounds[-1] + base + (1 if p < extra else 0))
    return list(zip(bounds[:-1], bounds[1:]))


def chunk(items: Sequence, parts: int) -> List[Sequence]:
    return [items[a:b] for a, b in split_range(len(items), parts)]
