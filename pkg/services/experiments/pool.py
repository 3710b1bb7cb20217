from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from types import TracebackType
from typing import TypeVar

log = logging.getLogger("experiments")

J = TypeVar("J")
R = TypeVar("R")


def _pin_threads() -> None:
    """Worker initializer: one numba thread per process, the pool supplies the parallelism."""
    import numba

    numba.set_num_threads(1)


class WorkerPool:
    """Bounded pool for independent sweep points; results come back in job order.

    With one worker everything runs in a thread of this process.
    """

    def __init__(self, workers: int = 1) -> None:
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self._executor: ProcessPoolExecutor | None = None

    async def __aenter__(self) -> WorkerPool:
        if self.workers > 1:
            self._executor = ProcessPoolExecutor(max_workers=self.workers, initializer=_pin_threads)
            log.info("Worker pool started (%d processes)", self.workers)
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if self._executor is not None:
            await asyncio.to_thread(self._executor.shutdown, True, cancel_futures=exc is not None)
            self._executor = None
            log.info("Worker pool stopped")

    async def map(self, fn: Callable[[J], R], jobs: Sequence[J]) -> list[R]:
        if self._executor is None:
            return [await asyncio.to_thread(fn, job) for job in jobs]
        loop = asyncio.get_running_loop()
        futures = [loop.run_in_executor(self._executor, fn, job) for job in jobs]
        return list(await asyncio.gather(*futures))
