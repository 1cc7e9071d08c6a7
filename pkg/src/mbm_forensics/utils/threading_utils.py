"""
Threading utilities for MBM Forensics.

Provides a bounded worker pool for embarrassingly parallel batch work
(ladder builds of distinct videos, grid-search cells). Results are returned
in input order so the caller's reduction stays deterministic.
"""

import threading
from queue import Queue, Empty
from dataclasses import dataclass
from typing import Callable, Optional, Iterable, List, Generic, TypeVar

from ..utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class TaskOutcome(Generic[R]):
    """Result slot of one task: either a value or the exception it raised."""
    index: int
    value: Optional[R] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ManagedThread:
    """Named worker thread that logs instead of dying silently."""

    def __init__(self, name: str, target: Callable, daemon: bool = True):
        """
        Initialize managed thread.

        Args:
            name: Thread name for logging
            target: Target function to run
            daemon: Whether thread should be daemon
        """
        self.name = name
        self.target = target
        self._thread: Optional[threading.Thread] = None
        self._daemon = daemon
        self._running = False

    def start(self) -> None:
        """Start the thread."""
        if self._running:
            logger.warning(f"Thread {self.name} already running")
            return

        self._thread = threading.Thread(
            target=self._run_with_error_handling,
            name=self.name,
            daemon=self._daemon
        )
        self._running = True
        self._thread.start()
        logger.debug(f"Started thread: {self.name}")

    def _run_with_error_handling(self) -> None:
        try:
            self.target()
        except Exception as e:
            logger.error(f"Thread {self.name} crashed: {e}", exc_info=True)
        finally:
            self._running = False

    def join(self, timeout: Optional[float] = None) -> bool:
        """Wait for the thread; True if it finished."""
        if self._thread is None:
            return True
        self._thread.join(timeout=timeout)
        return not self._thread.is_alive()


class WorkerPool:
    """Bounded pool of worker threads mapping a function over items."""

    def __init__(self, name: str, num_workers: int = 1):
        """
        Initialize worker pool.

        Args:
            name: Pool name for logging
            num_workers: Maximum number of concurrent workers (>= 1)
        """
        self.name = name
        self.num_workers = max(1, int(num_workers))

    def map(
        self,
        func: Callable[[T], R],
        items: Iterable[T],
        on_done: Optional[Callable[[TaskOutcome[R]], None]] = None,
    ) -> List[TaskOutcome[R]]:
        """
        Apply func to every item.

        Exceptions are captured per item, never propagated. With one worker
        the work runs inline on the calling thread.

        Args:
            func: Function applied to each item
            items: Work items
            on_done: Optional callback per finished task (progress bars)

        Returns:
            One TaskOutcome per item, in input order
        """
        work = list(items)
        outcomes: List[TaskOutcome[R]] = [TaskOutcome(index=i) for i in range(len(work))]
        if not work:
            return outcomes

        def run_one(index: int) -> None:
            outcome = outcomes[index]
            try:
                outcome.value = func(work[index])
            except Exception as e:
                outcome.error = e
            if on_done is not None:
                on_done(outcome)

        if self.num_workers == 1 or len(work) == 1:
            for index in range(len(work)):
                run_one(index)
            return outcomes

        queue: Queue = Queue()
        for index in range(len(work)):
            queue.put(index)

        def worker_loop() -> None:
            while True:
                try:
                    index = queue.get_nowait()
                except Empty:
                    return
                try:
                    run_one(index)
                finally:
                    queue.task_done()

        workers = [
            ManagedThread(name=f"{self.name}-worker-{i}", target=worker_loop, daemon=True)
            for i in range(min(self.num_workers, len(work)))
        ]
        for worker in workers:
            worker.start()
        for worker in workers:
            worker.join()

        logger.debug(f"Pool {self.name}: {len(work)} tasks on {len(workers)} workers")
        return outcomes
