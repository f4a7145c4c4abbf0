"""Ordered process-pool map with a thread budget.

Workers must be module-level callables taking one picklable task. Results come
back in task order, so any reduction over them is independent of scheduling.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar
import os

from holab.tools.logging_ import ParallelLogger, log_decorator, assert_and_log_error

logger = ParallelLogger().setup()

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "HOLAB_THREADS"


def default_thread_budget() -> int:
    """Thread budget from ``HOLAB_THREADS``, else 1."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning(
            f" | Function | default_thread_budget() | Check | {THREADS_ENV_VAR}='{raw}' is not an integer, using 1"
        )
        return 1
    return max(1, value)


@log_decorator(logger, suffix_message="Map tasks over the worker pool")
def ordered_map(
    worker: Callable[[T], R],
    tasks: Sequence[T],
    threads: Optional[int] = None,
    chunksize: Optional[int] = None,
) -> List[R]:
    """Apply ``worker`` to every task and return results in task order.

    Args:
        worker: Module-level function of one task.
        tasks: Picklable tasks.
        threads: Number of worker processes, 1 runs inline. Defaults to the env budget.
        chunksize: Tasks per pickled batch. Defaults to an even split over 4x the workers.

    Returns:
        ``[worker(t) for t in tasks]``.

    """
    threads = default_thread_budget() if threads is None else threads
    assert_and_log_error(
        logger, "error", threads >= 1, f"thread budget must be >= 1, got {threads}"
    )
    tasks = list(tasks)
    if threads == 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]

    workers = min(threads, len(tasks))
    if chunksize is None:
        chunksize = max(1, len(tasks) // (4 * workers))
    logger.debug(
        f" | Function | ordered_map() | Action | {len(tasks)} tasks | {workers} workers | chunksize {chunksize}"
    )
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=chunksize))
