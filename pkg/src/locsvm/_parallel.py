"""Order-preserving worker pool helpers.

Tasks are pure functions of their inputs and results are joined by
position, so the outcome of a run is byte-identical no matter how many
workers execute it.  Threads are used rather than processes: the heavy
lifting happens inside numpy and scipy calls that release the GIL, and
nothing needs to be pickled.  BLAS pools are pinned to one thread for
the duration of a parallel region so that the linear algebra inside a
task does not depend on how many sibling tasks are running.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from threadpoolctl import threadpool_limits


@contextmanager
def single_thread_blas():
    """Pin BLAS/LAPACK pools to one thread for reproducible numerics."""
    with threadpool_limits(limits=1):
        yield


def parallel_map(fn, items, workers: int = 1) -> list:
    """Map ``fn`` over ``items``, preserving order.

    With one worker (or one item) this is a plain loop; otherwise a
    thread pool runs the calls concurrently.  Results are identical
    either way.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
