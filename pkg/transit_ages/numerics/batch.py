from typing import Callable, Iterable, List, Optional

from joblib import Parallel, delayed

from transit_ages.config.settings import BATCH_JOBS


def run_batch(fn: Callable, items: Iterable, n_jobs: Optional[int] = None) -> List:
    """Apply ``fn`` to independent work items; results come back in input order.

    Threads, not processes: builtin forcings registered at runtime live in this
    process only.
    """
    items = list(items)
    jobs = BATCH_JOBS if n_jobs is None else n_jobs
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=jobs, prefer="threads")(delayed(fn)(item) for item in items)
