"""
Worker Pool
Runs independent sweep points in worker processes and returns results in input order
"""

import logging
from concurrent.futures import ProcessPoolExecutor

logger = logging.getLogger(__name__)


def run_map(fn, items, jobs=1):
    """
    fn applied to every item; Executor.map keeps the input order.

    fn must be a module-level function (or a functools.partial of one) so it pickles.
    jobs=1 runs inline, which keeps the optimizer caches warm between points.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(jobs, len(items))
    logger.debug('dispatching %d points to %d workers', len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
