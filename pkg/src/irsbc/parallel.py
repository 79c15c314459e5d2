"""Order-preserving map over worker processes."""

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(threads):
    if threads is None or threads == 1:
        return 1
    if threads <= 0:
        return os.cpu_count() or 1
    return threads


def pmap(fn, items, threads=1):
    """``list(map(fn, items))``, optionally spread over processes.

    Results come back in input order, so outputs do not depend on the
    worker count.
    """
    items = list(items)
    workers = min(resolve_workers(threads), max(len(items), 1))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
