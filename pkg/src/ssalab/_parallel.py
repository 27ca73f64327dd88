"""Thread-pool helper honouring the SSA_LAB_THREADS environment variable.

Unset or "1" runs serially; "0" means one thread per CPU; any other
positive integer caps the pool at that size.  Work items are indexed and
results are returned in index order, so the outcome is identical no
matter how many threads execute it.
"""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "SSA_LAB_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "1").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def indexed_map(fn, count: int):
    """[fn(0), ..., fn(count-1)], possibly computed concurrently."""
    workers = min(thread_count(), max(1, count))
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))
