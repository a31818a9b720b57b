import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "OVERPARAM_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return os.cpu_count() or 1


def ordered_map(fn, items, workers=None):
    """Map ``fn`` over ``items`` and return results in input order.

    Results are identical for any worker count because each item is
    evaluated independently and gathering never reorders.
    """
    items = list(items)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
