"""Order-preserving parallel map, capped by TORSIONLAB_THREADS."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(default=None) -> int:
    raw = os.environ.get("TORSIONLAB_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"TORSIONLAB_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError("TORSIONLAB_THREADS must be >= 1")
        return n
    return default or min(8, os.cpu_count() or 1)


def pmap(fn, items, threads=None) -> list:
    """``[fn(x) for x in items]``, evaluated on a thread pool; results keep input order."""
    items = list(items)
    n = min(threads or thread_count(), max(len(items), 1))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
