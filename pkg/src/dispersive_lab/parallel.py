"""Thread-pool helper honouring DISPERSIVE_LAB_THREADS."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import InvalidConfig

ENV_VAR = "DISPERSIVE_LAB_THREADS"


def thread_count():
    """Worker cap from the environment; 0 or unset means os.cpu_count()."""
    raw = os.environ.get(ENV_VAR, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidConfig(f"{ENV_VAR} must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise InvalidConfig(f"{ENV_VAR} must be a non-negative integer, got {n}")
    return n or (os.cpu_count() or 1)


def ordered_map(fn, items):
    """``[fn(x) for x in items]``, possibly on worker threads; order is preserved."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
