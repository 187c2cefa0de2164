"""Order-preserving map over worker processes."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

JOBS_ENV = "GAMLSS_BOOST_JOBS"


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "").strip()
    if not raw:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ValueError(f"{JOBS_ENV} must be an integer, got '{raw}'") from None
    return max(jobs, 1)


def parallel_map(fn, items, jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over ``jobs`` processes.

    Results come back in input order regardless of completion order.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
