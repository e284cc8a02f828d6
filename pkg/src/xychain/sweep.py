"""Worker pool for independent grid points.

Results always come back in input order, whatever order the workers
finish in, so every output built from a sweep is reproducible.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from xychain.errors import ParameterError

logger = logging.getLogger(__name__)

THREADS_ENV = "XYCHAIN_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value > XYCHAIN_THREADS > available CPUs."""
    if workers is None:
        raw = os.getenv(THREADS_ENV, "").strip()
        if raw:
            try:
                workers = int(raw)
            except ValueError as exc:
                raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ParameterError(f"worker count must be >= 1, got {workers}")
    return workers


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: int | None = None,
) -> list[R]:
    """``[fn(x) for x in items]`` spread over a thread pool, in input order."""
    items = list(items)
    n = min(resolve_workers(workers), max(len(items), 1))
    if n == 1:
        return [fn(x) for x in items]
    logger.debug("mapping %d items over %d workers", len(items), n)
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
