"""Utility functions and decorators shared by the numerical modules."""

import logging
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from typing import Any, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

# Type variables for generic decorators and maps
T = TypeVar("T")
R = TypeVar("R")


def log_runtime(budget_seconds: float | None = None) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """Decorator that logs the wall time of a long-running operation.

    Args:
        budget_seconds: Optional time budget; exceeding it logs a warning (default: None)

    Returns:
        Decorated function with runtime logging

    Example:
        @log_runtime(budget_seconds=30.0)
        def decide(...):
            ...
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            func_name = getattr(func, "__name__", "unknown_function")
            start = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start
                if budget_seconds is not None and elapsed > budget_seconds:
                    logger.warning(f"{func_name}: took {elapsed:.2f}s, over the {budget_seconds:.0f}s budget")
                else:
                    logger.debug(f"{func_name}: took {elapsed:.2f}s")

        return wrapper

    return decorator


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Map ``fn`` over ``items`` preserving input order.

    Thread workers are used because the heavy lifting (FFTs, dense linear algebra) happens in numpy,
    which releases the GIL. Results come back in input order, so any reduction done afterwards is
    independent of the worker count.
    """
    materialized: Sequence[T] = list(items)
    if workers <= 1 or len(materialized) <= 1:
        return [fn(item) for item in materialized]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, materialized))


def loglog_slope(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Least-squares slope of ln y against ln x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("at least two points are needed to fit a slope")
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


def linear_slope(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Least-squares slope of y against x."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size < 2:
        raise ValueError("at least two points are needed to fit a slope")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def spawn_generators(seed: int, n: int) -> list[np.random.Generator]:
    """Independent generators derived from one explicit seed."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]
