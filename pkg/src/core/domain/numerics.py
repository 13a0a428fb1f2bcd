"""Vectorized root bracketing shared by the domain and the services."""
from typing import Callable, Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# 2**-48 of a unit bracket is below 1e-14
DEFAULT_ITERATIONS = 48


def bisect_predicate(
    predicate: Callable[[np.ndarray], np.ndarray],
    lo: ArrayLike,
    hi: ArrayLike,
    iterations: int = DEFAULT_ITERATIONS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Shrink brackets around the point where a monotone predicate turns true.

    The predicate must be false at ``lo`` and true at ``hi`` (elementwise). Each
    bracket is halved ``iterations`` times.

    Args:
        predicate: Vectorized boolean test, false then true along the bracket
        lo: Lower bracket ends
        hi: Upper bracket ends

    Returns:
        The final (lo, hi) brackets
    """
    lo_arr = np.array(lo, dtype=float, copy=True)
    hi_arr = np.array(hi, dtype=float, copy=True)
    lo_arr, hi_arr = np.broadcast_arrays(lo_arr, hi_arr)
    lo_arr = lo_arr.copy()
    hi_arr = hi_arr.copy()
    for _ in range(iterations):
        mid = 0.5 * (lo_arr + hi_arr)
        hit = np.asarray(predicate(mid), dtype=bool)
        hi_arr = np.where(hit, mid, hi_arr)
        lo_arr = np.where(hit, lo_arr, mid)
    return lo_arr, hi_arr


def invert_increasing(
    fn: Callable[[np.ndarray], np.ndarray],
    target: ArrayLike,
    lo: ArrayLike,
    hi: ArrayLike,
    iterations: int = DEFAULT_ITERATIONS,
) -> np.ndarray:
    """Solve fn(x) = target for a non-decreasing fn by bisection.

    Returns the smallest x (to bracket precision) with fn(x) >= target, clamped to
    the bracket when the target lies outside the range of fn.
    """
    target_arr = np.asarray(target, dtype=float)
    lo_arr, hi_arr = np.broadcast_arrays(
        np.asarray(lo, dtype=float) + 0.0 * target_arr, np.asarray(hi, dtype=float)
    )
    below = np.asarray(fn(lo_arr) >= target_arr)
    _, upper = bisect_predicate(lambda x: fn(x) >= target_arr, lo_arr, hi_arr, iterations)
    return np.where(below, lo_arr, upper)


def invert_decreasing(
    fn: Callable[[np.ndarray], np.ndarray],
    target: ArrayLike,
    lo: ArrayLike,
    hi: ArrayLike,
    iterations: int = DEFAULT_ITERATIONS,
) -> np.ndarray:
    """Solve fn(x) = target for a non-increasing fn by bisection."""
    return invert_increasing(lambda x: -fn(x), -np.asarray(target, dtype=float), lo, hi, iterations)
