"""Registry of named closures backing analytic EXIT functions.

An analytic EXIT function is stored as a closure id plus a parameter tuple so
that it serializes to JSON. Model adapters register their own factories under
dotted ids (``bec.variable``, ``gaussian.check`` ...); the generic ones live here.
"""
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

import numpy as np

from src.core.domain.exceptions import ClosureNotFoundError

VectorFunction = Callable[[np.ndarray], np.ndarray]
ClosureFactory = Callable[..., VectorFunction]

_REGISTRY: Dict[str, ClosureFactory] = {}


def register_closure(closure_id: str) -> Callable[[ClosureFactory], ClosureFactory]:
    """Register a factory mapping a parameter tuple to a vectorized function."""

    def decorator(factory: ClosureFactory) -> ClosureFactory:
        _REGISTRY[closure_id] = factory
        resolve_closure.cache_clear()
        return factory

    return decorator


@lru_cache(maxsize=1024)
def resolve_closure(closure_id: str, params: Tuple[float, ...]) -> VectorFunction:
    """Build (once) the vectorized function for a closure id and parameters.

    Raises:
        ClosureNotFoundError: If no factory is registered under the id
    """
    try:
        factory = _REGISTRY[closure_id]
    except KeyError as e:
        raise ClosureNotFoundError(
            f"No closure registered under '{closure_id}'",
            details={"closure_id": closure_id, "known": sorted(_REGISTRY)},
            original_error=e,
        ) from e
    return factory(*params)


def registered_closures() -> List[str]:
    """List the registered closure ids."""
    return sorted(_REGISTRY)


@register_closure("identity")
def _identity() -> VectorFunction:
    return lambda x: np.asarray(x, dtype=float)


@register_closure("polynomial")
def _polynomial(*coefficients: float) -> VectorFunction:
    """Power series sum_k c_k x^k, coefficients indexed by degree."""
    coeffs = np.asarray(coefficients, dtype=float)

    def fn(x: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)

    return fn


@register_closure("polynomial.complement")
def _polynomial_complement(*coefficients: float) -> VectorFunction:
    """x -> 1 - p(1 - x), the check-side form of a degree distribution."""
    coeffs = np.asarray(coefficients, dtype=float)

    def fn(x: np.ndarray) -> np.ndarray:
        return 1.0 - np.polynomial.polynomial.polyval(1.0 - np.asarray(x, dtype=float), coeffs)

    return fn


@register_closure("scaled_polynomial")
def _scaled_polynomial(scale: float, *coefficients: float) -> VectorFunction:
    """x -> scale * p(x), the variable-side form with a channel parameter."""
    coeffs = np.asarray(coefficients, dtype=float)

    def fn(x: np.ndarray) -> np.ndarray:
        return scale * np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)

    return fn
