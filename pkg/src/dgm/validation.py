"""Small argument checks shared by the functional API and the estimators."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidParameter
from .graph import DependencyGraph


def check_graph(graph, min_nodes: int = 0) -> DependencyGraph:
    if not isinstance(graph, DependencyGraph):
        raise TypeError(f"expected a DependencyGraph, got {type(graph).__name__}")
    if graph.n_nodes < min_nodes:
        raise InvalidParameter(f"graph needs at least {min_nodes} nodes, has {graph.n_nodes}")
    return graph


def check_int(value, name: str, minimum: int | None = None, maximum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidParameter(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise InvalidParameter(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise InvalidParameter(f"{name} must be <= {maximum}, got {value}")
    return value


def check_real(value, name: str, low=None, high=None, low_open=False, high_open=False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidParameter(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise InvalidParameter(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        raise InvalidParameter(f"{name} out of range: {value}")
    if high is not None and (value > high or (high_open and value == high)):
        raise InvalidParameter(f"{name} out of range: {value}")
    return value


def check_samples(samples, min_count: int = 1) -> np.ndarray:
    """Return a 1-d int64 array of positive integers."""
    arr = np.asarray(samples)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise InvalidParameter(f"samples must be 1-d, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr.astype(float))):
        raise InvalidParameter("samples contain non-finite values")
    ints = arr.astype(np.int64)
    if arr.size and not np.array_equal(ints, arr):
        raise InvalidParameter("samples must be integers")
    return ints


def rng_from_seed(seed) -> np.random.Generator:
    if seed is None:
        raise InvalidParameter("an explicit seed is required")
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
