"""Input checks shared by the pipeline, the CLI and the estimator classes."""

from __future__ import annotations

import math
import numbers
from typing import Iterable, Sequence

import numpy as np

from .complex import DistanceMatrix, PointCloud, PointCloudError, pairwise_distances


class ConfigError(ValueError):
    """Invalid run configuration, raised before any estimation work starts."""


def check_unit_interval(name: str, value, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if not isinstance(value, numbers.Real) or not 0 < float(value) < 1:
        raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_positive_int(name: str, value, allow_none: bool = True):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_seed(seed) -> int:
    if seed is None:
        return 0
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def check_epsilons(values: Iterable) -> tuple[float, ...]:
    """Scale values as a nonempty, finite, nonnegative, strictly ascending tuple."""
    try:
        eps = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigError(f"scales must be numbers, got {values!r}") from None
    if not eps:
        raise ConfigError("at least one scale is required")
    if any(not math.isfinite(e) or e < 0 for e in eps):
        raise ConfigError("scales must be finite and nonnegative")
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("scales must be strictly ascending")
    return eps


def check_orders(orders, n: int) -> tuple[int, ...]:
    """Resolve ``"all"`` and check every order lies in ``0..n-1``."""
    if isinstance(orders, str):
        if orders != "all":
            raise ConfigError(f"orders must be 'all' or a list of integers, got {orders!r}")
        return tuple(range(n))
    out = []
    for k in orders:
        if isinstance(k, bool) or not isinstance(k, numbers.Integral):
            raise ConfigError(f"order {k!r} is not an integer")
        if not 0 <= k <= n - 1:
            raise ConfigError(f"order {k} outside 0..{n - 1}")
        out.append(int(k))
    if not out:
        raise ConfigError("at least one order is required")
    return tuple(sorted(set(out)))


def check_point_cloud(X, metric: str = "euclidean") -> DistanceMatrix:
    """Coerce an array-like point set (or distance matrix) into validated distances."""
    if isinstance(X, DistanceMatrix):
        return X
    if metric not in ("euclidean", "manhattan", "precomputed"):
        raise ConfigError(f"unknown metric {metric!r}")
    try:
        if isinstance(X, PointCloud):
            return pairwise_distances(X, metric)
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        return pairwise_distances(arr, metric)
    except PointCloudError:
        raise
    except (TypeError, ValueError) as exc:
        raise PointCloudError(str(exc)) from None


def check_cloud_batch(X) -> Sequence:
    """A batch of point clouds: a 3-d array or a sequence of 2-d arrays."""
    if isinstance(X, np.ndarray):
        if X.ndim != 3:
            raise ValueError(f"expected a 3-d array of point clouds, got shape {X.shape}")
        return list(X)
    batch = list(X)
    if not batch:
        raise ValueError("empty batch")
    return batch
