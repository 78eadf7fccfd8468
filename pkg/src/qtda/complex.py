"""Vietoris-Rips complexes on small point clouds.

Simplices are encoded as bitmasks that double as statevector basis indices:
vertex ``i`` of an ``n``-vertex complex is bit ``n - 1 - i`` of the index
(vertex 0 is the most significant bit, i.e. the leftmost tensor factor).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import IO, Iterable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

#: Largest vertex count for which full 2^n amplitude arrays are allocated.
N_MAX = 24


class PointCloudError(ValueError):
    """Raised for malformed or inconsistent point input."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise PointCloudError("no points")
        if not np.all(np.isfinite(pts)):
            raise PointCloudError("non-finite coordinate")
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise PointCloudError("labels do not match number of points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise PointCloudError("distance matrix must be square and nonempty")
        if not np.all(np.isfinite(d)):
            raise PointCloudError("non-finite distance")
        if np.any(d < 0):
            raise PointCloudError("negative distance")
        if np.max(np.abs(d - d.T)) > 1e-12:
            raise PointCloudError("distance matrix is not symmetric")
        d = 0.5 * (d + d.T)
        np.fill_diagonal(d, 0.0)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class Skeleton:
    """The epsilon-close graph of a point set.

    ``adjacency`` is a symmetric boolean table with a false diagonal.
    """

    adjacency: np.ndarray
    epsilon: float = 0.0
    _nbr: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError("adjacency must be a nonempty square table")
        if np.any(a != a.T):
            raise ValueError("adjacency must be symmetric")
        np.fill_diagonal(a, False)
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        n = a.shape[0]
        # neighbour masks in basis-index convention, each vertex counted as its own neighbour
        nbr = []
        for i in range(n):
            m = vertex_bit(i, n)
            for j in np.flatnonzero(a[i]):
                m |= vertex_bit(int(j), n)
            nbr.append(m)
        object.__setattr__(self, "_nbr", tuple(nbr))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(a), int(b)) for a, b in zip(i, j)]

    def missing_pairs(self) -> list[tuple[int, int]]:
        n = self.n
        return [(i, j) for i, j in combinations(range(n), 2) if not self.adjacency[i, j]]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], epsilon: float = 0.0) -> "Skeleton":
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            a[i, j] = a[j, i] = True
        return cls(a, epsilon)

    @classmethod
    def complete(cls, n: int) -> "Skeleton":
        return cls(~np.eye(n, dtype=bool), math.inf)

    @classmethod
    def empty(cls, n: int) -> "Skeleton":
        return cls(np.zeros((n, n), dtype=bool), 0.0)

    def relabel(self, perm: Sequence[int]) -> "Skeleton":
        """Skeleton with vertex ``perm[i]`` of ``self`` renamed to ``i``."""
        p = np.asarray(perm)
        return Skeleton(self.adjacency[np.ix_(p, p)], self.epsilon)


@dataclass(frozen=True)
class ComplexStats:
    k: int
    count: int
    total: int

    @property
    def zeta(self) -> float:
        return self.count / self.total if self.total else 0.0


def vertex_bit(i: int, n: int) -> int:
    """Basis-index bit carrying vertex ``i`` (vertex 0 is the MSB)."""
    return 1 << (n - 1 - i)


def simplex_mask(vertices: Iterable[int], n: int) -> int:
    mask = 0
    for v in vertices:
        if not 0 <= v < n:
            raise ValueError(f"vertex {v} out of range for n={n}")
        mask |= vertex_bit(v, n)
    return mask


def simplex_vertices(mask: int, n: int) -> tuple[int, ...]:
    """Ascending vertex list of a simplex mask."""
    return tuple(i for i in range(n) if mask & vertex_bit(i, n))


def popcounts(n: int) -> np.ndarray:
    """Hamming weight of every index in ``range(2**n)``."""
    idx = np.arange(1 << n, dtype=np.int64)
    w = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        w += (idx >> b) & 1
    return w


def _parse_rows(rows: Iterable[tuple[int, list]]) -> np.ndarray:
    data: list[list[float]] = []
    width = None
    for lineno, row in rows:
        try:
            vals = [float(x) for x in row]
        except (TypeError, ValueError):
            raise PointCloudError(f"line {lineno}: cannot parse {row!r}") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise PointCloudError(f"line {lineno}: expected {width} values, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise PointCloudError(f"line {lineno}: non-finite value")
        data.append(vals)
    if not data or not width:
        raise PointCloudError("no points")
    return np.array(data, dtype=float)


def _read_matrix(source: IO[str] | str, fmt: str) -> tuple[np.ndarray, Optional[tuple]]:
    text = source if isinstance(source, str) else source.read()
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        rows = ((i + 1, [c.strip() for c in r]) for i, r in enumerate(reader) if r and any(c.strip() for c in r))
        return _parse_rows(rows), None
    if fmt == "json":
        try:
            obj = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise PointCloudError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
        if isinstance(obj, list):
            obj = {"points": obj}
        pts = obj.get("points") if isinstance(obj, dict) else None
        if not pts:
            raise PointCloudError("no points")
        rows = []
        for i, r in enumerate(pts):
            if not isinstance(r, list):
                raise PointCloudError(f"point {i}: expected an array, got {r!r}")
            rows.append((i + 1, r))
        labels = obj.get("labels")
        return _parse_rows(rows), tuple(labels) if labels is not None else None
    raise ValueError(f"unknown format {fmt!r}")


def load_points(source: IO[str] | str, format: str = "csv") -> PointCloud:
    """Read a point cloud from CSV text (one point per row) or JSON.

    JSON input is an object with a ``"points"`` array of coordinate arrays and
    an optional ``"labels"`` array. Errors carry the offending line (CSV) or
    point index (JSON).
    """
    pts, labels = _read_matrix(source, format)
    return PointCloud(pts, labels)


def load_distances(source: IO[str] | str, format: str = "csv") -> DistanceMatrix:
    """Read a precomputed square distance matrix in either input format."""
    d, _ = _read_matrix(source, format)
    return DistanceMatrix(d)


def pairwise_distances(cloud, metric: str = "euclidean") -> DistanceMatrix:
    """Pairwise distances between points.

    With ``metric="precomputed"`` the input is taken to be the distance
    matrix itself and is only validated.
    """
    if metric == "precomputed":
        if isinstance(cloud, DistanceMatrix):
            return cloud
        d = cloud.points if isinstance(cloud, PointCloud) else cloud
        return DistanceMatrix(d)
    pts = cloud.points if isinstance(cloud, PointCloud) else PointCloud(cloud).points
    if metric == "euclidean":
        d = cdist(pts, pts, "euclidean")
    elif metric == "manhattan":
        d = cdist(pts, pts, "cityblock")
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return DistanceMatrix(d)


def build_skeleton(d: DistanceMatrix, epsilon: float) -> Skeleton:
    """Connect every pair at distance ``<= epsilon`` (inclusive)."""
    if not (math.isfinite(epsilon) and epsilon >= 0):
        raise ValueError("epsilon must be finite and nonnegative")
    if not isinstance(d, DistanceMatrix):
        d = DistanceMatrix(d)
    return Skeleton(d.d <= epsilon, float(epsilon))


def in_complex(mask: int, g: Skeleton) -> bool:
    """Clique test: every pair of vertices in ``mask`` is adjacent.

    The empty simplex and single vertices always belong.
    """
    n = g.n
    if not 0 <= mask < (1 << n):
        raise ValueError("mask out of range")
    rest = mask
    while rest:
        low = rest & -rest
        i = n - low.bit_length()
        if mask & ~g._nbr[i]:
            return False
        rest ^= low
    return True


def clique_indicator(g: Skeleton) -> np.ndarray:
    """Boolean array over all ``2**n`` masks: ``in_complex`` evaluated everywhere."""
    n = g.n
    if n > N_MAX:
        raise ValueError(f"n={n} exceeds N_MAX={N_MAX}")
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    for i, j in g.missing_pairs():
        pair = vertex_bit(i, n) | vertex_bit(j, n)
        ok &= (idx & pair) != pair
    return ok


def complex_stats(g: Skeleton, k: int) -> ComplexStats:
    """Number of k-simplices (``(k+1)``-cliques) and the fill fraction zeta."""
    n = g.n
    if not 0 <= k <= n - 1:
        raise ValueError(f"k={k} outside 0..{n - 1}")
    count = int(np.count_nonzero(clique_indicator(g) & (popcounts(n) == k + 1)))
    return ComplexStats(k=k, count=count, total=math.comb(n, k + 1))


def simplices(g: Skeleton, k: int) -> list[int]:
    """Masks of the k-simplices in ascending index order (k = -1 gives the empty simplex)."""
    n = g.n
    if k < -1 or k > n - 1:
        return []
    sel = clique_indicator(g) & (popcounts(n) == k + 1)
    return [int(z) for z in np.flatnonzero(sel)]
