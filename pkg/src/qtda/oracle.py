"""Ground truth: exact Betti numbers, dense exponentials and the classical Chebyshev rank."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .boundary import LinearOperatorHandle, ScaledLaplacian, restricted_laplacian
from .chebyshev import degree_bound, probe_bound, rank_step_series, recurrence_moments
from .complex import Skeleton, simplex_vertices, simplices

ORACLE_MAX = 12


@dataclass(frozen=True)
class SpectrumSummary:
    eigenvalues: np.ndarray
    zero_count: int
    smallest_nonzero: Optional[float]
    tolerance: float


def _check_size(g: Skeleton):
    if g.n > ORACLE_MAX:
        raise ValueError(f"dense oracle limited to n <= {ORACLE_MAX}, got {g.n}")


def default_tolerance(n: int, delta: Optional[float] = None) -> float:
    tol = 1e-8 * max(1, n)
    return max(tol, delta / 2) if delta else tol


def spectrum(mat: np.ndarray, tol: float) -> SpectrumSummary:
    ev = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T)) if mat.size else np.zeros(0)
    zero = int(np.count_nonzero(ev < tol))
    pos = ev[ev >= tol]
    return SpectrumSummary(ev, zero, float(pos[0]) if pos.size else None, tol)


def exact_betti_laplacian(g: Skeleton, k: int, tol: Optional[float] = None) -> tuple[int, SpectrumSummary]:
    """Reduced Betti number as the kernel dimension of the restricted Laplacian."""
    _check_size(g)
    tol = default_tolerance(g.n) if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    mat, _ = restricted_laplacian(g, k).restricted_dense()
    spec = spectrum(mat, tol)
    return spec.zero_count, spec


def boundary_matrix(g: Skeleton, k: int) -> np.ndarray:
    """Integer matrix of the oriented boundary from k-simplices to (k-1)-simplices.

    Built combinatorially from sorted vertex lists, independently of the
    Pauli representation. ``k = 0`` maps every vertex to the empty simplex.
    """
    n = g.n
    rows = simplices(g, k - 1)
    cols = simplices(g, k)
    pos = {s: r for r, s in enumerate(rows)}
    out = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for c, s in enumerate(cols):
        for l, v in enumerate(simplex_vertices(s, n)):
            face = s & ~(1 << (n - 1 - v))
            out[pos[face], c] += (-1) ** l
    return out


def _rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat.astype(float), compute_uv=False)
    return int(np.count_nonzero(sv > 1e-8 * sv[0])) if sv[0] > 0 else 0


def exact_betti_ranks(g: Skeleton, k: int) -> int:
    """|S_k| - rank(d_k) - rank(d_{k+1}) from the integer boundary matrices."""
    _check_size(g)
    if not 0 <= k <= g.n - 1:
        raise ValueError(f"k={k} outside 0..{g.n - 1}")
    size = len(simplices(g, k))
    return size - _rank(boundary_matrix(g, k)) - _rank(boundary_matrix(g, k + 1))


def unreduced_betti(g: Skeleton, k: int) -> int:
    b = exact_betti_ranks(g, k)
    return b + 1 if k == 0 else b


def dense_expm(op: LinearOperatorHandle | np.ndarray, t: float) -> np.ndarray:
    """exp(-i t op) by scaling and squaring on the materialized matrix."""
    mat = op.dense() if isinstance(op, LinearOperatorHandle) else np.asarray(op)
    if mat.shape[0] > 256:
        raise ValueError("dense exponential limited to dimension 256")
    return scipy.linalg.expm(-1j * t * mat)


def classical_cheb_rank(op, params, rng) -> float:
    """Stochastic Chebyshev rank of a [0, 1]-scaled operator via the three-term recurrence.

    Probes are Hadamard columns of the operator's ``2**n`` space (all of
    them when ``params.trace_mode == "all-columns"``); the trace estimate is
    scaled back to an eigenvalue count.
    """
    from .simulator import hadamard_signs

    if isinstance(op, ScaledLaplacian):
        scale, base = float(op.scale), op.base
        delta = params.delta if params.delta is not None else op.delta
    else:
        scale, base, delta = 1.0, op, params.delta
    if delta is None:
        raise ValueError("delta is required")
    m = params.m or degree_bound(delta, params.epsilon)
    series = rank_step_series(m, delta)
    n = base.n
    dim = 1 << n
    if params.trace_mode == "all-columns":
        cols = list(range(dim))
    else:
        nv = params.n_v or probe_bound(params.eta, params.epsilon)
        cols = [rng.integers(dim) for _ in range(nv)]
    V = np.stack([hadamard_signs(n, b) for b in cols], axis=1) / np.sqrt(dim)

    def shifted(x):
        return 2.0 * scale * base.apply(x) - x

    theta = recurrence_moments(shifted, V, m)
    return float(dim * np.mean(series.coeffs @ theta))
