"""Pauli-sum boundary operator, projectors and restricted Laplacians.

All operators act on arrays whose first axis has length ``2**n``; a second
axis (a batch of vectors) is allowed. The arithmetic is restricted to
indexing, sign flips and masking, so integer and Python-int (``object``)
arrays pass through exactly, which the exact moment pipeline relies on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, TextIO

import numpy as np

from .complex import N_MAX, Skeleton, clique_indicator, popcounts

logger = logging.getLogger(__name__)

DENSE_MAX = 12


@dataclass(frozen=True)
class PauliTermList:
    n: int
    terms: tuple[str, ...]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)


def boundary_terms(n: int) -> PauliTermList:
    """The n Pauli strings ``Z^i X I^(n-1-i)`` whose sum is B = d + d^dagger."""
    if not 1 <= n <= N_MAX:
        raise ValueError(f"n={n} outside 1..{N_MAX}")
    return PauliTermList(n, tuple("Z" * i + "X" + "I" * (n - 1 - i) for i in range(n)))


@lru_cache(maxsize=32)
def _term_tables(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    idx = np.arange(1 << n, dtype=np.int64)
    tables = []
    for i in range(n):
        bit = 1 << (n - 1 - i)
        left = idx >> (n - i)  # vertices 0..i-1
        par = np.zeros_like(idx)
        for b in range(i):
            par ^= (left >> b) & 1
        sign = 1 - 2 * par
        perm = idx ^ bit
        # flipping bit i leaves the sign of the source unchanged
        tables.append((perm, sign[perm]))
    return tuple(tables)


def _expand(mask: np.ndarray, state: np.ndarray) -> np.ndarray:
    return mask if state.ndim == 1 else mask.reshape((-1,) + (1,) * (state.ndim - 1))


def apply_B(state: np.ndarray, terms: PauliTermList | int | None = None) -> np.ndarray:
    """Matrix-free action of B on an amplitude vector (or batch of columns)."""
    state = np.asarray(state)
    n = terms.n if isinstance(terms, PauliTermList) else terms
    if n is None:
        n = state.shape[0].bit_length() - 1
    if state.shape[0] != 1 << n:
        raise ValueError(f"state length {state.shape[0]} does not match n={n}")
    out = None
    for perm, sign in _term_tables(n):
        contrib = state[perm] * _expand(sign, state)
        out = contrib if out is None else out + contrib
    return out


def _mask(state: np.ndarray, keep: np.ndarray) -> np.ndarray:
    keep = _expand(keep, state)
    if state.dtype == object:
        return np.where(keep, state, 0)
    return state * keep


def order_mask(n: int, k: int) -> np.ndarray:
    return popcounts(n) == k + 1


def project_order(state: np.ndarray, k: int) -> np.ndarray:
    """Zero every amplitude whose index does not have Hamming weight k+1."""
    state = np.asarray(state)
    n = state.shape[0].bit_length() - 1
    return _mask(state, order_mask(n, k))


def project_complex_exact(state: np.ndarray, g: Skeleton) -> np.ndarray:
    """Zero every amplitude whose index is not a clique of ``g``."""
    state = np.asarray(state)
    if state.shape[0] != 1 << g.n:
        raise ValueError("state length does not match skeleton")
    return _mask(state, clique_indicator(g))


@dataclass(frozen=True)
class LinearOperatorHandle:
    """A linear map on ``C^(2**n)`` given by its action.

    ``support`` marks the basis states outside of which the operator is zero
    (both as input and output), when known.
    """

    n: int
    apply: Callable[[np.ndarray], np.ndarray]
    support: Optional[np.ndarray] = None
    name: str = ""

    @property
    def dim(self) -> int:
        return 1 << self.n

    def __call__(self, x):
        return self.apply(x)

    def dense(self) -> np.ndarray:
        if self.n > DENSE_MAX:
            raise ValueError(f"dense materialization limited to n <= {DENSE_MAX}")
        return self.apply(np.eye(self.dim))

    def restricted_dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense matrix on the support basis, plus the support indices."""
        idx = np.flatnonzero(self.support) if self.support is not None else np.arange(self.dim)
        cols = np.zeros((self.dim, len(idx)))
        cols[idx, np.arange(len(idx))] = 1.0
        return self.apply(cols)[idx], idx


def dirac_operator(n: int) -> LinearOperatorHandle:
    return LinearOperatorHandle(n, lambda x: apply_B(x, n), None, "B")


def _check_k(g: Skeleton, k: int, low: int = 0):
    if not low <= k <= g.n - 1:
        raise ValueError(f"k={k} outside {low}..{g.n - 1}")


def restricted_laplacian(g: Skeleton, k: int) -> LinearOperatorHandle:
    """Delta_k = P_k P_G B P_G B P_G P_k, composed matrix-free."""
    _check_k(g, k)
    n = g.n
    clique = clique_indicator(g)
    inner = clique & order_mask(n, k)

    def apply(x):
        x = np.asarray(x)
        y = _mask(x, inner)
        y = _mask(apply_B(y, n), clique)
        return _mask(apply_B(y, n), inner)

    return LinearOperatorHandle(n, apply, inner, f"Delta_{k}")


def restricted_boundary(g: Skeleton, k: int) -> LinearOperatorHandle:
    """P_{k-1} P_G B P_G P_k: the boundary map restricted to the complex."""
    _check_k(g, k, low=1)
    n = g.n
    clique = clique_indicator(g)
    src = clique & order_mask(n, k)
    dst = clique & order_mask(n, k - 1)

    def apply(x):
        return _mask(apply_B(_mask(np.asarray(x), src), n), dst)

    return LinearOperatorHandle(n, apply, None, f"boundary_{k}")


@dataclass(frozen=True)
class ScaledLaplacian:
    """``scale * base`` with spectrum inside [0, 1].

    ``scale`` is a dyadic :class:`~fractions.Fraction` so that exact integer
    moment pipelines can carry it without rounding. ``delta`` is the assumed
    smallest nonzero eigenvalue of the scaled operator (``None`` when the
    operator is zero).
    """

    base: LinearOperatorHandle
    scale: Fraction
    delta: Optional[float]
    lambda_max: float
    flags: tuple[str, ...] = field(default_factory=tuple)

    def apply(self, x):
        return float(self.scale) * self.base.apply(x)


SCALE_BITS = 30


def _power_iteration(op: LinearOperatorHandle, min_iter: int = 50, max_iter: int = 5000, tol: float = 1e-12):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(op.dim)
    if op.support is not None:
        x = x * op.support
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return 0.0, True
    x /= nrm
    lam_prev = None
    for it in range(max_iter):
        y = op.apply(x)
        lam = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0, True
        x = y / ny
        if it >= min_iter and lam_prev is not None and abs(lam - lam_prev) <= tol * max(abs(lam), 1.0):
            return lam, True
        lam_prev = lam
    return lam, False


def smallest_nonzero_eigenvalue(op: LinearOperatorHandle, tol: float = 1e-8) -> Optional[float]:
    mat, _ = op.restricted_dense()
    if mat.size == 0:
        return None
    ev = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    pos = ev[ev > tol * max(1.0, op.n)]
    return float(pos[0]) if pos.size else None


def scale_laplacian(op: LinearOperatorHandle, delta_hint: Optional[float] = None) -> ScaledLaplacian:
    """Scale a PSD operator into [0, 1] using a power-iteration estimate of its top eigenvalue.

    The scale is ``1 / (1.01 * lambda_hat)`` rounded down to a dyadic
    rational; it falls back to ``1/n`` (B^2 = nI bounds every restricted
    Laplacian) when the iteration does not settle.
    """
    flags = []
    lam, converged = _power_iteration(op)
    if lam <= 0:
        return ScaledLaplacian(op, Fraction(1), None, 0.0, ("zero-operator", "delta-undefined"))
    if converged:
        s_float = 1.0 / (1.01 * lam)
    else:
        flags.append("scale-fallback")
        logger.warning("power iteration did not converge for %s; using scale 1/n", op.name)
        s_float = 1.0 / op.n
    scale = Fraction(int(s_float * (1 << SCALE_BITS)), 1 << SCALE_BITS)
    if delta_hint is not None:
        delta = float(delta_hint)
    elif op.n <= DENSE_MAX:
        lam_min = smallest_nonzero_eigenvalue(op)
        delta = None if lam_min is None else float(scale) * lam_min
        flags.append("delta-measured")
    else:
        delta = None
    if delta is None:
        flags.append("delta-undefined")
    return ScaledLaplacian(op, scale, delta, lam, tuple(flags))


def dump_dense(op: LinearOperatorHandle, stream: TextIO) -> None:
    """Write the dense matrix row-major as ``re im`` pairs, one row per line."""
    mat = np.asarray(op.dense(), dtype=complex)
    stream.write(f"{mat.shape[0]} {mat.shape[1]}\n")
    for row in mat:
        stream.write(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row) + "\n")


def load_dense(stream: TextIO) -> np.ndarray:
    rows, cols = (int(v) for v in stream.readline().split())
    out = np.empty((rows, cols), dtype=complex)
    for r in range(rows):
        vals = [float(v) for v in stream.readline().split()]
        out[r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return out
