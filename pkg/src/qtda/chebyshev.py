"""Chebyshev approximation of the rank step function and moment conversion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb


@dataclass(frozen=True)
class ChebSeries:
    """``sum_j coeffs[j] T_j(u)`` with ``u`` the affine image of ``domain`` on [-1, 1]."""

    coeffs: np.ndarray
    domain: tuple[float, float] = (-1.0, 1.0)

    @property
    def m(self) -> int:
        return len(self.coeffs) - 1

    def to_unit(self, x):
        lo, hi = self.domain
        return (2 * np.asarray(x, dtype=float) - (hi + lo)) / (hi - lo)

    def __call__(self, x):
        return npcheb.chebval(self.to_unit(x), self.coeffs)

    def truncate(self, m: int) -> "ChebSeries":
        return ChebSeries(self.coeffs[: m + 1], self.domain)


def step_coefficients(m: int, a: float, b: float) -> ChebSeries:
    """Chebyshev coefficients of the indicator of [a, b] inside [-1, 1]."""
    if not (-1.0 <= a < b <= 1.0):
        raise ValueError(f"invalid interval [{a}, {b}]")
    if m < 0:
        raise ValueError("degree must be nonnegative")
    ta, tb = math.acos(a), math.acos(b)
    c = np.empty(m + 1)
    c[0] = (ta - tb) / math.pi
    j = np.arange(1, m + 1)
    c[1:] = 2.0 / math.pi * (np.sin(j * ta) - np.sin(j * tb)) / j
    return ChebSeries(c)


def rank_step_series(m: int, delta: float, gamma: float = 0.5) -> ChebSeries:
    """Step rising at ``gamma * delta`` for operators with spectrum in [0, 1]."""
    s = step_coefficients(m, 2.0 * gamma * delta - 1.0, 1.0)
    return ChebSeries(s.coeffs, (0.0, 1.0))


def tanh_surrogate(delta: float, epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth stand-in for the step: 0.5 * (1 + tanh(alpha (x - delta/2)))."""
    if not (0 < delta < 1 and 0 < epsilon < 1):
        raise ValueError("delta and epsilon must lie in (0, 1)")
    alpha = math.log(2.0 / epsilon) / delta

    def f(x):
        return 0.5 * (1.0 + np.tanh(alpha * (np.asarray(x, dtype=float) - delta / 2)))

    f.alpha = alpha
    return f


def degree_bound(delta: float, epsilon: float) -> int:
    """Smallest Chebyshev degree meeting the step-approximation bound (natural logs)."""
    if not (0 < delta < 1 and 0 < epsilon < 1):
        raise ValueError("delta and epsilon must lie in (0, 1)")
    L = math.log(2.0 / epsilon)
    m = math.log(32.0 * L / (math.pi * delta * epsilon)) / math.log1p(math.pi * delta / (4.0 * L))
    return max(1, math.ceil(m))


def probe_bound(eta: float, epsilon: float, c_nv: float = 1.0, r: float = 1.0) -> int:
    """Number of Hadamard probes ``ceil(c_nv r^2 log(2/eta) / epsilon^2)``."""
    if not (0 < eta < 1 and 0 < epsilon < 1):
        raise ValueError("eta and epsilon must lie in (0, 1)")
    if c_nv <= 0:
        raise ValueError("c_nv must be positive")
    return max(1, math.ceil(c_nv * r * r * math.log(2.0 / eta) / epsilon**2))


def g_factor(j: int, i: int) -> Fraction:
    """binom(2i, i) binom(j, 2i) / binom(j-1, i), exactly."""
    if j < 1 or not 0 <= 2 * i <= j:
        raise ValueError(f"g({j}, {i}) undefined")
    num = math.comb(2 * i, i) * math.comb(j, 2 * i)
    return Fraction(num, math.comb(j - 1, i))


@lru_cache(maxsize=8)
def power_to_chebyshev_table(m: int) -> tuple[tuple[int, ...], ...]:
    """Integer monomial coefficients of T_j: row j lists the weight of x^(j-2i), i = 0..j//2."""
    rows: list[tuple[int, ...]] = [(1,)]
    for j in range(1, m + 1):
        row = []
        for i in range(j // 2 + 1):
            val = (-1) ** i * Fraction(2) ** (j - 2 * i - 1) * g_factor(j, i)
            if val.denominator != 1:
                raise ArithmeticError(f"non-integer coefficient at ({j}, {i})")
            row.append(int(val))
        rows.append(tuple(row))
    return tuple(rows)


def cheb_from_power(power_moments: Sequence, j: int):
    """Chebyshev moment theta_j from power moments mu_0..mu_j via the monomial expansion of T_j.

    Exact inputs (int / Fraction) give an exact Fraction. Float inputs are
    accumulated exactly and rounded once, so the only error left is the one
    already present in the moments.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    if len(power_moments) <= j:
        raise ValueError(f"need moments through index {j}, got {len(power_moments)}")
    if j <= 1:
        return power_moments[j]
    floats = any(isinstance(v, (float, np.floating)) for v in power_moments[: j + 1])
    row = power_to_chebyshev_table(j)[j]
    acc = Fraction(0)
    for i, coef in enumerate(row):
        acc += coef * Fraction(power_moments[j - 2 * i])
    return float(acc) if floats else acc


def _to_float(num: np.ndarray, shift: int) -> np.ndarray:
    den = 1 << shift
    return np.array([int(v) / den for v in num.ravel()], dtype=float).reshape(num.shape)


def exact_chebyshev_moments(powers: np.ndarray, scale: Fraction, norm_bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Power and Chebyshev moments of ``2A - I`` from exact integer moments of the unscaled operator.

    ``powers[r, l]`` is the integer ``u_l^T L^r u_l`` for an integer probe
    ``u_l`` whose normalized version is ``u_l / 2**(norm_bits/2)``. With
    ``A = scale * L`` (``scale`` dyadic) this returns ``mu[r, l]`` (normalized
    power moments of A) and ``theta[j, l] = <v_l|T_j(2A - I)|v_l>``.

    The shift to [-1, 1] is a binomial transform evaluated as the table
    ``X[i+1][r] = 2 X[i][r+1] - 2^e X[i][r]`` on integer numerators; the
    Chebyshev moments then follow from the monomial coefficients of T_j.
    """
    a, den = scale.numerator, scale.denominator
    e = den.bit_length() - 1
    if den != 1 << e:
        raise ValueError("scale must be a dyadic rational")
    M = np.asarray(powers, dtype=object)
    m = M.shape[0] - 1
    apow = np.array([a**r for r in range(m + 1)], dtype=object).reshape((-1,) + (1,) * (M.ndim - 1))
    X = M * apow  # X[0][r] = a^r M_r, denominator 2^(e r + n)
    mu = np.empty(M.shape, dtype=float)
    for r in range(m + 1):
        mu[r] = _to_float(X[r], e * r + norm_bits)
    nu = np.empty(M.shape, dtype=object)
    nu[0] = X[0]
    for i in range(1, m + 1):
        X = 2 * X[1:] - (X[:-1] << e) if e else 2 * X[1:] - X[:-1]
        nu[i] = X[0]  # nu_i numerator, denominator 2^(e i + n)
    table = power_to_chebyshev_table(m)
    theta = np.empty(M.shape, dtype=float)
    for j in range(m + 1):
        acc = 0
        for i, coef in enumerate(table[j]):
            acc = acc + (coef << (2 * e * i)) * nu[j - 2 * i]
        theta[j] = _to_float(np.asarray(acc, dtype=object), e * j + norm_bits)
    return mu, theta


def recurrence_moments(apply: Callable[[np.ndarray], np.ndarray], v: np.ndarray, m: int) -> np.ndarray:
    """<v|T_j(C)|v> for j = 0..m by the three-term recurrence w_{j+1} = 2 C w_j - w_{j-1}."""
    v = np.asarray(v)
    out = np.empty((m + 1,) + v.shape[1:], dtype=float)
    w_prev = v
    out[0] = np.real(np.sum(np.conj(v) * v, axis=0))
    if m == 0:
        return out
    w = apply(v)
    out[1] = np.real(np.sum(np.conj(v) * w, axis=0))
    for j in range(2, m + 1):
        w, w_prev = 2 * apply(w) - w_prev, w
        out[j] = np.real(np.sum(np.conj(v) * w, axis=0))
    return out
