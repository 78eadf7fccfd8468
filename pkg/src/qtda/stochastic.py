"""Stochastic Chebyshev estimation of normalized Betti numbers.

Each probe is a Hadamard column ``v``. Its power moments
``mu_i = <v|A^i|v>`` of the scaled Laplacian ``A`` are read off as squared
norms of ``phi_i = prod_j (P_G P_k^(j%2) B) P_G P_k v``; the Chebyshev
moments of ``2A - I`` follow from the monomial expansion of ``T_j`` and are
combined with the step coefficients into ``chi_k``.

Moments are carried in exact integer arithmetic: the probe is the +-1
vector, B has +-1 entries and the projectors only zero entries, so
``||phi_i||^2`` is an integer. Floating-point moments would not survive the
power-to-Chebyshev conversion beyond degree ~15.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .boundary import (
    DENSE_MAX,
    ScaledLaplacian,
    apply_B,
    order_mask,
    restricted_laplacian,
    scale_laplacian,
)
from .chebyshev import (
    degree_bound,
    exact_chebyshev_moments,
    probe_bound,
    rank_step_series,
    recurrence_moments,
)
from .complex import N_MAX, Skeleton, clique_indicator, complex_stats
from .simulator import (
    RngStream,
    StateVector,
    hadamard_signs,
    project_complex_sampled,
    project_order_sampled,
    trotter_unitary,
)

logger = logging.getLogger(__name__)

MOMENT_MODES = ("exact-operator", "trotter-extraction", "recurrence")
PROJECTIONS = ("exact", "sampled")
TRACE_MODES = ("sampled-probes", "all-columns")
FAILURE_FLAGS = frozenset({"projection-failed", "nonfinite"})


@dataclass(frozen=True)
class EstimatorParams:
    """Accuracy targets and execution modes for one estimate.

    ``delta``, ``m`` and ``n_v`` left as ``None`` are resolved at run time:
    delta from the measured spectral gap, m and n_v from the error bounds.
    """

    epsilon: float = 0.2
    eta: float = 0.1
    delta: Optional[float] = None
    m: Optional[int] = None
    n_v: Optional[int] = None
    c_nv: float = 1.0
    moment_mode: str = "exact-operator"
    projection: str = "exact"
    trace_mode: str = "sampled-probes"
    trotter_t: float = 1e-3
    gamma: float = 0.5
    max_attempts: int = 10_000

    def __post_init__(self):
        for name in ("epsilon", "eta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n_v is not None and self.n_v < 1:
            raise ValueError("n_v must be >= 1")
        if self.moment_mode not in MOMENT_MODES:
            raise ValueError(f"moment_mode must be one of {MOMENT_MODES}")
        if self.projection not in PROJECTIONS:
            raise ValueError(f"projection must be one of {PROJECTIONS}")
        if self.trace_mode not in TRACE_MODES:
            raise ValueError(f"trace_mode must be one of {TRACE_MODES}")

    def resolve(self, delta: float) -> "EstimatorParams":
        return replace(
            self,
            delta=delta,
            m=self.m or degree_bound(delta, self.epsilon),
            n_v=self.n_v or probe_bound(self.eta, self.epsilon, self.c_nv),
        )


@dataclass
class MomentRow:
    """Moments for one probe column ``b``."""

    b: int
    mu: np.ndarray
    theta: np.ndarray
    attempts: int = 0
    flags: tuple[str, ...] = ()


@dataclass
class EstimationReport:
    k: int
    scale_epsilon: float
    chi: float
    chi_raw: float
    params: dict
    probes: list[int]
    dim_estimate: float
    simplex_count: int
    flags: list[str] = field(default_factory=list)
    beta_oracle: Optional[int] = None
    seed: Optional[list[int]] = None
    moments: Optional[dict] = None
    wall_time: Optional[float] = None

    @property
    def beta_estimate(self) -> float:
        return self.chi * self.dim_estimate

    def to_dict(self, include_moments: bool = True, include_timing: bool = False) -> dict:
        d = asdict(self)
        d["beta_estimate"] = self.beta_estimate
        if not math.isfinite(d["chi_raw"]):
            d["chi_raw"] = None  # keep the output strict JSON
        if not include_moments:
            d.pop("moments")
        if not include_timing:
            d.pop("wall_time")
        return d


# ---------------------------------------------------------------------------
# moment engines


def _inner_masks(g: Skeleton, k: int):
    clique = clique_indicator(g)
    return clique, clique & order_mask(g.n, k)


def _sumsq(x: np.ndarray):
    return (x * x).sum(axis=0)


def _mask_cols(x: np.ndarray, keep: np.ndarray) -> np.ndarray:
    return np.where(keep[:, None], x, 0)


def integer_moments_exact(U: np.ndarray, g: Skeleton, k: int, m: int) -> np.ndarray:
    """Integer ||phi_i||^2, i = 0..m, for integer probe columns ``U`` with exact projectors."""
    n = g.n
    clique, inner = _inner_masks(g, k)
    order = order_mask(n, k)
    psi = _mask_cols(np.asarray(U, dtype=object), inner)
    out = np.empty((m + 1, psi.shape[1]), dtype=object)
    out[0] = _sumsq(psi)
    for i in range(1, m + 1):
        psi = apply_B(psi, n)
        psi = _mask_cols(psi, clique & order if (i - 1) % 2 == 1 else clique)
        out[i] = _sumsq(psi)
    return out


def _sampled(proj, keep: np.ndarray, state: StateVector, rng: RngStream, max_attempts: int):
    """Repeat a measurement-based projection until it succeeds.

    The pre-measurement state is deterministic, so re-running the shot is the
    same as re-sampling the measurement on an unchanged copy. When the target
    subspace carries no amplitude every shot fails; the budget is charged
    without simulating it and the projected state is the zero vector (the
    success-frequency estimate of its norm). Returns (state, attempts, status)
    with status "ok", "zero" or "failed".
    """
    if not any(state.amps):
        return state, 0, "ok"
    if not any(state.amps[keep]):
        return StateVector(state.n, np.zeros_like(state.amps)), max_attempts, "zero"
    for attempt in range(1, max_attempts + 1):
        res = proj(state, rng)
        if res.success:
            return res.state, attempt, "ok"
    return res.state, max_attempts, "failed"


def integer_moments_sampled(u: np.ndarray, g: Skeleton, k: int, m: int, rng: RngStream,
                            max_attempts: int = 10_000) -> tuple[np.ndarray, int, tuple[str, ...]]:
    """Same chain as :func:`integer_moments_exact` for one probe, with both projectors
    realized by seeded mid-circuit measurement and post-selection."""
    n = g.n
    clique = clique_indicator(g)
    order = order_mask(n, k)

    def p_order(s, r):
        return project_order_sampled(s, r, want_k=k, renormalize=False)

    def p_complex(s, r):
        return project_complex_sampled(s, g, r, renormalize=False)

    state = StateVector(n, np.asarray(u, dtype=object))
    attempts = 0
    flags: set[str] = set()
    out = np.empty(m + 1, dtype=object)
    for i in range(m + 1):
        if i > 0:
            state = StateVector(n, apply_B(state.amps, n))
        steps = [(p_order, order)] if i == 0 or (i - 1) % 2 == 1 else []
        for proj, keep in steps + [(p_complex, clique)]:
            state, a, status = _sampled(proj, keep, state, rng, max_attempts)
            attempts += a
            if status == "zero":
                flags.add("zero-success")
            elif status == "failed":
                flags.add("projection-failed")
                state = StateVector(n, np.zeros_like(state.amps))
        out[i] = state.norm2()
    return out, attempts, tuple(sorted(flags))


def _trotter_first_moment(g: Skeleton, k: int, b: int, t: float) -> float:
    """Unscaled <v|Delta_k|v> from two applications of the Trotter unitary.

    M = <w| U P_G U |w> with w = P_G P_k v; then
    <v|Delta_k|v> ~ Re(<w|w> (1 - n t^2) - M) / t^2.
    """
    n = g.n
    if n > DENSE_MAX:
        raise ValueError("trotter extraction limited to n <= 12")
    clique, inner = _inner_masks(g, k)
    v = hadamard_signs(n, b) / 2 ** (n / 2)
    w = v * inner
    U = trotter_unitary(n, t)
    M = np.vdot(w, U @ (clique * (U @ w)))
    return float(np.real(np.vdot(w, w) * (1 - n * t * t) - M) / (t * t))


def _probe_key(u: np.ndarray, inner: np.ndarray) -> tuple:
    r = u[inner]
    nz = np.flatnonzero(r)
    if nz.size and r[nz[0]] < 0:
        r = -r
    return tuple(int(x) for x in r)


def moment_rows(g: Skeleton, k: int, columns: list[int], scaled: ScaledLaplacian, m: int,
                params: EstimatorParams, rng: Optional[RngStream] = None) -> dict[int, MomentRow]:
    """Moment rows for the distinct probe columns ``columns``."""
    n = g.n
    _, inner = _inner_masks(g, k)
    rows: dict[int, MomentRow] = {}
    if params.moment_mode == "recurrence":
        s = float(scaled.scale)
        V = np.stack([hadamard_signs(n, b) for b in columns], axis=1) / 2 ** (n / 2)
        V = V * inner[:, None]
        theta = recurrence_moments(lambda x: 2 * s * scaled.base.apply(x) - x, V, m)
        mu0 = np.sum(V * V, axis=0)
        for c, b in enumerate(columns):
            rows[b] = MomentRow(b, np.array([mu0[c]]), theta[:, c])
        return rows

    # identical restrictions (up to sign) share their moments
    groups: dict[tuple, list[int]] = {}
    for b in columns:
        groups.setdefault(_probe_key(hadamard_signs(n, b), inner), []).append(b)
    reps = [bs[0] for bs in groups.values()]
    U = np.stack([hadamard_signs(n, b) for b in reps], axis=1).astype(object)
    attempts = np.zeros(len(reps), dtype=np.int64)
    flags: list[tuple[str, ...]] = [()] * len(reps)
    if params.projection == "exact":
        M = integer_moments_exact(U, g, k, m)
    else:
        if rng is None:
            raise ValueError("sampled projection needs an rng")
        M = np.empty((m + 1, len(reps)), dtype=object)
        for c, b in enumerate(reps):
            M[:, c], attempts[c], flags[c] = integer_moments_sampled(
                U[:, c], g, k, m, rng.substream(b), params.max_attempts)
    norm_bits = n
    if params.moment_mode == "trotter-extraction":
        # replace the first moment by its Trotter estimate; keep everything integer
        est = [Fraction(_trotter_first_moment(g, k, b, params.trotter_t) * 2**n) for b in reps]
        den_bits = max(f.denominator.bit_length() - 1 for f in est)
        M = M * (1 << den_bits)
        for c, f in enumerate(est):
            M[1, c] = (f * (1 << den_bits)).numerator
        norm_bits += den_bits
        flags = [fl + ("trotter-moment",) for fl in flags]
    mu, theta = exact_chebyshev_moments(M, scaled.scale, norm_bits)
    for c, bs in enumerate(groups.values()):
        for b in bs:
            rows[b] = MomentRow(b, mu[:, c], theta[:, c], int(attempts[c]), flags[c])
    return rows


def power_moments(probe: StateVector | int, g: Skeleton, k: int, m: int, params: EstimatorParams,
                  scaled: Optional[ScaledLaplacian] = None, rng: Optional[RngStream] = None) -> MomentRow:
    """Power and Chebyshev moments for a single Hadamard probe.

    ``probe`` is either the column index ``b`` or a state prepared by
    :func:`~qtda.simulator.prepare_hadamard_probe` (the column is recovered
    from its sign pattern).
    """
    n = g.n
    if isinstance(probe, StateVector):
        signs = np.sign(np.real(probe.amps.astype(complex))).astype(np.int64)
        b = 0
        for i in range(n):
            if signs[1 << (n - 1 - i)] < 0:
                b |= 1 << (n - 1 - i)
        if not np.array_equal(signs, hadamard_signs(n, b)):
            raise ValueError("probe is not a Hadamard column")
    else:
        b = int(probe)
    if scaled is None:
        scaled = scale_laplacian(restricted_laplacian(g, k), params.delta)
    row = moment_rows(g, k, [b], scaled, m, params, rng)[b]
    if complex_stats(g, k).count == 0:
        row.flags = row.flags + ("empty-order",)
    return row


# ---------------------------------------------------------------------------


def _draw_columns(n: int, params: EstimatorParams, rng: RngStream) -> list[int]:
    if params.trace_mode == "all-columns":
        if n > 10:
            raise ValueError("all-columns mode limited to n <= 10")
        return list(range(1 << n))
    return [rng.integers(1 << n) for _ in range(params.n_v)]


def estimate_betti(g: Skeleton, k: int, params: EstimatorParams, rng: RngStream,
                   scaled: Optional[ScaledLaplacian] = None, cache: Optional[dict] = None,
                   oracle: bool = False, include_moments: bool = True) -> EstimationReport:
    """Estimate ``chi_k ~ beta_k / |S_k|`` for one order of one complex.

    ``cache`` (optional) maps probe columns to already computed moment rows;
    it must only be shared between calls with the same complex, order,
    scaling and parameters.
    """
    t0 = time.perf_counter()
    n = g.n
    if n > N_MAX:
        raise ValueError(f"n={n} exceeds {N_MAX}")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k={k} outside 0..{n - 1}")
    count = complex_stats(g, k).count
    flags: list[str] = []
    beta = None
    if oracle:
        from .oracle import exact_betti_ranks
        beta = exact_betti_ranks(g, k)

    def report(chi, chi_raw, p, probes, dim_est, moments=None):
        return EstimationReport(
            k=k, scale_epsilon=g.epsilon, chi=chi, chi_raw=chi_raw, params=p, probes=probes,
            dim_estimate=dim_est, simplex_count=count, flags=flags, beta_oracle=beta,
            seed=[rng.seed, *rng.path], moments=moments, wall_time=time.perf_counter() - t0)

    if count == 0:
        flags.append("empty-order")
        return report(0.0, 0.0, asdict(params), [], 0.0)

    if scaled is None:
        scaled = scale_laplacian(restricted_laplacian(g, k), params.delta)
    flags.extend(scaled.flags)
    delta = params.delta if params.delta is not None else scaled.delta
    if delta is None:
        # zero Laplacian on a nonempty order: every simplex is a cycle
        flags.append("zero-operator")
        return report(1.0, 1.0, asdict(params), [], float(count))
    delta = min(delta, 1 - 1e-12)
    p = params.resolve(delta)
    pdict = asdict(p)
    pdict.update(scale=str(scaled.scale), lambda_max=scaled.lambda_max)

    columns = _draw_columns(n, p, rng)
    series = rank_step_series(p.m, p.delta, p.gamma)
    cache = {} if cache is None else cache
    missing = sorted(set(columns) - cache.keys())
    if missing:
        cache.update(moment_rows(g, k, missing, scaled, p.m, p, rng.substream(0xC0FFEE)))
    rows = [cache[b] for b in columns]
    for r in rows:
        for f in r.flags:
            if f not in flags:
                flags.append(f)
    num = sum(float(series.coeffs @ r.theta) for r in rows)
    den = sum(float(r.mu[0]) for r in rows)
    chi_raw = 1.0 - num / den if den > 0 else math.nan
    if not math.isfinite(chi_raw):
        flags.append("nonfinite")
    chi = min(1.0, max(0.0, chi_raw)) if math.isfinite(chi_raw) else 0.0
    if math.isfinite(chi_raw) and chi != chi_raw:
        flags.append("clamped")
    dim_est = (1 << n) * den / len(rows)
    moments = None
    if include_moments:
        uniq = sorted(set(columns))
        moments = {
            "columns": uniq,
            "mu": [cache[b].mu.tolist() for b in uniq],
            "theta": [cache[b].theta.tolist() for b in uniq],
            "attempts": [cache[b].attempts for b in uniq],
        }
    return report(chi, chi_raw, pdict, columns, dim_est, moments)
