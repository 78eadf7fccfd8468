"""Scale sweeps over a point cloud and machine-readable Betti-curve output."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from .boundary import DENSE_MAX, restricted_laplacian, scale_laplacian
from .complex import (
    DistanceMatrix,
    PointCloudError,
    build_skeleton,
    load_distances,
    load_points,
)
from .oracle import ORACLE_MAX
from .simulator import RngStream
from .stochastic import FAILURE_FLAGS, EstimatorParams, estimate_betti
from .validation import ConfigError, check_epsilons, check_orders, check_point_cloud, check_seed

logger = logging.getLogger(__name__)

WORKERS_ENV = "QTDA_WORKERS"
MODES = ("exact", "sampled", "all-columns")
#: largest vertex count each mode accepts
MODE_LIMITS = {"exact": 14, "sampled": 12, "all-columns": 10}
EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED = 0, 1, 2


def mode_params(mode: str, params: EstimatorParams) -> EstimatorParams:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "sampled":
        return replace(params, projection="sampled", trace_mode="sampled-probes")
    if mode == "all-columns":
        return replace(params, projection="exact", trace_mode="all-columns")
    return replace(params, projection="exact", trace_mode="sampled-probes")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a sweep.

    ``input`` may be omitted when the caller hands the distances to
    :func:`run` directly.
    """

    epsilons: tuple[float, ...]
    orders: object = "all"
    params: EstimatorParams = field(default_factory=EstimatorParams)
    mode: str = "exact"
    seed: int = 0
    oracle: bool = False
    input: Optional[str] = None
    format: str = "csv"
    metric: str = "euclidean"
    out: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "epsilons", check_epsilons(self.epsilons))
        object.__setattr__(self, "seed", check_seed(self.seed))
        object.__setattr__(self, "params", mode_params(self.mode, self.params))
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.metric not in ("euclidean", "manhattan", "precomputed"):
            raise ConfigError(f"unknown metric {self.metric!r}")
        if not isinstance(self.orders, str):
            object.__setattr__(self, "orders", check_orders(self.orders, 1 << 30))
        else:
            check_orders(self.orders, 0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["orders"] = self.orders if isinstance(self.orders, str) else list(self.orders)
        d["epsilons"] = list(self.epsilons)
        d.pop("out")  # where results land does not affect them
        return d


@dataclass
class BettiCurve:
    """One record per requested (scale, order), sorted by scale then order."""

    records: list[dict]
    n_points: int
    reduced: bool = True

    def table(self, key: str = "beta_estimate"):
        import numpy as np

        eps = sorted({r["epsilon"] for r in self.records})
        ks = sorted({r["k"] for r in self.records})
        out = np.full((len(eps), len(ks)), np.nan)
        for r in self.records:
            v = r.get(key)
            if v is not None:
                out[eps.index(r["epsilon"]), ks.index(r["k"])] = v
        return out


@dataclass
class RunResult:
    config: RunConfig
    curve: BettiCurve
    reports: list
    flags: list[str]

    @property
    def exit_code(self) -> int:
        return EXIT_FLAGGED if self.flags else EXIT_OK

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "n_points": self.curve.n_points,
            "cells": len(self.curve.records),
            "failures": self.flags,
            "exit_code": self.exit_code,
        }


def load_input(config: RunConfig) -> DistanceMatrix:
    if config.input is None:
        raise ConfigError("no input given")
    try:
        text = Path(config.input).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {config.input}: {exc.strerror}") from None
    if config.metric == "precomputed":
        return load_distances(text, config.format)
    return check_point_cloud(load_points(text, config.format), config.metric)


def _check_limits(config: RunConfig, n: int):
    limit = MODE_LIMITS[config.mode]
    if n > limit:
        raise ConfigError(f"{n} points exceed the {config.mode} mode limit of {limit}")
    if config.params.delta is None and n > DENSE_MAX:
        raise ConfigError(f"measuring delta needs n <= {DENSE_MAX}; pass delta explicitly")
    if config.oracle and n > ORACLE_MAX:
        raise ConfigError(f"oracle limited to n <= {ORACLE_MAX}")


def _run_cell(job):
    g, ei, k, params, seed, oracle = job
    rng = RngStream(seed, ei, k)
    scaled = None
    if g.n >= 1 and k <= g.n - 1:
        scaled = scale_laplacian(restricted_laplacian(g, k), params.delta)
    rep = estimate_betti(g, k, params, rng, scaled=scaled, oracle=oracle)
    rep.wall_time = None
    return rep


def _record(rep, abne: bool) -> dict:
    flags = list(rep.flags) + (["ABNE"] if abne else [])
    return {
        "epsilon": rep.scale_epsilon,
        "k": rep.k,
        "chi": rep.chi,
        "beta_estimate": rep.beta_estimate,
        "beta_oracle": rep.beta_oracle,
        "dim_estimate": rep.dim_estimate,
        "simplex_count": rep.simplex_count,
        "flags": flags,
    }


def workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, w)


def run(config: RunConfig, distances: Optional[DistanceMatrix] = None, workers: Optional[int] = None) -> RunResult:
    """Estimate every requested (scale, order) cell.

    Each cell draws from its own substream ``(seed, scale index, k)``, so
    results do not depend on the worker count or on which other cells were
    requested at the same scale index.
    """
    try:
        d = distances if distances is not None else load_input(config)
        if not isinstance(d, DistanceMatrix):
            d = check_point_cloud(d, config.metric)
    except PointCloudError as exc:
        raise ConfigError(str(exc)) from None
    n = d.n
    orders = check_orders(config.orders, n)
    _check_limits(config, n)
    workers = workers_from_env() if workers is None else workers

    jobs = []
    for ei, eps in enumerate(config.epsilons):
        g = build_skeleton(d, eps)
        for k in orders:
            jobs.append((g, ei, k, config.params, config.seed, config.oracle))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_cell, jobs))
    else:
        reports = [_run_cell(j) for j in jobs]

    abne = config.params.delta is not None
    records = [_record(r, abne) for r in reports]
    failures = sorted({f"eps={r['epsilon']!r} k={r['k']}: {f}" for r in records
                       for f in r["flags"] if f in FAILURE_FLAGS})
    for f in failures:
        logger.warning("flagged cell %s", f)
    return RunResult(config, BettiCurve(records, n), reports, failures)


def report_unreduced(curve: BettiCurve) -> BettiCurve:
    """Add unreduced Betti numbers next to the reduced ones.

    Only order 0 changes: ``beta_0 = reduced beta_0 + 1`` on a nonempty
    complex. Records keep their reduced values under ``*_reduced`` keys.
    """
    out = []
    for r in curve.records:
        r = dict(r)
        for key in ("beta_estimate", "beta_oracle"):
            red = r.get(key)
            r[f"{key}_reduced"] = red
            if r["k"] == 0 and curve.n_points > 0 and red is not None:
                r[f"{key}_unreduced"] = red + 1
            else:
                r[f"{key}_unreduced"] = red
        if curve.n_points == 0:
            r["flags"] = list(r.get("flags", [])) + ["empty-point-set"]
        out.append(r)
    return BettiCurve(out, curve.n_points, reduced=False)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True)


CSV_FIELDS = ("epsilon", "k", "chi", "beta_estimate", "beta_oracle",
              "beta_estimate_unreduced", "beta_oracle_unreduced", "flags")


def write_outputs(result: RunResult, out: str | os.PathLike) -> dict[str, Path]:
    """Write ``reports.jsonl``, ``summary.json`` and ``betti_curve.csv`` into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "reports": out / "reports.jsonl",
        "summary": out / "summary.json",
        "curve": out / "betti_curve.csv",
    }
    with open(paths["reports"], "w") as fh:
        for rep in result.reports:
            fh.write(_dumps(rep.to_dict(include_moments=True)) + "\n")
    paths["summary"].write_text(_dumps(result.summary()) + "\n")
    curve = report_unreduced(result.curve)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in curve.records:
        row = [r[f] for f in CSV_FIELDS[:-1]] + [";".join(r["flags"])]
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    paths["curve"].write_text(buf.getvalue())
    return paths
