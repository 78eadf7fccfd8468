"""Command line entry point: ``qtda --input cloud.csv --epsilon 0.5:1.5:3 --out results/``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .pipeline import EXIT_CONFIG, RunConfig, run, write_outputs
from .stochastic import EstimatorParams
from .validation import ConfigError

logger = logging.getLogger("qtda")


def parse_epsilons(text: str) -> tuple[float, ...]:
    """``"0.5,1.1,1.5"`` or ``"start:stop:steps"`` (inclusive, evenly spaced)."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
            if steps < 1:
                raise ValueError
            vals = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
            return tuple(float(v) for v in vals)
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse --epsilon {text!r}") from None


def parse_orders(text: str):
    if text == "all":
        return "all"
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse --orders {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtda", description="Estimate Betti numbers of a point cloud across scales.")
    p.add_argument("--input", required=True, help="point cloud (or distance matrix) file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--metric", choices=("euclidean", "manhattan", "precomputed"), default="euclidean")
    p.add_argument("--epsilon", required=True, help="scales: comma list or start:stop:steps")
    p.add_argument("--orders", default="all", help="comma list of orders or 'all'")
    p.add_argument("--delta", type=float, help="spectral gap override (outputs labeled ABNE)")
    p.add_argument("--eps-tol", type=float, default=0.2, help="additive tolerance on beta_k/|S_k|")
    p.add_argument("--eta", type=float, default=0.1, help="failure probability")
    p.add_argument("--degree", type=int, help="Chebyshev degree override")
    p.add_argument("--probes", type=int, help="probe count override")
    p.add_argument("--mode", choices=("exact", "sampled", "all-columns"), default="exact")
    p.add_argument("--moment-mode", choices=("exact-operator", "trotter-extraction", "recurrence"),
                   default="exact-operator")
    p.add_argument("--oracle", action="store_true", help="also compute exact Betti numbers")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    try:
        params = EstimatorParams(epsilon=args.eps_tol, eta=args.eta, delta=args.delta, m=args.degree,
                                 n_v=args.probes, moment_mode=args.moment_mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        epsilons=parse_epsilons(args.epsilon), orders=parse_orders(args.orders), params=params,
        mode=args.mode, seed=args.seed, oracle=args.oracle, input=args.input, format=args.format,
        metric=args.metric, out=args.out,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        result = run(config)
    except ConfigError as exc:
        print(f"qtda: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_outputs(result, config.out)
    if result.flags:
        print(json.dumps(result.summary(), sort_keys=True), file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
