"""Quantum topological data analysis at desk scale.

Vietoris-Rips complexes, the Pauli-sum boundary operator, a seeded
statevector simulator and the stochastic Chebyshev Betti-number estimator,
with dense classical oracles for every quantity.
"""

from .boundary import apply_B, boundary_terms, restricted_laplacian, scale_laplacian
from .chebyshev import cheb_from_power, degree_bound, probe_bound, step_coefficients, tanh_surrogate
from .complex import (
    DistanceMatrix,
    PointCloud,
    Skeleton,
    build_skeleton,
    complex_stats,
    load_points,
    pairwise_distances,
)
from .oracle import classical_cheb_rank, exact_betti_laplacian, exact_betti_ranks
from .simulator import RngStream, StateVector, build_trotter_circuit, prepare_hadamard_probe
from .betti import BettiCurveTransformer, BettiNumberEstimator
from .pipeline import BettiCurve, RunConfig, report_unreduced, run
from .stochastic import EstimationReport, EstimatorParams, estimate_betti, power_moments

__version__ = "0.1.0"

__all__ = [
    "BettiCurve",
    "BettiCurveTransformer",
    "BettiNumberEstimator",
    "DistanceMatrix",
    "EstimationReport",
    "EstimatorParams",
    "PointCloud",
    "RngStream",
    "RunConfig",
    "Skeleton",
    "StateVector",
    "apply_B",
    "boundary_terms",
    "build_skeleton",
    "build_trotter_circuit",
    "cheb_from_power",
    "classical_cheb_rank",
    "complex_stats",
    "degree_bound",
    "estimate_betti",
    "exact_betti_laplacian",
    "exact_betti_ranks",
    "load_points",
    "pairwise_distances",
    "power_moments",
    "prepare_hadamard_probe",
    "probe_bound",
    "report_unreduced",
    "restricted_laplacian",
    "run",
    "scale_laplacian",
    "step_coefficients",
    "tanh_surrogate",
]
