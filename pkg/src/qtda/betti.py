"""scikit-learn style front end: Betti numbers and Betti curves of point clouds."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .pipeline import RunConfig, report_unreduced, run
from .stochastic import EstimatorParams
from .validation import (
    check_cloud_batch,
    check_point_cloud,
    check_positive_int,
    check_unit_interval,
)


class _BettiParams(BaseEstimator):
    """Shared hyperparameters; subclasses only add the scale(s)."""

    def _config(self, epsilons) -> RunConfig:
        params = EstimatorParams(
            epsilon=check_unit_interval("tolerance", self.tolerance),
            eta=check_unit_interval("eta", self.eta),
            delta=check_unit_interval("delta", self.delta, allow_none=True),
            m=check_positive_int("degree", self.degree),
            n_v=check_positive_int("n_probes", self.n_probes),
        )
        return RunConfig(epsilons=tuple(epsilons), orders=self.orders, params=params, mode=self.mode,
                         seed=self.seed, oracle=self.oracle, metric=self.metric)


class BettiNumberEstimator(_BettiParams):
    """Estimate the Betti numbers of one point cloud at a single scale.

    Parameters
    ----------
    scale : float
        Vietoris-Rips connection radius.
    orders : "all" or list of int
        Homology orders to estimate.
    tolerance, eta : float
        Additive error on beta_k / |S_k| and the allowed failure probability.
    delta : float or None
        Spectral gap of the scaled Laplacian; measured when None.
    degree, n_probes : int or None
        Overrides for the Chebyshev degree and the number of probes.
    mode : {"exact", "sampled", "all-columns"}
    reduced : bool
        Report reduced homology (the native output) or add 1 to beta_0.

    Attributes
    ----------
    chi_ : ndarray of shape (n_orders,)
    betti_ : ndarray of shape (n_orders,)
    orders_ : tuple of int
    reports_ : list of EstimationReport
    """

    def __init__(self, scale=1.0, orders="all", tolerance=0.2, eta=0.1, delta=None, degree=None,
                 n_probes=None, mode="exact", metric="euclidean", seed=0, oracle=False, reduced=True):
        self.scale = scale
        self.orders = orders
        self.tolerance = tolerance
        self.eta = eta
        self.delta = delta
        self.degree = degree
        self.n_probes = n_probes
        self.mode = mode
        self.metric = metric
        self.seed = seed
        self.oracle = oracle
        self.reduced = reduced

    def fit(self, X, y=None):
        d = check_point_cloud(X, self.metric)
        result = run(self._config([self.scale]), distances=d, workers=1)
        curve = result.curve if self.reduced else report_unreduced(result.curve)
        key = "beta_estimate" if self.reduced else "beta_estimate_unreduced"
        self.reports_ = result.reports
        self.orders_ = tuple(r["k"] for r in curve.records)
        self.chi_ = np.array([r["chi"] for r in curve.records])
        self.betti_ = np.array([r[key] for r in curve.records])
        self.flags_ = result.flags
        self.n_features_in_ = d.n
        return self

    def predict(self, X=None):
        """Rounded Betti numbers of the fitted cloud (``X`` is refitted when given)."""
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "betti_")
        return np.rint(self.betti_).astype(int)


class BettiCurveTransformer(TransformerMixin, _BettiParams):
    """Map each point cloud in a batch to its flattened Betti curve.

    The output row for one cloud lists the estimated beta_k for every scale
    in ``scales`` (outer) and every order in ``orders`` (inner). ``orders``
    must be explicit so all rows share a width.
    """

    def __init__(self, scales=(0.5, 1.0), orders=(0, 1), tolerance=0.2, eta=0.1, delta=None, degree=None,
                 n_probes=None, mode="exact", metric="euclidean", seed=0, oracle=False):
        self.scales = scales
        self.orders = orders
        self.tolerance = tolerance
        self.eta = eta
        self.delta = delta
        self.degree = degree
        self.n_probes = n_probes
        self.mode = mode
        self.metric = metric
        self.seed = seed
        self.oracle = oracle

    def fit(self, X, y=None):
        if isinstance(self.orders, str):
            raise ValueError("orders must be an explicit list for a batch transform")
        self._config(self.scales)  # validate early
        check_cloud_batch(X)
        self.n_features_out_ = len(tuple(self.scales)) * len(tuple(self.orders))
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        config = self._config(self.scales)
        rows = []
        for cloud in check_cloud_batch(X):
            d = check_point_cloud(cloud, self.metric)
            rows.append(run(config, distances=d, workers=1).curve.table().ravel())
        return np.vstack(rows)
