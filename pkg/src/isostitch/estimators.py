"""Estimator-style front ends (fit / predict / get_params).

These wrap the functional core so the algorithms compose with the wider
ecosystem: constructor arguments are hyperparameters stored verbatim,
``fit`` does the work and exposes results as trailing-underscore
attributes, and inputs are validated on entry. ``BallIsometryExtender``
and ``AtlasStitcher`` accept an oracle / atlas in ``fit`` rather than an
array, since their inputs are maps; everything else is array-in, array-out.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_points
from .atlas import Certificate, PatchAtlas, stitch
from .errors import ValidationError
from .extension import extend_ball_isometry
from .maps import AffineMap, MapOracle, fit_affine, isometry_defect, restrict
from .midpoint import metric_midpoint
from .norms import Ball, PointCloud, distance
from .serialization import parse_norm_spec


class MidpointRefiner(BaseEstimator):
    """Recover the algebraic midpoint of two points from metric data only.

    Parameters: norm (descriptor, config dict, or "lp:p:dim" string), eta
    and tol (None means d/200 and d/100 for the fitted pair), seed.

    After ``fit(X)`` with X of shape (2, dim): ``midpoint_``, ``trace_``,
    ``n_iterations_``.
    """

    def __init__(self, norm="lp:2:2", eta=None, tol=None, seed=0):
        self.norm = norm
        self.eta = eta
        self.tol = tol
        self.seed = seed

    def fit(self, X, y=None):
        N = parse_norm_spec(self.norm)
        X = as_points(X, N.dim, "X")
        if X.shape[0] != 2:
            raise ValidationError(f"X must hold exactly two row points, got {X.shape[0]}")
        d = distance(X[0], X[1], N)
        eta = self.eta if self.eta is not None else max(d / 200.0, 1e-12)
        tol = self.tol if self.tol is not None else 2.0 * eta
        mid, trace = metric_midpoint(X[0], X[1], N, eta, tol, seed=self.seed)
        self.norm_ = N
        self.midpoint_ = mid
        self.trace_ = trace
        self.n_iterations_ = len(trace.clouds) - 1
        return self


class AffineIsometryFitter(BaseEstimator):
    """Fit an affine map to correspondences and certify it as an isometry.

    ``fit(X, Y)`` solves the least-squares affine fit and measures the
    isometry defect of the fitted map on the sources under ``norm``;
    ``certified_`` is True when the defect is at most ``tol``.
    """

    def __init__(self, norm="lp:2:2", tol=1e-9):
        self.norm = norm
        self.tol = tol

    def fit(self, X, y):
        N = parse_norm_spec(self.norm)
        X = as_points(X, N.dim, "X")
        Y = as_points(y, N.dim, "Y")
        m = fit_affine((X, Y))
        cloud = PointCloud.from_points(X, resolution=1.0)
        defect = isometry_defect(m, cloud, N, max_points=2048)
        self.norm_ = N
        self.map_ = m
        self.matrix_ = m.matrix
        self.offset_ = m.offset
        self.defect_ = defect
        self.certified_ = bool(defect <= self.tol)
        return self

    def predict(self, X):
        self._check_fitted()
        return self.map_(as_points(X, self.map_.dim, "X"))

    def _check_fitted(self):
        if not hasattr(self, "map_"):
            raise ValidationError("estimator is not fitted")


class BallIsometryExtender(BaseEstimator):
    """Extend a map that is isometric on a ball to a certified global affine
    isometry.

    ``fit(f, ball)`` takes the map (MapOracle, AffineMap, or a vectorized
    callable) and the ball it lives on; ``eta`` defaults to radius/50.
    After fitting: ``global_map_``, ``report_``, ``residual_``.
    """

    def __init__(self, norm="lp:2:2", eta=None, tau=1e-9):
        self.norm = norm
        self.eta = eta
        self.tau = tau

    def fit(self, f, ball):
        N = parse_norm_spec(self.norm)
        if not isinstance(ball, Ball):
            center, radius = ball
            ball = Ball(np.asarray(center, dtype=float), float(radius))
        if not isinstance(f, (MapOracle, AffineMap)):
            f = restrict(f, Ball(ball.center, ball.radius), N)
        eta = self.eta if self.eta is not None else ball.radius / 50.0
        report = extend_ball_isometry(f, ball, N, eta, self.tau)
        self.norm_ = N
        self.report_ = report
        self.global_map_ = report.g
        self.residual_ = report.residual_on_ball
        return self

    def predict(self, X):
        if not hasattr(self, "global_map_"):
            raise ValidationError("estimator is not fitted")
        return self.global_map_(as_points(X, self.global_map_.dim, "X"))


class AtlasStitcher(BaseEstimator):
    """Certify or refute a patch atlas as one global isometry.

    ``fit(atlas)`` runs the cover check, seed extension, and breadth-first
    stitching. After fitting: ``verdict_``, ``certified_``, and (when
    certified) ``global_map_``.
    """

    def __init__(self, norm="lp:2:2", eta=0.05, tau=1e-9, seed=0):
        self.norm = norm
        self.eta = eta
        self.tau = tau
        self.seed = seed

    def fit(self, atlas, y=None):
        if not isinstance(atlas, PatchAtlas):
            raise ValidationError("fit expects a PatchAtlas")
        N = parse_norm_spec(self.norm)
        verdict = stitch(atlas, N, self.eta, self.tau, seed=self.seed)
        self.norm_ = N
        self.verdict_ = verdict
        self.certified_ = isinstance(verdict, Certificate)
        self.global_map_ = verdict.global_map if self.certified_ else None
        return self

    def predict(self, X):
        if getattr(self, "global_map_", None) is None:
            raise ValidationError("no certified global map available")
        return self.global_map_(as_points(X, self.global_map_.dim, "X"))
