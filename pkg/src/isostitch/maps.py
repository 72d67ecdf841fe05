"""Map representations (affine, oracle, sampled), isometry defect, affine fitting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.spatial import cKDTree

from ._validation import as_matrix, as_points, as_vector
from .errors import DomainViolation, RankDeficientData, ValidationError
from .norms import MEMBERSHIP_TOL, Ball, NormDescriptor, PointCloud, SphereSurface


@dataclass
class AffineMap:
    """x -> matrix @ x + offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, name="matrix")
        self.offset = as_vector(self.offset, self.matrix.shape[0], "offset")

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.zeros(dim))

    @property
    def dim(self):
        return self.offset.shape[0]

    def __call__(self, X):
        P = np.asarray(X, dtype=float)
        if P.ndim == 1:
            return self.matrix @ P + self.offset
        return P @ self.matrix.T + self.offset

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: (self.compose(other))(x) == self(other(x))."""
        return AffineMap(self.matrix @ other.matrix, self.matrix @ other.offset + self.offset)

    def inverse(self) -> "AffineMap":
        try:
            inv = np.linalg.inv(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise ValidationError(f"affine map is singular: {exc}") from exc
        return AffineMap(inv, -inv @ self.offset)


@dataclass
class MapOracle:
    """A point map given by an evaluator plus a declared domain.

    ``domain`` is a Ball, a SphereSurface, or None for the whole space.
    Evaluation outside the domain (beyond the global membership slack)
    raises :class:`DomainViolation`.
    """

    func: Callable[[np.ndarray], np.ndarray]
    domain: Optional[Union[Ball, SphereSurface]] = None
    name: str = ""

    def _check_domain(self, P):
        if self.domain is None:
            return
        c = self.domain.center
        r = self.domain.radius
        if P.shape[1] != c.shape[0]:
            raise DomainViolation(f"point dimension {P.shape[1]} != domain dimension {c.shape[0]}")
        d = _norm_of_domain(self)(P - c)
        if isinstance(self.domain, Ball):
            bad = d > r + MEMBERSHIP_TOL
        else:
            bad = np.abs(d - r) > MEMBERSHIP_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainViolation(
                f"oracle {self.name or '<anonymous>'} evaluated outside its domain at {P[i].tolist()}"
            )

    def __call__(self, X):
        P = np.asarray(X, dtype=float)
        single = P.ndim == 1
        V = P.reshape(1, -1) if single else P
        self._check_domain(V)
        out = np.asarray(self.func(V), dtype=float)
        if out.shape != V.shape:
            raise ValidationError(f"oracle evaluator returned shape {out.shape} for input {V.shape}")
        return out[0] if single else out


# Domain membership needs a norm; oracles carry one when their domain is
# norm-sensitive. Attached by helpers that build restricted oracles.
def _norm_of_domain(oracle: MapOracle):
    N = getattr(oracle, "domain_norm", None)
    if N is not None:
        return N.value
    return lambda V: np.sqrt((V * V).sum(axis=1))


def restrict(func_or_map, domain, N: NormDescriptor, name="") -> MapOracle:
    """Wrap a callable or AffineMap as an oracle restricted to `domain` under N."""
    fn = func_or_map if callable(func_or_map) else None
    if isinstance(func_or_map, AffineMap):
        fn = func_or_map
    oracle = MapOracle(func=fn, domain=domain, name=name)
    oracle.domain_norm = N
    return oracle


@dataclass
class SampledMap:
    """Finite list of (source, image) correspondences with distinct sources."""

    sources: np.ndarray
    images: np.ndarray

    def __post_init__(self):
        self.sources = as_points(self.sources, name="sources")
        self.images = as_points(self.images, self.sources.shape[1], "images")
        if self.images.shape[0] != self.sources.shape[0]:
            raise ValidationError("sources and images must pair up one-to-one")
        if np.unique(self.sources, axis=0).shape[0] != self.sources.shape[0]:
            raise ValidationError("sources must be pairwise distinct")

    def __len__(self):
        return self.sources.shape[0]

    @property
    def dim(self):
        return self.sources.shape[1]

    def __call__(self, X):
        """Exact lookup (within the global membership slack) of sampled sources."""
        P = np.asarray(X, dtype=float)
        single = P.ndim == 1
        V = P.reshape(1, -1) if single else P
        tree = cKDTree(self.sources)
        d, idx = tree.query(V, k=1)
        if np.any(d > 1e-9):
            i = int(np.argmax(d))
            raise DomainViolation(f"point {V[i].tolist()} is not a sampled source")
        out = self.images[idx]
        return out[0] if single else out

    def as_oracle(self, N: NormDescriptor, lookup_tol) -> MapOracle:
        """Nearest-source lookup within lookup_tol (in N); farther queries are out of domain."""
        tree = cKDTree(self.sources)
        src, img = self.sources, self.images

        def fn(V):
            d, idx = tree.query(V, k=1)
            exact = N.value(V - src[idx])
            if np.any(exact > lookup_tol):
                i = int(np.argmax(exact))
                raise DomainViolation(
                    f"no sampled source within {lookup_tol:.3g} of {V[i].tolist()}"
                )
            return img[idx]

        oracle = MapOracle(func=fn, domain=None, name="sampled")
        oracle.domain_norm = N
        return oracle


AnyMap = Union[AffineMap, MapOracle, SampledMap]


def apply(m: AnyMap, x):
    """Evaluate a map at a point (or row array of points)."""
    return m(x)


def compose(m1: AffineMap, m2: AffineMap) -> AffineMap:
    """compose(m1, m2)(x) == m1(m2(x))."""
    return m1.compose(m2)


def invert(m: AffineMap) -> AffineMap:
    return m.inverse()


def _pair_distances_block(P, Q, N, s, e):
    diff = P[s:e, None, :] - P[None, :, :]
    dsrc = N.value(diff.reshape(-1, P.shape[1])).reshape(e - s, P.shape[0])
    diff = Q[s:e, None, :] - Q[None, :, :]
    dimg = N.value(diff.reshape(-1, Q.shape[1])).reshape(e - s, Q.shape[0])
    return dsrc, dimg


def pair_defect(P, Q, N: NormDescriptor, max_points=None, seed=0) -> float:
    """Max over pairs of | ||Q_i - Q_j|| - ||P_i - P_j|| | for matched rows."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape[0] == 0:
        raise ValidationError("defect of an empty cloud")
    if max_points is not None and P.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(P.shape[0], size=max_points, replace=False))
        P, Q = P[idx], Q[idx]
    worst = 0.0
    block = max(1, 2_000_000 // max(P.shape[0], 1))
    for s in range(0, P.shape[0], block):
        e = min(P.shape[0], s + block)
        dsrc, dimg = _pair_distances_block(P, Q, N, s, e)
        worst = max(worst, float(np.abs(dimg - dsrc).max()))
    return worst


def isometry_defect(m: AnyMap, cloud: PointCloud, N: NormDescriptor, max_points=None, seed=0) -> float:
    """Max over point pairs of | ||m(x)-m(x')|| - ||x-x'|| |.

    Exact over all pairs by default; pass ``max_points`` to bound the scan by
    a deterministic seeded subsample (used by the certification pipelines on
    large clouds).
    """
    P = cloud.points
    if P.shape[0] == 0:
        raise ValidationError("defect of an empty cloud")
    if max_points is not None and P.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        P = P[np.sort(rng.choice(P.shape[0], size=max_points, replace=False))]
    Q = np.asarray(m(P), dtype=float)
    return pair_defect(P, Q, N)


def fit_affine(pairs) -> AffineMap:
    """Least-squares affine map through (source, image) correspondences.

    Accepts a :class:`SampledMap` or a ``(sources, images)`` pair. Sources
    must affinely span the space; the fit is exact (to round-off) when the
    data come from an affine map.
    """
    if isinstance(pairs, SampledMap):
        X, Y = pairs.sources, pairs.images
    else:
        X, Y = pairs
        X = as_points(X, name="sources")
        Y = as_points(Y, X.shape[1], "images")
        if Y.shape[0] != X.shape[0]:
            raise ValidationError("sources and images must pair up one-to-one")
    n, d = X.shape
    if n < d + 1:
        raise RankDeficientData(f"need at least {d + 1} correspondences in dimension {d}, got {n}")
    M = np.hstack([X, np.ones((n, 1))])
    if np.linalg.matrix_rank(M) < d + 1:
        raise RankDeficientData("sources do not affinely span the space")
    W, *_ = np.linalg.lstsq(M, Y, rcond=None)
    return AffineMap(W[:d].T, W[d])
