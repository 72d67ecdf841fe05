"""Norm descriptors, balls, sphere surfaces, grid discretization, and diameters.

Everything downstream is parameterized by a :class:`NormDescriptor`: an lp
norm, a coordinate-weighted lp norm, or a polyhedral norm given by the
symmetric vertex set of its unit ball.  Descriptors evaluate on single
vectors or ``(n, dim)`` arrays.

Norms whose unit ball is a polytope (l1, linf, their weighted variants,
and explicit polyhedral norms) also expose a support-functional matrix
``H`` with ``norm(z) = max_j <H[j], z>``.  That form makes diameter and
eccentricity scans over a cloud a single matrix product instead of an
O(n^2) pairwise sweep, and both scans stay exact: the max over pairs of a
max of linear functionals is the max over functionals of (max - min).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from ._validation import as_points, as_vector, check_positive, check_seed
from .errors import DimensionMismatch, EmptyCloudError, ValidationError

#: Global absolute slack for membership comparisons without an explicit tolerance.
MEMBERSHIP_TOL = 1e-12

_SCAN_LIMIT = 300_000_000  # hard cap on candidate-lattice size
_BLOCK = 1_500_000  # max candidate points materialized at once


def _lp_norm(V, p):
    """Row-wise lp norm of a 2-d array. p may be inf."""
    A = np.abs(V)
    if math.isinf(p):
        return A.max(axis=1)
    if p == 1.0:
        return A.sum(axis=1)
    if p == 2.0:
        return np.sqrt((A * A).sum(axis=1))
    if p == 3.0:
        return ((A * A * A).sum(axis=1)) ** (1.0 / 3.0)
    if p == 1.5:
        return ((A * np.sqrt(A)).sum(axis=1)) ** (2.0 / 3.0)
    return (A**p).sum(axis=1) ** (1.0 / p)


@dataclass
class NormDescriptor:
    """Defines the norm on R^dim. Build with :meth:`lp`, :meth:`weighted_lp`,
    or :meth:`polyhedral` rather than calling the constructor directly."""

    kind: str
    dim: int
    p: float | None = None
    weights: np.ndarray | None = None
    vertices: np.ndarray | None = None
    _support: np.ndarray | None = field(default=None, repr=False, compare=False)
    _extents: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def lp(cls, p, dim):
        p = float(p)
        if not p >= 1.0:
            raise ValidationError(f"lp norms need p >= 1, got {p}")
        if not isinstance(dim, int) or dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {dim!r}")
        return cls(kind="lp", dim=dim, p=p)

    @classmethod
    def weighted_lp(cls, p, weights):
        p = float(p)
        if not p >= 1.0:
            raise ValidationError(f"weighted lp norms need p >= 1, got {p}")
        w = as_vector(weights, name="weights")
        if np.any(w <= 0):
            raise ValidationError("all weights must be strictly positive")
        return cls(kind="weighted_lp", dim=w.size, p=p, weights=w)

    @classmethod
    def polyhedral(cls, vertices):
        V = as_points(vertices, name="vertices")
        if V.shape[0] < 2:
            raise ValidationError("polyhedral norm needs at least two vertices")
        # V must be symmetric: each vertex's antipode is also a vertex.
        for v in V:
            if np.min(np.max(np.abs(V + v), axis=1)) > 1e-12:
                raise ValidationError(f"vertex set is not symmetric: -{v.tolist()} missing")
        desc = cls(kind="polyhedral", dim=V.shape[1], vertices=V)
        desc._facet_functionals()  # validates 0 in the interior of the hull
        return desc

    # -- evaluation ---------------------------------------------------------

    def value(self, X):
        """Norm of a vector or of each row of an (n, dim) array."""
        P = np.asarray(X, dtype=float)
        single = P.ndim == 1
        V = P.reshape(1, -1) if single else P
        if V.ndim != 2 or V.shape[1] != self.dim:
            raise DimensionMismatch(f"expected vectors of dimension {self.dim}, got shape {P.shape}")
        if self.kind == "lp":
            out = _lp_norm(V, self.p)
        elif self.kind == "weighted_lp":
            out = _lp_norm(V * self._weight_scale(), self.p)
        else:
            out = np.maximum((V @ self._facet_functionals().T).max(axis=1), 0.0)
        return float(out[0]) if single else out

    @property
    def strictly_convex(self):
        return self.kind in ("lp", "weighted_lp") and 1.0 < self.p < math.inf

    def _weight_scale(self):
        if math.isinf(self.p):
            return self.weights
        return self.weights ** (1.0 / self.p)

    def _facet_functionals(self):
        """Outward facet functionals h_j of the unit ball, normalized to <h, x> <= 1."""
        if self._support is not None and self.kind == "polyhedral":
            return self._support
        V = self.vertices
        if self.dim == 1:
            vmax = float(np.max(np.abs(V)))
            H = np.array([[1.0 / vmax], [-1.0 / vmax]])
        else:
            try:
                hull = ConvexHull(V)
            except QhullError as exc:
                raise ValidationError(f"vertex hull is degenerate: {exc}") from exc
            offsets = -hull.equations[:, -1]
            if np.any(offsets <= 1e-12):
                raise ValidationError("unit-ball hull must contain the origin strictly inside")
            H = hull.equations[:, :-1] / offsets[:, None]
        self._support = H
        return H

    def support_functionals(self):
        """Matrix H with value(z) == max_j <H[j], z>, or None for smooth norms."""
        if self.kind == "polyhedral":
            return self._facet_functionals()
        if self._support is not None:
            return self._support
        w = self.weights if self.kind == "weighted_lp" else np.ones(self.dim)
        if math.isinf(self.p):
            scale = w if self.kind == "weighted_lp" else np.ones(self.dim)
            eye = np.diag(scale)
            self._support = np.vstack([eye, -eye])
        elif self.p == 1.0 and self.dim <= 16:
            signs = np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
            self._support = signs * self._weight_scale() if self.kind == "weighted_lp" else signs
        else:
            return None
        return self._support

    def coordinate_extents(self):
        """Per-axis bound e with |x_i| <= e_i * value(x) for all x."""
        if self._extents is not None:
            return self._extents
        if self.kind == "lp":
            e = np.ones(self.dim)
        elif self.kind == "weighted_lp":
            e = 1.0 / self._weight_scale()
        else:
            e = np.max(np.abs(self.vertices), axis=0)
        self._extents = e
        return e

    def corner_norm(self):
        """value of the all-ones vector; controls the grid pitch."""
        return self.value(np.ones(self.dim))

    def l2_lower_factor(self):
        """c with value(z) >= c * ||z||_2 for all z."""
        if self.kind == "lp":
            return self.dim ** (1.0 / self.p - 0.5) if self.p > 2.0 else (self.dim**-0.5 if math.isinf(self.p) else 1.0)
        if self.kind == "weighted_lp":
            wmin = float(np.min(self._weight_scale()))
            if math.isinf(self.p):
                return wmin * self.dim**-0.5
            return wmin * (self.dim ** (1.0 / self.p - 0.5) if self.p > 2.0 else 1.0)
        vmax = float(np.max(np.sqrt((self.vertices**2).sum(axis=1))))
        return 1.0 / vmax


@dataclass
class Ball:
    """Closed ball {x : ||x - center|| <= radius} in the active norm."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = as_vector(self.center, name="center")
        self.radius = check_positive(self.radius, "radius")

    @property
    def dim(self):
        return self.center.shape[0]


@dataclass
class SphereSurface:
    """The shell {x : ||x - center|| == radius} in the active norm."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = as_vector(self.center, name="center")
        self.radius = check_positive(self.radius, "radius")

    @property
    def dim(self):
        return self.center.shape[0]


@dataclass
class PointCloud:
    """A finite point set with the resolution it was sampled at.

    Rows are kept lexicographically sorted and deduplicated so that every
    operation downstream is deterministic. Arrays are frozen after
    construction and safe to share.
    """

    points: np.ndarray
    resolution: float

    @classmethod
    def from_points(cls, pts, resolution, allow_empty=False):
        resolution = check_positive(resolution, "resolution")
        P = as_points(pts, name="points", allow_empty=allow_empty)
        if P.shape[0]:
            P = np.unique(P, axis=0)  # sorts rows lexicographically
        P = np.ascontiguousarray(P)
        P.setflags(write=False)
        return cls(points=P, resolution=resolution)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


# -- operations --------------------------------------------------------------


def norm(v, N: NormDescriptor) -> float:
    """Evaluate ||v|| under the descriptor N."""
    return N.value(as_vector(v, N.dim, "v"))


def distance(x, y, N: NormDescriptor) -> float:
    """||x - y|| under N."""
    return N.value(as_vector(x, N.dim, "x") - as_vector(y, N.dim, "y"))


def _axis_values(anchor, lo, hi, pitch):
    k0 = math.ceil((lo - anchor) / pitch - 1e-9)
    k1 = math.floor((hi - anchor) / pitch + 1e-9)
    if k1 < k0:
        return np.empty(0)
    return anchor + pitch * np.arange(k0, k1 + 1)


def _axis_contrib(N, axis_vals, c_i, i):
    """Per-axis contribution to the (power-transformed) lp distance from c."""
    diff = np.abs(axis_vals - c_i)
    if N.kind == "weighted_lp":
        diff = diff * N._weight_scale()[i]
    p = N.p
    if math.isinf(p) or p == 1.0:
        return diff
    if p == 2.0:
        return diff * diff
    if p == 3.0:
        return diff * diff * diff
    if p == 1.5:
        return diff * np.sqrt(diff)
    return diff**p


def _proxy_bound(N, radius):
    """Transform a loose radius into contribution space (monotone, so the
    prefilter set only grows)."""
    r = (radius + MEMBERSHIP_TOL) * (1.0 + 1e-12)
    p = N.p
    if math.isinf(p) or p == 1.0:
        return r
    return r**p


def _lattice_scan(N, anchor, lows, highs, pitch, conditions, classify):
    """Visit the lattice anchor + pitch*Z^d inside [lows, highs] in memory
    blocks; ``classify(pts)`` returns {name: mask} using exact distances and
    the kept points are collected per name.

    For separable norm kinds, ``conditions`` (a list of (center, radius)
    bounds that every interesting point satisfies) drive a per-axis broadcast
    prefilter, so exact classification touches only a thin candidate set.
    """
    dim = len(anchor)
    axes = [_axis_values(anchor[i], lows[i], highs[i], pitch) for i in range(dim)]
    counts = [a.size for a in axes]
    total = math.prod(counts)
    if total == 0:
        return {}
    if total > _SCAN_LIMIT:
        raise ValidationError(
            f"grid scan would enumerate {total:.2e} candidates; increase the resolution"
        )
    separable = N.kind in ("lp", "weighted_lp") and conditions
    if separable:
        combine = np.maximum if math.isinf(N.p) else np.add
        contribs = [
            [_axis_contrib(N, axes[i], c[i], i) for i in range(dim)] for c, _ in conditions
        ]
        bounds = [_proxy_bound(N, r) for _, r in conditions]
    rest = math.prod(counts[1:]) if dim > 1 else 1
    step = max(1, _BLOCK // max(rest, 1))
    buckets: dict[str, list] = {}
    for start in range(0, counts[0], step):
        stop = min(counts[0], start + step)
        if separable:
            pre = None
            shape = [stop - start] + counts[1:]
            for cond, bound in zip(contribs, bounds):
                proxy = cond[0][start:stop].reshape([-1] + [1] * (dim - 1))
                for i in range(1, dim):
                    view = [1] * dim
                    view[i] = -1
                    proxy = combine(proxy, cond[i].reshape(view))
                mask = proxy <= bound
                pre = mask if pre is None else (pre & mask)
            idx = np.nonzero(pre)
            if idx[0].size == 0:
                continue
            cols = [axes[0][start:stop][idx[0]]]
            cols += [axes[i][idx[i]] for i in range(1, dim)]
            pts = np.stack(cols, axis=1)
        else:
            block_axes = [axes[0][start:stop]] + axes[1:]
            mesh = np.meshgrid(*block_axes, indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=1)
        for name, mask in classify(pts).items():
            if np.any(mask):
                buckets.setdefault(name, []).append(pts[mask])
    return {k: np.vstack(v) for k, v in buckets.items()}


def _ball_pitch(N: NormDescriptor, eta: float) -> float:
    # Cell corners sit (pitch/2)*||ones|| from the nearest lattice point; keeping
    # that below eta/2 makes the eta-density argument go through for every kind.
    return eta / max(math.sqrt(N.dim), N.corner_norm())


def sample_ball(N: NormDescriptor, ball: Ball, eta, seed=0) -> PointCloud:
    """Deterministic eta-dense cloud of the closed ball.

    Lattice of pitch eta / max(sqrt(dim), ||ones||) anchored at the center,
    restricted to the ball, plus radial projections of the lattice points in
    the shell (radius, radius + eta] onto the surface, plus the center.
    Membership of every returned point is exact (surface points up to
    floating round-off).
    """
    eta = check_positive(eta, "eta")
    check_seed(seed)
    if ball.dim != N.dim:
        raise DimensionMismatch(f"ball dimension {ball.dim} != norm dimension {N.dim}")
    c, r = ball.center, ball.radius
    pitch = _ball_pitch(N, eta)
    bound = (r + eta) * N.coordinate_extents()

    def classify(pts):
        d = N.value(pts - c)
        return {
            "inside": d <= r + MEMBERSHIP_TOL,
            "shell": (d > r + MEMBERSHIP_TOL) & (d <= r + eta),
        }

    got = _lattice_scan(N, c, c - bound, c + bound, pitch, [(c, r + eta)], classify)
    parts = [c.reshape(1, -1)]
    if "inside" in got:
        parts.append(got["inside"])
    if "shell" in got:
        sh = got["shell"]
        d = N.value(sh - c)
        parts.append(c + (sh - c) * (r / d)[:, None])
    return PointCloud.from_points(np.vstack(parts), eta)


def sample_sphere(N: NormDescriptor, s: SphereSurface, eta, seed=0) -> PointCloud:
    """Deterministic eta-dense cloud of the sphere surface.

    Lattice points with | ||x - c|| - r | <= eta are projected radially onto
    the surface; every returned point satisfies the surface equation up to
    floating round-off.
    """
    eta = check_positive(eta, "eta")
    check_seed(seed)
    if s.dim != N.dim:
        raise DimensionMismatch(f"sphere dimension {s.dim} != norm dimension {N.dim}")
    c, r = s.center, s.radius
    pitch = _ball_pitch(N, eta)
    bound = (r + eta) * N.coordinate_extents()

    def classify(pts):
        d = N.value(pts - c)
        return {"shell": (np.abs(d - r) <= eta) & (d > MEMBERSHIP_TOL)}

    got = _lattice_scan(N, c, c - bound, c + bound, pitch, [(c, r + eta)], classify)
    if "shell" not in got:
        raise EmptyCloudError("no lattice points near the surface; decrease eta")
    sh = got["shell"]
    d = N.value(sh - c)
    return PointCloud.from_points(c + (sh - c) * (r / d)[:, None], eta)


def _pairwise_row_max(P, Q, N):
    """max_j ||P_i - Q_j|| for each row i, blocked to bound memory."""
    n = P.shape[0]
    out = np.empty(n)
    block = max(1, _BLOCK // max(Q.shape[0], 1))
    for s in range(0, n, block):
        diff = P[s : s + block, None, :] - Q[None, :, :]
        out[s : s + block] = N.value(diff.reshape(-1, N.dim)).reshape(-1, Q.shape[0]).max(axis=1)
    return out


_HULL_REDUCTION_MIN = 1200


def _max_distance_anchors(P):
    """Subset of P that attains every max-distance query against P.

    y -> ||x - y|| is convex, so its max over a finite set is attained at a
    vertex of the set's convex hull; reducing to hull vertices keeps the
    scans exact. Falls back to the full set for small or degenerate inputs.
    """
    if P.shape[0] <= _HULL_REDUCTION_MIN or P.shape[1] < 2:
        return P
    try:
        hull = ConvexHull(P)
    except QhullError:
        return P
    return P[hull.vertices]


def eccentricities(C: PointCloud, N: NormDescriptor) -> np.ndarray:
    """For each cloud point, its max distance to the rest of the cloud (exact)."""
    if len(C) == 0:
        raise EmptyCloudError("eccentricities of an empty cloud")
    H = N.support_functionals()
    if H is not None:
        G = C.points @ H.T
        return (G - G.min(axis=0)[None, :]).max(axis=1)
    return _pairwise_row_max(C.points, _max_distance_anchors(C.points), N)


def set_diameter(C: PointCloud, N: NormDescriptor) -> float:
    """Exact max pairwise distance of the finite cloud."""
    if len(C) == 0:
        raise EmptyCloudError("diameter of an empty cloud")
    if len(C) == 1:
        return 0.0
    H = N.support_functionals()
    if H is not None:
        G = C.points @ H.T
        return float((G.max(axis=0) - G.min(axis=0)).max())
    V = _max_distance_anchors(C.points)
    return float(_pairwise_row_max(V, V, N).max())


def within_radius(queries, anchors, N: NormDescriptor, radius) -> np.ndarray:
    """Boolean mask: does each query point lie within `radius` (in N) of some anchor?

    Exact in N; a kd-tree provides the candidate set. For lp kinds the tree
    metric matches N directly (after coordinate scaling for weighted norms);
    polyhedral norms get an l2 candidate search with an exact re-check.
    """
    Q = as_points(queries, N.dim, "queries", allow_empty=True)
    A = as_points(anchors, N.dim, "anchors", allow_empty=True)
    radius = check_positive(radius, "radius")
    if Q.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    if A.shape[0] == 0:
        return np.zeros(Q.shape[0], dtype=bool)
    if N.kind in ("lp", "weighted_lp"):
        scale = N._weight_scale() if N.kind == "weighted_lp" else 1.0
        tree = cKDTree(A * scale)
        d, _ = tree.query(Q * scale, k=1, p=N.p)
        return d <= radius + MEMBERSHIP_TOL
    tree = cKDTree(A)
    l2_cap = radius / N.l2_lower_factor()
    k = min(16, A.shape[0])
    d2, idx = tree.query(Q, k=k)
    d2 = np.asarray(d2).reshape(Q.shape[0], k)
    idx = np.asarray(idx).reshape(Q.shape[0], k)
    cand = A[idx]  # (nq, k, dim)
    exact = N.value((Q[:, None, :] - cand).reshape(-1, N.dim)).reshape(Q.shape[0], k)
    ok = (exact <= radius + MEMBERSHIP_TOL).any(axis=1)
    # Queries whose k-th l2 neighbor is still inside the candidate radius may
    # have unseen anchors; fall back to an exhaustive radius query for those.
    unresolved = ~ok & (d2[:, -1] < l2_cap)
    for i in np.nonzero(unresolved)[0]:
        ids = tree.query_ball_point(Q[i], l2_cap)
        if ids and np.min(N.value(A[ids] - Q[i])) <= radius + MEMBERSHIP_TOL:
            ok[i] = True
    return ok
