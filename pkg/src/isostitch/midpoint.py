"""Metric-midpoint recovery by nested lens refinement.

Two distinct points x0, x1 at distance d define the lens
B(x0, d/2) & B(x1, d/2): the set of their metric midpoints. Repeatedly
keeping only the points whose max distance to the current set is at most
half the set's diameter collapses the lens onto the algebraic midpoint
(x0 + x1)/2, using nothing but distances. At finite resolution the lens is
a grid cloud, the filter carries a slack tau for quantization, and the
collapse terminates once the diameter falls below a caller tolerance.

The sampling lattice is anchored at the midpoint, so the discrete lens is
exactly reflection-symmetric and the midpoint itself survives every
refinement; the diameter at least halves per step up to grid slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_vector, check_positive, check_seed
from .errors import ConvergenceFailure, DegenerateDiscretization, EmptyCloudError, ValidationError
from .norms import (
    MEMBERSHIP_TOL,
    NormDescriptor,
    PointCloud,
    _lattice_scan,
    eccentricities,
    within_radius,
)


@dataclass
class RefinementTrace:
    """Record of one nested refinement: clouds, their diameters, the point returned."""

    clouds: list[PointCloud]
    diameters: list[float]
    limit: np.ndarray


def initial_lens(x0, x1, N: NormDescriptor, eta, seed=0) -> PointCloud:
    """Grid cloud of the lens B(x0, d/2) & B(x1, d/2), both balls inflated by eta.

    The lattice (pitch eta/sqrt(dim)) is anchored at the midpoint, which is
    always included explicitly; the cloud is eta-dense in the exact lens.
    Coincident inputs give the singleton {x0}.
    """
    x0 = as_vector(x0, N.dim, "x0")
    x1 = as_vector(x1, N.dim, "x1")
    eta = check_positive(eta, "eta")
    d = N.value(x1 - x0)
    if d <= MEMBERSHIP_TOL:
        return PointCloud.from_points(x0.reshape(1, -1), eta)
    r = d / 2.0
    R = r + eta
    mid = (x0 + x1) / 2.0
    ext = N.coordinate_extents()
    lows = np.maximum(x0 - R * ext, x1 - R * ext)
    highs = np.minimum(x0 + R * ext, x1 + R * ext)
    pitch = eta / math.sqrt(N.dim)

    def classify(pts):
        return {"lens": (N.value(pts - x0) <= R + MEMBERSHIP_TOL) & (N.value(pts - x1) <= R + MEMBERSHIP_TOL)}

    got = _lattice_scan(N, mid, lows, highs, pitch, [(x0, R), (x1, R)], classify)
    parts = [mid.reshape(1, -1)]
    if "lens" in got:
        parts.append(got["lens"])
    return PointCloud.from_points(np.vstack(parts), eta)


def refine_once(C: PointCloud, N: NormDescriptor, tau) -> PointCloud:
    """Keep the points whose max distance to the cloud is <= diameter/2 + tau."""
    if len(C) == 0:
        raise EmptyCloudError("cannot refine an empty cloud")
    tau = check_positive(tau, "tau")
    ecc = eccentricities(C, N)
    delta = float(ecc.max())
    keep = ecc <= delta / 2.0 + tau
    if not np.any(keep):
        raise DegenerateDiscretization(
            f"refinement emptied the cloud (delta={delta:.3g}, tau={tau:.3g}); tau is too small for the grid pitch"
        )
    return PointCloud(points=C.points[keep], resolution=C.resolution)


def metric_midpoint(x0, x1, N: NormDescriptor, eta, tol, seed=0, tau=None):
    """Recover (x0+x1)/2 from metric data alone.

    Iterates :func:`refine_once` on the initial lens until the diameter is
    at most ``tol`` (requires ``tol >= 2*eta``); the returned point is the
    minimum-eccentricity element of the final cloud and lies within
    ``tol + 2*eta`` of the algebraic midpoint. Raises
    :class:`ConvergenceFailure` past ceil(log2(delta_1/tol)) + 8 iterations.

    Returns ``(point, RefinementTrace)``.
    """
    x0 = as_vector(x0, N.dim, "x0")
    x1 = as_vector(x1, N.dim, "x1")
    eta = check_positive(eta, "eta")
    tol = check_positive(tol, "tol")
    check_seed(seed)
    if tol < 2.0 * eta - 1e-15:
        raise ValidationError(f"tol must be at least 2*eta (tol={tol:.3g}, eta={eta:.3g})")
    if tau is None:
        tau = eta
    d = N.value(x1 - x0)
    if d <= MEMBERSHIP_TOL:
        C = PointCloud.from_points(x0.reshape(1, -1), eta)
        return x0.copy(), RefinementTrace([C], [0.0], x0.copy())

    C = initial_lens(x0, x1, N, eta, seed)
    clouds = [C]
    ecc = eccentricities(C, N)
    diameters = [float(ecc.max())]
    cap = max(0, math.ceil(math.log2(max(diameters[0] / tol, 1.0)))) + 8
    while diameters[-1] > tol:
        if len(clouds) - 1 >= cap:
            raise ConvergenceFailure(
                f"diameter {diameters[-1]:.3g} still above tol {tol:.3g} after {cap} refinements"
            )
        keep = ecc <= diameters[-1] / 2.0 + tau
        if not np.any(keep):
            raise DegenerateDiscretization("refinement emptied the cloud; tau too small for eta")
        nxt = PointCloud(points=C.points[keep], resolution=C.resolution)
        if len(nxt) == len(C):
            # Fixed point: every point already has ecc <= delta/2 + tau, hence
            # delta <= 2*tau <= tol up to round-off.
            break
        C = nxt
        clouds.append(C)
        ecc = eccentricities(C, N)
        diameters.append(float(ecc.max()))
    rep = C.points[int(np.argmin(ecc))].copy()
    return rep, RefinementTrace(clouds, diameters, rep)


def check_reflection_symmetry(C: PointCloud, x2, N: NormDescriptor, tau) -> bool:
    """True iff reflecting the cloud through x2 lands within tau + resolution of it."""
    if len(C) == 0:
        raise EmptyCloudError("symmetry check on an empty cloud")
    x2 = as_vector(x2, N.dim, "x2")
    tau = check_positive(tau, "tau")
    reflected = 2.0 * x2 - C.points
    return bool(within_radius(reflected, C.points, N, tau + C.resolution).all())
