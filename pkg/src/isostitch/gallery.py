"""Wild ball maps and atlas instance generators.

The wild maps are bijections of the space that are the identity outside the
closed unit ball and scramble its inside. Every sphere surface of radius
||x0|| + 2 around any center avoids the unit ball entirely, so the map is
isometric on each such surface, while pairs inside the ball witness that it
is not a global isometry. The atlas generators build positive instances
(restrictions of one global affine map on a patch grid) and adversarial
ones (two different maps split along an axis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_vector, check_positive, check_seed
from .errors import ValidationError
from .maps import AffineMap, MapOracle, isometry_defect, restrict
from .norms import Ball, NormDescriptor, SphereSurface, sample_sphere
from .atlas import Patch, PatchAtlas


def wild_ball_map(N: NormDescriptor, kind="radial-square", seed=0) -> MapOracle:
    """A bijection of the space: identity outside the closed unit ball,
    a radial warp inside it, the identity on the unit surface.

    ``radial-square``: x -> ||x|| * x inside the ball (radius r -> r^2).
    ``seeded-scramble``: a seeded strictly increasing piecewise-linear
    radial profile with fixed endpoints 0 and 1.
    """
    seed = check_seed(seed)
    if kind == "radial-square":
        def profile(r):
            return r * r
    elif kind == "seeded-scramble":
        rng = np.random.default_rng(seed)
        knots = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, size=5)), [1.0]])
        steps = rng.uniform(0.2, 1.0, size=6)
        values = np.concatenate([[0.0], np.cumsum(steps)])
        values /= values[-1]

        def profile(r):
            return np.interp(r, knots, values)
    else:
        raise ValidationError(f"unknown wild map kind {kind!r}")

    def fn(P):
        nrm = N.value(P)
        out = P.copy()
        inside = (nrm <= 1.0) & (nrm > 0.0)
        if np.any(inside):
            scale = profile(nrm[inside]) / nrm[inside]
            out[inside] = P[inside] * scale[:, None]
        return out

    oracle = MapOracle(func=fn, domain=None, name=f"wild:{kind}")
    oracle.domain_norm = N
    return oracle


def sphere_epsilon(x0, N: NormDescriptor) -> float:
    """Radius ||x0|| + 2: every point of S(x0, eps) then has norm >= 2, so a
    wild ball map restricted to that surface is the identity."""
    return N.value(as_vector(x0, N.dim, "x0")) + 2.0


def sphere_restriction_check(U, x0, eps, N: NormDescriptor, eta, tau, seed=0) -> bool:
    """True iff U is isometric (defect <= tau) on the sampled surface S(x0, eps)."""
    eps = check_positive(eps, "eps")
    tau = check_positive(tau, "tau")
    cloud = sample_sphere(N, SphereSurface(as_vector(x0, N.dim, "x0"), eps), eta, seed)
    return isometry_defect(U, cloud, N, max_points=2048, seed=seed) <= tau


@dataclass
class WitnessReport:
    x: np.ndarray
    x_prime: np.ndarray
    defect: float
    found: bool
    pairs_tried: int


def global_defect_witness(U, region: Ball, N: NormDescriptor, seed=0, budget=2000, min_defect=1e-9) -> WitnessReport:
    """Seeded random search for a pair whose distance U distorts.

    Draws `budget` point pairs uniformly from the region and returns the
    worst pair; ``found`` is False when even the worst defect stays at or
    below ``min_defect`` (a not-found report after the budget).
    """
    seed = check_seed(seed)
    rng = np.random.default_rng(seed)
    ext = N.coordinate_extents() * region.radius
    pts = []
    need = 2 * budget
    while sum(p.shape[0] for p in pts) < need:
        cand = region.center + rng.uniform(-1.0, 1.0, size=(2 * need, N.dim)) * ext
        cand = cand[N.value(cand - region.center) <= region.radius]
        if cand.shape[0]:
            pts.append(cand)
    P = np.vstack(pts)[:need]
    X, Y = P[:budget], P[budget:]
    dsrc = N.value(X - Y)
    imgs_x, imgs_y = U(X), U(Y)
    defects = np.abs(N.value(imgs_x - imgs_y) - dsrc)
    k = int(np.argmax(defects))
    worst = float(defects[k])
    return WitnessReport(
        x=X[k].copy(), x_prime=Y[k].copy(), defect=worst, found=worst > min_defect, pairs_tried=budget
    )


def _grid_centers(region: Ball, patch_radius, spacing, N: NormDescriptor):
    ext = N.coordinate_extents()
    reach = region.radius + patch_radius
    axes = []
    for i in range(N.dim):
        k = int(np.floor(reach * ext[i] / spacing + 1e-9))
        axes.append(region.center[i] + spacing * np.arange(-k, k + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    keep = N.value(centers - region.center) <= region.radius + patch_radius
    return centers[keep]


def make_atlas_from_global(g: AffineMap, region: Ball, patch_radius, spacing, N: NormDescriptor) -> PatchAtlas:
    """Grid of patches covering the region, each carrying g restricted to its
    ball. Spacing must be < 2 * patch_radius, else the cover would fail."""
    patch_radius = check_positive(patch_radius, "patch_radius")
    spacing = check_positive(spacing, "spacing")
    if spacing >= 2.0 * patch_radius:
        raise ValidationError(
            f"spacing {spacing:g} >= 2 * patch_radius {2 * patch_radius:g}: patches could not cover the region"
        )
    centers = _grid_centers(region, patch_radius, spacing, N)
    patches = [
        Patch(c, patch_radius, restrict(g, Ball(c, patch_radius), N, name=f"patch{i}"))
        for i, c in enumerate(centers)
    ]
    return PatchAtlas(patches=patches, region=region)


def make_adversarial_atlas(
    g1: AffineMap, g2: AffineMap, region: Ball, split_axis: int, N: NormDescriptor, patch_radius, spacing
) -> PatchAtlas:
    """Patch grid whose left half (along split_axis, relative to the region
    center) carries g1 and right half g2. Rejects g1 == g2 exactly."""
    if np.array_equal(g1.matrix, g2.matrix) and np.array_equal(g1.offset, g2.offset):
        raise ValidationError("g1 and g2 are identical: the atlas would not be adversarial")
    if not 0 <= split_axis < N.dim:
        raise ValidationError(f"split_axis {split_axis} out of range for dimension {N.dim}")
    patch_radius = check_positive(patch_radius, "patch_radius")
    spacing = check_positive(spacing, "spacing")
    if spacing >= 2.0 * patch_radius:
        raise ValidationError(
            f"spacing {spacing:g} >= 2 * patch_radius {2 * patch_radius:g}: patches could not cover the region"
        )
    centers = _grid_centers(region, patch_radius, spacing, N)
    split = region.center[split_axis]
    patches = []
    for i, c in enumerate(centers):
        gmap = g1 if c[split_axis] < split else g2
        patches.append(Patch(c, patch_radius, restrict(gmap, Ball(c, patch_radius), N, name=f"patch{i}")))
    return PatchAtlas(patches=patches, region=region)
