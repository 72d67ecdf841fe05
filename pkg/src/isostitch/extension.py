"""Extend an isometry given on a ball to a certified global affine isometry.

Pipeline: verify the map is isometric on the sampled ball; take an interior
witness (image of the center, half radius) and verify the image fills the
witness ball to the sampling density; fit an affine candidate g on the
witness sub-ball and certify it there; then check that the residual map
g^(-1) o f fixes the rest of the ball, walking outward shell by shell along
a ray-growth schedule whose steps never outrun the proven doubling rate of
fixed balls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_vector, check_positive
from .errors import PreconditionFailure, StageFailure, ValidationError
from .maps import AffineMap, SampledMap, fit_affine, isometry_defect, pair_defect
from .norms import Ball, NormDescriptor, PointCloud, sample_ball, within_radius

#: Conclusion checks get one order of slack over the input tolerance.
CERT_SLACK = 10.0

#: Pairwise-defect certifications subsample clouds beyond this size.
DEFECT_SAMPLE_CAP = 512


@dataclass
class ExtensionReport:
    """Certified outcome of :func:`extend_ball_isometry`."""

    g: AffineMap
    residual_on_ball: float
    interior_witness: tuple
    schedule: list[float]
    eta: float
    tau: float


def _evaluate(f, P):
    if isinstance(f, SampledMap):
        return f(P)
    return np.asarray(f(P), dtype=float)


def interior_witness(f, ball: Ball, N: NormDescriptor, eta):
    """Witness (y1, x1, r1) that the image of the ball has interior.

    Fixes x1 at the center and r1 at half the radius, then verifies that the
    image of the sampled sub-ball B(x1, r1) is eta-dense in B(y1, r1), where
    y1 = f(x1). Raises StageFailure("interior-witness") when the density
    check fails (e.g. the image collapsed onto a lower-dimensional set).
    """
    eta = check_positive(eta, "eta")
    x1 = ball.center.copy()
    y1 = np.asarray(_evaluate(f, x1.reshape(1, -1))[0], dtype=float)
    r1 = ball.radius / 2.0
    sub = sample_ball(N, Ball(x1, r1), eta)
    images = _evaluate(f, sub.points)
    targets = sample_ball(N, Ball(y1, r1), eta)
    covered = within_radius(targets.points, images, N, eta)
    if not covered.all():
        missing = int((~covered).sum())
        raise StageFailure(
            "interior-witness",
            f"image of the sub-ball is not {eta:.3g}-dense in B(y1, {r1:.3g}): {missing} uncovered targets",
        )
    return y1, x1, r1


def local_affinization(f, x1, r1, N: NormDescriptor, eta, tau) -> AffineMap:
    """Fit an affine map to f on B(x1, r1) and certify it there.

    Certified means: isometry defect at most tau (on a deterministic
    subsample for large clouds), pointwise agreement with f within tau on
    the whole sampled sub-ball, and an invertible linear part.
    """
    x1 = as_vector(x1, N.dim, "x1")
    r1 = check_positive(r1, "r1")
    tau = check_positive(tau, "tau")
    sub = sample_ball(N, Ball(x1, r1), eta)
    images = _evaluate(f, sub.points)
    g = fit_affine((sub.points, images))
    defect = pair_defect(sub.points, g(sub.points), N, max_points=DEFECT_SAMPLE_CAP)
    if defect > tau:
        raise StageFailure("local-affinization", f"fitted map has isometry defect {defect:.3g} > tau")
    agree = float(N.value(g(sub.points) - images).max())
    if agree > tau:
        raise StageFailure(
            "local-affinization", f"fitted map deviates from the input by {agree:.3g} > tau on the sub-ball"
        )
    if abs(np.linalg.det(g.matrix)) < 1e-12:
        raise StageFailure("local-affinization", "fitted linear part is singular")
    return g


def ray_growth_schedule(lambda0) -> list[float]:
    """Descending ray positions lambda0 > lambda1 > ... > 0 with
    lambda_{k+1} = max(0, 2*lambda_k - 1 + eps) and eps = (1 - lambda0)/8.

    Every step stays at or above 2*lambda - 1, the proven growth limit for
    propagating a fixed ball along a ray, and the list ends at the first 0.
    """
    lam = float(lambda0)
    if not 0.0 <= lam < 1.0:
        raise ValidationError(f"lambda0 must lie in [0, 1), got {lambda0!r}")
    eps = (1.0 - lam) / 8.0
    out = [lam]
    while out[-1] > 0.0:
        out.append(max(0.0, 2.0 * out[-1] - 1.0 + eps))
    return out


def doubling_fixed_check(F, x0, r, D_cloud: PointCloud, N: NormDescriptor, tau) -> bool:
    """Certify the fixed-ball doubling step on a finite cloud.

    Preconditions (checked, reported distinctly on violation): F is
    isometric on the cloud within tau and moves no cloud point of
    B(x0, r) by more than tau. Returns True iff no cloud point of
    B(x0, 2r) moves by more than 10*tau.
    """
    x0 = as_vector(x0, N.dim, "x0")
    r = check_positive(r, "r")
    tau = check_positive(tau, "tau")
    defect = isometry_defect(F, D_cloud, N, max_points=2048)
    if defect > tau:
        raise PreconditionFailure("doubling-precondition", f"map is not isometric on the cloud: defect {defect:.3g} > tau")
    P = D_cloud.points
    moved = N.value(_evaluate(F, P) - P)
    dist = N.value(P - x0)
    inner = dist <= r + 1e-12
    if not np.any(inner):
        raise PreconditionFailure("doubling-precondition", "cloud has no points in the inner ball")
    if float(moved[inner].max()) > tau:
        raise PreconditionFailure(
            "doubling-precondition", f"map moves an inner-ball point by {moved[inner].max():.3g} > tau"
        )
    outer = dist <= 2.0 * r + 1e-12
    return bool(moved[outer].max() <= CERT_SLACK * tau)


def extend_ball_isometry(f, ball: Ball, N: NormDescriptor, eta, tau) -> ExtensionReport:
    """Extend a ball isometry to a certified global affine isometry.

    Stages (each raises StageFailure tagged with its name on failure):
    ``isometry-precondition`` -> ``interior-witness`` ->
    ``local-affinization`` -> ``shell-verification``. The residual map
    F = g^(-1) o f must fix every sampled point within 10*tau; shells are
    verified inward-out along :func:`ray_growth_schedule`.
    """
    eta = check_positive(eta, "eta")
    tau = check_positive(tau, "tau")
    cloud = sample_ball(N, ball, eta)
    images = _evaluate(f, cloud.points)
    defect = pair_defect(cloud.points, images, N, max_points=DEFECT_SAMPLE_CAP)
    if defect > tau:
        raise StageFailure("isometry-precondition", f"input defect {defect:.3g} > tau on the sampled ball")

    y1, x1, r1 = interior_witness(f, ball, N, eta)
    g = local_affinization(f, x1, r1, N, eta, tau)

    ginv = g.inverse()
    residuals = N.value(ginv(images) - cloud.points)
    dist = N.value(cloud.points - ball.center)

    lam0 = 1.0 - r1 / ball.radius
    schedule = ray_growth_schedule(lam0)
    radii = [(1.0 - lam) * ball.radius for lam in schedule]
    prev = 0.0
    for lam, rad in zip(schedule, radii):
        shell = (dist > prev) & (dist <= rad + 1e-12)
        if np.any(shell):
            worst = float(residuals[shell].max())
            if worst > CERT_SLACK * tau:
                raise StageFailure(
                    "shell-verification",
                    f"residual {worst:.3g} > {CERT_SLACK:g}*tau on the shell at lambda={lam:.4g}",
                )
        prev = rad
    return ExtensionReport(
        g=g,
        residual_on_ball=float(residuals.max()),
        interior_witness=(y1, x1, r1),
        schedule=schedule,
        eta=eta,
        tau=tau,
    )
