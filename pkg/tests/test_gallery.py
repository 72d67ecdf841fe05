import numpy as np
import pytest

from isostitch import (
    AffineMap,
    Ball,
    Certificate,
    NormDescriptor,
    Refutation,
    ValidationError,
    apply,
    distance,
    global_defect_witness,
    make_adversarial_atlas,
    make_atlas_from_global,
    norm,
    sample_sphere,
    sphere_epsilon,
    sphere_restriction_check,
    stitch,
    wild_ball_map,
)
from isostitch.norms import SphereSurface

L2 = NormDescriptor.lp(2, 2)


def test_wild_identity_outside_ball():
    wild = wild_ball_map(L2, "radial-square")
    assert np.array_equal(apply(wild, np.array([2.0, 0.0])), [2.0, 0.0])


def test_wild_radial_square_inside():
    wild = wild_ball_map(L2, "radial-square")
    assert np.allclose(apply(wild, np.array([0.5, 0.0])), [0.25, 0.0], atol=1e-15)


def test_wild_fixes_surface():
    wild = wild_ball_map(L2, "radial-square")
    assert np.allclose(apply(wild, np.array([1.0, 0.0])), [1.0, 0.0], atol=1e-15)


def test_wild_scramble_is_monotone_on_rays():
    # Injectivity surrogate: radius profile strictly increases along rays.
    wild = wild_ball_map(L2, "seeded-scramble", seed=9)
    radii = np.linspace(0.01, 1.0, 50)
    pts = np.stack([radii, np.zeros_like(radii)], axis=1)
    out = L2.value(wild(pts))
    assert (np.diff(out) > 0).all()
    assert abs(out[-1] - 1.0) <= 1e-12


def test_sphere_epsilon_values():
    assert sphere_epsilon([0.0, 0.0], L2) == pytest.approx(2.0)
    assert sphere_epsilon([3.0, 4.0], L2) == pytest.approx(7.0)


def test_sphere_epsilon_surface_clears_unit_ball():
    rng = np.random.default_rng(1)
    for _ in range(5):
        x0 = rng.uniform(-3, 3, size=2)
        eps = sphere_epsilon(x0, L2)
        cloud = sample_sphere(L2, SphereSurface(x0, eps), 0.3)
        assert L2.value(cloud.points).min() >= 2.0 - 1e-9


def test_sphere_restriction_check_safe_radius():
    wild = wild_ball_map(L2, "radial-square")
    x0 = np.array([0.5, -1.0])
    eps = sphere_epsilon(x0, L2)
    assert sphere_restriction_check(wild, x0, eps, L2, eta=0.3, tau=1e-9)


def test_sphere_restriction_check_fails_through_scrambled_ball():
    wild = wild_ball_map(L2, "radial-square")
    assert not sphere_restriction_check(wild, np.zeros(2), 0.5, L2, eta=0.05, tau=1e-9)


def test_sphere_restriction_check_identity_true():
    ident = AffineMap.identity(2)
    assert sphere_restriction_check(ident, np.array([1.0, 1.0]), 1.5, L2, eta=0.2, tau=1e-9)


def test_witness_documented_pair_arithmetic():
    wild = wild_ball_map(L2, "radial-square")
    x, xp = np.array([0.5, 0.0]), np.array([0.6, 0.0])
    assert np.allclose(apply(wild, x), [0.25, 0.0])
    assert np.allclose(apply(wild, xp), [0.36, 0.0])
    defect = abs(distance(apply(wild, x), apply(wild, xp), L2) - distance(x, xp, L2))
    assert defect == pytest.approx(0.01, abs=1e-12)


def test_witness_found_for_wild_map():
    wild = wild_ball_map(L2, "radial-square")
    report = global_defect_witness(wild, Ball(np.zeros(2), 1.0), L2, seed=3, budget=500)
    assert report.found
    assert report.defect >= 0.009
    re_defect = abs(
        distance(apply(wild, report.x), apply(wild, report.x_prime), L2) - distance(report.x, report.x_prime, L2)
    )
    assert re_defect == pytest.approx(report.defect, rel=1e-12)


def test_witness_not_found_for_identity():
    report = global_defect_witness(AffineMap.identity(2), Ball(np.zeros(2), 1.0), L2, seed=3, budget=200)
    assert not report.found
    assert report.pairs_tried == 200


def test_witness_scaling_map_defect_equals_distance():
    scale = AffineMap(2.0 * np.eye(2), np.zeros(2))
    report = global_defect_witness(scale, Ball(np.zeros(2), 1.0), L2, seed=3, budget=200)
    assert report.found
    assert report.defect == pytest.approx(distance(report.x, report.x_prime, L2), rel=1e-12)


def test_make_atlas_from_global_covers_and_certifies():
    g = AffineMap.identity(2)
    atlas = make_atlas_from_global(g, Ball(np.zeros(2), 0.8), 0.5, 0.45, L2)
    verdict = stitch(atlas, L2, eta=0.06, tau=1e-9)
    assert isinstance(verdict, Certificate)


def test_make_atlas_degenerate_spacing_rejected():
    with pytest.raises(ValidationError):
        make_atlas_from_global(AffineMap.identity(2), Ball(np.zeros(2), 1.0), 0.3, 0.6, L2)


def test_make_atlas_single_patch_region():
    atlas = make_atlas_from_global(AffineMap.identity(2), Ball(np.zeros(2), 0.1), 0.5, 0.4, L2)
    assert len(atlas) >= 1


def test_adversarial_identical_maps_rejected():
    g = AffineMap.identity(2)
    with pytest.raises(ValidationError):
        make_adversarial_atlas(g, AffineMap.identity(2), Ball(np.zeros(2), 1.0), 0, L2, 0.5, 0.45)


def test_adversarial_tiny_gap_still_certifies():
    # Disagreement of 1e-12 sits far below 10*tau; tolerance semantics certify.
    g1 = AffineMap.identity(2)
    g2 = AffineMap(np.eye(2), np.array([1e-12, 0.0]))
    atlas = make_adversarial_atlas(g1, g2, Ball(np.zeros(2), 0.8), 0, L2, 0.5, 0.45)
    verdict = stitch(atlas, L2, eta=0.06, tau=1e-9)
    assert isinstance(verdict, Certificate)


def test_adversarial_seam_produces_refutation():
    g1 = AffineMap.identity(2)
    g2 = AffineMap(np.array([[1.0, 0.0], [0.0, -1.0]]), np.array([0.0, 0.5]))
    atlas = make_adversarial_atlas(g1, g2, Ball(np.zeros(2), 0.8), 0, L2, 0.5, 0.45)
    verdict = stitch(atlas, L2, eta=0.06, tau=1e-9)
    assert isinstance(verdict, Refutation)
    assert verdict.defect > 10 * 1e-9
