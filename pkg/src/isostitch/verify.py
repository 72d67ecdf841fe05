"""The verification battery behind the ``suite`` CLI subcommand.

Each check runs a self-contained, seeded experiment and reports pass/fail
with the worst observed margins. ``run_battery`` assembles the checks, the
coverage manifest (which public operations each check exercised), and an
overall verdict; its report is deterministic for a fixed (seed, profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_seed
from .atlas import (
    Certificate,
    Patch,
    PatchAtlas,
    Refutation,
    Undetermined,
    atlas_map,
    build_cover_graph,
    cover_check,
    select_seed,
    stitch,
    surjectivity_coverage,
)
from .errors import PreconditionFailure, StageFailure, ValidationError
from .extension import (
    CERT_SLACK,
    doubling_fixed_check,
    extend_ball_isometry,
    interior_witness,
    local_affinization,
    ray_growth_schedule,
)
from .gallery import (
    global_defect_witness,
    make_adversarial_atlas,
    make_atlas_from_global,
    sphere_epsilon,
    sphere_restriction_check,
    wild_ball_map,
)
from .maps import AffineMap, MapOracle, apply, compose, fit_affine, invert, isometry_defect, restrict
from .midpoint import check_reflection_symmetry, initial_lens, metric_midpoint, refine_once
from .norms import (
    Ball,
    NormDescriptor,
    SphereSurface,
    distance,
    norm,
    sample_ball,
    sample_sphere,
    set_diameter,
)
from .serialization import canonical_json

PROFILES = {
    "full": dict(
        pairs_per_combo=50,
        extension_cases=100,
        fuzz_trials=10_000,
        positive_atlases=100,
        adversarial_atlases=100,
        disconnected_atlases=10,
        wild_centers=20,
        witness_budget=1000,
        pair_check=10_000,
    ),
    "quick": dict(
        pairs_per_combo=3,
        extension_cases=6,
        fuzz_trials=300,
        positive_atlases=4,
        adversarial_atlases=4,
        disconnected_atlases=2,
        wild_centers=5,
        witness_budget=500,
        pair_check=2_000,
    ),
    "probe": dict(
        pairs_per_combo=1,
        extension_cases=2,
        fuzz_trials=40,
        positive_atlases=1,
        adversarial_atlases=1,
        disconnected_atlases=1,
        wild_centers=2,
        witness_budget=200,
        pair_check=500,
    ),
}

#: Every public operation; the coverage manifest must account for each.
PUBLIC_OPS = [
    "norm",
    "distance",
    "sample_ball",
    "sample_sphere",
    "set_diameter",
    "initial_lens",
    "refine_once",
    "metric_midpoint",
    "check_reflection_symmetry",
    "apply",
    "isometry_defect",
    "fit_affine",
    "compose",
    "invert",
    "interior_witness",
    "local_affinization",
    "ray_growth_schedule",
    "doubling_fixed_check",
    "extend_ball_isometry",
    "cover_check",
    "build_cover_graph",
    "select_seed",
    "stitch",
    "surjectivity_coverage",
    "wild_ball_map",
    "sphere_epsilon",
    "sphere_restriction_check",
    "global_defect_witness",
    "make_atlas_from_global",
    "make_adversarial_atlas",
    "run",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    ops: list = field(default_factory=list)


def _sweep_combos():
    hexagon = NormDescriptor.polyhedral([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]])
    combos = []
    for p in (1.0, 1.5, 2.0, 3.0, math.inf):
        for dim in (2, 3):
            combos.append((f"lp{p}", NormDescriptor.lp(p, dim), dim))
    combos.append(("hexagonal", hexagon, 2))
    return combos


def check_midpoint_sweep(seed, prof):
    """Halving of trace diameters and recovery of the algebraic midpoint
    over the norm/dimension sweep; one result per property."""
    rng = np.random.default_rng(seed)
    halving_ok = True
    recovery_ok = True
    worst_halving = -math.inf
    worst_recovery = -math.inf
    runs = 0
    for _, N, dim in _sweep_combos():
        for _ in range(prof["pairs_per_combo"]):
            x0 = rng.uniform(-1.5, 1.5, size=dim)
            x1 = x0 + rng.normal(size=dim)
            d = distance(x0, x1, N)
            if d < 0.2:
                x1 = x0 + (x1 - x0) * (0.5 / max(d, 1e-9))
                d = distance(x0, x1, N)
            eta = d / 200.0
            tol = d / 100.0
            mid, trace = metric_midpoint(x0, x1, N, eta, tol, seed=seed)
            runs += 1
            for a, b in zip(trace.diameters, trace.diameters[1:]):
                margin = b - (0.5 * a + 4.0 * eta)
                worst_halving = max(worst_halving, margin)
                if margin > 1e-12:
                    halving_ok = False
            err = distance(mid, (x0 + x1) / 2.0, N)
            margin = err - (tol + 2.0 * eta)
            worst_recovery = max(worst_recovery, margin)
            if margin > 1e-12:
                recovery_ok = False

    # Documented flat-norm lens: collapses to diameter <= 2*eta in one step.
    N = NormDescriptor.lp(math.inf, 2)
    eta = 0.01
    lens = initial_lens([0.0, 0.0], [2.0, 0.0], N, eta)
    refined = refine_once(lens, N, eta)
    collapse = set_diameter(refined, N)
    symmetric = check_reflection_symmetry(lens, [1.0, 0.0], N, eta)
    singleton_ok = collapse <= 2.0 * eta and symmetric
    if not singleton_ok:
        recovery_ok = False

    halving = CheckResult(
        name="delta-halving",
        passed=halving_ok,
        details={"runs": runs, "worst_margin": worst_halving},
        ops=["metric_midpoint", "initial_lens", "refine_once", "set_diameter", "distance"],
    )
    recovery = CheckResult(
        name="midpoint-recovery",
        passed=recovery_ok,
        details={
            "runs": runs,
            "worst_margin": worst_recovery,
            "flat_lens_collapse_diameter": collapse,
            "flat_lens_symmetric": bool(symmetric),
        },
        ops=["metric_midpoint", "initial_lens", "refine_once", "check_reflection_symmetry", "set_diameter"],
    )
    return halving, recovery


def _random_isometry(rng, flavor, dim=2):
    if flavor == "rotation":
        th = rng.uniform(0.0, 2.0 * math.pi)
        A = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    else:
        perm = np.eye(dim)
        if rng.integers(2):
            perm = perm[::-1].copy()
        signs = np.diag(rng.choice([-1.0, 1.0], size=dim))
        A = signs @ perm
    t = rng.uniform(-3.0, 3.0, size=dim)
    return AffineMap(A, t)


def check_extension(seed, prof):
    """Ground-truth affine isometries restricted to random balls are
    recovered entrywise and the recovery is independent of the grid."""
    rng = np.random.default_rng(seed + 1)
    flavors = [("rotation", NormDescriptor.lp(2, 2)), ("signed", NormDescriptor.lp(1, 2)), ("signed", NormDescriptor.lp(math.inf, 2))]
    tau = 1e-9
    worst_truth = 0.0
    worst_agree = 0.0
    worst_resid = 0.0
    cases = 0
    failures = 0
    for k in range(prof["extension_cases"]):
        flavor, N = flavors[k % 3]
        truth = _random_isometry(rng, flavor)
        center = rng.uniform(-2.0, 2.0, size=2)
        radius = rng.uniform(0.6, 1.4)
        ball = Ball(center, radius)
        f = restrict(truth, ball, N, name="truth")
        recovered = []
        try:
            for div in (50.0, 100.0):
                rep = extend_ball_isometry(f, ball, N, radius / div, tau)
                recovered.append(rep.g)
                worst_resid = max(worst_resid, rep.residual_on_ball)
                err = max(
                    float(np.abs(rep.g.matrix - truth.matrix).max()),
                    float(np.abs(rep.g.offset - truth.offset).max()),
                )
                worst_truth = max(worst_truth, err)
        except StageFailure:
            failures += 1
            continue
        agree = max(
            float(np.abs(recovered[0].matrix - recovered[1].matrix).max()),
            float(np.abs(recovered[0].offset - recovered[1].offset).max()),
        )
        worst_agree = max(worst_agree, agree)
        round_trip = compose(recovered[0], invert(recovered[0]))
        if float(np.abs(round_trip.matrix - np.eye(2)).max() + np.abs(round_trip.offset).max()) > 1e-10:
            failures += 1
        cases += 1
    passed = (
        failures == 0
        and cases == prof["extension_cases"]
        and worst_truth <= 1e-6
        and worst_agree <= 1e-6
        and worst_resid <= CERT_SLACK * tau
    )
    return CheckResult(
        name="extension-uniqueness",
        passed=passed,
        details={
            "cases": cases,
            "stage_failures": failures,
            "worst_entrywise_error": worst_truth,
            "worst_eta_disagreement": worst_agree,
            "worst_residual": worst_resid,
        },
        ops=[
            "extend_ball_isometry",
            "interior_witness",
            "local_affinization",
            "fit_affine",
            "compose",
            "invert",
            "sample_ball",
        ],
    )


def check_ray_schedule(seed=0, prof=None):
    ok = True
    details = {}
    for lam0 in (0.5, 0.75, 0.9, 0.99):
        sched = ray_growth_schedule(lam0)
        sound = all(b >= 2.0 * a - 1.0 - 1e-15 for a, b in zip(sched, sched[1:]))
        decreasing = all(b < a for a, b in zip(sched, sched[1:]))
        bound = math.ceil(math.log2(1.0 / (1.0 - lam0))) + 3
        length_ok = len(sched) <= bound
        ends_at_zero = sched[-1] == 0.0
        details[f"lambda0={lam0}"] = {"length": len(sched), "bound": bound}
        ok = ok and sound and decreasing and length_ok and ends_at_zero
    return CheckResult(name="ray-schedule", passed=ok, details=details, ops=["ray_growth_schedule"])


def _perturbation_field(rng, N, x0, r, tau, family):
    dim = x0.shape[0]
    if family == 0:
        return lambda P: P.copy()
    u = rng.normal(size=dim)
    u = u / norm(u, N)
    if family == 1:
        omega = rng.uniform(0.5, 3.0, size=dim)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        amp = 0.4 * tau

        def fn(P):
            s = np.sin(P @ omega + phase)
            return P + amp * s[:, None] * u

        return fn
    slope = 0.4 * tau / r

    def fn(P):
        ramp = np.maximum(0.0, N.value(P - x0) - r)
        return P + slope * ramp[:, None] * u

    return fn


def check_doubling_fuzz(seed, prof):
    """Seeded maps that are isometric within tau and fix the inner ball within
    tau must never move a 2r-ball point by more than 10*tau."""
    rng = np.random.default_rng(seed + 2)
    tau = 1e-9
    norms = [NormDescriptor.lp(2, 2), NormDescriptor.lp(1, 2), NormDescriptor.lp(math.inf, 2)]
    # The fuzz explores the map space; the geometry cycles a pre-built pool.
    pool = []
    for i in range(min(90, prof["fuzz_trials"])):
        N = norms[i % 3]
        x0 = rng.uniform(-1.0, 1.0, size=2)
        r = rng.uniform(0.3, 1.0)
        pool.append((N, x0, r, sample_ball(N, Ball(x0, 2.0 * r), r / 2.0)))
    violations = 0
    precondition_failures = 0
    trials = prof["fuzz_trials"]
    for t in range(trials):
        N, x0, r, cloud = pool[t % len(pool)]
        fn = _perturbation_field(rng, N, x0, r, tau, t % 3)
        F = MapOracle(func=fn, domain=None, name="fuzz")
        try:
            if not doubling_fixed_check(F, x0, r, cloud, N, tau):
                violations += 1
        except PreconditionFailure:
            precondition_failures += 1
    passed = violations == 0 and precondition_failures == 0
    return CheckResult(
        name="doubling-certifier",
        passed=passed,
        details={"trials": trials, "violations": violations, "precondition_failures": precondition_failures},
        ops=["doubling_fixed_check", "sample_ball", "isometry_defect", "norm"],
    )


def _atlas_params():
    return dict(region_radius=0.8, patch_radius=0.5, spacing=0.45, eta=0.06, tau=1e-9)


def check_stitch(seed, prof):
    """Positive atlases certify with small residuals and pass an independent
    pair check; adversarial atlases refute with re-verifiable witnesses;
    disconnected atlases come back undetermined."""
    rng = np.random.default_rng(seed + 3)
    P = _atlas_params()
    flavors = [("rotation", NormDescriptor.lp(2, 2)), ("signed", NormDescriptor.lp(1, 2)), ("signed", NormDescriptor.lp(math.inf, 2))]
    eta, tau = P["eta"], P["tau"]

    certificates = 0
    worst_resid = 0.0
    worst_pair_defect = 0.0
    coverage_min = 1.0
    for k in range(prof["positive_atlases"]):
        flavor, N = flavors[k % 3]
        g = _random_isometry(rng, flavor)
        region = Ball(rng.uniform(-1.0, 1.0, size=2), P["region_radius"])
        atlas = make_atlas_from_global(g, region, P["patch_radius"], P["spacing"], N)
        verdict = stitch(atlas, N, eta, tau, seed=seed)
        if isinstance(verdict, Certificate) and max(verdict.per_patch_residuals) <= CERT_SLACK * tau:
            certificates += 1
            worst_resid = max(worst_resid, max(verdict.per_patch_residuals))
        amap = atlas_map(atlas, N)
        pts = region.center + rng.uniform(-1.0, 1.0, size=(3 * prof["pair_check"], 2)) * region.radius
        pts = pts[N.value(pts - region.center) <= region.radius]
        half = min(pts.shape[0] // 2, prof["pair_check"])
        X, Y = pts[:half], pts[half : 2 * half]
        defects = np.abs(N.value(amap(X) - amap(Y)) - N.value(X - Y))
        worst_pair_defect = max(worst_pair_defect, float(defects.max()))
        if k == 0:
            target = Ball(g(region.center), region.radius)
            coverage_min = min(coverage_min, surjectivity_coverage(atlas, target, N, 2 * eta, seed=seed))
            graph = build_cover_graph(atlas, N, eta)
            covered, _ = cover_check(atlas, N, eta, seed)
            seed_idx = select_seed(atlas, N, eta)
            if not covered or graph.n_nodes != len(atlas) or not 0 <= seed_idx < len(atlas):
                certificates = -1

    refutations = 0
    worst_witness = math.inf
    for k in range(prof["adversarial_atlases"]):
        flavor, N = flavors[k % 3]
        g1 = _random_isometry(rng, flavor)
        gap = rng.uniform(0.01, 0.3)
        direction = rng.normal(size=2)
        direction /= norm(direction, N)
        g2 = AffineMap(g1.matrix.copy(), g1.offset + gap * direction)
        region = Ball(rng.uniform(-1.0, 1.0, size=2), P["region_radius"])
        atlas = make_adversarial_atlas(g1, g2, region, split_axis=0, N=N, patch_radius=P["patch_radius"], spacing=P["spacing"])
        verdict = stitch(atlas, N, eta, tau, seed=seed)
        if isinstance(verdict, Refutation):
            x, xp = verdict.witness
            amap = atlas_map(atlas, N)
            re_defect = abs(
                distance(apply(amap, x), apply(amap, xp), N) - distance(x, xp, N)
            )
            if re_defect > CERT_SLACK * tau:
                refutations += 1
                worst_witness = min(worst_witness, re_defect)

    undetermined = 0
    for k in range(prof["disconnected_atlases"]):
        flavor, N = flavors[k % 3]
        g = _random_isometry(rng, flavor)
        region = Ball(rng.uniform(-1.0, 1.0, size=2), P["region_radius"])
        atlas = make_atlas_from_global(g, region, P["patch_radius"], P["spacing"], N)
        far = region.center + np.array([50.0, 0.0])
        extra = [
            Patch(far + off, P["patch_radius"], restrict(g, Ball(far + off, P["patch_radius"]), N))
            for off in (np.zeros(2), np.array([0.3, 0.0]))
        ]
        atlas = PatchAtlas(patches=atlas.patches + extra, region=region)
        verdict = stitch(atlas, N, eta, tau, seed=seed)
        if isinstance(verdict, Undetermined) and verdict.reason == "disconnected":
            undetermined += 1

    passed = (
        certificates == prof["positive_atlases"]
        and refutations == prof["adversarial_atlases"]
        and undetermined == prof["disconnected_atlases"]
        and worst_pair_defect <= CERT_SLACK * tau + 4.0 * eta
        and coverage_min >= 0.99
    )
    return CheckResult(
        name="stitch-soundness",
        passed=passed,
        details={
            "certificates": certificates,
            "refutations": refutations,
            "disconnected_detected": undetermined,
            "worst_patch_residual": worst_resid,
            "worst_independent_pair_defect": worst_pair_defect,
            "image_coverage": coverage_min,
        },
        ops=[
            "stitch",
            "cover_check",
            "build_cover_graph",
            "select_seed",
            "surjectivity_coverage",
            "make_atlas_from_global",
            "make_adversarial_atlas",
            "apply",
            "distance",
        ],
    )


def check_wild_map(seed, prof):
    """The wild ball map is isometric on every safe sphere surface yet has a
    positive global distance defect."""
    rng = np.random.default_rng(seed + 4)
    N = NormDescriptor.lp(2, 2)
    wild = wild_ball_map(N, "radial-square", seed)
    tau = 1e-9
    sphere_ok = 0
    for _ in range(prof["wild_centers"]):
        x0 = rng.uniform(-3.0, 3.0, size=2)
        while norm(x0, N) > 3.0:
            x0 = rng.uniform(-3.0, 3.0, size=2)
        eps = sphere_epsilon(x0, N)
        if sphere_restriction_check(wild, x0, eps, N, eta=0.35, tau=tau, seed=seed):
            sphere_ok += 1
    report = global_defect_witness(wild, Ball(np.zeros(2), 1.0), N, seed=seed, budget=prof["witness_budget"])
    # Documented pair: (0.5, 0) and (0.6, 0) map to (0.25, 0), (0.36, 0).
    doc = abs(
        distance(apply(wild, np.array([0.5, 0.0])), apply(wild, np.array([0.6, 0.0])), N)
        - distance(np.array([0.5, 0.0]), np.array([0.6, 0.0]), N)
    )
    scramble = wild_ball_map(N, "seeded-scramble", seed)
    sph = sample_sphere(N, SphereSurface(np.zeros(2), 3.0), 0.4)
    scramble_outside = float(N.value(scramble(sph.points) - sph.points).max())
    passed = (
        sphere_ok == prof["wild_centers"]
        and report.found
        and report.defect >= 0.009
        and abs(doc - 0.01) < 1e-12
        and scramble_outside == 0.0
    )
    return CheckResult(
        name="wild-map",
        passed=passed,
        details={
            "sphere_checks_passed": sphere_ok,
            "witness_defect": report.defect,
            "documented_pair_defect": doc,
        },
        ops=[
            "wild_ball_map",
            "sphere_epsilon",
            "sphere_restriction_check",
            "global_defect_witness",
            "sample_sphere",
            "apply",
            "distance",
        ],
    )


def _report_payload(checks):
    return [
        {"name": c.name, "passed": c.passed, "details": c.details}
        for c in checks
    ]


def _core_checks(seed, prof):
    halving, recovery = check_midpoint_sweep(seed, prof)
    return [
        halving,
        recovery,
        check_extension(seed, prof),
        check_ray_schedule(seed, prof),
        check_doubling_fuzz(seed, prof),
        check_stitch(seed, prof),
        check_wild_map(seed, prof),
    ]


def check_determinism(seed):
    """The probe battery serialized twice from the same seed must agree byte
    for byte."""
    prof = PROFILES["probe"]
    first = canonical_json(_report_payload(_core_checks(seed, prof)))
    second = canonical_json(_report_payload(_core_checks(seed, prof)))
    return CheckResult(
        name="determinism",
        passed=first == second,
        details={"probe_bytes": len(first)},
        ops=["run"],
    )


def run_battery(seed=42, profile="quick"):
    """Run every check; returns a JSON-able report with a coverage manifest."""
    seed = check_seed(seed)
    if profile not in PROFILES:
        raise ValidationError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    prof = PROFILES[profile]
    checks = _core_checks(seed, prof)
    checks.append(check_determinism(seed))
    coverage = {}
    for c in checks:
        for op in c.ops:
            coverage.setdefault(op, []).append(c.name)
    missing = [op for op in PUBLIC_OPS if op not in coverage]
    report = {
        "seed": int(seed),
        "profile": profile,
        "checks": _report_payload(checks),
        "all_passed": bool(all(c.passed for c in checks)),
        "coverage": {op: sorted(set(v)) for op, v in coverage.items()},
        "ops_missing": missing,
    }
    return report
