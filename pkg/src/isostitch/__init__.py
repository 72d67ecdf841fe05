"""isostitch: metric midpoints, ball-isometry extension, and patch-atlas
certification in finite-dimensional real normed spaces.

The functional core lives in :mod:`norms`, :mod:`midpoint`, :mod:`maps`,
:mod:`extension`, :mod:`atlas`, and :mod:`gallery`; estimator-style wrappers
in :mod:`estimators`; file formats in :mod:`serialization`; the CLI in
:mod:`cli`.
"""

__version__ = "0.1.0"

from .atlas import (
    Certificate,
    CoverGraph,
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
from .errors import (
    ConvergenceFailure,
    DegenerateDiscretization,
    DimensionMismatch,
    DomainViolation,
    EmptyCloudError,
    IsostitchError,
    PreconditionFailure,
    RankDeficientData,
    StageFailure,
    ValidationError,
)
from .estimators import AffineIsometryFitter, AtlasStitcher, BallIsometryExtender, MidpointRefiner
from .extension import (
    ExtensionReport,
    doubling_fixed_check,
    extend_ball_isometry,
    interior_witness,
    local_affinization,
    ray_growth_schedule,
)
from .gallery import (
    WitnessReport,
    global_defect_witness,
    make_adversarial_atlas,
    make_atlas_from_global,
    sphere_epsilon,
    sphere_restriction_check,
    wild_ball_map,
)
from .maps import AffineMap, MapOracle, SampledMap, apply, compose, fit_affine, invert, isometry_defect, restrict
from .midpoint import RefinementTrace, check_reflection_symmetry, initial_lens, metric_midpoint, refine_once
from .norms import (
    Ball,
    NormDescriptor,
    PointCloud,
    SphereSurface,
    distance,
    eccentricities,
    norm,
    sample_ball,
    sample_sphere,
    set_diameter,
    within_radius,
)
from .verify import run_battery

__all__ = [
    "AffineIsometryFitter",
    "AffineMap",
    "AtlasStitcher",
    "Ball",
    "BallIsometryExtender",
    "Certificate",
    "ConvergenceFailure",
    "CoverGraph",
    "DegenerateDiscretization",
    "DimensionMismatch",
    "DomainViolation",
    "EmptyCloudError",
    "ExtensionReport",
    "IsostitchError",
    "MapOracle",
    "MidpointRefiner",
    "NormDescriptor",
    "Patch",
    "PatchAtlas",
    "PointCloud",
    "PreconditionFailure",
    "RankDeficientData",
    "RefinementTrace",
    "Refutation",
    "SampledMap",
    "SphereSurface",
    "StageFailure",
    "Undetermined",
    "ValidationError",
    "WitnessReport",
    "apply",
    "atlas_map",
    "build_cover_graph",
    "check_reflection_symmetry",
    "compose",
    "cover_check",
    "distance",
    "doubling_fixed_check",
    "eccentricities",
    "extend_ball_isometry",
    "fit_affine",
    "global_defect_witness",
    "initial_lens",
    "interior_witness",
    "invert",
    "isometry_defect",
    "local_affinization",
    "make_adversarial_atlas",
    "make_atlas_from_global",
    "metric_midpoint",
    "norm",
    "ray_growth_schedule",
    "refine_once",
    "restrict",
    "run_battery",
    "sample_ball",
    "sample_sphere",
    "select_seed",
    "set_diameter",
    "sphere_epsilon",
    "sphere_restriction_check",
    "stitch",
    "surjectivity_coverage",
    "wild_ball_map",
    "within_radius",
]
