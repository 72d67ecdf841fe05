"""File formats: norm configs, affine maps, atlases, clouds, reports.

JSON is the structured config format; point clouds and sampled maps travel
as CSV with a comment header. All writers are deterministic: sorted keys,
no timestamps, shortest-round-trip float formatting.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .atlas import Certificate, Patch, PatchAtlas, Refutation, Undetermined
from .errors import ValidationError
from .extension import ExtensionReport
from .gallery import wild_ball_map
from .maps import AffineMap, SampledMap, restrict
from .norms import Ball, NormDescriptor, PointCloud


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def canonical_json(obj) -> str:
    """Stable JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(_jsonify(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- norms --------------------------------------------------------------------


def norm_to_dict(N: NormDescriptor) -> dict:
    if N.kind == "lp":
        return {"kind": "lp", "p": "inf" if math.isinf(N.p) else N.p, "dim": N.dim}
    if N.kind == "weighted_lp":
        return {
            "kind": "weighted_lp",
            "p": "inf" if math.isinf(N.p) else N.p,
            "weights": N.weights.tolist(),
            "dim": N.dim,
        }
    return {"kind": "polyhedral", "vertices": N.vertices.tolist(), "dim": N.dim}


def _parse_p(p):
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "oo"):
            return math.inf
        return float(p)
    return float(p)


def norm_from_dict(d: dict) -> NormDescriptor:
    kind = d.get("kind")
    if kind == "lp":
        return NormDescriptor.lp(_parse_p(d["p"]), int(d["dim"]))
    if kind == "weighted_lp":
        N = NormDescriptor.weighted_lp(_parse_p(d["p"]), d["weights"])
        if "dim" in d and int(d["dim"]) != N.dim:
            raise ValidationError("weighted_lp dim does not match the weight vector length")
        return N
    if kind == "polyhedral":
        N = NormDescriptor.polyhedral(d["vertices"])
        if "dim" in d and int(d["dim"]) != N.dim:
            raise ValidationError("polyhedral dim does not match the vertex dimension")
        return N
    raise ValidationError(f"unknown norm kind {kind!r}")


def parse_norm_spec(spec) -> NormDescriptor:
    """Accepts a NormDescriptor, a config dict, or a compact string:
    ``lp:<p>:<dim>``, ``wlp:<p>:<w1,w2,...>``, ``poly:<path.json>``."""
    if isinstance(spec, NormDescriptor):
        return spec
    if isinstance(spec, dict):
        return norm_from_dict(spec)
    if not isinstance(spec, str):
        raise ValidationError(f"cannot interpret norm spec {spec!r}")
    parts = spec.split(":")
    if parts[0] == "lp" and len(parts) == 3:
        return NormDescriptor.lp(_parse_p(parts[1]), int(parts[2]))
    if parts[0] == "wlp" and len(parts) == 3:
        return NormDescriptor.weighted_lp(_parse_p(parts[1]), [float(w) for w in parts[2].split(",")])
    if parts[0] == "poly" and len(parts) >= 2:
        path = ":".join(parts[1:])
        with open(path, encoding="utf-8") as fh:
            return norm_from_dict(json.load(fh))
    raise ValidationError(f"cannot parse norm spec {spec!r}")


# -- affine maps and balls ----------------------------------------------------


def affine_to_dict(m: AffineMap) -> dict:
    return {"matrix": m.matrix.tolist(), "offset": m.offset.tolist()}


def affine_from_dict(d: dict) -> AffineMap:
    return AffineMap(np.asarray(d["matrix"], dtype=float), np.asarray(d["offset"], dtype=float))


def ball_to_dict(b: Ball) -> dict:
    return {"center": b.center.tolist(), "radius": b.radius}


def ball_from_dict(d: dict) -> Ball:
    return Ball(np.asarray(d["center"], dtype=float), float(d["radius"]))


# -- CSV ----------------------------------------------------------------------


def cloud_to_csv(cloud: PointCloud, path):
    lines = [f"# eta={cloud.resolution!r}"]
    for row in cloud.points:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cloud_from_csv(path) -> PointCloud:
    eta = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "eta=" in line:
                eta = float(line.split("eta=")[1])
            continue
        rows.append([float(v) for v in line.split(",")])
    if eta is None:
        raise ValidationError(f"{path}: missing '# eta=' header")
    return PointCloud.from_points(np.asarray(rows, dtype=float), eta, allow_empty=True)


def sampled_map_to_csv(sm: SampledMap, path):
    lines = [f"# dim={sm.dim}"]
    for s, t in zip(sm.sources, sm.images):
        lines.append(",".join(repr(float(v)) for v in list(s) + list(t)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def sampled_map_from_csv(path) -> SampledMap:
    dim = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "dim=" in line:
                dim = int(line.split("dim=")[1])
            continue
        rows.append([float(v) for v in line.split(",")])
    A = np.asarray(rows, dtype=float)
    if dim is None:
        if A.shape[1] % 2:
            raise ValidationError(f"{path}: odd column count and no '# dim=' header")
        dim = A.shape[1] // 2
    return SampledMap(A[:, :dim], A[:, dim:])


# -- map specs and atlases ----------------------------------------------------


def map_spec_to_oracle(spec: dict, N: NormDescriptor, domain=None, base_dir="."):
    """Build a map from its config: affine | named-wild | sampled CSV."""
    t = spec.get("type")
    if t == "affine":
        m = affine_from_dict(spec)
        return restrict(m, domain, N) if domain is not None else m
    if t == "named-wild":
        return wild_ball_map(N, spec.get("kind", "radial-square"), int(spec.get("seed", 0)))
    if t == "sampled":
        sm = sampled_map_from_csv(os.path.join(base_dir, spec["path"]))
        return sm.as_oracle(N, float(spec.get("lookup_tol", 1e-9)))
    raise ValidationError(f"unknown map spec type {t!r}")


def atlas_to_dict(atlas: PatchAtlas, N: NormDescriptor, map_specs: list[dict]) -> dict:
    """Serialize an atlas given the map spec of each patch (the oracle itself
    is not serializable in general)."""
    if len(map_specs) != len(atlas):
        raise ValidationError("need one map spec per patch")
    return {
        "norm": norm_to_dict(N),
        "region": ball_to_dict(atlas.region),
        "patches": [
            {"center": p.center.tolist(), "radius": p.radius, "map": spec}
            for p, spec in zip(atlas.patches, map_specs)
        ],
    }


def atlas_from_dict(d: dict, base_dir="."):
    """Returns (atlas, norm)."""
    N = norm_from_dict(d["norm"])
    region = ball_from_dict(d["region"])
    patches = []
    for i, pd in enumerate(d["patches"]):
        center = np.asarray(pd["center"], dtype=float)
        radius = float(pd["radius"])
        ball = Ball(center, radius)
        m = map_spec_to_oracle(pd["map"], N, domain=ball, base_dir=base_dir)
        if isinstance(m, AffineMap):
            m = restrict(m, ball, N, name=f"patch{i}")
        patches.append(Patch(center, radius, m))
    return PatchAtlas(patches=patches, region=region), N


def load_atlas(path):
    p = Path(path)
    with p.open(encoding="utf-8") as fh:
        return atlas_from_dict(json.load(fh), base_dir=str(p.parent))


# -- reports ------------------------------------------------------------------


def extension_report_to_dict(r: ExtensionReport) -> dict:
    y1, x1, r1 = r.interior_witness
    return {
        "map": affine_to_dict(r.g),
        "residual_on_ball": r.residual_on_ball,
        "interior_witness": {"y1": list(map(float, y1)), "x1": list(map(float, x1)), "r1": float(r1)},
        "schedule": [float(v) for v in r.schedule],
        "eta": r.eta,
        "tau": r.tau,
    }


def verdict_to_dict(v) -> dict:
    if isinstance(v, Certificate):
        return {
            "kind": "certificate",
            "map": affine_to_dict(v.global_map),
            "per_patch_residuals": [float(r) for r in v.per_patch_residuals],
        }
    if isinstance(v, Refutation):
        x, xp = v.witness
        return {
            "kind": "refutation",
            "witness": [list(map(float, x)), list(map(float, xp))],
            "defect": float(v.defect),
        }
    if isinstance(v, Undetermined):
        return {"kind": "undetermined", "reason": v.reason, "detail": v.detail}
    raise ValidationError(f"not a verdict: {v!r}")
