import json
import math

import numpy as np
import pytest

from isostitch import (
    AffineMap,
    Ball,
    Certificate,
    NormDescriptor,
    PointCloud,
    Refutation,
    SampledMap,
    Undetermined,
    ValidationError,
    make_atlas_from_global,
    norm,
    stitch,
)
from isostitch.serialization import (
    affine_from_dict,
    affine_to_dict,
    atlas_to_dict,
    canonical_json,
    cloud_from_csv,
    cloud_to_csv,
    load_atlas,
    map_spec_to_oracle,
    norm_from_dict,
    norm_to_dict,
    parse_norm_spec,
    sampled_map_from_csv,
    sampled_map_to_csv,
    verdict_to_dict,
)

L2 = NormDescriptor.lp(2, 2)


def test_norm_round_trip_lp():
    d = norm_to_dict(L2)
    assert d == {"kind": "lp", "p": 2.0, "dim": 2}
    N = norm_from_dict(d)
    assert N.kind == "lp" and N.p == 2.0 and N.dim == 2


def test_norm_round_trip_inf_and_weighted():
    ninf = NormDescriptor.lp(math.inf, 3)
    d = norm_to_dict(ninf)
    assert d["p"] == "inf"
    assert math.isinf(norm_from_dict(d).p)
    w = NormDescriptor.weighted_lp(2, [1.0, 4.0])
    d2 = norm_to_dict(w)
    back = norm_from_dict(d2)
    assert np.array_equal(back.weights, w.weights)


def test_norm_round_trip_polyhedral():
    hexa = NormDescriptor.polyhedral([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]])
    back = norm_from_dict(norm_to_dict(hexa))
    for v in ([1.0, 1.0], [0.3, -0.2]):
        assert norm(v, back) == pytest.approx(norm(v, hexa), abs=1e-12)


def test_parse_norm_spec_strings(tmp_path):
    assert math.isinf(parse_norm_spec("lp:inf:2").p)
    assert parse_norm_spec("lp:1.5:3").dim == 3
    w = parse_norm_spec("wlp:2:1,2.5")
    assert w.dim == 2 and w.weights[1] == 2.5
    poly_file = tmp_path / "hex.json"
    poly_file.write_text(
        json.dumps({"kind": "polyhedral", "vertices": [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]], "dim": 2})
    )
    assert parse_norm_spec(f"poly:{poly_file}").kind == "polyhedral"
    with pytest.raises(ValidationError):
        parse_norm_spec("nope:1")


def test_affine_round_trip():
    m = AffineMap(np.array([[0.0, -1.0], [1.0, 0.0]]), np.array([0.5, -0.5]))
    back = affine_from_dict(affine_to_dict(m))
    assert np.array_equal(back.matrix, m.matrix)
    assert np.array_equal(back.offset, m.offset)


def test_cloud_csv_round_trip(tmp_path):
    C = PointCloud.from_points([[0.1, 0.2], [0.30000000001, -4.0]], 0.05)
    path = tmp_path / "cloud.csv"
    cloud_to_csv(C, path)
    text = path.read_text()
    assert text.startswith("# eta=0.05")
    back = cloud_from_csv(path)
    assert back.resolution == 0.05
    assert np.array_equal(back.points, C.points)


def test_sampled_map_csv_round_trip(tmp_path):
    sm = SampledMap(np.array([[0.0, 0.0], [1.0, 0.5]]), np.array([[1.0, 1.0], [2.0, 1.5]]))
    path = tmp_path / "pairs.csv"
    sampled_map_to_csv(sm, path)
    back = sampled_map_from_csv(path)
    assert np.array_equal(back.sources, sm.sources)
    assert np.array_equal(back.images, sm.images)


def test_map_spec_affine_and_named_wild():
    spec = {"type": "affine", "matrix": [[1, 0], [0, 1]], "offset": [0, 0]}
    m = map_spec_to_oracle(spec, L2)
    assert np.allclose(m(np.array([0.5, 0.5])), [0.5, 0.5])
    wild = map_spec_to_oracle({"type": "named-wild", "kind": "radial-square", "seed": 0}, L2)
    assert np.allclose(wild(np.array([0.5, 0.0])), [0.25, 0.0])
    with pytest.raises(ValidationError):
        map_spec_to_oracle({"type": "mystery"}, L2)


def test_map_spec_sampled_csv(tmp_path):
    sm = SampledMap(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0.5, 0.0], [1.5, 0.0], [0.5, 1.0]]))
    sampled_map_to_csv(sm, tmp_path / "m.csv")
    oracle = map_spec_to_oracle({"type": "sampled", "path": "m.csv", "lookup_tol": 0.01}, L2, base_dir=str(tmp_path))
    assert np.allclose(oracle(np.array([1.0, 0.0])), [1.5, 0.0])


def test_atlas_file_round_trip(tmp_path):
    g = AffineMap(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0.25, -0.5]))
    atlas = make_atlas_from_global(g, Ball(np.zeros(2), 0.8), 0.5, 0.45, L2)
    specs = [dict(affine_to_dict(g), type="affine") for _ in atlas.patches]
    d = atlas_to_dict(atlas, L2, specs)
    path = tmp_path / "atlas.json"
    path.write_text(canonical_json(d))
    back, N = load_atlas(path)
    assert len(back) == len(atlas)
    verdict = stitch(back, N, eta=0.06, tau=1e-9)
    assert isinstance(verdict, Certificate)


def test_verdict_to_dict_variants():
    cert = Certificate(global_map=AffineMap.identity(2), per_patch_residuals=[1e-12])
    d = verdict_to_dict(cert)
    assert d["kind"] == "certificate"
    ref = Refutation(witness=(np.zeros(2), np.ones(2)), defect=0.5)
    d2 = verdict_to_dict(ref)
    assert d2["kind"] == "refutation" and d2["defect"] == 0.5
    und = Undetermined(reason="disconnected")
    assert verdict_to_dict(und)["reason"] == "disconnected"


def test_canonical_json_is_stable_and_sorted():
    a = canonical_json({"b": np.float64(0.1), "a": [np.int64(3)]})
    b = canonical_json({"a": [3], "b": 0.1})
    assert a == b
    assert a.index('"a"') < a.index('"b"')
    assert a.endswith("\n")
