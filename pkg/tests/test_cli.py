import json
import subprocess
import sys

from isostitch.cli import main


def test_midpoint_documented_invocation(tmp_path):
    # Only --tol given: the harness must pick a compatible grid resolution.
    code = main(["midpoint", "--norm", "lp:inf:2", "--x0", "0,0", "--x1", "2,0", "--tol", "1e-2", "--out-dir", str(tmp_path)])
    assert code == 0
    result = json.loads((tmp_path / "midpoint_result.json").read_text())
    assert abs(result["midpoint"][0] - 1.0) <= 1e-2
    assert abs(result["midpoint"][1]) <= 1e-2


def test_midpoint_subcommand(tmp_path):
    code = main(["midpoint", "--norm", "lp:inf:2", "--x0", "0,0", "--x1", "2,0", "--tol", "1e-2", "--eta", "5e-3", "--out-dir", str(tmp_path)])
    assert code == 0
    result = json.loads((tmp_path / "midpoint_result.json").read_text())
    assert abs(result["midpoint"][0] - 1.0) <= 1e-2
    assert abs(result["midpoint"][1]) <= 1e-2
    trace = (tmp_path / "midpoint_trace.csv").read_text().splitlines()
    assert trace[0] == "iteration,delta,cloud_size"
    assert len(trace) >= 2


def test_midpoint_dump_clouds(tmp_path):
    code = main(["midpoint", "--x0", "0,0", "--x1", "2,0", "--dump-clouds", "--out-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "midpoint_cloud_000.csv").exists()


def test_unknown_subcommand_exits_one(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_malformed_config_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["midpoint", "--config", str(bad), "--out-dir", str(tmp_path)]) == 1


def test_extend_subcommand_certifies(tmp_path):
    code = main(
        [
            "extend",
            "--norm",
            "lp:2:2",
            "--center",
            "0,0",
            "--radius",
            "1.0",
            "--map",
            json.dumps({"type": "affine", "matrix": [[0, -1], [1, 0]], "offset": [0.5, 0.5]}),
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "extend_report.json").read_text())
    assert report["certified"]
    assert report["residual_on_ball"] <= 1e-8
    assert report["schedule"][0] == 0.5


def test_extend_stage_failure_exits_two(tmp_path):
    code = main(
        [
            "extend",
            "--norm",
            "lp:2:2",
            "--center",
            "0,0",
            "--radius",
            "1.0",
            "--map",
            json.dumps({"type": "affine", "matrix": [[2, 0], [0, 2]], "offset": [0, 0]}),
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 2
    report = json.loads((tmp_path / "extend_report.json").read_text())
    assert not report["certified"]
    assert report["stage"] == "isometry-precondition"


def test_gallery_then_stitch_positive(tmp_path):
    assert main(["gallery", "--case", "positive-atlas", "--seed", "5", "--out-dir", str(tmp_path)]) == 0
    atlas_file = tmp_path / "positive_atlas.json"
    assert atlas_file.exists()
    code = main(["stitch", "--atlas", str(atlas_file), "--eta", "0.06", "--out-dir", str(tmp_path)])
    assert code == 0
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["kind"] == "certificate"


def test_gallery_then_stitch_adversarial_exits_three(tmp_path):
    assert main(["gallery", "--case", "adversarial-atlas", "--seed", "5", "--gap", "0.3", "--out-dir", str(tmp_path)]) == 0
    code = main(["stitch", "--atlas", str(tmp_path / "adversarial_atlas.json"), "--eta", "0.06", "--out-dir", str(tmp_path)])
    assert code == 3
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["kind"] == "refutation"
    assert verdict["defect"] > 1e-8


def test_stitch_cover_gap_exits_four(tmp_path):
    atlas = {
        "norm": {"kind": "lp", "p": 2, "dim": 2},
        "region": {"center": [0.0, 0.0], "radius": 2.0},
        "patches": [
            {
                "center": [0.0, 0.0],
                "radius": 0.3,
                "map": {"type": "affine", "matrix": [[1, 0], [0, 1]], "offset": [0, 0]},
            }
        ],
    }
    path = tmp_path / "gap.json"
    path.write_text(json.dumps(atlas))
    code = main(["stitch", "--atlas", str(path), "--eta", "0.05", "--out-dir", str(tmp_path)])
    assert code == 4
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["kind"] == "undetermined"
    assert verdict["reason"] == "cover-gap"


def test_gallery_wild_map(tmp_path):
    assert main(["gallery", "--case", "wild-map", "--seed", "2", "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "gallery_wild_map.json").read_text())
    assert all(c["isometric_on_surface"] for c in summary["sphere_checks"])
    assert summary["witness"]["found"]


def test_bench_writes_csv(tmp_path):
    assert main(["bench", "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "bench.csv").read_text().splitlines()
    assert lines[0] == "operation,parameter,seconds"
    assert len(lines) > 3


def test_env_var_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ISOSTITCH_OUT", str(tmp_path / "env-out"))
    assert main(["midpoint", "--x0", "0,0", "--x1", "1,0"]) == 0
    assert (tmp_path / "env-out" / "midpoint_result.json").exists()


def test_config_file_provides_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"norm": "lp:2:2", "x0": [0.0, 0.0], "x1": [2.0, 0.0], "tol": 0.02, "eta": 0.01}))
    assert main(["midpoint", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    result = json.loads((tmp_path / "midpoint_result.json").read_text())
    assert result["tol"] == 0.02


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "isostitch.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "isostitch" in proc.stdout


def test_negative_seed_is_config_error(tmp_path):
    assert main(["suite", "--seed", "-3", "--out-dir", str(tmp_path)]) == 1


def test_stitch_without_atlas_is_config_error(tmp_path):
    assert main(["stitch", "--out-dir", str(tmp_path)]) == 1


def test_suite_probe_deterministic_bytes(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["suite", "--seed", "42", "--profile", "probe", "--out-dir", str(out_a)]) == 0
    assert main(["suite", "--seed", "42", "--profile", "probe", "--out-dir", str(out_b)]) == 0
    for name in ("report.json", "coverage.json", "summary.txt"):
        assert (out_a / "suite" / name).read_bytes() == (out_b / "suite" / name).read_bytes()
    coverage = json.loads((out_a / "suite" / "coverage.json").read_text())
    assert coverage["ops_missing"] == []
