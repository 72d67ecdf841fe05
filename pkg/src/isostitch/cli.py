"""Command-line entry point.

Subcommands: midpoint, extend, stitch, gallery, bench, suite. All outputs
are JSON reports and CSV traces under the output directory (flag
``--out-dir``, else the ISOSTITCH_OUT environment variable, else
``./isostitch-out``). Given the same configuration and seed, every
subcommand writes identical bytes.

Exit codes: 0 success / certificate; 1 malformed configuration or usage;
2 extension stage failure; 3 refutation; 4 undetermined.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import Certificate, Refutation, stitch
from .errors import IsostitchError, StageFailure
from .extension import extend_ball_isometry
from .gallery import (
    global_defect_witness,
    make_adversarial_atlas,
    make_atlas_from_global,
    sphere_epsilon,
    sphere_restriction_check,
    wild_ball_map,
)
from .maps import AffineMap
from .midpoint import metric_midpoint
from .norms import Ball, NormDescriptor, sample_ball
from .serialization import (
    affine_to_dict,
    atlas_to_dict,
    ball_from_dict,
    canonical_json,
    cloud_to_csv,
    extension_report_to_dict,
    load_atlas,
    map_spec_to_oracle,
    norm_to_dict,
    parse_norm_spec,
    verdict_to_dict,
)
from .verify import PROFILES, run_battery

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STAGE_FAILURE = 2
EXIT_REFUTATION = 3
EXIT_UNDETERMINED = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _vector(text):
    return np.array([float(v) for v in text.split(",")], dtype=float)


def _out_dir(args):
    path = args.out_dir or os.environ.get("ISOSTITCH_OUT") or "isostitch-out"
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_config(args):
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            return json.load(fh)
    return {}


def _cfg(args, config, key, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return config.get(key, default)


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")
    print(path)


def _cmd_midpoint(args):
    config = _load_config(args)
    N = parse_norm_spec(_cfg(args, config, "norm", "lp:2:2"))
    x0 = _vector(args.x0) if args.x0 else np.asarray(config["x0"], dtype=float)
    x1 = _vector(args.x1) if args.x1 else np.asarray(config["x1"], dtype=float)
    from .norms import distance

    d = distance(x0, x1, N)
    tol_given = _cfg(args, config, "tol")
    eta_given = _cfg(args, config, "eta")
    if eta_given is not None:
        eta = float(eta_given)
    elif tol_given is not None:
        eta = min(d / 200.0, float(tol_given) / 2.0) if d > 0 else 1e-3
    else:
        eta = d / 200.0 if d > 0 else 1e-3
    tol = float(tol_given) if tol_given is not None else max(d / 100.0, 2.0 * eta)
    seed = int(_cfg(args, config, "seed", 0))
    out = _out_dir(args)
    point, trace = metric_midpoint(x0, x1, N, eta, tol, seed=seed)
    lines = ["iteration,delta,cloud_size"]
    for i, (delta, cloud) in enumerate(zip(trace.diameters, trace.clouds)):
        lines.append(f"{i},{delta!r},{len(cloud)}")
    _write(out / "midpoint_trace.csv", "\n".join(lines) + "\n")
    if args.dump_clouds:
        for i, cloud in enumerate(trace.clouds):
            cloud_to_csv(cloud, out / f"midpoint_cloud_{i:03d}.csv")
    record = {
        "norm": norm_to_dict(N),
        "x0": x0.tolist(),
        "x1": x1.tolist(),
        "eta": eta,
        "tol": tol,
        "seed": seed,
        "midpoint": point.tolist(),
        "iterations": len(trace.clouds) - 1,
        "final_delta": trace.diameters[-1],
    }
    _write(out / "midpoint_result.json", canonical_json(record))
    return EXIT_OK


def _cmd_extend(args):
    config = _load_config(args)
    N = parse_norm_spec(_cfg(args, config, "norm", "lp:2:2"))
    if args.center is not None:
        ball = Ball(_vector(args.center), float(args.radius))
    else:
        ball = ball_from_dict(config["ball"])
    map_spec = json.loads(args.map) if args.map else config["map"]
    base = str(Path(args.config).parent) if args.config else "."
    f = map_spec_to_oracle(map_spec, N, domain=ball, base_dir=base)
    eta = float(_cfg(args, config, "eta", ball.radius / 50.0))
    tau = float(_cfg(args, config, "tau", 1e-9))
    out = _out_dir(args)
    try:
        report = extend_ball_isometry(f, ball, N, eta, tau)
    except StageFailure as exc:
        _write(
            out / "extend_report.json",
            canonical_json({"certified": False, "stage": exc.stage, "detail": exc.detail}),
        )
        return EXIT_STAGE_FAILURE
    payload = {"certified": True, **extension_report_to_dict(report)}
    _write(out / "extend_report.json", canonical_json(payload))
    return EXIT_OK


def _cmd_stitch(args):
    config = _load_config(args)
    atlas_path = args.atlas or config.get("atlas")
    if not atlas_path:
        print("error: stitch needs --atlas or an 'atlas' config key", file=sys.stderr)
        return EXIT_CONFIG
    atlas, N = load_atlas(atlas_path)
    eta = float(_cfg(args, config, "eta", 0.05))
    tau = float(_cfg(args, config, "tau", 1e-9))
    seed = int(_cfg(args, config, "seed", 0))
    out = _out_dir(args)
    verdict = stitch(atlas, N, eta, tau, seed=seed)
    _write(out / "verdict.json", canonical_json(verdict_to_dict(verdict)))
    if isinstance(verdict, Certificate):
        return EXIT_OK
    if isinstance(verdict, Refutation):
        return EXIT_REFUTATION
    return EXIT_UNDETERMINED


def _gallery_wild(args, N, out):
    seed = args.seed
    wild = wild_ball_map(N, args.wild_kind, seed)
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-3.0, 3.0, size=(5, N.dim))
    checks = []
    for c in centers:
        eps = sphere_epsilon(c, N)
        ok = sphere_restriction_check(wild, c, eps, N, eta=max(eps / 12.0, 0.25), tau=1e-9, seed=seed)
        checks.append({"center": c.tolist(), "epsilon": eps, "isometric_on_surface": bool(ok)})
    witness = global_defect_witness(wild, Ball(np.zeros(N.dim), 1.0), N, seed=seed, budget=1000)
    summary = {
        "case": "wild-map",
        "kind": args.wild_kind,
        "norm": norm_to_dict(N),
        "seed": seed,
        "sphere_checks": checks,
        "witness": {
            "x": witness.x.tolist(),
            "x_prime": witness.x_prime.tolist(),
            "defect": witness.defect,
            "found": witness.found,
        },
    }
    _write(out / "gallery_wild_map.json", canonical_json(summary))
    return EXIT_OK


def _gallery_atlas(args, N, out, adversarial):
    seed = args.seed
    rng = np.random.default_rng(seed)
    th = rng.uniform(0.0, 2.0 * np.pi)
    g1 = AffineMap(
        np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]),
        rng.uniform(-1.0, 1.0, size=2),
    )
    region = Ball(np.zeros(2), 0.8)
    radius, spacing = 0.5, 0.45
    if adversarial:
        g2 = AffineMap(g1.matrix.copy(), g1.offset + np.array([args.gap, 0.0]))
        atlas = make_adversarial_atlas(g1, g2, region, 0, N, radius, spacing)
        specs = [
            affine_to_dict(g1 if p.center[0] < region.center[0] else g2) | {"type": "affine"}
            for p in atlas.patches
        ]
        name = "adversarial_atlas.json"
        case = "adversarial-atlas"
    else:
        atlas = make_atlas_from_global(g1, region, radius, spacing, N)
        specs = [affine_to_dict(g1) | {"type": "affine"} for p in atlas.patches]
        name = "positive_atlas.json"
        case = "positive-atlas"
    _write(out / name, canonical_json(atlas_to_dict(atlas, N, specs)))
    summary = {"case": case, "atlas_file": name, "patches": len(atlas), "seed": seed, "norm": norm_to_dict(N)}
    _write(out / f"gallery_{case.replace('-', '_')}.json", canonical_json(summary))
    return EXIT_OK


def _cmd_gallery(args):
    config = _load_config(args)
    N = parse_norm_spec(_cfg(args, config, "norm", "lp:2:2"))
    out = _out_dir(args)
    if args.case == "wild-map":
        return _gallery_wild(args, N, out)
    return _gallery_atlas(args, N, out, adversarial=args.case == "adversarial-atlas")


def _cmd_bench(args):
    out = _out_dir(args)
    N = NormDescriptor.lp(2, 2)
    rows = ["operation,parameter,seconds"]

    def timed(label, param, fn):
        t0 = time.perf_counter()
        fn()
        rows.append(f"{label},{param},{time.perf_counter() - t0:.6f}")

    for div in (50, 100, 200):
        timed("sample_ball", f"eta=r/{div}", lambda d=div: sample_ball(N, Ball(np.zeros(2), 1.0), 1.0 / d))
    for div in (100, 200):
        timed(
            "metric_midpoint",
            f"eta=d/{div}",
            lambda d=div: metric_midpoint(np.zeros(2), np.array([2.0, 0.0]), N, 2.0 / d, 4.0 / d),
        )
    g = AffineMap(np.array([[0.0, -1.0], [1.0, 0.0]]), np.array([0.5, -0.25]))
    from .maps import restrict

    ball = Ball(np.zeros(2), 1.0)
    timed("extend_ball_isometry", "eta=r/50", lambda: extend_ball_isometry(restrict(g, ball, N), ball, N, 1 / 50.0, 1e-9))
    (out / "bench.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(out / "bench.csv")
    return EXIT_OK


def _cmd_suite(args):
    out = _out_dir(args) / "suite"
    out.mkdir(parents=True, exist_ok=True)
    report = run_battery(seed=args.seed, profile=args.profile)
    _write(out / "report.json", canonical_json(report))
    _write(out / "coverage.json", canonical_json({"coverage": report["coverage"], "ops_missing": report["ops_missing"]}))
    lines = []
    for chk in report["checks"]:
        lines.append(f"{'PASS' if chk['passed'] else 'FAIL'} {chk['name']}")
    lines.append(f"{'PASS' if report['all_passed'] else 'FAIL'} overall")
    _write(out / "summary.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if report["all_passed"] else EXIT_UNDETERMINED


def build_parser():
    parser = _Parser(prog="isostitch", description=__doc__)
    parser.add_argument("--version", action="version", version=f"isostitch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out-dir", default=None, help="output directory (or $ISOSTITCH_OUT)")
        p.add_argument("--config", default=None, help="JSON config file; flags override its keys")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("midpoint", help="recover a metric midpoint and emit its refinement trace")
    common(p)
    p.add_argument("--norm", default=None, help="lp:<p>:<dim> | wlp:<p>:<w,..> | poly:<file.json>")
    p.add_argument("--x0", default=None, help="comma-separated coordinates")
    p.add_argument("--x1", default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--dump-clouds", action="store_true")
    p.set_defaults(fn=_cmd_midpoint)

    p = sub.add_parser("extend", help="extend a ball isometry to a certified global affine isometry")
    common(p)
    p.add_argument("--norm", default=None)
    p.add_argument("--center", default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--map", default=None, help="inline JSON map spec")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.set_defaults(fn=_cmd_extend)

    p = sub.add_parser("stitch", help="certify or refute a patch atlas file")
    common(p)
    p.add_argument("--atlas", default=None, help="atlas JSON file")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.set_defaults(fn=_cmd_stitch)

    p = sub.add_parser("gallery", help="emit demonstration instances")
    common(p)
    p.add_argument("--case", choices=["wild-map", "positive-atlas", "adversarial-atlas"], required=True)
    p.add_argument("--norm", default=None)
    p.add_argument("--wild-kind", choices=["radial-square", "seeded-scramble"], default="radial-square")
    p.add_argument("--gap", type=float, default=0.2, help="seam offset for the adversarial atlas")
    p.set_defaults(fn=_cmd_gallery)

    p = sub.add_parser("bench", help="time the core operations")
    common(p)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("suite", help="run the verification battery and write a pass/fail table")
    common(p)
    p.add_argument("--profile", choices=sorted(PROFILES), default="quick")
    p.set_defaults(fn=_cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE_FAILURE
    except (IsostitchError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
