"""Acceptance battery at full scale.

Each test runs one criterion through the shared verification battery
(:mod:`isostitch.verify`) at the "full" profile and prints a PASS/FAIL line;
run with ``pytest tests/test_acceptance.py -v -s``. The midpoint sweep backs
two criteria and runs once per session.
"""

import json

import pytest

from isostitch.cli import main
from isostitch.verify import (
    PROFILES,
    check_doubling_fuzz,
    check_extension,
    check_midpoint_sweep,
    check_ray_schedule,
    check_stitch,
    check_wild_map,
)

SEED = 42
FULL = PROFILES["full"]


def _report(result):
    print(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: {result.details}")
    assert result.passed, result.details


@pytest.fixture(scope="module")
def midpoint_sweep():
    return check_midpoint_sweep(SEED, FULL)


def test_criterion_1_delta_halving(midpoint_sweep):
    halving, _ = midpoint_sweep
    _report(halving)


def test_criterion_2_midpoint_recovery(midpoint_sweep):
    _, recovery = midpoint_sweep
    _report(recovery)


def test_criterion_3_extension_recovery_and_uniqueness():
    _report(check_extension(SEED, FULL))


def test_criterion_4_ray_schedule():
    _report(check_ray_schedule(SEED, FULL))


def test_criterion_5_doubling_certifier_fuzz():
    _report(check_doubling_fuzz(SEED, FULL))


def test_criterion_6_stitch_soundness():
    _report(check_stitch(SEED, FULL))


def test_criterion_7_wild_map_reproduction():
    _report(check_wild_map(SEED, FULL))


def test_criterion_8_suite_determinism(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["suite", "--seed", "42", "--out-dir", str(out_a)]) == 0
    assert main(["suite", "--seed", "42", "--out-dir", str(out_b)]) == 0
    identical = all(
        (out_a / "suite" / name).read_bytes() == (out_b / "suite" / name).read_bytes()
        for name in ("report.json", "coverage.json", "summary.txt")
    )
    report = json.loads((out_a / "suite" / "report.json").read_text())
    print(f"[{'PASS' if identical else 'FAIL'}] determinism: byte-identical reports, all_passed={report['all_passed']}")
    assert identical
    assert report["all_passed"]
    assert report["ops_missing"] == []
