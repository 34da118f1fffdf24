from __future__ import annotations

from fractions import Fraction

from ncleapfrog.reports import (
    FLOAT_TOLERANCE,
    check,
    compare_suites,
    failed_check,
    max_norm,
    print_suite_summary,
    results_frame,
    suite,
    summarize,
)
from tests.conftest import scalar


def test_max_norm_walks_nested_containers():
    residuals = {"a": [scalar(0), (scalar(Fraction(-5, 2)), 1e-3)], "b": {1: scalar(2)}}
    assert max_norm(residuals) == 2.5
    assert max_norm([]) == 0.0
    assert max_norm(None) == 0.0


def test_exact_checks_need_zero():
    assert check("lax", [scalar(0)])["success"]
    assert not check("lax", [scalar(Fraction(1, 10**30))])["success"]


def test_float_checks_use_tolerance():
    entry = check("lax", [FLOAT_TOLERANCE / 2], exact=False, step=4)
    assert entry == {"check": "lax", "max_residual": FLOAT_TOLERANCE / 2, "success": True, "step": 4}
    assert not check("lax", [1e-6], exact=False)["success"]


def test_float_tolerance_grows_with_the_entries():
    residual = [FLOAT_TOLERANCE * 50]
    assert not check("lax", residual, exact=False)["success"]
    assert check("lax", residual, exact=False, scale=10.0)["success"]
    # scales below one never tighten the bound
    assert check("lax", [FLOAT_TOLERANCE], exact=False, scale=0.01)["success"]


def test_suite_summary():
    results = [check("a", [0.0]), check("b", [0.5]), failed_check("c", ValueError("boom"))]
    result = suite(results, command="simulate", seed=1)
    assert result["command"] == "simulate"
    assert result["summary"] == summarize(results)
    assert result["summary"]["total_checks"] == 3
    assert result["summary"]["failed"] == 2
    assert result["summary"]["max_residual"] == 0.5
    assert list(results_frame(results)["check"]) == ["a", "b", "c"]


def test_compare_suites_reports_pass_rates():
    frame = compare_suites({"first": suite([check("a", [0.0])]), "second": suite([check("b", [1.0])])})
    assert list(frame["Pass Rate"]) == ["100.0%", "0.0%"]


def test_printed_summary(capsys):
    result = suite([check("lax", [0.0], step=2), failed_check("toda", ValueError("[singular] block"))])
    print_suite_summary("simulate", result)
    out = capsys.readouterr().out
    assert "SIMULATE" in out
    assert "PASS lax (step 2)" in out
    assert "FAIL toda [singular] block" in out
