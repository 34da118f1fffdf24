"""
Residual summaries and console output for the suites.

A suite is a dict with a `results` list (one entry per check, each with a `success` flag) and a
`summary` dict, so that suites can be printed, compared and serialized the same way.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import pandas as pd
from rich.console import Console
from rich.markup import escape

console = Console(highlight=False)

# Float-backend residuals at or below this, relative to the size of the entries involved, count as zero
FLOAT_TOLERANCE = 1e-10


def max_norm(values) -> float:
    """Largest norm over nested residual containers; anything with .norm() counts as a leaf."""
    if values is None:
        return 0.0
    if hasattr(values, "norm"):
        return float(values.norm())
    if isinstance(values, Mapping):
        values = values.values()
    if isinstance(values, Iterable) and not isinstance(values, str):
        return max((max_norm(v) for v in values), default=0.0)
    return abs(float(values))


def check(
    name: str, residuals, exact: bool = True, tolerance: float = FLOAT_TOLERANCE, scale: float = 1.0, **extra
) -> dict:
    """One suite entry: the largest residual norm and whether it is (numerically) zero.

    Float residuals pass at or below tolerance * max(1, scale)**2, with scale the largest entry norm the
    residual was computed from; the residuals are differences of products of two such entries.
    """
    norm = max_norm(residuals)
    success = norm == 0 if exact else norm <= tolerance * max(1.0, scale) ** 2
    return {"check": name, "max_residual": norm, "success": success, **extra}


def failed_check(name: str, error: Exception, **extra) -> dict:
    return {"check": name, "error": str(error), "success": False, **extra}


def summarize(results: list[dict]) -> dict:
    passed = sum(1 for r in results if r["success"])
    return {
        "total_checks": len(results),
        "passed": passed,
        "failed": len(results) - passed,
        "max_residual": max((r.get("max_residual", 0.0) for r in results), default=0.0),
    }


def suite(results: list[dict], **header) -> dict:
    return {**header, "results": results, "summary": summarize(results)}


def results_frame(results: list[dict]) -> pd.DataFrame:
    """Results as a DataFrame, one row per check."""
    return pd.DataFrame(results)


def compare_suites(all_suites: Mapping[str, dict]) -> pd.DataFrame:
    """Pass rates of several suites side by side."""
    rows = []
    for name, result in all_suites.items():
        summary = result["summary"]
        total = summary.get("total_checks") or summary.get("total_relations") or 0
        rate = (summary["passed"] / total) * 100 if total else 0.0
        rows.append(
            {
                "Suite": name,
                "Pass Rate": f"{rate:.1f}%",
                "Passed": summary["passed"],
                "Failed": summary["failed"],
            }
        )
    return pd.DataFrame(rows)


def print_suite_summary(title: str, result: dict, label: str = "check"):
    """Print a suite summary with one PASS/FAIL line per entry."""
    print("\n" + "=" * 60)
    print(title.upper())
    print("=" * 60)

    summary = result["summary"]
    for key, value in summary.items():
        print(f"{key.replace('_', ' ').capitalize()}: {value}")

    print("\nResults:")
    for entry in result["results"]:
        status = "[green]PASS[/green]" if entry["success"] else "[red]FAIL[/red]"
        if "error" in entry:
            detail = entry["error"]
        elif "max_residual" in entry:
            detail = f"{entry['max_residual']:.3g}"
        else:
            detail = f"slope {entry['slope']:.2f}" if "slope" in entry else ""
        where = f" (step {entry['step']})" if "step" in entry else ""
        console.print(f"  {status} {escape(str(entry[label]))}{where} {escape(detail)}".rstrip())

    print("=" * 60)


def print_table(title: str, frame: pd.DataFrame):
    """Print a DataFrame as a markdown table under a banner."""
    print("\n" + "=" * 60)
    print(title.upper())
    print("=" * 60)
    print(frame.to_markdown(index=False))
