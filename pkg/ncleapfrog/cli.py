"""
Command-line front end.

    python -m ncleapfrog simulate --backend rational --d 2 --N 5 --steps 10 --seed 7
    python -m ncleapfrog invariants --N 3 --steps 20 --seed 1
    python -m ncleapfrog biortho --n-max 3 --seed 2
    python -m ncleapfrog brackets --N 2 --seed 0

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error, 3 degeneracy during the run.
"""

from __future__ import annotations

import argparse
import logging
from collections import defaultdict

import pandas as pd
from pydantic import ValidationError

from ncleapfrog import biortho, flows, leapfrog, ncnet
from ncleapfrog.algebra import Backend
from ncleapfrog.config import RunConfig, build_config, describe_error
from ncleapfrog.errors import DegenerateConfiguration, NCLeapfrogError
from ncleapfrog.leapfrog import Mode
from ncleapfrog.reports import (
    check,
    compare_suites,
    max_norm,
    print_suite_summary,
    print_table,
    results_frame,
    suite,
)
from ncleapfrog.serialization import (
    SuiteReport,
    TrajectoryRecord,
    state_record,
    to_jsonable,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(asctime)s] p%(process)s {%(filename)s:%(lineno)d} %(levelname)s - %(message)s"

# Degrees of the bi-orthogonal families used for the flow convergence study
MAX_FLOW_DEGREE = 3
FLOW_TIME = 0.0
SLOPE_TARGET = 2.0
SLOPE_TOLERANCE = 0.3

BIORTHO_SHIFTS = (-1, 0, 1)


def _write_report(config: RunConfig, name: str, result: dict) -> None:
    report = SuiteReport(
        command=config.command,
        seed=config.seed,
        config=config.model_dump(mode="json"),
        results=to_jsonable(result["results"]),
        summary=to_jsonable(result["summary"]),
        details=to_jsonable(result.get("details", {})),
    )
    write_json(config.output / name, report)


# -- simulate ----------------------------------------------------------------------------------


def _step_checks(S: leapfrog.LeapfrogState, nxt: leapfrog.LeapfrogState) -> tuple[dict[str, object], float]:
    """Residuals at one state of the trajectory, keyed by identity, and the largest entry norm they involve."""
    pq = leapfrog.pq_from_vertices(S)
    scale = max_norm([S.v_minus.values, S.v.values, nxt.v.values, pq.p.values, pq.q.values])
    stepped = leapfrog.step_pq(pq)
    pq_next = leapfrog.pq_from_vertices(nxt)
    first, second = leapfrog.lax_residual(pq, S)
    out: dict[str, object] = {
        "pq_route": [(stepped.p[i] - pq_next.p[i], stepped.q[i] - pq_next.q[i]) for i in stepped.indices()],
        "lax_first": first,
        "lax_second": second,
        "cross_ratio": leapfrog.cross_ratio_property_residual(S),
        "g_contract": [leapfrog.g_contract_residuals(S, i) for i in pq.indices()],
    }
    if S.mode is Mode.WINDOWED:
        out["lift_relations"] = leapfrog.lift_relation_residuals(S)
        out["con_det"] = leapfrog.con_det_residuals(S)
        out["cross_ratio_ab"] = leapfrog.cross_ratio_ab_residuals(S)
        out["y_cross_ratio"] = leapfrog.y_cross_ratio_residual(S)
    return out, scale


def _by_layer(residuals: dict[tuple[int, int], object]) -> dict[int, list]:
    grouped: dict[int, list] = defaultdict(list)
    for (j, _), value in residuals.items():
        grouped[j].append(value)
    return grouped


def cmd_simulate(config: RunConfig) -> dict:
    """Run a trajectory, write trajectory.json and residuals.csv, and return the residual suite."""
    state = leapfrog.random_state(config.seed, config.N, config.mode, config.half_width, config.d, config.backend)
    states = leapfrog.trajectory(state, config.steps)
    exact = config.backend.exact

    per_step: dict[int, dict[str, object]] = {}
    scales: dict[int, float] = {}
    for j in range(config.steps):
        try:
            per_step[j], scales[j] = _step_checks(states[j], states[j + 1])
        except DegenerateConfiguration as exc:
            raise exc.at_step(j) from exc

    if config.mode is Mode.WINDOWED and config.steps > 0:
        layers = [ab for ab, _ in leapfrog.ab_trajectory(state, config.steps)]
        for j in range(config.steps):
            scales[j] = max(scales[j], max_norm([layers[j].a.values, layers[j].b.values]))
            per_step[j]["ab_route"] = [
                (stepped_a - layers[j + 1].a[i], stepped_b - layers[j + 1].b[i])
                for i, stepped_a, stepped_b in _stepped(layers[j])
            ]
        hist = leapfrog.y_history(layers)
        y_system = _by_layer(leapfrog.y_system_residual(hist, layers))
        intermediate = leapfrog.y_intermediate_residuals(layers)
        space, time = _by_layer(intermediate["space"]), _by_layer(intermediate["time"])
        commutative = _by_layer(leapfrog.commutative_y_residual(hist)) if config.d == 1 else {}
        for j in range(config.steps):
            per_step[j]["y_system"] = y_system.get(j, [])
            per_step[j]["y_space"] = space.get(j, [])
            per_step[j]["y_time"] = time.get(j, [])
            if config.d == 1:
                per_step[j]["y_commutative"] = commutative.get(j, [])

    rows = []
    for j, checks in per_step.items():
        for name, residuals in checks.items():
            rows.append({"step": j, **check(name, residuals, exact=exact, scale=scales[j])})

    frame = pd.DataFrame(rows)
    if not frame.empty:
        wide = frame.pivot(index="step", columns="check", values="max_residual").reset_index()
        write_csv(config.output / "residuals.csv", wide)
    record = TrajectoryRecord(
        backend=config.backend,
        d=config.d,
        N=config.N,
        mode=config.mode,
        seed=config.seed,
        states=[state_record(j, s) for j, s in enumerate(states)],
    )
    write_json(config.output / "trajectory.json", record)

    results = []
    for name in dict.fromkeys(row["check"] for row in rows):
        mine = [row for row in rows if row["check"] == name]
        worst = max(mine, key=lambda row: row["max_residual"])
        results.append(
            {
                "check": name,
                "max_residual": worst["max_residual"],
                "step": worst["step"],
                "success": all(r["success"] for r in mine),
            }
        )
    return suite(results, command="simulate", seed=config.seed)


def _stepped(ab: leapfrog.ABCoords):
    stepped = leapfrog.step_ab(ab)
    for i in stepped.indices():
        yield i, stepped.a[i], stepped.b[i]


# -- invariants --------------------------------------------------------------------------------


def cmd_invariants(config: RunConfig) -> dict:
    """Boundary measurements, Lax factorization and conservation of t_{i,j}; writes invariants.csv/json."""
    network = ncnet.random_network(config.seed, config.N, config.d, config.backend)
    weights = ncnet.xy_weights(network)
    moved = ncnet.move_all(network)

    boundary = []
    for i in range(1, config.N + 1):
        single = ncnet.square_move(network, i)
        boundary.append(ncnet.square_boundary_matrix(network, i) - ncnet.square_boundary_matrix(single, i))
    after = ncnet.xy_weights(moved)
    stepped = ncnet.step_xy(weights)
    route = [x - y for x, y in zip(after.X + after.Y + (after.Z,), stepped.X + stepped.Y + (stepped.Z,), strict=True)]
    lax = [ncnet.lax_factorization_residual(weights, mu) for mu in config.mu_values]

    report = ncnet.invariants_conservation(weights, config.steps)
    results = [
        check("square_move_boundary", boundary),
        check("move_route", route),
        check("lax_factorization", lax),
        check("conservation", report.drift),
    ]
    write_csv(
        config.output / "invariants.csv",
        pd.DataFrame([{k: to_jsonable(v) for k, v in row.items()} for row in report.rows]),
    )
    result = suite(results, command="invariants", seed=config.seed)
    result["details"] = {"initial": report.initial}
    _write_report(config, "invariants.json", result)
    return result


# -- biortho -----------------------------------------------------------------------------------


def cmd_biortho(config: RunConfig) -> dict:
    """Bi-orthogonality, spectral transformations, Toda and the leapfrog dictionary; flows on floats."""
    window = biortho.moment_window_for(BIORTHO_SHIFTS, config.n_max)
    M = biortho.random_moments(config.seed, window, config.d, config.backend)
    ladder = biortho.build_ladder(M, BIORTHO_SHIFTS, config.n_max)
    lower, mid, upper = (ladder[k] for k in BIORTHO_SHIFTS)
    exact = config.backend.exact

    results = [
        check(f"orthogonality k={k}", biortho.orthogonality_residuals(ladder[k]), exact) for k in BIORTHO_SHIFTS
    ]
    results += [
        check("direct_coefficients", biortho.direct_coefficient_residuals(mid), exact),
        check("christoffel", biortho.christoffel_residual(mid, upper), exact),
        check("geronimus", biortho.geronimus_residual(lower, mid), exact),
        check("recurrence", biortho.recurrence_residual(mid), exact),
        check("discrete_toda", biortho.discrete_toda_residual(mid, upper), exact),
        check("leapfrog_correspondence", biortho.leapfrog_correspondence(mid, lower), exact),
    ]
    if config.n_max >= 1:
        results.append(check("discrete_lax", biortho.discrete_lax_residual(mid, lower), exact))

    if config.backend is Backend.FLOAT:
        degree = min(max(config.n_max, 1), MAX_FLOW_DEGREE)
        flow_rows = []
        for flow in (biortho.Flow.NEGATIVE, biortho.Flow.POSITIVE):
            family = flows.random_flow_family(config.seed, flow, degree, config.d)
            rows, slopes = flows.convergence_table(family, FLOW_TIME, degree, config.h_values)
            flow_rows += [{"flow": flow.value, **row} for row in rows]
            for key, slope in slopes.items():
                results.append(
                    {
                        "check": f"{flow.value} flow {key} order",
                        "slope": float(slope),
                        "success": bool(abs(slope - SLOPE_TARGET) <= SLOPE_TOLERANCE),
                    }
                )
        write_csv(config.output / "flows.csv", pd.DataFrame(flow_rows))

    result = suite(results, command="biortho", seed=config.seed)
    _write_report(config, "biortho.json", result)
    return result


# -- brackets ----------------------------------------------------------------------------------


def cmd_brackets(config: RunConfig) -> dict:
    """Symbolic bracket relations of the network face weights; writes brackets.json."""
    result = ncnet.bracket_relation_suite(config.N, config.points, config.eval_d, config.seed)
    _write_report(config, "brackets.json", result)
    return result


COMMANDS = {
    "simulate": cmd_simulate,
    "invariants": cmd_invariants,
    "biortho": cmd_biortho,
    "brackets": cmd_brackets,
}


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="ncleapfrog",
        description="Non-commutative leapfrog map: trajectories and identity suites.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        command = sub.add_parser(name, help=(fn.__doc__ or name).splitlines()[0], allow_abbrev=False)
        command.add_argument("--seed", type=int, required=True, help="Seed for every random draw")
        command.add_argument("--backend", choices=[b.value for b in Backend], default=None)
        command.add_argument("--d", type=int, default=None, help="Matrix size of ring values")
        command.add_argument("--N", type=int, default=None, help="Period, window core or number of faces")
        command.add_argument("--mode", choices=[m.value for m in Mode], default=None)
        command.add_argument("--W", type=int, default=None, help="Window half-width (default: steps + 2)")
        command.add_argument("--steps", type=int, default=None)
        command.add_argument("--n-max", dest="n_max", type=int, default=None, help="Largest polynomial degree")
        command.add_argument("--points", type=int, default=None, help="Evaluation points per relation")
        command.add_argument("--eval-d", dest="eval_d", type=int, default=None, help="Matrix size for evaluation")
        command.add_argument("--h", dest="h_values", type=float, nargs="+", default=None, help="Flow step sizes")
        command.add_argument("--mu", dest="mu_values", type=int, nargs="+", default=None, help="Spectral values")
        command.add_argument("--output", default=None, help="Output directory (default: output)")
        command.add_argument("--verbose", action="store_true", default=None)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    flags = vars(args)
    logging.basicConfig(format=LOG_FORMAT, level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        config = build_config(flags)
    except ValidationError as err:
        print(f"[error] invalid configuration: {describe_error(err)}")
        return 2

    logger.info("running %s with seed %d", config.command, config.seed)
    try:
        result = COMMANDS[config.command](config)
    except NCLeapfrogError as err:
        print(f"[error] {config.command} stopped: {err}")
        return 3

    print_suite_summary(config.command, result, label="relation" if config.command == "brackets" else "check")
    if config.verbose:
        print_table("results", results_frame(result["results"]))
        print_table("summary", compare_suites({config.command: result}))
    return 0 if result["summary"]["failed"] == 0 else 1
