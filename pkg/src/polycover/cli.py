"""Command-line front end.

Verbs: ``solve`` (one scenario, full certificate report), ``sweep``
(parameter sweep to CSV, optionally with a figure), ``oracle``
(brute-force certification of the bounds), ``render`` (SVG picture),
``scenarios`` (list built-ins).  Exit codes: 0 success, 1 certification
failure, 2 validation error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .curvature import extended_index_set
from .errors import ResourceCapError, ScenarioError
from .greedy import greedy_solve
from .report import ResultTable, plot_sweep, render_svg
from .runner import (
    SWEEP_PARAMETERS,
    build_context,
    certify_bounds,
    format_solve_report,
    run_solve,
    run_sweep,
)
from .scenario import (
    BUILTIN_DESCRIPTIONS,
    BUILTIN_TEXTS,
    apply_overrides,
    builtin_scenarios,
    load_scenario,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3


def _add_override_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scenario overrides")
    group.add_argument("--delta", type=float, help="sensing radius")
    group.add_argument("--lambda", dest="lambda_", type=float, help="sensing decay rate")
    group.add_argument("--theta", type=float, help="detection blend weight in [0, 1]")
    group.add_argument("--agents", "-N", dest="agents", type=int, help="team size")
    group.add_argument("--pitch", type=float, help="ground-set grid pitch")
    group.add_argument("--offset", type=float, help="ground-set grid offset")
    group.add_argument("--resolution", type=int, help="quadrature cells per axis")
    group.add_argument("--horizon", help="greedy iterations to run (int or 'full')")
    group.add_argument("--q", help="certificate indices, comma-separated (or 'full')")
    group.add_argument("--lazy", action="store_true", default=None, help="lazy candidate scans")
    group.add_argument(
        "--inflation", choices=("fundamental", "elemental"), help="block-gain inflation"
    )


def _apply_cli_overrides(scenario, args):
    horizon = None
    if args.horizon is not None:
        if str(args.horizon).strip().lower() == "full":
            scenario = dataclasses.replace(scenario, horizon=None)
        else:
            try:
                horizon = int(args.horizon)
            except ValueError:
                raise ScenarioError(f"horizon must be an integer or 'full', got {args.horizon!r}")
    q = None
    if args.q is not None:
        if str(args.q).strip().lower() == "full":
            scenario = dataclasses.replace(scenario, q=None)
        else:
            try:
                q = tuple(int(v) for v in str(args.q).split(",") if v.strip())
            except ValueError:
                raise ScenarioError(f"q must be comma-separated integers, got {args.q!r}")
            if not q:
                raise ScenarioError("q must list at least one index")
    return apply_overrides(
        scenario,
        delta=args.delta,
        lambda_=args.lambda_,
        theta=args.theta,
        n_agents=args.agents,
        pitch=args.pitch,
        offset=args.offset,
        resolution=args.resolution,
        horizon=horizon,
        q=q,
        lazy=args.lazy,
        inflation=args.inflation,
    )


def _cmd_solve(args) -> int:
    scenario = _apply_cli_overrides(load_scenario(args.scenario), args)
    result = run_solve(scenario)
    if args.csv:
        sys.stdout.write(ResultTable([result.result_row()]).to_csv())
    else:
        sys.stdout.write(format_solve_report(result))
    if args.trace_out:
        payload = {
            "selections": result.trace.selections,
            "gains": result.trace.gains,
            "values": result.trace.values,
            "n_agents": result.trace.n_agents,
            "horizon": result.trace.horizon,
        }
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        print(f"trace written to {args.trace_out}", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = _apply_cli_overrides(load_scenario(args.scenario), args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError(f"bad sweep values: {args.values!r}")
    table = run_sweep(scenario, args.param, values)
    text = table.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"table written to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    if args.plot:
        plot_sweep(table, args.param, args.plot)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    scenario = _apply_cli_overrides(load_scenario(args.scenario), args)
    result = run_solve(scenario)
    outcome = certify_bounds(
        result, max_subsets=args.max_subsets, exact_curvatures=args.exact
    )
    print(f"H(greedy)  = {outcome.h_greedy:.6f}")
    print(f"H(optimal) = {outcome.h_optimum:.6f}   set: "
          + " ".join(str(i) for i in outcome.optimum))
    print(f"ratio      = {outcome.ratio:.9f}")
    for name, (value, holds) in outcome.bound_checks.items():
        print(f"  {name} = {value:.6f} <= ratio  {'PASS' if holds else 'FAIL'}")
    if outcome.exact is not None:
        for name, (value, holds) in outcome.exact.items():
            print(f"  exact {name} = {value:.6f} <= estimate  {'PASS' if holds else 'FAIL'}")
    return EXIT_OK if outcome.all_hold else EXIT_CHECK_FAILED


def _cmd_render(args) -> int:
    scenario = _apply_cli_overrides(load_scenario(args.scenario), args)
    if args.agents_at:
        try:
            idx = [int(v) for v in args.agents_at.split(",") if v.strip()]
        except ValueError:
            raise ScenarioError(f"bad agent index list: {args.agents_at!r}")
        ctx, ground, grid = build_context(scenario)
        trace = None
    else:
        result = run_solve(scenario)
        ctx, ground, grid = result.ctx, result.ground, result.grid
        idx = list(result.trace.selections[: scenario.n_agents])
    miss, best = ctx.detection_profile(sorted(set(idx)))
    detection = ctx.theta * (1.0 - miss) + (1.0 - ctx.theta) * best
    svg = render_svg(scenario.space, grid, ground, detection, idx)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(svg)
        print(f"svg written to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def _cmd_scenarios(args) -> int:
    for name in sorted(BUILTIN_TEXTS):
        print(f"{name:12s}  {BUILTIN_DESCRIPTIONS[name]}")
    if args.show:
        if args.show not in BUILTIN_TEXTS:
            raise ScenarioError(f"unknown built-in scenario {args.show!r}")
        print()
        sys.stdout.write(BUILTIN_TEXTS[args.show])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polycover",
        description="Greedy coverage placement with curvature-based optimality certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario and print all certificates")
    p.add_argument("scenario", help="built-in name or scenario file path")
    p.add_argument("--csv", action="store_true", help="emit a single CSV row instead")
    p.add_argument("--trace-out", help="write the greedy trace as JSON to this path")
    _add_override_args(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="sweep one parameter and emit a CSV table")
    p.add_argument("scenario")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--plot", help="also save a bounds-vs-parameter figure here")
    _add_override_args(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("oracle", help="certify the bounds against the brute-force optimum")
    p.add_argument("scenario")
    p.add_argument("--max-subsets", type=int, default=200_000)
    p.add_argument("--exact", action="store_true",
                   help="also compare exact elemental/partial curvatures (small instances)")
    _add_override_args(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("render", help="render the mission space and a placement as SVG")
    p.add_argument("scenario")
    p.add_argument("--out", help="SVG output path (default: stdout)")
    p.add_argument("--agents-at", help="explicit ground-set indices instead of solving")
    _add_override_args(p)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("scenarios", help="list built-in scenarios")
    p.add_argument("--show", help="print the scenario text of one built-in")
    p.set_defaults(func=_cmd_scenarios)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
