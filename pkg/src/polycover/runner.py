"""End-to-end pipelines: solve a scenario, sweep a parameter, certify
bounds against the brute-force optimum."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .coverage import CoverageContext, coverage
from .curvature import (
    CurvatureReport,
    brute_force_elemental,
    brute_force_optimum,
    brute_force_partial,
    compute_report,
    elemental_curvature_upper,
    extended_index_set,
    partial_curvature_upper,
    total_curvature,
)
from .errors import ScenarioError
from .geometry import GroundSet, IntegrationGrid
from .greedy import GreedyTrace, greedy_solve
from .report import ResultRow, ResultTable
from .scenario import ScenarioFile, apply_overrides
from .sensing import build_sensing_matrix

SWEEP_PARAMETERS = ("delta", "lambda", "theta", "N")

# Slack for certifying bound <= greedy/optimal ratios (quadrature rounding).
ORACLE_SLACK = 1e-9


@dataclass(frozen=True)
class SolveResult:
    scenario: ScenarioFile
    ground: GroundSet
    grid: IntegrationGrid
    ctx: CoverageContext
    trace: GreedyTrace
    report: CurvatureReport
    runtime_ms: float

    def detection_values(self, agents: Optional[Sequence[int]] = None) -> np.ndarray:
        """Per-grid-point detection probability of an agent set (defaults
        to the greedy solution)."""
        idx = list(self.trace.greedy_set if agents is None else agents)
        miss, best = self.ctx.detection_profile(idx)
        theta = self.ctx.theta
        return theta * (1.0 - miss) + (1.0 - theta) * best

    def result_row(self, param: float = 0.0) -> ResultRow:
        r = self.report
        return ResultRow(
            param=param,
            beta_f=r.beta_f,
            beta_t=r.beta_t,
            beta_g=r.beta_g,
            beta_e=r.beta_e,
            beta_p=r.beta_p,
            beta_u=r.beta_u,
            h_greedy=r.h_greedy,
            runtime_ms=self.runtime_ms,
        )


def build_context(scenario: ScenarioFile) -> Tuple[CoverageContext, GroundSet, IntegrationGrid]:
    ground = scenario.build_ground_set()
    grid = scenario.build_grid()
    matrix = build_sensing_matrix(grid, ground, scenario.model, scenario.space)
    ctx = CoverageContext(matrix=matrix, grid=grid, ground=ground, theta=scenario.theta)
    return ctx, ground, grid


def run_solve(scenario: ScenarioFile) -> SolveResult:
    """Solve one scenario and compute every certificate.

    Deterministic: identical scenarios produce identical traces and
    reports.  The wall-clock runtime is the only non-deterministic output.
    """
    start = time.perf_counter()
    ctx, ground, grid = build_context(scenario)
    m = len(ground)
    if scenario.n_agents > m:
        raise ScenarioError(f"agents ({scenario.n_agents}) exceed the ground-set size ({m})")
    horizon = m if scenario.horizon is None else scenario.horizon
    trace = greedy_solve(ctx, scenario.n_agents, horizon=horizon, lazy=scenario.lazy)
    if scenario.q is None:
        q = [i for i in extended_index_set(m, scenario.n_agents) if i <= horizon]
    else:
        q = list(scenario.q)
    report = compute_report(ctx, trace, q=q, inflation=scenario.inflation)
    runtime_ms = (time.perf_counter() - start) * 1e3
    return SolveResult(
        scenario=scenario,
        ground=ground,
        grid=grid,
        ctx=ctx,
        trace=trace,
        report=report,
        runtime_ms=runtime_ms,
    )


def run_sweep(scenario: ScenarioFile, parameter: str, values: Sequence[float]) -> ResultTable:
    """Solve the scenario once per parameter value; everything else fixed."""
    if parameter not in SWEEP_PARAMETERS:
        raise ScenarioError(
            f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}"
        )
    values = list(values)
    if not values:
        raise ScenarioError("sweep needs at least one value")
    rows: List[ResultRow] = []
    for value in values:
        if parameter == "delta":
            variant = apply_overrides(scenario, delta=float(value))
        elif parameter == "lambda":
            variant = apply_overrides(scenario, lambda_=float(value))
        elif parameter == "theta":
            variant = apply_overrides(scenario, theta=float(value))
        else:
            if float(value) != int(value):
                raise ScenarioError(f"N sweep values must be integers, got {value}")
            variant = apply_overrides(scenario, n_agents=int(value))
        result = run_solve(variant)
        rows.append(result.result_row(param=float(value)))
    return ResultTable(rows)


@dataclass(frozen=True)
class OracleResult:
    optimum: Tuple[int, ...]
    h_optimum: float
    h_greedy: float
    ratio: float
    bound_checks: dict  # bound name -> (value, holds)
    exact: Optional[dict] = None

    @property
    def all_hold(self) -> bool:
        ok = all(holds for _, holds in self.bound_checks.values())
        if self.exact is not None:
            ok = ok and all(h for _, h in self.exact.values())
        return ok


def certify_bounds(
    result: SolveResult,
    max_subsets: int = 200_000,
    exact_curvatures: bool = False,
) -> OracleResult:
    """Check every reported bound against the brute-force optimum.

    With ``exact_curvatures`` the exhaustive elemental/partial curvatures
    are also computed and compared against their efficient upper
    estimates (small instances only).
    """
    ctx = result.ctx
    n = result.report.n_agents
    best_set, h_star = brute_force_optimum(ctx, n, max_subsets=max_subsets)
    h_greedy = result.report.h_greedy
    ratio = h_greedy / h_star if h_star > 0 else float("nan")
    checks = {
        name: (value, bool(value <= ratio + ORACLE_SLACK))
        for name, value in result.report.bounds().items()
    }
    exact = None
    if exact_curvatures:
        exact = {}
        alpha_e = brute_force_elemental(ctx).alpha
        exact["alpha_e"] = (alpha_e, alpha_e <= result.report.alpha_e_upper + ORACLE_SLACK)
        alpha_p = brute_force_partial(ctx, n).alpha
        exact["alpha_p"] = (alpha_p, alpha_p <= result.report.alpha_p_upper + ORACLE_SLACK)
    return OracleResult(
        optimum=best_set,
        h_optimum=h_star,
        h_greedy=h_greedy,
        ratio=ratio,
        bound_checks=checks,
        exact=exact,
    )


def format_solve_report(result: SolveResult, include_runtime: bool = False) -> str:
    """Human-readable, deterministic solve summary (runtime optional since
    it varies between runs)."""
    scn = result.scenario
    r = result.report
    lines = [
        f"scenario: {scn.name}",
        f"candidates: {len(result.ground)}   grid points: {len(result.grid)}   "
        f"agents: {r.n_agents}",
        f"delta: {scn.model.radius:g}   lambda: {scn.model.decay:g}   theta: {scn.theta:g}",
        f"H(greedy) = {r.h_greedy:.6f}",
        "selection: " + " ".join(str(i) for i in result.trace.selections[: r.n_agents]),
        "bounds:",
        f"  beta_f = {r.beta_f:.3f}",
        f"  beta_t = {r.beta_t:.3f}   (alpha_t = {r.alpha_t:.6f}, gamma_t = {r.gamma_t:.6f})",
        f"  beta_g = {r.beta_g:.3f}   (alpha_g = {r.alpha_g:.6f}, gamma_g = {r.gamma_g:.6f}"
        + (f", skipped {r.greedy_skipped} zero ratios)" if r.greedy_skipped else ")"),
        f"  beta_e = {r.beta_e:.3f}   (alpha_e <= {r.alpha_e_upper:.6f})",
        f"  beta_p = {r.beta_p:.3f}   (alpha_p <= {r.alpha_p_upper:.6f}"
        + (", clamped)" if r.partial_clamped else ")"),
        f"  beta_u = {r.beta_u:.3f}   (coverage upper estimate = {r.alpha_u:.6f}"
        + (", clamped)" if r.extended_clamped else ")"),
        f"best bound: {r.best_bound:.3f}",
    ]
    if include_runtime:
        lines.append(f"runtime: {result.runtime_ms:.1f} ms")
    return "\n".join(lines) + "\n"
