"""polycover: greedy multi-agent coverage over polygonal mission spaces,
with curvature-based certificates of how close greedy gets to optimal."""

from .coverage import (
    AgentSet,
    CoverageContext,
    as_agent_set,
    coverage,
    marginal_coverage,
    marginal_coverage_set,
    negated_marginal_objective,
)
from .curvature import (
    CurvatureReport,
    beta_from_elemental_curvature,
    beta_from_greedy_curvature,
    beta_from_partial_curvature,
    beta_from_total_curvature,
    beta_fundamental,
    brute_force_elemental,
    brute_force_optimum,
    brute_force_partial,
    compute_report,
    elemental_curvature_upper,
    extended_greedy_curvature,
    extended_index_set,
    greedy_curvature,
    partial_curvature_upper,
    total_curvature,
)
from .errors import ResourceCapError, ScenarioError
from .geometry import (
    GroundSet,
    IntegrationGrid,
    MissionSpace,
    Polygon,
    generate_ground_set,
    generate_integration_grid,
    is_feasible,
    line_of_sight,
    rectangle,
    visibility_matrix,
)
from .greedy import GreedyTrace, greedy_on_objective, greedy_solve, improved_bound
from .report import ResultRow, ResultTable, plot_sweep, render_svg
from .runner import (
    SolveResult,
    build_context,
    certify_bounds,
    format_solve_report,
    run_solve,
    run_sweep,
)
from .scenario import (
    ScenarioFile,
    apply_overrides,
    builtin_scenarios,
    load_scenario,
    parse_scenario,
)
from .sensing import (
    SensingMatrix,
    SensingModel,
    build_sensing_matrix,
    detect,
    detect_joint,
    detect_max,
    marginal_detect,
    sensing,
)

__version__ = "0.1.0"
