"""Optimality certificates for greedy coverage solutions.

Each certificate computes a curvature coefficient of the coverage
objective and turns it into a lower bound on H(greedy) / H(optimum).
Five measures are implemented: total, greedy, elemental (via an efficient
upper estimate), partial (via an inner-greedy upper estimate), and the
extended-greedy measure built from iterations past the team size.
Exhaustive brute-force evaluators certify the estimates on small
instances.

Zero-denominator ratios (candidates whose singleton coverage is zero)
are skipped and counted, except in the total curvature where the measure
itself is undefined and an error is raised instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .coverage import CoverageContext
from .errors import ResourceCapError
from .greedy import GreedyTrace

DEFAULT_SUBSET_CAP = 200_000
DEFAULT_TABLE_CAP_BYTES = 256 << 20


# ---------------------------------------------------------------------------
# Bound formulas
# ---------------------------------------------------------------------------

def beta_fundamental(n_agents: int) -> float:
    """Baseline guarantee 1 - (1 - 1/N)^N for any N-site greedy solution."""
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    return 1.0 - (1.0 - 1.0 / n_agents) ** n_agents


def beta_from_total_curvature(alpha: float, n_agents: int) -> float:
    """Bound (1/a)(1 - (1 - a/N)^N); its a -> 0 limit is 1.

    Evaluated via expm1/log1p so that tiny curvatures do not cancel to 0.
    """
    if alpha <= 0.0:
        return 1.0
    if alpha >= n_agents:  # only reachable at N = 1, where the bound is 1
        return 1.0
    return -math.expm1(n_agents * math.log1p(-alpha / n_agents)) / alpha


def beta_from_greedy_curvature(alpha: float, n_agents: int) -> float:
    """Bound 1 - a(1 - 1/N); can fall below the fundamental bound."""
    return 1.0 - alpha * (1.0 - 1.0 / n_agents)


def beta_from_elemental_curvature(alpha: float, n_agents: int) -> float:
    """Bound 1 - (s/(1+s))^N with s = a + a^2 + ... + a^(N-1)."""
    if alpha <= 0.0:
        return 1.0
    s = float(np.sum(alpha ** np.arange(1, n_agents)))
    return 1.0 - (s / (1.0 + s)) ** n_agents


beta_from_partial_curvature = beta_from_total_curvature


# ---------------------------------------------------------------------------
# Curvature measures
# ---------------------------------------------------------------------------

class TotalCurvature(NamedTuple):
    alpha: float
    beta: float


class GreedyCurvature(NamedTuple):
    alpha: float
    beta: float
    skipped: int


class ElementalUpperBound(NamedTuple):
    alpha_upper: float
    beta: float


class PartialUpperBound(NamedTuple):
    alpha_upper: float
    beta: float
    clamped: bool
    skipped: int


class ExtendedGreedyCurvature(NamedTuple):
    alpha: float
    beta: float
    by_index: Dict[int, float]
    q: Tuple[int, ...]
    clamped: bool


class ExactCurvature(NamedTuple):
    alpha: float
    skipped: int


def total_curvature(ctx: CoverageContext, n_agents: int) -> TotalCurvature:
    """Worst-case loss of a candidate's marginal when all other candidates
    are already placed, relative to its standalone value."""
    m = ctx.size
    if m < 2:
        raise ValueError("total curvature needs at least 2 candidates")
    base = ctx.singleton_values()
    if np.any(base <= 0.0):
        raise ValueError(
            "ill-defined total curvature: some candidate has zero singleton coverage"
        )
    probs = ctx.matrix.values
    theta = ctx.theta
    wr = ctx.point_mass

    marg_full = np.zeros(m)
    if theta > 0.0:
        one_minus = 1.0 - probs
        prefix = np.cumprod(one_minus, axis=1)
        suffix = np.cumprod(one_minus[:, ::-1], axis=1)[:, ::-1]
        loo_prod = np.ones_like(probs)
        loo_prod[:, 1:] *= prefix[:, :-1]
        loo_prod[:, :-1] *= suffix[:, 1:]
        marg_full += theta * ((wr[:, None] * probs * loo_prod).sum(axis=0))
    if theta < 1.0:
        order = np.argsort(probs, axis=1)
        top = probs[np.arange(len(probs)), order[:, -1]]
        second = probs[np.arange(len(probs)), order[:, -2]]
        loo_max = np.where(
            np.arange(m)[None, :] == order[:, -1][:, None],
            second[:, None],
            top[:, None],
        )
        marg_full += (1.0 - theta) * (wr @ np.maximum(probs - loo_max, 0.0))

    alpha = float(np.clip(1.0 - np.min(marg_full / base), 0.0, 1.0))
    return TotalCurvature(alpha, beta_from_total_curvature(alpha, n_agents))


def greedy_curvature(trace: GreedyTrace, n_agents: int) -> GreedyCurvature:
    """Worst observed decay of candidate marginals over the first N greedy
    iterations, computed purely from the solver's retained evaluations."""
    if trace.horizon < n_agents:
        raise ValueError("trace horizon is shorter than the team size")
    try:
        first_cand, first_marg = trace.candidate_marginals[1]
    except KeyError:
        raise ValueError(
            "trace lacks candidate marginals for iteration 1 (lazy trace?)"
        ) from None
    base = np.zeros(int(first_cand.max()) + 1)
    base[first_cand] = first_marg

    min_ratio = np.inf
    skipped = 0
    for it in range(1, n_agents + 1):
        try:
            cand, marg = trace.candidate_marginals[it]
        except KeyError:
            raise ValueError(
                f"trace lacks candidate marginals for iteration {it}"
            ) from None
        denom = base[cand]
        valid = denom > 0.0
        skipped += int(np.count_nonzero(~valid))
        if np.any(valid):
            min_ratio = min(min_ratio, float(np.min(marg[valid] / denom[valid])))
    if not np.isfinite(min_ratio):
        return GreedyCurvature(0.0, 1.0, skipped)
    alpha = float(np.clip(1.0 - min_ratio, 0.0, 1.0))
    return GreedyCurvature(alpha, beta_from_greedy_curvature(alpha, n_agents), skipped)


def elemental_curvature_upper(ctx: CoverageContext, n_agents: int) -> ElementalUpperBound:
    """Cheap upper estimate of the elemental curvature.

    Non-trivial only for the pure-joint blend (theta = 1): one minus the
    smallest sensing probability seen by a grid point that also sees some
    other candidate.  Any grid point seeing exactly one candidate (a
    sensing hole) forces the trivial value 1.
    """
    m = ctx.size
    if m < 2:
        raise ValueError("elemental curvature needs at least 2 candidates")
    if ctx.theta != 1.0:
        return ElementalUpperBound(1.0, beta_from_elemental_curvature(1.0, n_agents))
    probs = ctx.matrix.values
    nnz = np.count_nonzero(probs > 0.0, axis=1)
    alpha = 1.0
    if np.any(nnz == 1):
        alpha = 1.0
    elif np.any(nnz >= 2):
        alpha = 1.0 - float(np.min(probs[nnz >= 2].min(axis=1)))
    alpha = float(np.clip(alpha, 0.0, 1.0))
    return ElementalUpperBound(alpha, beta_from_elemental_curvature(alpha, n_agents))


def partial_curvature_upper(ctx: CoverageContext, n_agents: int) -> PartialUpperBound:
    """Upper estimate of the partial curvature via one inner greedy run per
    candidate.

    For each candidate y, greedily build the (N-1)-site set that erodes
    y's marginal the most; the worst erosion, inflated by the inner
    problem's own fundamental bound, upper-bounds the partial curvature.
    Estimates above 1 (possible through the inflation) are clamped and
    flagged.
    """
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    if n_agents == 1:
        return PartialUpperBound(0.0, 1.0, False, 0)
    m = ctx.size
    if n_agents > m:
        raise ValueError("team size exceeds the ground set")
    probs = ctx.matrix.values
    wr = ctx.point_mass
    theta = ctx.theta
    singles = ctx.singleton_values()

    worst = 0.0
    skipped = 0
    for y in range(m):
        if singles[y] <= 0.0:
            skipped += 1
            continue
        p_y = probs[:, y]
        # Erosion of y's max-part marginal by a site c never depends on
        # previously chosen sites beyond the running profile.
        if theta < 1.0:
            gap = np.maximum(p_y[:, None] - probs, 0.0)
        miss = np.ones(len(p_y))
        a = p_y.copy()  # relu(p_y - best) with best = 0
        blocked = np.zeros(m, dtype=bool)
        blocked[y] = True
        for _ in range(n_agents - 1):
            gain = np.zeros(m)
            if theta > 0.0:
                gain += theta * ((wr * p_y * miss) @ probs)
            if theta < 1.0:
                gain += (1.0 - theta) * (wr @ np.maximum(a[:, None] - gap, 0.0))
            gain[blocked] = -np.inf
            pick = int(np.argmax(gain))
            blocked[pick] = True
            col = probs[:, pick]
            miss = miss * (1.0 - col)
            a = np.minimum(a, np.maximum(p_y - col, 0.0))
        remaining_marg = theta * float(np.dot(wr, p_y * miss)) + (1.0 - theta) * float(
            np.dot(wr, a)
        )
        worst = max(worst, 1.0 - remaining_marg / float(singles[y]))

    raw = worst / beta_fundamental(n_agents - 1)
    clamped = raw > 1.0
    alpha = float(np.clip(raw, 0.0, 1.0))
    return PartialUpperBound(
        alpha, beta_from_partial_curvature(alpha, n_agents), clamped, skipped
    )


def extended_index_set(m_size: int, n_agents: int) -> Tuple[int, ...]:
    """All iteration indices usable by the extended-greedy certificate:
    block starts (k*N + 1), block ends (k*N), and the full horizon."""
    blocks = m_size // n_agents
    idx = {m_size}
    idx.update(n * n_agents + 1 for n in range(blocks))
    idx.update(n * n_agents for n in range(1, blocks + 1))
    return tuple(sorted(i for i in idx if 1 <= i <= m_size))


def extended_greedy_curvature(
    trace: GreedyTrace,
    ctx: CoverageContext,
    n_agents: int,
    q: Optional[Sequence[int]] = None,
    inflation: str = "fundamental",
) -> ExtendedGreedyCurvature:
    """Certificate from greedy iterations run past the team size.

    Each index in ``q`` yields an upper estimate of the best achievable
    coverage: block starts bound it by the current value plus the N best
    remaining marginals, block ends by inflating the last block's gain,
    and the full horizon by the value itself.  The bound is the greedy
    value over the smallest estimate.  ``inflation="elemental"`` divides
    block gains by the elemental bound instead of the fundamental one
    (useful for the pure-joint blend, identical otherwise).
    """
    m = ctx.size
    blocks = m // n_agents
    qbar = set(extended_index_set(m, n_agents))
    if q is None:
        q_used = tuple(sorted(qbar))
    else:
        q_used = tuple(sorted(int(i) for i in q))
        bad = [i for i in q_used if i not in qbar]
        if bad:
            raise ValueError(f"indices {bad} are not usable extended-greedy indices")
        if not q_used:
            raise ValueError("q must be non-empty")
    if q_used and q_used[-1] > trace.horizon:
        raise ValueError(
            f"extended-greedy index {q_used[-1]} exceeds trace horizon {trace.horizon}"
        )

    if inflation == "fundamental":
        factor = 1.0 / beta_fundamental(n_agents)
    elif inflation == "elemental":
        factor = 1.0 / elemental_curvature_upper(ctx, n_agents).beta
    else:
        raise ValueError(f"unknown inflation option: {inflation!r}")

    by_index: Dict[int, float] = {}
    for i in q_used:
        estimates = []
        n_start = (i - 1) // n_agents
        if (i - 1) % n_agents == 0 and n_start <= blocks - 1:
            cand, marg = trace.candidate_marginals.get(i, (None, None))
            if cand is None:
                raise ValueError(f"trace lacks candidate marginals for iteration {i}")
            top = np.partition(marg, len(marg) - n_agents)[-n_agents:]
            estimates.append(trace.prefix_value(i - 1) + float(np.sum(top)))
        if i % n_agents == 0 and 1 <= i // n_agents <= blocks:
            gain = trace.prefix_value(i) - trace.prefix_value(i - n_agents)
            estimates.append(trace.prefix_value(i - n_agents) + factor * gain)
        if i == m:
            estimates.append(trace.prefix_value(m))
        by_index[i] = min(estimates)

    alpha = min(by_index.values())
    h_greedy = trace.greedy_value
    if alpha <= 0.0:
        raise ValueError("degenerate instance: zero coverage everywhere")
    raw = h_greedy / alpha
    clamped = raw > 1.0
    return ExtendedGreedyCurvature(
        float(alpha), float(min(raw, 1.0)), by_index, q_used, clamped
    )


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def brute_force_optimum(
    ctx: CoverageContext, n_agents: int, max_subsets: int = DEFAULT_SUBSET_CAP
) -> Tuple[Tuple[int, ...], float]:
    """Exhaustive maximum of coverage over all size-N candidate sets.

    Ties keep the lexicographically smallest set.  Raises
    :class:`ResourceCapError` when the subset count exceeds the cap.
    """
    m = ctx.size
    if not 1 <= n_agents <= m:
        raise ValueError(f"need 1 <= n_agents <= {m}")
    count = comb(m, n_agents)
    if count > max_subsets:
        raise ResourceCapError(
            f"brute force would enumerate {count} subsets, cap is {max_subsets}"
        )
    probs = ctx.matrix.values
    wr = ctx.point_mass
    theta = ctx.theta
    best_set: Tuple[int, ...] = ()
    best_val = -np.inf
    for combo in combinations(range(m), n_agents):
        cols = probs[:, combo]
        detect = theta * (1.0 - np.prod(1.0 - cols, axis=1)) + (1.0 - theta) * np.max(
            cols, axis=1
        )
        val = float(np.dot(wr, detect))
        if val > best_val:
            best_val = val
            best_set = combo
    return best_set, best_val


def _subset_marginal_table(ctx: CoverageContext, max_bytes: int) -> np.ndarray:
    """Marginal of every candidate against every subset, indexed by bitmask.

    Entry [mask, y] is the coverage gain of adding y to the subset encoded
    by mask (meaningless where y is already in the mask).
    """
    m = ctx.size
    n_grid = ctx.matrix.shape[0]
    need = (1 << m) * n_grid * 8 * 2
    if need > max_bytes:
        raise ResourceCapError(
            f"subset tables need {need} bytes for {m} candidates, cap is {max_bytes}"
        )
    probs = ctx.matrix.values
    wr = ctx.point_mass
    theta = ctx.theta
    miss = np.empty((1 << m, n_grid))
    best = np.empty((1 << m, n_grid))
    miss[0] = 1.0
    best[0] = 0.0
    margs = np.empty((1 << m, m))
    for mask in range(1 << m):
        if mask:
            low = mask & -mask
            j = low.bit_length() - 1
            prev = mask ^ low
            col = probs[:, j]
            miss[mask] = miss[prev] * (1.0 - col)
            best[mask] = np.maximum(best[prev], col)
        row = np.zeros(m)
        if theta > 0.0:
            row += theta * ((wr * miss[mask]) @ probs)
        if theta < 1.0:
            row += (1.0 - theta) * (
                wr @ np.maximum(probs - best[mask][:, None], 0.0)
            )
        margs[mask] = row
    return margs


def brute_force_elemental(
    ctx: CoverageContext,
    max_ground: int = 10,
    max_bytes: int = DEFAULT_TABLE_CAP_BYTES,
) -> ExactCurvature:
    """Exact elemental curvature by exhausting every (subset, pair) ratio.

    Ratios with a zero denominator are skipped and counted.  Exponential
    in the ground-set size; refuses to run past ``max_ground``.
    """
    m = ctx.size
    if m < 2:
        raise ValueError("elemental curvature needs at least 2 candidates")
    if m > max_ground:
        raise ResourceCapError(
            f"exact elemental curvature on {m} candidates exceeds the cap of {max_ground}"
        )
    margs = _subset_marginal_table(ctx, max_bytes)
    alpha = 0.0
    skipped = 0
    for mask in range(1 << m):
        free = [y for y in range(m) if not mask & (1 << y)]
        if len(free) < 2:
            continue
        for y_j in free:
            with_j = margs[mask | (1 << y_j)]
            base = margs[mask]
            for y_i in free:
                if y_i == y_j:
                    continue
                if base[y_i] <= 0.0:
                    skipped += 1
                    continue
                alpha = max(alpha, with_j[y_i] / base[y_i])
    return ExactCurvature(float(min(alpha, 1.0)), skipped)


def brute_force_partial(
    ctx: CoverageContext,
    n_agents: int,
    max_subsets: int = DEFAULT_SUBSET_CAP,
    max_bytes: int = DEFAULT_TABLE_CAP_BYTES,
) -> ExactCurvature:
    """Exact partial curvature by exhausting every size-N set and member.

    For every candidate y inside every feasible size-N set, compares y's
    marginal over the rest of the set with its standalone value.
    """
    m = ctx.size
    if not 1 <= n_agents <= m:
        raise ValueError(f"need 1 <= n_agents <= {m}")
    pairs = comb(m, n_agents - 1) * (m - n_agents + 1)
    if pairs > max_subsets:
        raise ResourceCapError(
            f"exact partial curvature would check {pairs} pairs, cap is {max_subsets}"
        )
    margs = _subset_marginal_table(ctx, max_bytes)
    singles = margs[0]
    alpha = 0.0
    skipped = 0
    for rest in combinations(range(m), n_agents - 1):
        mask = 0
        for j in rest:
            mask |= 1 << j
        for y in range(m):
            if mask & (1 << y):
                continue
            if singles[y] <= 0.0:
                skipped += 1
                continue
            alpha = max(alpha, 1.0 - margs[mask][y] / singles[y])
    return ExactCurvature(float(np.clip(alpha, 0.0, 1.0)), skipped)


# ---------------------------------------------------------------------------
# Aggregated report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureReport:
    """All certificates for one solved instance, plus diagnostics."""

    n_agents: int
    h_greedy: float
    beta_f: float
    alpha_t: float
    beta_t: float
    alpha_g: float
    beta_g: float
    greedy_skipped: int
    alpha_e_upper: float
    beta_e: float
    alpha_p_upper: float
    beta_p: float
    partial_clamped: bool
    partial_skipped: int
    alpha_u: float
    beta_u: float
    alpha_u_by_index: Dict[int, float]
    q: Tuple[int, ...]
    extended_clamped: bool

    @property
    def gamma_t(self) -> float:
        return 1.0 - self.alpha_t

    @property
    def gamma_g(self) -> float:
        return 1.0 - self.alpha_g

    @property
    def best_bound(self) -> float:
        return max(self.beta_f, self.beta_t, self.beta_g, self.beta_e, self.beta_p, self.beta_u)

    def bounds(self) -> Dict[str, float]:
        return {
            "beta_f": self.beta_f,
            "beta_t": self.beta_t,
            "beta_g": self.beta_g,
            "beta_e": self.beta_e,
            "beta_p": self.beta_p,
            "beta_u": self.beta_u,
        }


def compute_report(
    ctx: CoverageContext,
    trace: GreedyTrace,
    n_agents: Optional[int] = None,
    q: Optional[Sequence[int]] = None,
    inflation: str = "fundamental",
) -> CurvatureReport:
    """Evaluate every certificate for a solved instance."""
    n = trace.n_agents if n_agents is None else n_agents
    total = total_curvature(ctx, n)
    grd = greedy_curvature(trace, n)
    elem = elemental_curvature_upper(ctx, n)
    part = partial_curvature_upper(ctx, n)
    ext = extended_greedy_curvature(trace, ctx, n, q=q, inflation=inflation)
    return CurvatureReport(
        n_agents=n,
        h_greedy=trace.greedy_value,
        beta_f=beta_fundamental(n),
        alpha_t=total.alpha,
        beta_t=total.beta,
        alpha_g=grd.alpha,
        beta_g=grd.beta,
        greedy_skipped=grd.skipped,
        alpha_e_upper=elem.alpha_upper,
        beta_e=elem.beta,
        alpha_p_upper=part.alpha_upper,
        beta_p=part.beta,
        partial_clamped=part.clamped,
        partial_skipped=part.skipped,
        alpha_u=ext.alpha,
        beta_u=ext.beta,
        alpha_u_by_index=ext.by_index,
        q=ext.q,
        extended_clamped=ext.clamped,
    )
