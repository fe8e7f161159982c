"""Greedy placement: full-scan and lazy variants, plus a generic engine.

The solver can run past the requested team size ("extra iterations"), and
the trace keeps every candidate's marginal per iteration because the
curvature certificates consume them.  In lazy mode a priority queue of
stale marginals skips most evaluations; full scans still happen at the
iterations whose candidate marginals the certificates need, so the same
certificates remain computable.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .coverage import CoverageContext

# Relative slack for the non-increasing-gain sanity check (pure rounding).
_GAIN_SLACK = 1e-9


@dataclass
class GreedyTrace:
    """Ordered greedy selections with per-iteration evaluation byproducts.

    ``values[i-1]`` is the objective after i selections; iterations are
    1-indexed in ``candidate_marginals``, which maps an iteration to the
    (candidate indices, their marginals) evaluated there.  Lazy runs only
    retain the iterations they fully scanned.
    """

    selections: List[int]
    gains: List[float]
    values: List[float]
    n_agents: int
    horizon: int
    candidate_marginals: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    @property
    def greedy_set(self) -> Tuple[int, ...]:
        return tuple(sorted(self.selections[: self.n_agents]))

    @property
    def greedy_value(self) -> float:
        return self.prefix_value(self.n_agents)

    def prefix_value(self, i: int) -> float:
        """Objective value after the first i selections (0 for i = 0)."""
        if not 0 <= i <= self.horizon:
            raise ValueError(f"prefix length {i} outside [0, {self.horizon}]")
        return 0.0 if i == 0 else self.values[i - 1]


def _retained_iterations(n_agents: int, horizon: int) -> set:
    """Iterations whose full candidate marginals the certificates consume:
    the first n_agents iterations plus every block start (k*n_agents + 1)."""
    keep = set(range(1, min(n_agents, horizon) + 1))
    i = n_agents + 1
    while i <= horizon:
        keep.add(i)
        i += n_agents
    return keep


def greedy_solve(
    ctx: CoverageContext,
    n_agents: int,
    horizon: Optional[int] = None,
    lazy: bool = False,
) -> GreedyTrace:
    """Run greedy selection for ``horizon`` iterations (default: the whole
    ground set); the first ``n_agents`` selections form the solution.

    Each iteration picks the candidate with the largest coverage marginal,
    ties broken by lowest ground-set index.  Zero-marginal candidates stay
    selectable so the horizon is always reached.
    """
    m = ctx.size
    if not 1 <= n_agents <= m:
        raise ValueError(f"need 1 <= n_agents <= {m}, got {n_agents}")
    if horizon is None:
        horizon = m
    if not n_agents <= horizon <= m:
        raise ValueError(f"need n_agents <= horizon <= {m}, got horizon={horizon}")

    retain = _retained_iterations(n_agents, horizon) if lazy else None
    remaining = np.ones(m, dtype=bool)
    miss = np.ones(len(ctx.grid))
    best = np.zeros(len(ctx.grid))
    selections: List[int] = []
    gains: List[float] = []
    values: List[float] = []
    marginals: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    heap: List[Tuple[float, int, int]] = []  # (-marginal, index, iteration evaluated)
    total = 0.0

    for it in range(1, horizon + 1):
        full_scan = retain is None or it in retain
        if full_scan:
            cand = np.flatnonzero(remaining)
            marg = ctx.marginal_vector(miss, best, cand)
            pick_pos = int(np.argmax(marg))
            pick, gain = int(cand[pick_pos]), float(marg[pick_pos])
            marginals[it] = (cand, marg)
            if retain is not None:
                heap = [
                    (-float(v), int(c), it)
                    for c, v in zip(cand, marg)
                    if c != pick
                ]
                heapq.heapify(heap)
        else:
            while True:
                neg, idx, evaluated = heapq.heappop(heap)
                if not remaining[idx]:
                    continue
                if evaluated == it:
                    pick, gain = idx, -neg
                    break
                fresh = float(ctx.marginal_vector(miss, best, [idx])[0])
                heapq.heappush(heap, (-fresh, idx, it))

        if gains and gain > gains[-1] + _GAIN_SLACK * max(1.0, abs(gains[-1])):
            raise RuntimeError(
                f"greedy gain increased at iteration {it}: {gains[-1]} -> {gain}"
            )
        remaining[pick] = False
        col = ctx.matrix.values[:, pick]
        miss = miss * (1.0 - col)
        best = np.maximum(best, col)
        total += gain
        selections.append(pick)
        gains.append(gain)
        values.append(total)

    return GreedyTrace(
        selections=selections,
        gains=gains,
        values=values,
        n_agents=n_agents,
        horizon=horizon,
        candidate_marginals=marginals,
    )


def greedy_on_objective(objective: Callable, candidates: Sequence[int], k: int) -> GreedyTrace:
    """Generic greedy over an arbitrary normalized set objective.

    Selection rule and tie-breaking match :func:`greedy_solve`: highest
    marginal first, lowest candidate index on ties.  The objective is
    called with a tuple of the chosen candidates.
    """
    cands = sorted(int(c) for c in candidates)
    if len(set(cands)) != len(cands):
        raise ValueError("candidates must be distinct")
    if not 0 <= k <= len(cands):
        raise ValueError(f"need 0 <= k <= {len(cands)}, got {k}")

    chosen: List[int] = []
    gains: List[float] = []
    values: List[float] = []
    marginals: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    current = 0.0
    remaining = list(cands)
    for it in range(1, k + 1):
        margs = np.array(
            [objective(tuple(chosen + [c])) - current for c in remaining]
        )
        pos = int(np.argmax(margs))
        marginals[it] = (np.array(remaining), margs)
        pick = remaining.pop(pos)
        current += float(margs[pos])
        chosen.append(pick)
        gains.append(float(margs[pos]))
        values.append(current)

    return GreedyTrace(
        selections=chosen,
        gains=gains,
        values=values,
        n_agents=k,
        horizon=k,
        candidate_marginals=marginals,
    )


class ImprovedBound(NamedTuple):
    value: float
    capped: bool


def improved_bound(beta: float, h_greedy: float, h_improved: float) -> ImprovedBound:
    """Scale a certified bound by the improvement ratio of a better solution.

    Any solution found after greedy with value h_improved >= h_greedy
    carries the bound beta * h_improved / h_greedy.  Values past 1 can only
    come from inconsistent objective evaluations; they are capped and
    flagged.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    if h_greedy <= 0.0:
        raise ValueError("greedy value must be positive")
    if h_improved < h_greedy:
        raise ValueError(
            f"h_improved ({h_improved}) below h_greedy ({h_greedy}): not an improvement"
        )
    scaled = beta * h_improved / h_greedy
    if scaled > 1.0:
        return ImprovedBound(1.0, True)
    return ImprovedBound(scaled, False)
