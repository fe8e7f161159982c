"""The set coverage objective and its marginal forms.

Coverage of a set of candidate sites is the quadrature sum, over the
integration grid, of event density times the blended detection
probability.  Marginals are evaluated in closed form from per-grid-point
running state (the product of miss probabilities and the best single-site
probability), which keeps a full candidate scan at O(grid x candidates).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Tuple

import numpy as np

from .geometry import GroundSet, IntegrationGrid
from .sensing import SensingMatrix, _check_theta

AgentSet = Tuple[int, ...]


def as_agent_set(indices: Iterable[int], size: int) -> AgentSet:
    """Canonical agent set: sorted, distinct, in-range ground-set indices."""
    idx = tuple(sorted(int(i) for i in indices))
    if any(i < 0 or i >= size for i in idx):
        raise ValueError(f"agent index out of range [0, {size})")
    if len(set(idx)) != len(idx):
        raise ValueError("agent set contains duplicate indices")
    return idx


@dataclass(frozen=True)
class CoverageContext:
    """Everything needed to evaluate coverage: sensing matrix, quadrature
    weights and density, candidate sites, and the blend weight."""

    matrix: SensingMatrix
    grid: IntegrationGrid
    ground: GroundSet
    theta: float
    point_mass: np.ndarray = field(init=False)

    def __post_init__(self):
        n_grid, n_ground = self.matrix.shape
        if n_grid != len(self.grid):
            raise ValueError("sensing matrix rows do not match the integration grid")
        if n_ground != len(self.ground):
            raise ValueError("sensing matrix columns do not match the ground set")
        _check_theta(self.theta)
        pm = self.grid.weights * self.grid.density
        pm.setflags(write=False)
        object.__setattr__(self, "point_mass", pm)

    @property
    def size(self) -> int:
        """Number of candidate sites."""
        return len(self.ground)

    def singleton_values(self) -> np.ndarray:
        """Coverage of each single site; the empty-set marginal vector."""
        return self.point_mass @ self.matrix.values

    def detection_profile(self, agents: Iterable[int]):
        """Per-grid-point state (miss product, best probability) for a set."""
        idx = list(agents)
        n_grid = self.matrix.shape[0]
        if not idx:
            return np.ones(n_grid), np.zeros(n_grid)
        cols = self.matrix.values[:, idx]
        return np.prod(1.0 - cols, axis=1), np.max(cols, axis=1)

    def value_from_profile(self, miss: np.ndarray, best: np.ndarray) -> float:
        detect = self.theta * (1.0 - miss) + (1.0 - self.theta) * best
        return float(np.dot(self.point_mass, detect))

    def marginal_vector(self, miss: np.ndarray, best: np.ndarray, candidates) -> np.ndarray:
        """Coverage marginals of every candidate column given the profile."""
        cols = self.matrix.values[:, candidates]
        out = np.zeros(cols.shape[1])
        if self.theta > 0.0:
            out += self.theta * ((self.point_mass * miss) @ cols)
        if self.theta < 1.0:
            gain = np.maximum(cols - best[:, None], 0.0)
            out += (1.0 - self.theta) * (self.point_mass @ gain)
        return out


def coverage(ctx: CoverageContext, agents: Iterable[int]) -> float:
    """Quadrature coverage value of a set of ground-set indices."""
    idx = as_agent_set(agents, ctx.size)
    miss, best = ctx.detection_profile(idx)
    return ctx.value_from_profile(miss, best)


def marginal_coverage(ctx: CoverageContext, y: int, agents: Iterable[int]) -> float:
    """Coverage gain of adding site y to the set (y must not be in it)."""
    idx = as_agent_set(agents, ctx.size)
    y = int(y)
    if y in idx:
        raise ValueError(f"candidate {y} is already in the set")
    miss, best = ctx.detection_profile(idx)
    return float(ctx.marginal_vector(miss, best, [y])[0])


def marginal_coverage_set(ctx: CoverageContext, added: Iterable[int], base: Iterable[int]) -> float:
    """Coverage gain of adding a whole set: H(base | added) difference.

    Overlap between the two sets is allowed; shared sites contribute
    nothing.
    """
    base_idx = as_agent_set(base, ctx.size)
    added_idx = as_agent_set(added, ctx.size)
    union = as_agent_set(set(base_idx) | set(added_idx), ctx.size)
    return coverage(ctx, union) - coverage(ctx, base_idx)


def negated_marginal_objective(ctx: CoverageContext, block: Iterable[int]) -> Callable:
    """Set objective measuring how much of a fixed block's coverage a set
    already provides: value(A) = H(block) - (H(A + block) - H(A)).

    Normalized (value of the empty set is 0), monotone, and submodular over
    sets disjoint from the block; maximizing it finds sets that make the
    block redundant.
    """
    block_idx = as_agent_set(block, ctx.size)
    if not block_idx:
        raise ValueError("block must be non-empty")
    h_block = coverage(ctx, block_idx)
    block_set = set(block_idx)

    def objective(agents) -> float:
        idx = as_agent_set(agents, ctx.size)
        if block_set & set(idx):
            raise ValueError("objective domain excludes the block's own sites")
        return h_block - marginal_coverage_set(ctx, block_idx, idx)

    return objective
