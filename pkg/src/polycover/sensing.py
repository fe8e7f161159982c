"""Agent sensing model and pointwise detection functions.

An agent senses an event with probability ``exp(-decay * distance)`` when
the event is within the sensing radius and in line of sight, and 0
otherwise.  Note the hard range cutoff: the probability drops to exactly
zero beyond ``radius`` even though the exponential itself never reaches
zero.  Team detection at a point blends two aggregations of the per-agent
probabilities: the "joint" probability that at least one independent agent
detects, and the best single-agent ("max") probability, weighted by
``theta`` (1 = pure joint, 0 = pure max).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceCapError
from .geometry import GroundSet, IntegrationGrid, MissionSpace, line_of_sight, visibility_matrix

# Default cap on the dense sensing-matrix size.
DEFAULT_MATRIX_CAP_BYTES = 1 << 30


@dataclass(frozen=True)
class SensingModel:
    """Homogeneous agent sensing: hard range ``radius``, exponential ``decay``."""

    radius: float
    decay: float

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError("sensing radius must be >= 0")
        if self.decay < 0.0:
            raise ValueError("sensing decay must be >= 0")


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"blend weight must be in [0, 1], got {theta}")
    return theta


def sensing(x, s, model: SensingModel, space: MissionSpace) -> float:
    """Probability that an agent at s detects an event at x."""
    d = math.hypot(x[0] - s[0], x[1] - s[1])
    if d > model.radius:
        return 0.0
    if not line_of_sight(x, s, space):
        return 0.0
    return math.exp(-model.decay * d)


def detect_joint(x, sites, model: SensingModel, space: MissionSpace) -> float:
    """Probability that at least one agent detects an event at x."""
    prod = 1.0
    for s in sites:
        prod *= 1.0 - sensing(x, s, model, space)
    return 1.0 - prod


def detect_max(x, sites, model: SensingModel, space: MissionSpace) -> float:
    """Best single-agent detection probability at x (0 for no agents)."""
    best = 0.0
    for s in sites:
        best = max(best, sensing(x, s, model, space))
    return best


def detect(x, sites, theta: float, model: SensingModel, space: MissionSpace) -> float:
    """Blended detection probability theta*joint + (1-theta)*max."""
    theta = _check_theta(theta)
    return theta * detect_joint(x, sites, model, space) + (1.0 - theta) * detect_max(
        x, sites, model, space
    )


def marginal_detect(x, y, sites, theta: float, model: SensingModel, space: MissionSpace) -> float:
    """Gain in detection probability at x from adding an agent at y.

    Evaluated in closed form rather than as a difference: the joint part
    gains p(x,y) * prod(1 - p(x,s)) and the max part gains
    max(p(x,y) - max_s p(x,s), 0).
    """
    theta = _check_theta(theta)
    p_y = sensing(x, y, model, space)
    prod = 1.0
    best = 0.0
    for s in sites:
        p = sensing(x, s, model, space)
        prod *= 1.0 - p
        best = max(best, p)
    return theta * p_y * prod + (1.0 - theta) * max(p_y - best, 0.0)


@dataclass(frozen=True)
class SensingMatrix:
    """Dense table of sensing probabilities: grid points x candidate sites."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("sensing matrix must be 2-D")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("sensing values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    @property
    def shape(self):
        return self.values.shape


def build_sensing_matrix(
    grid: IntegrationGrid,
    ground: GroundSet,
    model: SensingModel,
    space: MissionSpace,
    max_bytes: int = DEFAULT_MATRIX_CAP_BYTES,
) -> SensingMatrix:
    """Precompute sensing probabilities for every (grid point, candidate) pair.

    Entries beyond the sensing radius are exactly zero; visibility is only
    tested for in-range pairs.  Raises :class:`ResourceCapError` if the
    dense matrix would exceed ``max_bytes``.
    """
    n_grid = len(grid)
    n_ground = len(ground)
    if n_grid == 0 or n_ground == 0:
        raise ValueError("grid and ground set must be non-empty")
    need = n_grid * n_ground * 8
    if need > max_bytes:
        raise ResourceCapError(
            f"sensing matrix needs {need} bytes ({n_grid} x {n_ground} float64), "
            f"cap is {max_bytes} bytes"
        )
    diff = grid.points[:, None, :] - ground.points[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    in_range = dist <= model.radius
    vis = visibility_matrix(grid.points, ground.points, space, mask=in_range)
    values = np.where(vis, np.exp(-model.decay * dist), 0.0)
    return SensingMatrix(values=values)
