"""Random instance generator shared by the unit and acceptance tests.

Instances are small enough for brute-force certification: explicit ground
sets of 6-12 points, quadrature grids of a few hundred cells, and up to
two rectangular obstacles in a 600 x 600 space.
"""

from dataclasses import dataclass

import numpy as np

from polycover import (
    CoverageContext,
    GroundSet,
    IntegrationGrid,
    MissionSpace,
    SensingModel,
    build_sensing_matrix,
    generate_integration_grid,
    rectangle,
)


@dataclass
class SynthInstance:
    ctx: CoverageContext
    space: MissionSpace
    model: SensingModel
    theta: float
    n_agents: int

    @property
    def m(self):
        return self.ctx.size


def _random_obstacles(rng, count):
    placed = []
    polys = []
    for _ in range(count):
        for _attempt in range(30):
            w = rng.uniform(40.0, 150.0)
            h = rng.uniform(40.0, 150.0)
            x0 = rng.uniform(20.0, 580.0 - w)
            y0 = rng.uniform(20.0, 580.0 - h)
            box = (x0, y0, x0 + w, y0 + h)
            clear = all(
                box[2] + 5 < b[0] or b[2] + 5 < box[0] or box[3] + 5 < b[1] or b[3] + 5 < box[1]
                for b in placed
            )
            if clear:
                placed.append(box)
                polys.append(rectangle(*box))
                break
    return polys


def _random_ground(rng, space, m):
    pts = []
    while len(pts) < m:
        cand = rng.uniform(15.0, 585.0, size=2)
        if space.is_feasible(cand):
            pts.append(tuple(cand))
    return GroundSet(points=np.array(pts))


def random_instance(
    rng,
    m_range=(6, 10),
    n_range=(2, 4),
    res_range=(11, 20),
    max_obstacles=2,
    delta_range=(60.0, 900.0),
    decay_range=(0.001, 0.05),
    theta=None,
    min_m_over_n=None,
) -> SynthInstance:
    """Draw a random solvable instance; retries degenerate draws (any
    candidate with zero singleton coverage)."""
    while True:
        n_obs = int(rng.integers(0, max_obstacles + 1))
        space = MissionSpace(
            outer=rectangle(0.0, 0.0, 600.0, 600.0),
            obstacles=tuple(_random_obstacles(rng, n_obs)),
        )
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        n_agents = int(rng.integers(n_range[0], min(n_range[1], m - 1) + 1))
        if min_m_over_n is not None:
            m = max(m, int(np.ceil(min_m_over_n * n_agents)))
        ground = _random_ground(rng, space, m)
        resolution = int(rng.integers(res_range[0], res_range[1] + 1))
        grid = generate_integration_grid(space, resolution)
        model = SensingModel(
            radius=float(rng.uniform(*delta_range)),
            decay=float(rng.uniform(*decay_range)),
        )
        if theta is None:
            pickm = rng.random()
            th = 0.0 if pickm < 0.25 else 1.0 if pickm < 0.5 else float(rng.random())
        else:
            th = float(theta)
        matrix = build_sensing_matrix(grid, ground, model, space)
        ctx = CoverageContext(matrix=matrix, grid=grid, ground=ground, theta=th)
        if np.all(ctx.singleton_values() > 0.0):
            return SynthInstance(ctx=ctx, space=space, model=model, theta=th, n_agents=n_agents)
