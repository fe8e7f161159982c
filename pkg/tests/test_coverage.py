import itertools
import math

import numpy as np
import pytest

from polycover import (
    CoverageContext,
    GroundSet,
    MissionSpace,
    SensingModel,
    as_agent_set,
    build_sensing_matrix,
    coverage,
    generate_ground_set,
    generate_integration_grid,
    marginal_coverage,
    marginal_coverage_set,
    negated_marginal_objective,
    rectangle,
)
from synth import random_instance

BLANK = MissionSpace(outer=rectangle(0, 0, 600, 600))


def small_ctx(theta=0.5, radius=250.0, decay=0.004, resolution=10, m=8, seed=2):
    rng = np.random.default_rng(seed)
    ground = GroundSet(points=rng.uniform(30, 570, size=(m, 2)))
    grid = generate_integration_grid(BLANK, resolution)
    mat = build_sensing_matrix(grid, ground, SensingModel(radius=radius, decay=decay), BLANK)
    return CoverageContext(matrix=mat, grid=grid, ground=ground, theta=theta)


class TestAgentSet:
    def test_canonical_form_sorted(self):
        assert as_agent_set([3, 1, 2], 10) == (1, 2, 3)

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            as_agent_set([1, 1], 10)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="range"):
            as_agent_set([10], 10)


class TestCoverage:
    def test_empty_set_is_zero(self):
        ctx = small_ctx()
        assert coverage(ctx, ()) == 0.0

    def test_full_coverage_saturates_at_total_mass(self):
        ground = generate_ground_set(BLANK, pitch=300)
        grid = generate_integration_grid(BLANK, 8)
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=1e4, decay=0.0), BLANK)
        ctx = CoverageContext(matrix=mat, grid=grid, ground=ground, theta=0.5)
        assert coverage(ctx, (0,)) == pytest.approx(grid.total_mass, rel=1e-12)
        assert coverage(ctx, tuple(range(len(ground)))) == pytest.approx(
            grid.total_mass, rel=1e-12
        )

    def test_single_agent_matches_independent_scalar_loop(self):
        # Independent oracle: plain python loop over quadrature points.
        radius, decay = 220.0, 0.007
        site = (130.0, 340.0)
        ground = GroundSet(points=np.array([site]))
        grid = generate_integration_grid(BLANK, 12)
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=radius, decay=decay), BLANK)
        ctx = CoverageContext(matrix=mat, grid=grid, ground=ground, theta=0.5)
        expected = 0.0
        for (x, y), w, r in zip(grid.points, grid.weights, grid.density):
            d = math.hypot(x - site[0], y - site[1])
            if d <= radius:
                expected += w * r * math.exp(-decay * d)
        assert coverage(ctx, (0,)) == pytest.approx(expected, rel=1e-12)

    def test_never_exceeds_total_mass(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            inst = random_instance(rng)
            full = coverage(inst.ctx, tuple(range(inst.m)))
            assert full <= inst.ctx.grid.total_mass + 1e-9

    def test_zero_density_zeroes_everything(self):
        ground = generate_ground_set(BLANK, pitch=300)
        grid = generate_integration_grid(BLANK, 8, density=0.0)
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=1e4, decay=0.0), BLANK)
        ctx = CoverageContext(matrix=mat, grid=grid, ground=ground, theta=0.5)
        assert coverage(ctx, tuple(range(len(ground)))) == 0.0

    def test_permutation_invariance_is_exact(self):
        ctx = small_ctx()
        assert coverage(ctx, (5, 2, 7)) == coverage(ctx, (2, 5, 7))
        assert coverage(ctx, (7, 5, 2)) == coverage(ctx, [2, 5, 7])


class TestMarginalCoverage:
    def test_empty_base_equals_singleton_value(self):
        ctx = small_ctx()
        for y in range(4):
            assert marginal_coverage(ctx, y, ()) == pytest.approx(
                coverage(ctx, (y,)), abs=1e-12
            )

    def test_saturated_base_gains_nothing(self):
        ground = generate_ground_set(BLANK, pitch=300)
        grid = generate_integration_grid(BLANK, 8)
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=1e4, decay=0.0), BLANK)
        ctx = CoverageContext(matrix=mat, grid=grid, ground=ground, theta=0.5)
        assert marginal_coverage(ctx, 3, (0, 1)) == pytest.approx(0.0, abs=1e-12)

    def test_matches_coverage_difference(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            inst = random_instance(rng, m_range=(6, 8))
            ctx = inst.ctx
            for _ in range(20):
                k = int(rng.integers(0, inst.m - 1))
                base = tuple(rng.choice(inst.m, size=k, replace=False).tolist())
                choices = [i for i in range(inst.m) if i not in base]
                y = int(rng.choice(choices))
                direct = marginal_coverage(ctx, y, base)
                diff = coverage(ctx, base + (y,)) - coverage(ctx, base)
                assert direct == pytest.approx(diff, abs=1e-12 * max(1.0, diff))
                assert direct >= 0.0

    def test_rejects_member_candidate(self):
        ctx = small_ctx()
        with pytest.raises(ValueError, match="already"):
            marginal_coverage(ctx, 1, (1, 2))


class TestMarginalCoverageSet:
    def test_subset_adds_nothing(self):
        ctx = small_ctx()
        assert marginal_coverage_set(ctx, (1, 2), (1, 2, 3)) == 0.0

    def test_empty_base_gives_block_value(self):
        ctx = small_ctx()
        assert marginal_coverage_set(ctx, (1, 4), ()) == coverage(ctx, (1, 4))

    def test_at_least_best_single_marginal(self):
        rng = np.random.default_rng(13)
        inst = random_instance(rng, m_range=(8, 8))
        ctx = inst.ctx
        for _ in range(30):
            picks = rng.choice(8, size=4, replace=False)
            base = tuple(sorted(picks[:2].tolist()))
            block = tuple(sorted(picks[2:].tolist()))
            gain = marginal_coverage_set(ctx, block, base)
            best_single = max(marginal_coverage(ctx, y, base) for y in block)
            assert gain >= best_single - 1e-12


def exhaustive_subsets(m):
    for r in range(m + 1):
        yield from itertools.combinations(range(m), r)


class TestNegatedMarginalObjective:
    def test_normalized(self):
        ctx = small_ctx()
        obj = negated_marginal_objective(ctx, (2, 5))
        assert obj(()) == pytest.approx(0.0, abs=1e-12)

    def test_saturating_base_reaches_block_value(self):
        ground = generate_ground_set(BLANK, pitch=300)
        grid = generate_integration_grid(BLANK, 8)
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=1e4, decay=0.0), BLANK)
        ctx = CoverageContext(matrix=mat, grid=grid, ground=ground, theta=0.5)
        obj = negated_marginal_objective(ctx, (3,))
        assert obj((0, 1)) == pytest.approx(coverage(ctx, (3,)), rel=1e-12)

    def test_rejects_overlap_with_block(self):
        ctx = small_ctx()
        obj = negated_marginal_objective(ctx, (2,))
        with pytest.raises(ValueError, match="exclude"):
            obj((2, 3))

    def test_monotone_exhaustively_on_small_instance(self):
        rng = np.random.default_rng(17)
        inst = random_instance(rng, m_range=(6, 6))
        ctx = inst.ctx
        block = (1, 4)
        rest = [i for i in range(6) if i not in block]
        obj = negated_marginal_objective(ctx, block)
        values = {s: obj(s) for r in range(5) for s in itertools.combinations(rest, r)}
        for small, val_small in values.items():
            for large, val_large in values.items():
                if set(small) <= set(large):
                    assert val_small <= val_large + 1e-12


def check_polymatroid(value_fn, m, tol=1e-12):
    """Exhaustively assert normalization, monotonicity, and diminishing
    returns of a set function given by value_fn over subsets of range(m)."""
    values = {s: value_fn(s) for s in exhaustive_subsets(m)}
    assert values[()] == pytest.approx(0.0, abs=tol)
    scale = max(1.0, max(abs(v) for v in values.values()))
    for s, val in values.items():
        free = [y for y in range(m) if y not in s]
        for y in free:
            gain = values[tuple(sorted(s + (y,)))] - val
            assert gain >= -tol * scale
    for small in values:
        for large in values:
            if set(small) <= set(large):
                for y in range(m):
                    if y in large:
                        continue
                    g_large = values[tuple(sorted(large + (y,)))] - values[large]
                    g_small = values[tuple(sorted(small + (y,)))] - values[small]
                    assert g_large <= g_small + tol * scale


class TestPolymatroidStructure:
    @pytest.mark.parametrize("theta", [0.0, 0.3, 1.0])
    def test_coverage_is_polymatroid_small_exhaustive(self, theta):
        rng = np.random.default_rng(21)
        inst = random_instance(rng, m_range=(5, 5), theta=theta)
        check_polymatroid(lambda s: coverage(inst.ctx, s), 5)

    @pytest.mark.parametrize("theta", [0.0, 0.3, 1.0])
    def test_coverage_polymatroid_random_triples(self, theta):
        rng = np.random.default_rng(27)
        inst = random_instance(rng, m_range=(10, 12), theta=theta)
        ctx = inst.ctx
        m = inst.m
        for _ in range(400):
            size_a = int(rng.integers(0, m - 1))
            a = set(rng.choice(m, size=size_a, replace=False).tolist())
            b = set(rng.choice(list(a), size=int(rng.integers(0, len(a) + 1)), replace=False)) if a else set()
            y = int(rng.choice([i for i in range(m) if i not in a]))
            gain_a = marginal_coverage(ctx, y, tuple(sorted(a)))
            gain_b = marginal_coverage(ctx, y, tuple(sorted(b)))
            assert gain_a >= 0.0
            assert gain_a <= gain_b + 1e-9

    def test_marginal_objectives_both_directions_exhaustive(self):
        # For a fixed base A the set-marginal of B is polymatroid in B; for
        # a fixed block B the negated set-marginal is polymatroid in A.
        rng = np.random.default_rng(33)
        inst = random_instance(rng, m_range=(6, 6))
        ctx = inst.ctx
        for fixed in [(0,), (2, 4)]:
            rest = [i for i in range(6) if i not in fixed]

            def gain_of(subset):
                return marginal_coverage_set(ctx, subset, fixed)

            remap = {i: rest[i] for i in range(len(rest))}

            check_polymatroid(
                lambda s: gain_of(tuple(remap[i] for i in s)), len(rest)
            )
            obj = negated_marginal_objective(ctx, fixed)
            check_polymatroid(
                lambda s: obj(tuple(remap[i] for i in s)), len(rest)
            )
