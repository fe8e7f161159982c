import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycover import (
    GroundSet,
    MissionSpace,
    Polygon,
    ResourceCapError,
    SensingModel,
    build_sensing_matrix,
    detect,
    detect_joint,
    detect_max,
    generate_integration_grid,
    line_of_sight,
    marginal_detect,
    rectangle,
    sensing,
)

BLANK = MissionSpace(outer=rectangle(0, 0, 600, 600))
WIDE = SensingModel(radius=1e4, decay=0.003)


def model(radius=1e4, decay=0.003):
    return SensingModel(radius=radius, decay=decay)


class TestSensingFunction:
    def test_zero_distance_gives_one(self):
        assert sensing((100, 100), (100, 100), WIDE, BLANK) == 1.0

    def test_exponential_decay_value(self):
        # distance 200 at decay 0.012: exp(-2.4), about 0.0907.
        got = sensing((100, 100), (300, 100), model(decay=0.012), BLANK)
        assert got == pytest.approx(math.exp(-2.4), abs=1e-15)
        assert got == pytest.approx(0.0907, abs=5e-5)

    def test_blocked_by_obstacle(self):
        space = MissionSpace(
            outer=rectangle(0, 0, 600, 600), obstacles=(rectangle(290, 0, 310, 600),)
        )
        assert sensing((100, 300), (500, 300), WIDE, space) == 0.0

    def test_beyond_radius_is_exactly_zero(self):
        m = model(radius=200)
        assert sensing((0, 0), (201, 0), m, BLANK) == 0.0
        # exactly at the radius the value is still positive
        assert sensing((0, 0), (200, 0), m, BLANK) == pytest.approx(math.exp(-0.6))

    def test_negative_parameters_rejected(self):
        with pytest.raises(ValueError):
            SensingModel(radius=-1, decay=0.1)
        with pytest.raises(ValueError):
            SensingModel(radius=1, decay=-0.1)


def _half_prob_sites():
    """Two agents whose sensing value at the origin-ish point is 0.5."""
    x = (100.0, 100.0)
    d = 100.0
    decay = math.log(2.0) / d
    m = SensingModel(radius=1e4, decay=decay)
    s1 = (200.0, 100.0)
    s2 = (100.0, 200.0)
    return x, (s1, s2), m


class TestDetection:
    def test_joint_empty_set(self):
        assert detect_joint((1, 1), [], WIDE, BLANK) == 0.0

    def test_joint_two_half_probabilities(self):
        x, sites, m = _half_prob_sites()
        p1 = sensing(x, sites[0], m, BLANK)
        p2 = sensing(x, sites[1], m, BLANK)
        got = detect_joint(x, sites, m, BLANK)
        assert got == pytest.approx(1 - (1 - p1) * (1 - p2), abs=1e-15)
        assert got == pytest.approx(0.75, abs=1e-9)

    def test_joint_absorbing_certain_detection(self):
        x = (50.0, 50.0)
        sites = [(50.0, 50.0), (400.0, 400.0)]
        assert detect_joint(x, sites, WIDE, BLANK) == 1.0

    def test_max_empty_set(self):
        assert detect_max((1, 1), [], WIDE, BLANK) == 0.0

    def test_max_picks_largest(self):
        x = (100.0, 100.0)
        sites = [(200.0, 100.0), (350.0, 100.0)]
        ps = [sensing(x, s, WIDE, BLANK) for s in sites]
        assert detect_max(x, sites, WIDE, BLANK) == max(ps)

    def test_max_singleton(self):
        x, (s1, _), m = _half_prob_sites()
        assert detect_max(x, [s1], m, BLANK) == sensing(x, s1, m, BLANK)

    def test_blend_extremes(self):
        x, sites, m = _half_prob_sites()
        assert detect(x, sites, 1.0, m, BLANK) == detect_joint(x, sites, m, BLANK)
        assert detect(x, sites, 0.0, m, BLANK) == detect_max(x, sites, m, BLANK)

    def test_blend_midpoint(self):
        x, sites, m = _half_prob_sites()
        got = detect(x, sites, 0.5, m, BLANK)
        assert got == pytest.approx(0.5 * 0.75 + 0.5 * 0.5, abs=1e-9)

    def test_blend_range_validated(self):
        with pytest.raises(ValueError):
            detect((1, 1), [], 1.5, WIDE, BLANK)


class TestMarginalDetect:
    def test_empty_set_gives_sensing_value(self):
        x = (100.0, 100.0)
        y = (250.0, 100.0)
        for theta in (0.0, 0.3, 1.0):
            assert marginal_detect(x, y, [], theta, WIDE, BLANK) == sensing(
                x, y, WIDE, BLANK
            )

    def test_max_blend_dominated_candidate_gains_nothing(self):
        x = (100.0, 100.0)
        strong = (150.0, 100.0)
        weak = (400.0, 100.0)
        assert marginal_detect(x, weak, [strong], 0.0, WIDE, BLANK) == 0.0

    def test_joint_blend_hand_value(self):
        # p(existing) = 0.5, p(candidate) = 0.4: joint marginal 0.4 * 0.5.
        x = (100.0, 100.0)
        decay = math.log(2.0) / 100.0
        m = SensingModel(radius=1e4, decay=decay)
        s = (200.0, 100.0)  # distance 100 -> 0.5
        y = (100.0, 100.0 + math.log(2.5) / decay)  # -> 0.4
        got = marginal_detect(x, y, [s], 1.0, m, BLANK)
        assert got == pytest.approx(0.2, abs=1e-9)

    def test_matches_difference_of_detect(self):
        rng = np.random.default_rng(19)
        space = MissionSpace(
            outer=rectangle(0, 0, 600, 600), obstacles=(rectangle(200, 250, 400, 350),)
        )
        m = model(radius=300, decay=0.005)
        pts = rng.uniform(0, 600, size=(400, 2))
        feas = pts[space.feasible_mask(pts)]
        for k in range(100):
            x = feas[k]
            sites = [tuple(p) for p in feas[k + 1 : k + 4]]
            y = tuple(feas[k + 5])
            theta = float(rng.random())
            direct = marginal_detect(x, y, sites, theta, m, space)
            diff = detect(x, sites + [y], theta, m, space) - detect(x, sites, theta, m, space)
            assert direct == pytest.approx(diff, abs=1e-12)


class TestDetectionProperties:
    """Order and polymatroid properties of the blended detection."""

    def test_ordering_on_random_probability_vectors(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            ps = rng.random(rng.integers(1, 8))
            theta = float(rng.random())
            p_max = ps.max()
            p_joint = 1.0 - np.prod(1.0 - ps)
            blend = theta * p_joint + (1 - theta) * p_max
            assert 0.0 <= p_max <= blend + 1e-15
            assert blend <= p_joint + 1e-15
            assert p_joint <= 1.0

    def test_ordering_vectorized_bulk(self):
        rng = np.random.default_rng(29)
        n = 20_000
        ps = rng.random((n, 6))
        theta = rng.random((n, 1))
        p_max = ps.max(axis=1, keepdims=True)
        p_joint = 1.0 - np.prod(1.0 - ps, axis=1, keepdims=True)
        blend = theta * p_joint + (1 - theta) * p_max
        assert np.all(p_max >= 0.0)
        assert np.all(p_max <= blend + 1e-15)
        assert np.all(blend <= p_joint + 1e-15)
        assert np.all(p_joint <= 1.0)

    def test_ordering_through_geometry(self):
        space = MissionSpace(
            outer=rectangle(0, 0, 600, 600), obstacles=(rectangle(130, 0, 160, 440),)
        )
        m = model(radius=400, decay=0.004)
        rng = np.random.default_rng(31)
        pts = rng.uniform(0, 600, size=(200, 2))
        feas = [tuple(p) for p in pts[space.feasible_mask(pts)]]
        for k in range(60):
            x = feas[k]
            sites = feas[k + 1 : k + 5]
            theta = float(rng.random())
            pm = detect_max(x, sites, m, space)
            pj = detect_joint(x, sites, m, space)
            pb = detect(x, sites, theta, m, space)
            assert 0.0 <= pm <= pb + 1e-15 <= pj + 2e-15
            assert pj <= 1.0

    def test_monotone_and_submodular_in_sites(self):
        # Marginal gain is non-negative and shrinks as the site set grows,
        # for any blend weight.
        rng = np.random.default_rng(37)
        for _ in range(300):
            ps = rng.random(6)
            theta = float(rng.random())
            k = int(rng.integers(0, 4))
            small = ps[:k]
            large = ps[: k + 2]
            p_y = float(ps[-1])

            def marginal(existing):
                joint_gain = p_y * np.prod(1.0 - existing) if len(existing) else p_y
                best = existing.max() if len(existing) else 0.0
                return theta * joint_gain + (1 - theta) * max(p_y - best, 0.0)

            gain_small = marginal(small)
            gain_large = marginal(large)
            assert gain_large >= -1e-15
            assert gain_large <= gain_small + 1e-15


class TestMaxDifferenceIdentity:
    """max{a,b} - max{c,d} equals max{min{a-c, a-d}, min{b-c, b-d}},
    exactly, in floating point."""

    def test_bulk_random_quadruples(self):
        rng = np.random.default_rng(41)
        n = 100_000
        a, b, c, d = rng.standard_normal((4, n)) * rng.lognormal(0, 2, (4, n))
        lhs = np.maximum(a, b) - np.maximum(c, d)
        rhs = np.maximum(np.minimum(a - c, a - d), np.minimum(b - c, b - d))
        assert np.array_equal(lhs, rhs)

    @given(
        st.tuples(
            *(st.floats(min_value=-1e12, max_value=1e12, allow_nan=False),) * 4
        )
    )
    @settings(max_examples=300)
    def test_hypothesis_quadruples(self, quad):
        a, b, c, d = quad
        lhs = max(a, b) - max(c, d)
        rhs = max(min(a - c, a - d), min(b - c, b - d))
        assert lhs == rhs


def _pocket_space():
    """A C-shaped obstacle whose cavity hides a point from every grid
    midpoint of a coarse quadrature grid."""
    c_shape = Polygon(
        [
            (30, 30), (70, 30), (70, 70), (52, 70), (52, 62), (62, 62),
            (62, 38), (38, 38), (38, 62), (48, 62), (48, 70), (30, 70),
        ]
    )
    return MissionSpace(outer=rectangle(0, 0, 100, 100), obstacles=(c_shape,))


class TestSensingMatrix:
    def test_zero_radius_keeps_only_coincidences(self):
        unit = MissionSpace(outer=rectangle(0, 0, 1, 1))
        grid = generate_integration_grid(unit, 1)  # single midpoint (0.5, 0.5)
        ground = GroundSet(points=np.array([[0.5, 0.5], [0.25, 0.25]]))
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=0, decay=1), unit)
        assert mat.values.tolist() == [[1.0, 0.0]]

    def test_no_decay_full_range_blank_space(self):
        grid = generate_integration_grid(BLANK, 6)
        ground = GroundSet(points=np.array([[100.0, 100.0], [500.0, 400.0]]))
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=1e4, decay=0.0), BLANK)
        assert np.all(mat.values == 1.0)

    def test_hidden_pocket_column_is_all_zero(self):
        space = _pocket_space()
        hidden = (44.0, 50.0)
        visible = (15.0, 15.0)
        assert space.is_feasible(hidden)
        grid = generate_integration_grid(space, 2)
        assert len(grid) == 4
        # Sanity: the scalar test agrees that nothing sees the pocket.
        for p in grid.points:
            assert not line_of_sight(p, hidden, space)
        ground = GroundSet(points=np.array([hidden, visible]))
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=1e3, decay=0.01), space)
        assert np.all(mat.values[:, 0] == 0.0)
        assert np.any(mat.values[:, 1] > 0.0)

    def test_entries_beyond_radius_exact_zero(self):
        grid = generate_integration_grid(BLANK, 10)
        ground = GroundSet(points=np.array([[300.0, 300.0]]))
        mat = build_sensing_matrix(grid, ground, SensingModel(radius=150, decay=0.01), BLANK)
        dists = np.hypot(*(grid.points - ground.points[0]).T)
        assert np.all(mat.values[dists > 150, 0] == 0.0)
        assert np.all(mat.values[dists <= 150, 0] > 0.0)

    def test_memory_cap(self):
        grid = generate_integration_grid(BLANK, 10)
        ground = GroundSet(points=np.array([[300.0, 300.0]]))
        with pytest.raises(ResourceCapError, match="bytes"):
            build_sensing_matrix(grid, ground, WIDE, BLANK, max_bytes=64)

    def test_values_in_unit_interval(self):
        grid = generate_integration_grid(BLANK, 12)
        rng = np.random.default_rng(43)
        ground = GroundSet(points=rng.uniform(0, 600, size=(8, 2)))
        mat = build_sensing_matrix(grid, ground, model(radius=350, decay=0.002), BLANK)
        assert np.all(mat.values >= 0.0) and np.all(mat.values <= 1.0)
