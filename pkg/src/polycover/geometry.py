"""Polygonal mission spaces: feasibility, line of sight, and discretization.

A mission space is a simple outer polygon minus a set of polygonal
obstacles.  Points on obstacle boundaries count as feasible, and sight
lines may graze obstacle edges or vertices without being blocked; only
entering an obstacle interior (or leaving the outer polygon) breaks
visibility.  All predicates use a fixed geometric tolerance ``GEOM_EPS``
in length units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Tolerance for orientation / intersection predicates, in length units.
# Coordinates are expected to be O(1e3) or smaller, where double rounding
# noise stays around 1e-11.
GEOM_EPS = 1e-9


def _as_points(vertices) -> np.ndarray:
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    return pts


def _cross(o, a, b) -> float:
    """Signed area of the triangle o-a-b (positive = counter-clockwise)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


class Polygon:
    """A simple polygon stored with counter-clockwise vertex order."""

    def __init__(self, vertices):
        pts = _as_points(vertices)
        if len(pts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        nxt = np.roll(pts, -1, axis=0)
        if np.any(np.hypot(*(nxt - pts).T) <= GEOM_EPS):
            raise ValueError("polygon has consecutive duplicate vertices")
        area2 = float(np.sum(pts[:, 0] * nxt[:, 1] - nxt[:, 0] * pts[:, 1]))
        if abs(area2) <= GEOM_EPS:
            raise ValueError("polygon is degenerate (zero area)")
        if area2 < 0.0:
            pts = pts[::-1].copy()
        self.vertices = pts
        self.vertices.setflags(write=False)
        if self._self_intersects():
            raise ValueError("polygon is self-intersecting")

    @property
    def area(self) -> float:
        pts = self.vertices
        nxt = np.roll(pts, -1, axis=0)
        return 0.5 * float(np.sum(pts[:, 0] * nxt[:, 1] - nxt[:, 0] * pts[:, 1]))

    def edges(self):
        pts = self.vertices
        for i in range(len(pts)):
            yield pts[i], pts[(i + 1) % len(pts)]

    def _self_intersects(self) -> bool:
        pts = self.vertices
        n = len(pts)
        segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                adjacent = j == i + 1 or (i == 0 and j == n - 1)
                a, b = segs[i]
                c, d = segs[j]
                if adjacent:
                    continue
                if _segments_properly_cross(a, b, c, d):
                    return True
                # Collinear overlap between non-adjacent edges also breaks
                # simplicity.
                if _point_on_segment(c, a, b) or _point_on_segment(d, a, b):
                    return True
                if _point_on_segment(a, c, d) or _point_on_segment(b, c, d):
                    return True
        return False

    def contains(self, p) -> bool:
        """True if p is strictly inside or on the boundary."""
        return self.locate(p) >= 0

    def interior_contains(self, p) -> bool:
        """True if p is strictly inside (boundary excluded)."""
        return self.locate(p) > 0

    def locate(self, p) -> int:
        """Classify p: 1 = interior, 0 = on boundary, -1 = outside."""
        x, y = float(p[0]), float(p[1])
        pts = self.vertices
        n = len(pts)
        inside = False
        for i in range(n):
            a = pts[i]
            b = pts[(i + 1) % n]
            if _point_on_segment((x, y), a, b):
                return 0
            if (a[1] > y) != (b[1] > y):
                x_cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if x < x_cross:
                    inside = not inside
        return 1 if inside else -1

    def locate_many(self, points) -> np.ndarray:
        """Vectorized :meth:`locate` over an (n, 2) array of points."""
        pts = _as_points(points)
        x = pts[:, 0]
        y = pts[:, 1]
        inside = np.zeros(len(pts), dtype=bool)
        on_edge = np.zeros(len(pts), dtype=bool)
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            # Distance from each point to the edge segment.
            dx, dy = bx - ax, by - ay
            seg_len2 = dx * dx + dy * dy
            t = ((x - ax) * dx + (y - ay) * dy) / seg_len2
            t = np.clip(t, 0.0, 1.0)
            dist = np.hypot(x - (ax + t * dx), y - (ay + t * dy))
            on_edge |= dist <= GEOM_EPS
            crosses = (ay > y) != (by > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = ax + (y - ay) * dx / (by - ay)
            inside ^= crosses & (x < x_cross)
        out = np.where(inside, 1, -1)
        out[on_edge] = 0
        return out

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices, area={self.area:.6g})"


def _point_on_segment(p, a, b) -> bool:
    """True if p lies on segment ab within GEOM_EPS."""
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return np.hypot(px - ax, py - ay) <= GEOM_EPS
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len2
    t = min(1.0, max(0.0, t))
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy)) <= GEOM_EPS


def _segments_properly_cross(a, b, c, d) -> bool:
    """True if the open interiors of segments ab and cd cross transversally."""
    d1 = _cross(a, b, c)
    d2 = _cross(a, b, d)
    d3 = _cross(c, d, a)
    d4 = _cross(c, d, b)
    eps = GEOM_EPS
    return (
        ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps))
        and ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps))
    )


@dataclass(frozen=True)
class MissionSpace:
    """Outer polygon with zero or more obstacle polygons.

    Feasible points are inside or on the outer polygon and not strictly
    inside any obstacle.
    """

    outer: Polygon
    obstacles: tuple = ()
    bounds: tuple = field(init=False)

    def __post_init__(self):
        obstacles = tuple(self.obstacles)
        object.__setattr__(self, "obstacles", obstacles)
        verts = self.outer.vertices
        bounds = (
            float(verts[:, 0].min()),
            float(verts[:, 1].min()),
            float(verts[:, 0].max()),
            float(verts[:, 1].max()),
        )
        object.__setattr__(self, "bounds", bounds)
        for k, obs in enumerate(obstacles):
            for v in obs.vertices:
                if not self.outer.contains(v):
                    raise ValueError(
                        f"obstacle {k} has a vertex outside the outer polygon: {tuple(v)}"
                    )
        for i in range(len(obstacles)):
            for j in range(i + 1, len(obstacles)):
                if _polygons_overlap(obstacles[i], obstacles[j]):
                    raise ValueError(f"obstacles {i} and {j} overlap")

    def feasible_area(self) -> float:
        return self.outer.area - sum(o.area for o in self.obstacles)

    def is_feasible(self, p) -> bool:
        return is_feasible(p, self)

    def feasible_mask(self, points) -> np.ndarray:
        """Vectorized feasibility over an (n, 2) array of points."""
        pts = _as_points(points)
        ok = self.outer.locate_many(pts) >= 0
        for obs in self.obstacles:
            ok &= obs.locate_many(pts) <= 0
        return ok


def _polygons_overlap(a: Polygon, b: Polygon) -> bool:
    """Interior-overlap test for validated simple polygons."""
    for p, q in a.edges():
        for r, s in b.edges():
            if _segments_properly_cross(p, q, r, s):
                return True
    if any(b.interior_contains(v) for v in a.vertices):
        return True
    if any(a.interior_contains(v) for v in b.vertices):
        return True
    # Catch identical/nested polygons whose vertices all sit on boundaries.
    if b.interior_contains(a.vertices.mean(axis=0)) and a.interior_contains(
        a.vertices.mean(axis=0)
    ):
        return True
    if a.interior_contains(b.vertices.mean(axis=0)) and b.interior_contains(
        b.vertices.mean(axis=0)
    ):
        return True
    return False


def is_feasible(p, space: MissionSpace) -> bool:
    """True if p is inside-or-on the outer polygon and outside every
    obstacle interior (obstacle boundaries count as feasible)."""
    if space.outer.locate(p) < 0:
        return False
    return all(obs.locate(p) <= 0 for obs in space.obstacles)


def _segment_params(p, r, q, s) -> list:
    """Intersection parameters t (along p + t*r) where segment p..p+r meets
    segment q..q+s, including endpoint touches and collinear overlaps."""
    rxs = r[0] * s[1] - r[1] * s[0]
    qp = (q[0] - p[0], q[1] - p[1])
    qpxr = qp[0] * r[1] - qp[1] * r[0]
    r_len = float(np.hypot(*r))
    s_len = float(np.hypot(*s))
    if r_len == 0.0:
        return []
    scale = max(r_len * s_len, 1.0)
    if abs(rxs) <= GEOM_EPS * scale:
        if abs(qpxr) > GEOM_EPS * max(r_len, 1.0):
            return []  # parallel, not collinear
        # Collinear: project the edge endpoints onto the segment.
        rr = r[0] * r[0] + r[1] * r[1]
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi:
            return []
        return [lo, hi]
    t = (qp[0] * s[1] - qp[1] * s[0]) / rxs
    u = qpxr / rxs
    tol_t = GEOM_EPS / max(r_len, GEOM_EPS)
    tol_u = GEOM_EPS / max(s_len, GEOM_EPS)
    if -tol_t <= t <= 1.0 + tol_t and -tol_u <= u <= 1.0 + tol_u:
        return [min(1.0, max(0.0, t))]
    return []


def line_of_sight(a, b, space: MissionSpace) -> bool:
    """True if the closed segment ab stays inside the feasible space.

    The segment is cut at every crossing/touch with a polygon edge and the
    midpoint of each piece is tested for feasibility, so grazing contacts
    along boundaries stay visible while interior crossings do not.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    r = (bx - ax, by - ay)
    if np.hypot(*r) <= GEOM_EPS:
        return is_feasible((ax, ay), space)
    ts = [0.0, 1.0]
    polys = (space.outer, *space.obstacles)
    for poly in polys:
        for q0, q1 in poly.edges():
            s = (q1[0] - q0[0], q1[1] - q0[1])
            ts.extend(_segment_params((ax, ay), r, (q0[0], q0[1]), s))
    ts = sorted(set(ts))
    for lo, hi in zip(ts[:-1], ts[1:]):
        tm = 0.5 * (lo + hi)
        if not is_feasible((ax + tm * r[0], ay + tm * r[1]), space):
            return False
    return True


def visibility_matrix(points_a, points_b, space: MissionSpace, mask=None) -> np.ndarray:
    """Boolean (n, m) matrix of line-of-sight between two point families.

    Fast vectorized rejection of clear crossings / clear misses per edge;
    the few near-degenerate (grazing) pairs fall back to the exact scalar
    test.  ``mask`` restricts which pairs are computed (others are False).
    """
    pa = _as_points(points_a)
    pb = _as_points(points_b)
    n, m = len(pa), len(pb)
    if mask is None:
        mask = np.ones((n, m), dtype=bool)
    visible = mask.copy()
    suspect = np.zeros((n, m), dtype=bool)
    eps = GEOM_EPS

    ax = pa[:, 0][:, None]
    ay = pa[:, 1][:, None]
    bx = pb[:, 0][None, :]
    by = pb[:, 1][None, :]
    rx = bx - ax
    ry = by - ay

    polys = (space.outer, *space.obstacles)
    for poly in polys:
        for q0, q1 in poly.edges():
            sx, sy = q1[0] - q0[0], q1[1] - q0[1]
            # Sides of the edge endpoints relative to each segment line.
            d1 = rx * (q0[1] - ay) - ry * (q0[0] - ax)
            d2 = rx * (q1[1] - ay) - ry * (q1[0] - ax)
            # Sides of the segment endpoints relative to the edge line.
            d3 = sx * (ay - q0[1]) - sy * (ax - q0[0])
            d4 = sx * (by - q0[1]) - sy * (bx - q0[0])
            opposite_12 = ((d1 > eps) & (d2 < -eps)) | ((d1 < -eps) & (d2 > eps))
            opposite_34 = ((d3 > eps) & (d4 < -eps)) | ((d3 < -eps) & (d4 > eps))
            proper = opposite_12 & opposite_34
            separated = (
                ((d1 > eps) & (d2 > eps))
                | ((d1 < -eps) & (d2 < -eps))
                | ((d3 > eps) & (d4 > eps))
                | ((d3 < -eps) & (d4 < -eps))
            )
            visible &= ~proper
            suspect |= mask & ~proper & ~separated

    todo = np.argwhere(suspect & visible & mask)
    for i, j in todo:
        visible[i, j] = line_of_sight(pa[i], pb[j], space)
    visible &= mask
    return visible


@dataclass(frozen=True)
class GroundSet:
    """Candidate agent locations: an ordered list of distinct feasible points."""

    points: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.points)
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    def __len__(self):
        return len(self.points)

    @property
    def size(self) -> int:
        return len(self.points)


def generate_ground_set(space: MissionSpace, pitch=None, offset=None, points=None) -> GroundSet:
    """Build the candidate-location set from a grid pitch or an explicit list.

    Grid mode places axis-aligned points every ``pitch`` units starting at
    ``offset`` (default pitch/2) from the bounding-box minimum corner, in
    row-major order (y rows ascending, x within each row), then drops
    infeasible points.  Explicit lists are feasibility-filtered but keep
    their given order.
    """
    if points is not None:
        pts = _as_points(points)
        if len(pts) == 0:
            raise ValueError("ground set empty")
        uniq = {tuple(p) for p in pts}
        if len(uniq) != len(pts):
            raise ValueError("explicit ground-set points must be pairwise distinct")
        keep = space.feasible_mask(pts)
        pts = pts[keep]
        if len(pts) == 0:
            raise ValueError("ground set empty")
        return GroundSet(points=pts)

    if pitch is None or pitch <= 0:
        raise ValueError("grid mode requires a positive pitch")
    if offset is None:
        offset = pitch / 2.0
    xmin, ymin, xmax, ymax = space.bounds
    xs = np.arange(xmin + offset, xmax + GEOM_EPS, pitch)
    ys = np.arange(ymin + offset, ymax + GEOM_EPS, pitch)
    if len(xs) == 0 or len(ys) == 0:
        raise ValueError("ground set empty")
    gx, gy = np.meshgrid(xs, ys)  # row-major: y outer, x inner
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    keep = space.feasible_mask(pts)
    pts = pts[keep]
    if len(pts) == 0:
        raise ValueError("ground set empty")
    return GroundSet(points=pts)


@dataclass(frozen=True)
class IntegrationGrid:
    """Midpoint quadrature grid over the feasible space.

    ``points`` are the feasible cell midpoints, ``weights`` the cell areas,
    and ``density`` the per-point event density.  ``cells`` holds the
    (col, row) integer coordinates of each point in the full bounding-box
    partition, for rendering.
    """

    points: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    cells: np.ndarray
    origin: tuple
    cell_size: tuple
    resolution: int

    def __post_init__(self):
        pts = _as_points(self.points)
        w = np.asarray(self.weights, dtype=float)
        r = np.asarray(self.density, dtype=float)
        c = np.asarray(self.cells, dtype=int)
        if not (len(pts) == len(w) == len(r) == len(c)):
            raise ValueError("grid arrays must have matching lengths")
        if np.any(w <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if np.any(r < 0.0):
            raise ValueError("event density must be non-negative")
        for name, arr in (("points", pts), ("weights", w), ("density", r), ("cells", c)):
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)

    def __len__(self):
        return len(self.points)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def total_mass(self) -> float:
        """Upper bound on any coverage value: sum of weight * density."""
        return float(np.dot(self.weights, self.density))


def generate_integration_grid(space: MissionSpace, resolution: int, density=1.0) -> IntegrationGrid:
    """Partition the bounding box into resolution x resolution cells and keep
    the feasible midpoints; each point carries the cell area as weight.

    ``density`` may be a constant, a callable (x, y) -> value, or a
    row-major sequence of resolution**2 per-cell values.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    xmin, ymin, xmax, ymax = space.bounds
    cw = (xmax - xmin) / resolution
    ch = (ymax - ymin) / resolution
    cols, rows = np.meshgrid(np.arange(resolution), np.arange(resolution))
    cols = cols.ravel()
    rows = rows.ravel()
    px = xmin + (cols + 0.5) * cw
    py = ymin + (rows + 0.5) * ch
    pts = np.column_stack([px, py])
    keep = space.feasible_mask(pts)
    if not np.any(keep):
        raise ValueError("integration grid empty: no feasible cell midpoints")

    if callable(density):
        dens_all = np.array([float(density(x, y)) for x, y in pts])
    elif np.isscalar(density):
        dens_all = np.full(len(pts), float(density))
    else:
        dens_all = np.asarray(density, dtype=float).ravel()
        if len(dens_all) != resolution * resolution:
            raise ValueError(
                f"per-cell density table needs {resolution * resolution} values, "
                f"got {len(dens_all)}"
            )
    return IntegrationGrid(
        points=pts[keep],
        weights=np.full(int(keep.sum()), cw * ch),
        density=dens_all[keep],
        cells=np.column_stack([cols[keep], rows[keep]]),
        origin=(xmin, ymin),
        cell_size=(cw, ch),
        resolution=int(resolution),
    )


def rectangle(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    """Axis-aligned rectangle polygon from two opposite corners."""
    xa, xb = min(x0, x1), max(x0, x1)
    ya, yb = min(y0, y1), max(y0, y1)
    return Polygon([(xa, ya), (xb, ya), (xb, yb), (xa, yb)])
