"""Result tables (CSV), mission-space SVG rendering, and sweep figures.

Bound columns are stored already rounded to three decimals
(round-half-to-even) so a table survives an emit/parse round trip exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from typing import List, Sequence

import numpy as np

from .geometry import GroundSet, IntegrationGrid, MissionSpace

CSV_HEADER = [
    "param",
    "beta_f",
    "beta_t",
    "beta_g",
    "beta_e",
    "beta_p",
    "beta_u",
    "H_greedy",
    "runtime_ms",
]


@dataclass(frozen=True)
class ResultRow:
    """One experiment row; bounds rounded to 3 decimals at construction."""

    param: float
    beta_f: float
    beta_t: float
    beta_g: float
    beta_e: float
    beta_p: float
    beta_u: float
    h_greedy: float
    runtime_ms: float

    def __post_init__(self):
        for name in ("beta_f", "beta_t", "beta_g", "beta_e", "beta_p", "beta_u"):
            object.__setattr__(self, name, round(float(getattr(self, name)), 3))
        object.__setattr__(self, "param", float(self.param))
        object.__setattr__(self, "h_greedy", round(float(self.h_greedy), 6))
        object.__setattr__(self, "runtime_ms", round(float(self.runtime_ms), 3))

    def as_csv_fields(self) -> List[str]:
        return [
            repr(self.param),
            f"{self.beta_f:.3f}",
            f"{self.beta_t:.3f}",
            f"{self.beta_g:.3f}",
            f"{self.beta_e:.3f}",
            f"{self.beta_p:.3f}",
            f"{self.beta_u:.3f}",
            f"{self.h_greedy:.6f}",
            f"{self.runtime_ms:.3f}",
        ]


@dataclass(frozen=True)
class ResultTable:
    rows: tuple

    def __init__(self, rows: Sequence[ResultRow]):
        object.__setattr__(self, "rows", tuple(rows))

    def to_csv(self) -> str:
        """Emit the fixed-header CSV (LF line endings, UTF-8 text)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow(row.as_csv_fields())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty CSV") from None
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header}")
        rows = []
        for record in reader:
            if not record:
                continue
            if len(record) != len(CSV_HEADER):
                raise ValueError(f"CSV row has {len(record)} fields, expected {len(CSV_HEADER)}")
            vals = [float(v) for v in record]
            rows.append(ResultRow(*vals))
        return cls(rows)


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_RAMP_LOW = (248, 250, 252)   # near-white: low detection probability
_RAMP_HIGH = (8, 48, 107)     # dark blue: saturated detection
_OBSTACLE_FILL = "#1b5e20"
_AGENT_FILL = "#f48fb1"
_AGENT_STROKE = "#ad1457"


def _ramp(v: float) -> str:
    v = min(1.0, max(0.0, float(v)))
    rgb = tuple(int(round(lo + v * (hi - lo))) for lo, hi in zip(_RAMP_LOW, _RAMP_HIGH))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_svg(
    space: MissionSpace,
    grid: IntegrationGrid,
    ground: GroundSet,
    detection: np.ndarray,
    agent_indices: Sequence[int],
    scale: float = 1.0,
) -> str:
    """Render the mission space as an SVG document.

    Layers, bottom to top: per-cell detection heatmap (light = low
    coverage), obstacle polygons, ground-set dots, and numbered agent
    markers.  Coordinates are mission units with the y axis flipped for
    screen display.
    """
    detection = np.asarray(detection, dtype=float)
    if len(detection) != len(grid):
        raise ValueError("detection values must match the integration grid")
    if not np.all(np.isfinite(detection)):
        raise ValueError("detection values must be finite")
    for idx in agent_indices:
        if not 0 <= int(idx) < len(ground):
            raise ValueError(f"agent index {idx} outside the ground set")

    xmin, ymin, xmax, ymax = space.bounds
    width = xmax - xmin
    height = ymax - ymin

    def sx(x: float) -> float:
        return (x - xmin) * scale

    def sy(y: float) -> float:
        return (ymax - y) * scale

    def fmt(v: float) -> str:
        if not np.isfinite(v):
            raise ValueError("non-finite coordinate in SVG output")
        return f"{v:.6g}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(width * scale)}" '
        f'height="{fmt(height * scale)}" '
        f'viewBox="0 0 {fmt(width * scale)} {fmt(height * scale)}">',
        f'<rect x="0" y="0" width="{fmt(width * scale)}" height="{fmt(height * scale)}" '
        'fill="#ffffff"/>',
        '<g id="heatmap">',
    ]
    cw, ch = grid.cell_size
    ox, oy = grid.origin
    # Slight overdraw hides hairline seams between cells in most viewers.
    pad = 0.01 * min(cw, ch)
    for (col, row), value in zip(grid.cells, detection):
        x0 = ox + col * cw
        y1 = oy + (row + 1) * ch
        out.append(
            f'<rect x="{fmt(sx(x0))}" y="{fmt(sy(y1))}" '
            f'width="{fmt((cw + pad) * scale)}" height="{fmt((ch + pad) * scale)}" '
            f'fill="{_ramp(value)}"/>'
        )
    out.append("</g>")

    out.append('<g id="obstacles">')
    for obs in space.obstacles:
        pts = " ".join(f"{fmt(sx(x))},{fmt(sy(y))}" for x, y in obs.vertices)
        out.append(
            f'<polygon points="{pts}" fill="{_OBSTACLE_FILL}" '
            'stroke="#0d3d10" stroke-width="1"/>'
        )
    out.append("</g>")

    dot_r = 0.004 * max(width, height) * scale
    out.append('<g id="ground-set">')
    for x, y in ground.points:
        out.append(
            f'<circle cx="{fmt(sx(x))}" cy="{fmt(sy(y))}" r="{fmt(dot_r)}" fill="#111111"/>'
        )
    out.append("</g>")

    marker_r = 0.022 * max(width, height) * scale
    out.append('<g id="agents">')
    for rank, idx in enumerate(agent_indices, start=1):
        x, y = ground.points[int(idx)]
        out.append(
            f'<circle cx="{fmt(sx(x))}" cy="{fmt(sy(y))}" r="{fmt(marker_r)}" '
            f'fill="{_AGENT_FILL}" stroke="{_AGENT_STROKE}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{fmt(sx(x))}" y="{fmt(sy(y))}" text-anchor="middle" '
            f'dominant-baseline="central" font-size="{fmt(marker_r * 1.1)}" '
            f'font-family="sans-serif" fill="#4a0025">{rank}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_sweep(table: ResultTable, param_name: str, path: str) -> None:
    """Save a matplotlib figure of every bound column against the swept
    parameter."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    params = [row.param for row in table.rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, label in [
        ("beta_f", "fundamental"),
        ("beta_t", "total"),
        ("beta_g", "greedy"),
        ("beta_e", "elemental"),
        ("beta_p", "partial"),
        ("beta_u", "extended greedy"),
    ]:
        ax.plot(params, [getattr(r, name) for r in table.rows], marker="o", label=label)
    ax.set_xlabel(param_name)
    ax.set_ylabel("performance bound")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
