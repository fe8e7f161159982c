"""Scenario files: a strict sectioned plain-text format plus built-ins.

A scenario fully describes one problem instance::

    # comment lines and blank lines are ignored
    [mission]
    vertices = 0,0; 600,0; 600,600; 0,600

    [obstacle]            # repeatable, zero or more
    vertices = 130,0; 160,0; 160,440; 130,440

    [sensing]
    delta = 35            # sensing radius, length units
    lambda = 0.003        # sensing decay rate, 1/length units

    [blend]
    theta = 0.5           # 1 = joint detection, 0 = max detection

    [solver]
    agents = 10
    horizon = full        # optional: iterations to run (int or "full")
    q = full              # optional: certificate indices (ints or "full")
    lazy = false          # optional: lazy candidate scanning
    inflation = fundamental   # optional: or "elemental"

    [groundset]
    pitch = 60            # grid pitch; offset defaults to pitch/2
    offset = 30           # optional
    # or: points = x,y; x,y; ...

    [grid]
    resolution = 60       # quadrature cells per axis

    [density]
    uniform = 1.0         # optional; or: values = v; v; ... (row-major)

Unknown sections or keys are errors; vertex lists are semicolon-separated
``x,y`` pairs in decimal notation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from .errors import ScenarioError
from .geometry import (
    GroundSet,
    IntegrationGrid,
    MissionSpace,
    Polygon,
    generate_ground_set,
    generate_integration_grid,
)
from .sensing import SensingModel

_SECTION_KEYS = {
    "mission": {"vertices"},
    "obstacle": {"vertices"},
    "sensing": {"delta", "lambda"},
    "blend": {"theta"},
    "solver": {"agents", "horizon", "q", "lazy", "inflation"},
    "groundset": {"pitch", "offset", "points"},
    "grid": {"resolution"},
    "density": {"uniform", "values"},
}
_REPEATABLE = {"obstacle"}


@dataclass(frozen=True)
class ScenarioFile:
    """A parsed, geometry-validated problem instance."""

    space: MissionSpace
    model: SensingModel
    theta: float
    n_agents: int
    pitch: Optional[float] = None
    offset: Optional[float] = None
    points: Optional[Tuple[Tuple[float, float], ...]] = None
    resolution: int = 60
    density_uniform: float = 1.0
    density_values: Optional[Tuple[float, ...]] = None
    horizon: Optional[int] = None  # None = full ground set
    q: Optional[Tuple[int, ...]] = None  # None = every usable index
    lazy: bool = False
    inflation: str = "fundamental"
    name: str = "scenario"

    def build_ground_set(self) -> GroundSet:
        return generate_ground_set(
            self.space, pitch=self.pitch, offset=self.offset, points=self.points
        )

    def build_grid(self) -> IntegrationGrid:
        density = (
            self.density_values if self.density_values is not None else self.density_uniform
        )
        return generate_integration_grid(self.space, self.resolution, density=density)


def _parse_pairs(value: str, line: int):
    pairs = []
    for chunk in value.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ScenarioError(f"expected 'x,y' pair, got {chunk!r}", line)
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ScenarioError(f"bad coordinate in {chunk!r}", line) from None
    if not pairs:
        raise ScenarioError("empty point list", line)
    return pairs


def _parse_float(value: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ScenarioError(f"expected a number, got {value!r}", line) from None


def _parse_int(value: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {value!r}", line) from None


def _parse_bool(value: str, line: int) -> bool:
    low = value.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ScenarioError(f"expected true/false, got {value!r}", line)


def parse_scenario(text: str, name: str = "scenario") -> ScenarioFile:
    """Parse and validate a scenario file; raises :class:`ScenarioError`
    with a line number on syntax problems and a reason on validation
    failures."""
    sections = []  # (name, line, {key: (value, line)})
    current = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            sec = line[1:-1].strip()
            if sec not in _SECTION_KEYS:
                raise ScenarioError(f"unknown section [{sec}]", lineno)
            if sec in seen and sec not in _REPEATABLE:
                raise ScenarioError(f"duplicate section [{sec}]", lineno)
            seen.add(sec)
            current = (sec, lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value' or '[section]', got {raw.strip()!r}", lineno)
        if current is None:
            raise ScenarioError("key outside of any section", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        sec = current[0]
        if key not in _SECTION_KEYS[sec]:
            raise ScenarioError(f"unknown key {key!r} in section [{sec}]", lineno)
        if key in current[2]:
            raise ScenarioError(f"duplicate key {key!r} in section [{sec}]", lineno)
        if not value:
            raise ScenarioError(f"empty value for {key!r}", lineno)
        current[2][key] = (value, lineno)

    by_name: Dict[str, Dict] = {}
    obstacles = []
    for sec, secline, keys in sections:
        if sec == "obstacle":
            obstacles.append((secline, keys))
        else:
            by_name[sec] = keys

    def need(sec: str, key: str):
        if sec not in by_name:
            raise ScenarioError(f"missing required section [{sec}]")
        if key not in by_name[sec]:
            raise ScenarioError(f"missing required key {key!r} in section [{sec}]")
        return by_name[sec][key]

    def opt(sec: str, key: str):
        return by_name.get(sec, {}).get(key)

    # Geometry.
    value, line = need("mission", "vertices")
    try:
        outer = Polygon(_parse_pairs(value, line))
    except ValueError as exc:
        raise ScenarioError(f"mission polygon invalid: {exc}", line) from None
    obs_polys = []
    for secline, keys in obstacles:
        if "vertices" not in keys:
            raise ScenarioError("obstacle section needs a 'vertices' key", secline)
        value, line = keys["vertices"]
        try:
            obs_polys.append(Polygon(_parse_pairs(value, line)))
        except ValueError as exc:
            raise ScenarioError(f"obstacle polygon invalid: {exc}", line) from None
    try:
        space = MissionSpace(outer=outer, obstacles=tuple(obs_polys))
    except ValueError as exc:
        raise ScenarioError(f"mission space invalid: {exc}") from None

    # Sensing and blend.
    value, line = need("sensing", "delta")
    delta = _parse_float(value, line)
    value, line = need("sensing", "lambda")
    decay = _parse_float(value, line)
    try:
        model = SensingModel(radius=delta, decay=decay)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    theta = 0.5
    if opt("blend", "theta") is not None:
        value, line = by_name["blend"]["theta"]
        theta = _parse_float(value, line)
        if not 0.0 <= theta <= 1.0:
            raise ScenarioError(f"theta must be in [0, 1], got {theta}", line)

    # Solver options.
    value, line = need("solver", "agents")
    n_agents = _parse_int(value, line)
    if n_agents < 1:
        raise ScenarioError(f"agents must be >= 1, got {n_agents}", line)
    horizon = None
    if opt("solver", "horizon") is not None:
        value, line = by_name["solver"]["horizon"]
        if value.strip().lower() != "full":
            horizon = _parse_int(value, line)
            if horizon < n_agents:
                raise ScenarioError(f"horizon must be >= agents, got {horizon}", line)
    q = None
    if opt("solver", "q") is not None:
        value, line = by_name["solver"]["q"]
        if value.strip().lower() != "full":
            q = tuple(_parse_int(v.strip(), line) for v in value.split(",") if v.strip())
            if not q:
                raise ScenarioError("q must list at least one index", line)
    lazy = False
    if opt("solver", "lazy") is not None:
        value, line = by_name["solver"]["lazy"]
        lazy = _parse_bool(value, line)
    inflation = "fundamental"
    if opt("solver", "inflation") is not None:
        value, line = by_name["solver"]["inflation"]
        inflation = value.strip().lower()
        if inflation not in ("fundamental", "elemental"):
            raise ScenarioError(
                f"inflation must be 'fundamental' or 'elemental', got {value!r}", line
            )

    # Ground set.
    if "groundset" not in by_name:
        raise ScenarioError("missing required section [groundset]")
    pitch = offset = None
    points = None
    if opt("groundset", "points") is not None:
        if opt("groundset", "pitch") is not None:
            raise ScenarioError("groundset: give either 'pitch' or 'points', not both")
        value, line = by_name["groundset"]["points"]
        points = tuple(_parse_pairs(value, line))
    else:
        if opt("groundset", "pitch") is None:
            raise ScenarioError("groundset needs 'pitch' or 'points'")
        value, line = by_name["groundset"]["pitch"]
        pitch = _parse_float(value, line)
        if pitch <= 0:
            raise ScenarioError(f"pitch must be positive, got {pitch}", line)
        if opt("groundset", "offset") is not None:
            value, line = by_name["groundset"]["offset"]
            offset = _parse_float(value, line)

    # Grid and density.
    value, line = need("grid", "resolution")
    resolution = _parse_int(value, line)
    if resolution < 1:
        raise ScenarioError(f"resolution must be >= 1, got {resolution}", line)
    density_uniform = 1.0
    density_values = None
    if opt("density", "values") is not None:
        if opt("density", "uniform") is not None:
            raise ScenarioError("density: give either 'uniform' or 'values', not both")
        value, line = by_name["density"]["values"]
        density_values = tuple(
            _parse_float(v.strip(), line) for v in value.split(";") if v.strip()
        )
        if len(density_values) != resolution * resolution:
            raise ScenarioError(
                f"density table needs {resolution * resolution} values, "
                f"got {len(density_values)}",
                line,
            )
        if any(v < 0 for v in density_values):
            raise ScenarioError("density values must be >= 0", line)
    elif opt("density", "uniform") is not None:
        value, line = by_name["density"]["uniform"]
        density_uniform = _parse_float(value, line)
        if density_uniform < 0:
            raise ScenarioError(f"density must be >= 0, got {density_uniform}", line)

    scenario = ScenarioFile(
        space=space,
        model=model,
        theta=theta,
        n_agents=n_agents,
        pitch=pitch,
        offset=offset,
        points=points,
        resolution=resolution,
        density_uniform=density_uniform,
        density_values=density_values,
        horizon=horizon,
        q=q,
        lazy=lazy,
        inflation=inflation,
        name=name,
    )
    # The ground set and grid must also build cleanly for the scenario to
    # count as valid.
    try:
        ground = scenario.build_ground_set()
        scenario.build_grid()
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    if scenario.n_agents > len(ground):
        raise ScenarioError(
            f"agents ({scenario.n_agents}) exceed the ground-set size ({len(ground)})"
        )
    if scenario.horizon is not None and scenario.horizon > len(ground):
        raise ScenarioError(
            f"horizon ({scenario.horizon}) exceeds the ground-set size ({len(ground)})"
        )
    return scenario


def apply_overrides(scenario: ScenarioFile, **kwargs) -> ScenarioFile:
    """Return a copy with the given fields replaced (CLI flag overrides)."""
    updates = {}
    if "delta" in kwargs and kwargs["delta"] is not None:
        updates["model"] = SensingModel(radius=kwargs.pop("delta"), decay=scenario.model.decay)
    else:
        kwargs.pop("delta", None)
    if "lambda_" in kwargs and kwargs["lambda_"] is not None:
        base = updates.get("model", scenario.model)
        updates["model"] = SensingModel(radius=base.radius, decay=kwargs.pop("lambda_"))
    else:
        kwargs.pop("lambda_", None)
    for key in ("theta", "n_agents", "pitch", "offset", "resolution", "horizon", "q", "lazy", "inflation"):
        if key in kwargs and kwargs[key] is not None:
            updates[key] = kwargs.pop(key)
        else:
            kwargs.pop(key, None)
    if kwargs:
        raise TypeError(f"unknown overrides: {sorted(kwargs)}")
    out = replace(scenario, **updates)
    if not 0.0 <= out.theta <= 1.0:
        raise ScenarioError(f"theta must be in [0, 1], got {out.theta}")
    if out.n_agents < 1:
        raise ScenarioError(f"agents must be >= 1, got {out.n_agents}")
    if out.pitch is not None and out.pitch <= 0:
        raise ScenarioError(f"pitch must be positive, got {out.pitch}")
    if out.resolution < 1:
        raise ScenarioError(f"resolution must be >= 1, got {out.resolution}")
    if out.inflation not in ("fundamental", "elemental"):
        raise ScenarioError(f"inflation must be 'fundamental' or 'elemental'")
    return out


BUILTIN_TEXTS = {
    "blank600": """\
# Empty 600 x 600 mission space.
[mission]
vertices = 0,0; 600,0; 600,600; 0,600

[sensing]
delta = 35
lambda = 0.003

[blend]
theta = 0.5

[solver]
agents = 10

[groundset]
pitch = 60

[grid]
resolution = 60
""",
    "maze600": """\
# 600 x 600 space with three staggered walls forming a serpentine corridor.
[mission]
vertices = 0,0; 600,0; 600,600; 0,600

[obstacle]
vertices = 130,0; 160,0; 160,440; 130,440

[obstacle]
vertices = 290,160; 320,160; 320,600; 290,600

[obstacle]
vertices = 440,0; 470,0; 470,440; 440,440

[sensing]
delta = 50
lambda = 0.012

[blend]
theta = 0.5

[solver]
agents = 10

[groundset]
pitch = 60

[grid]
resolution = 60
""",
    "general600": """\
# 600 x 600 space with scattered convex obstacles.
[mission]
vertices = 0,0; 600,0; 600,600; 0,600

[obstacle]
vertices = 80,80; 140,80; 140,140; 80,140

[obstacle]
vertices = 400,100; 520,100; 520,160; 400,160

[obstacle]
vertices = 250,340; 340,340; 290,430

[obstacle]
vertices = 70,430; 160,430; 180,490; 120,530; 50,490

[obstacle]
vertices = 460,400; 560,400; 560,470; 460,470

[sensing]
delta = 200
lambda = 0.05

[blend]
theta = 0.5

[solver]
agents = 10

[groundset]
pitch = 60

[grid]
resolution = 60
""",
}

BUILTIN_DESCRIPTIONS = {
    "blank600": "600x600 square, no obstacles",
    "maze600": "600x600 square with three staggered walls (visibility shadows)",
    "general600": "600x600 square with five scattered convex obstacles",
}


def builtin_scenarios() -> Dict[str, ScenarioFile]:
    """Parse and return all built-in scenarios, keyed by name."""
    return {name: parse_scenario(text, name=name) for name, text in BUILTIN_TEXTS.items()}


def load_scenario(source: str) -> ScenarioFile:
    """Load a scenario by built-in name or from a file path."""
    if source in BUILTIN_TEXTS:
        return parse_scenario(BUILTIN_TEXTS[source], name=source)
    try:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {source!r}: {exc}") from None
    return parse_scenario(text, name=source)
