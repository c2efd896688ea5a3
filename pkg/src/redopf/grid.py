"""Static grid model: case file parsing, scenario sampling, classifier inputs.

Quantities are kept in the units of the case file (MW / MVA / per-unit
reactance); conversion to per-unit happens when the optimization problem is
assembled.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidRange,
    ParseError,
    UnsupportedError,
    ValidationError,
)

BUS_PQ = 1
BUS_PV = 2
BUS_SLACK = 3

#: Symmetric angle-difference bound used when the file carries no usable one
#: (MATPOWER encodes "unconstrained" as 0 or +-360 degrees).
DEFAULT_ANGLE_DIFF_MAX = math.pi / 6.0

_BUS_COLS = 13
_GEN_COLS = 10
_BRANCH_COLS = 13


@dataclass(frozen=True)
class Bus:
    id: int
    type: int  # BUS_PQ / BUS_PV / BUS_SLACK
    load_p: float  # MW


@dataclass(frozen=True)
class Generator:
    bus_id: int
    p_min: float  # MW
    p_max: float  # MW
    cost: tuple[float, float, float]  # (c2, c1, c0) over MW output
    status: int = 1


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    reactance_x: float  # per-unit
    rate_f_max: float  # MVA
    angle_diff_max: float  # radians, symmetric bound
    status: int = 1


@dataclass(frozen=True)
class Grid:
    base_mva: float
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    branches: tuple[Branch, ...]

    def __post_init__(self):
        validate_grid(self)

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_gens(self) -> int:
        return len(self.generators)

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    def slack_index(self) -> int:
        return next(i for i, b in enumerate(self.buses) if b.type == BUS_SLACK)

    def load_bus_indices(self) -> tuple[int, ...]:
        """Indices (into ``buses``) of buses with nonzero base load, file order."""
        return tuple(i for i, b in enumerate(self.buses) if b.load_p != 0.0)

    def bus_index(self, bus_id: int) -> int:
        try:
            return self._bus_lookup[bus_id]
        except AttributeError:
            lookup = {b.id: i for i, b in enumerate(self.buses)}
            object.__setattr__(self, "_bus_lookup", lookup)
            return lookup[bus_id]


def validate_grid(grid: Grid) -> None:
    if grid.base_mva <= 0:
        raise ValidationError(f"base_mva must be positive, got {grid.base_mva}")
    ids = [b.id for b in grid.buses]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate bus ids")
    slack = [b for b in grid.buses if b.type == BUS_SLACK]
    if len(slack) != 1:
        raise ValidationError(f"expected exactly one slack bus, found {len(slack)}")
    for b in grid.buses:
        if b.type not in (BUS_PQ, BUS_PV, BUS_SLACK):
            raise ValidationError(f"bus {b.id}: unsupported bus type {b.type}")
    known = set(ids)
    for k, g in enumerate(grid.generators):
        if g.status != 1:
            raise ValidationError(f"generator {k}: out-of-service entries must be dropped before Grid construction")
        if g.bus_id not in known:
            raise ValidationError(f"generator {k} references unknown bus {g.bus_id}")
        if g.p_min > g.p_max:
            raise ValidationError(f"generator {k}: p_min {g.p_min} > p_max {g.p_max}")
        if g.cost[0] < 0:
            raise ValidationError(f"generator {k}: non-convex cost (negative quadratic coefficient)")
    for k, br in enumerate(grid.branches):
        if br.status != 1:
            raise ValidationError(f"branch {k}: out-of-service entries must be dropped before Grid construction")
        if br.from_bus not in known or br.to_bus not in known:
            raise ValidationError(f"branch {k} references unknown bus ({br.from_bus}, {br.to_bus})")
        if br.reactance_x == 0.0:
            raise ValidationError(f"branch {k}: zero reactance")
        if br.rate_f_max <= 0.0:
            raise ValidationError(f"branch {k}: rate_f_max must be positive, got {br.rate_f_max}")
        if br.angle_diff_max <= 0.0:
            raise ValidationError(f"branch {k}: angle_diff_max must be positive")


# ---------------------------------------------------------------------------
# MATPOWER case parsing
# ---------------------------------------------------------------------------

_MATRIX_RE = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\]\s*;", re.DOTALL)
_BASE_RE = re.compile(r"mpc\.baseMVA\s*=\s*([^;\s]+)\s*;")


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _parse_matrix(block: str, name: str, min_cols: int) -> list[list[float]]:
    rows = []
    for chunk in re.split(r"[;\n]", block):
        tokens = chunk.split()
        if not tokens:
            continue
        try:
            row = [float(t) for t in tokens]
        except ValueError as exc:
            raise ParseError(f"{name}: non-numeric token in row {chunk.strip()!r}") from exc
        if len(row) < min_cols:
            raise ParseError(
                f"{name}: row has {len(row)} columns, expected at least {min_cols}"
            )
        rows.append(row)
    if not rows:
        raise ParseError(f"{name}: matrix is empty")
    return rows


def _angle_bound(angmin_deg: float, angmax_deg: float) -> float:
    """Symmetric angle-difference bound in radians, with the MATPOWER 0/360 default."""
    if not (angmin_deg < 0.0 < angmax_deg):
        return DEFAULT_ANGLE_DIFF_MAX
    bound = min(-angmin_deg, angmax_deg)
    if bound >= 360.0:
        return DEFAULT_ANGLE_DIFF_MAX
    return math.radians(bound)


def parse_case(text: str) -> Grid:
    """Parse a MATPOWER/PGLib-style case into a :class:`Grid`.

    Supports the polynomial cost model of degree <= 2; out-of-service rows
    (status 0) are excluded; AC-only columns are read and ignored.
    """
    clean = _strip_comments(text)
    matrices = {m.group(1): m.group(2) for m in _MATRIX_RE.finditer(clean)}

    base_match = _BASE_RE.search(clean)
    if base_match is None:
        raise ParseError("missing mpc.baseMVA")
    try:
        base_mva = float(base_match.group(1))
    except ValueError as exc:
        raise ParseError(f"bad baseMVA value {base_match.group(1)!r}") from exc

    for required in ("bus", "gen", "branch", "gencost"):
        if required not in matrices:
            raise ParseError(f"missing mpc.{required} matrix")

    bus_rows = _parse_matrix(matrices["bus"], "bus", _BUS_COLS)
    gen_rows = _parse_matrix(matrices["gen"], "gen", _GEN_COLS)
    branch_rows = _parse_matrix(matrices["branch"], "branch", _BRANCH_COLS)
    cost_rows = _parse_matrix(matrices["gencost"], "gencost", 4)

    buses = tuple(
        Bus(id=int(r[0]), type=int(r[1]), load_p=r[2]) for r in bus_rows
    )

    if len(cost_rows) not in (len(gen_rows), 2 * len(gen_rows)):
        raise ParseError(
            f"gencost has {len(cost_rows)} rows for {len(gen_rows)} generators"
        )
    costs = []
    for r in cost_rows[: len(gen_rows)]:
        model = int(r[0])
        if model != 2:
            raise UnsupportedError(f"gencost model {model} (only polynomial model 2)")
        n_coeff = int(r[3])
        if len(r) < 4 + n_coeff:
            raise ParseError("gencost row shorter than its declared coefficient count")
        if n_coeff > 3:
            raise UnsupportedError(
                f"polynomial cost of degree {n_coeff - 1} (only degree <= 2)"
            )
        coeffs = r[4 : 4 + n_coeff]
        padded = [0.0] * (3 - len(coeffs)) + list(coeffs)
        costs.append((padded[0], padded[1], padded[2]))

    gens = []
    for r, cost in zip(gen_rows, costs):
        if int(r[7]) == 0:  # status column
            continue
        gens.append(
            Generator(bus_id=int(r[0]), p_min=r[9], p_max=r[8], cost=cost)
        )

    branches = []
    for r in branch_rows:
        if int(r[10]) == 0:  # status column
            continue
        branches.append(
            Branch(
                from_bus=int(r[0]),
                to_bus=int(r[1]),
                reactance_x=r[3],
                rate_f_max=r[5],
                angle_diff_max=_angle_bound(r[11], r[12]),
            )
        )

    return Grid(
        base_mva=base_mva,
        buses=buses,
        generators=tuple(gens),
        branches=tuple(branches),
    )


def _degrees_exact(rad: float) -> float:
    """Degrees value whose radians() round-trips bit-exactly when possible."""
    deg = math.degrees(rad)
    if math.radians(deg) == rad:
        return deg
    for direction in (math.inf, -math.inf):
        cand = deg
        for _ in range(4):
            cand = math.nextafter(cand, direction)
            if math.radians(cand) == rad:
                return cand
    return deg


def write_case(grid: Grid, name: str = "case") -> str:
    """Serialize a Grid back to MATPOWER table syntax (round-trips parse_case)."""
    out = [f"function mpc = {name}", "mpc.version = '2';", f"mpc.baseMVA = {grid.base_mva!r};", ""]

    out.append("mpc.bus = [")
    for b in grid.buses:
        out.append(f"\t{b.id}\t{b.type}\t{b.load_p!r}\t0\t0\t0\t1\t1\t0\t135\t1\t1.1\t0.9;")
    out.append("];")

    out.append("mpc.gen = [")
    for g in grid.generators:
        out.append(
            f"\t{g.bus_id}\t0\t0\t0\t0\t1\t{grid.base_mva!r}\t1\t{g.p_max!r}\t{g.p_min!r};"
        )
    out.append("];")

    out.append("mpc.branch = [")
    for br in grid.branches:
        deg = _degrees_exact(br.angle_diff_max)
        out.append(
            f"\t{br.from_bus}\t{br.to_bus}\t0\t{br.reactance_x!r}\t0\t{br.rate_f_max!r}"
            f"\t0\t0\t0\t0\t1\t{-deg!r}\t{deg!r};"
        )
    out.append("];")

    out.append("mpc.gencost = [")
    for g in grid.generators:
        c2, c1, c0 = g.cost
        out.append(f"\t2\t0\t0\t3\t{c2!r}\t{c1!r}\t{c0!r};")
    out.append("];")
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Scenario sampling and the classifier input vector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioRanges:
    """Per-kind uniform sampling ranges for scale factors."""

    load: tuple[float, float] = (0.85, 1.15)
    pmax: tuple[float, float] = (0.9, 1.1)
    rate: tuple[float, float] = (0.9, 1.1)
    x: tuple[float, float] = (0.9, 1.1)

    def __post_init__(self):
        for kind in ("load", "pmax", "rate", "x"):
            low, high = getattr(self, kind)
            if not (0.0 < low <= high):
                raise InvalidRange(f"{kind} range ({low}, {high}) must satisfy 0 < low <= high")


DEFAULT_DC_RANGES = ScenarioRanges()
IDENTITY_RANGES = ScenarioRanges(load=(1.0, 1.0), pmax=(1.0, 1.0), rate=(1.0, 1.0), x=(1.0, 1.0))


@dataclass(frozen=True)
class Scenario:
    """One sampled realization of grid parameters, stored as scale factors."""

    load_scale: tuple[float, ...]
    pmax_scale: tuple[float, ...]
    rate_scale: tuple[float, ...]
    x_scale: tuple[float, ...]
    seed: int

    def __post_init__(self):
        for kind in ("load_scale", "pmax_scale", "rate_scale", "x_scale"):
            if any(s <= 0.0 for s in getattr(self, kind)):
                raise ValidationError(f"{kind} must be strictly positive")

    def matches(self, grid: Grid) -> bool:
        return (
            len(self.load_scale) == len(grid.load_bus_indices())
            and len(self.pmax_scale) == grid.n_gens
            and len(self.rate_scale) == grid.n_branches
            and len(self.x_scale) == grid.n_branches
        )

    def to_record(self) -> dict:
        return {
            "load_scale": list(self.load_scale),
            "pmax_scale": list(self.pmax_scale),
            "rate_scale": list(self.rate_scale),
            "x_scale": list(self.x_scale),
            "seed": self.seed,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Scenario":
        return cls(
            load_scale=tuple(rec["load_scale"]),
            pmax_scale=tuple(rec["pmax_scale"]),
            rate_scale=tuple(rec["rate_scale"]),
            x_scale=tuple(rec["x_scale"]),
            seed=int(rec["seed"]),
        )


def sample_scenario(grid: Grid, ranges: ScenarioRanges = DEFAULT_DC_RANGES, seed: int = 0) -> Scenario:
    """Draw one scenario, each scale factor independently uniform in its range."""
    rng = np.random.default_rng(seed)

    def draw(n, bounds):
        low, high = bounds
        return tuple(float(v) for v in rng.uniform(low, high, size=n))

    return Scenario(
        load_scale=draw(len(grid.load_bus_indices()), ranges.load),
        pmax_scale=draw(grid.n_gens, ranges.pmax),
        rate_scale=draw(grid.n_branches, ranges.rate),
        x_scale=draw(grid.n_branches, ranges.x),
        seed=seed,
    )


def identity_scenario(grid: Grid, seed: int = 0) -> Scenario:
    """Scenario with every scale factor exactly 1 (the base case)."""
    return Scenario(
        load_scale=(1.0,) * len(grid.load_bus_indices()),
        pmax_scale=(1.0,) * grid.n_gens,
        rate_scale=(1.0,) * grid.n_branches,
        x_scale=(1.0,) * grid.n_branches,
        seed=seed,
    )


@dataclass(frozen=True)
class PhiVector:
    """Ordered classifier input: scaled loads, gen limits, line ratings, reactances."""

    values: tuple[float, ...]
    layout: tuple[tuple[str, int], ...]


def phi_layout(grid: Grid) -> tuple[tuple[str, int], ...]:
    """Feature layout; a pure function of the grid, never of the scenario."""
    layout: list[tuple[str, int]] = []
    layout += [("load", i) for i in grid.load_bus_indices()]
    layout += [("gen_pmax", k) for k in range(grid.n_gens)]
    layout += [("branch_rate", k) for k in range(grid.n_branches)]
    layout += [("branch_x", k) for k in range(grid.n_branches)]
    return tuple(layout)


def phi_dim(grid: Grid) -> int:
    return len(grid.load_bus_indices()) + grid.n_gens + 2 * grid.n_branches


def phi_vector(grid: Grid, scenario: Scenario) -> PhiVector:
    """Assemble the input parameter vector for one scenario."""
    if not scenario.matches(grid):
        raise DimensionMismatch("scenario does not match grid entity counts")
    values: list[float] = []
    for i, scale in zip(grid.load_bus_indices(), scenario.load_scale):
        values.append(grid.buses[i].load_p * scale)
    for g, scale in zip(grid.generators, scenario.pmax_scale):
        values.append(g.p_max * scale)
    for br, scale in zip(grid.branches, scenario.rate_scale):
        values.append(br.rate_f_max * scale)
    for br, scale in zip(grid.branches, scenario.x_scale):
        values.append(br.reactance_x * scale)
    return PhiVector(values=tuple(values), layout=phi_layout(grid))
