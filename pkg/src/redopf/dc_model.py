"""DC optimal power flow as a convex QP, plus the predicted-constraint catalog.

Variable layout is ``[theta per bus (rad), P per generator (pu), F per branch
(pu)]``.  Equalities encode the flow definitions, the slack angle, and the
nodal balances.  The inequality catalog enumerates exactly the one-sided rows
whose binding status is predicted; generator lower bounds are kept in every
problem and never predicted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .grid import Grid, Scenario

GEN_P_UPPER = "GEN_P_UPPER"
FLOW_UPPER = "FLOW_UPPER"
FLOW_LOWER = "FLOW_LOWER"
ANGLE_UPPER = "ANGLE_UPPER"
ANGLE_LOWER = "ANGLE_LOWER"

CATALOG_KINDS = (GEN_P_UPPER, FLOW_UPPER, FLOW_LOWER, ANGLE_UPPER, ANGLE_LOWER)


@dataclass(frozen=True)
class CatalogEntry:
    kind: str
    entity_index: int


@dataclass(frozen=True)
class ConstraintCatalog:
    entries: tuple[CatalogEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in CATALOG_KINDS}
        for e in self.entries:
            out[e.kind] += 1
        return out

    def index_of(self, kind: str, entity_index: int) -> int:
        try:
            return self._lookup[(kind, entity_index)]
        except AttributeError:
            lookup = {(e.kind, e.entity_index): i for i, e in enumerate(self.entries)}
            object.__setattr__(self, "_lookup", lookup)
            return lookup[(kind, entity_index)]


def build_catalog(grid: Grid) -> ConstraintCatalog:
    """Deterministic catalog order: gen uppers, then the four branch blocks."""
    entries: list[CatalogEntry] = []
    entries += [CatalogEntry(GEN_P_UPPER, k) for k in range(grid.n_gens)]
    for kind in (FLOW_UPPER, FLOW_LOWER, ANGLE_UPPER, ANGLE_LOWER):
        entries += [CatalogEntry(kind, k) for k in range(grid.n_branches)]
    return ConstraintCatalog(entries=tuple(entries))


@dataclass(frozen=True)
class ActiveSet:
    """Boolean membership vector aligned with a ConstraintCatalog."""

    membership: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.membership)

    @classmethod
    def all_true(cls, n: int) -> "ActiveSet":
        return cls(membership=(True,) * n)

    @classmethod
    def all_false(cls, n: int) -> "ActiveSet":
        return cls(membership=(False,) * n)

    @classmethod
    def from_indices(cls, n: int, indices) -> "ActiveSet":
        member = [False] * n
        for i in indices:
            member[i] = True
        return cls(membership=tuple(member))

    @classmethod
    def from_array(cls, arr) -> "ActiveSet":
        return cls(membership=tuple(bool(v) for v in arr))

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.membership) if m)

    def count(self) -> int:
        return sum(self.membership)

    def union(self, indices) -> "ActiveSet":
        member = list(self.membership)
        for i in indices:
            member[i] = True
        return ActiveSet(membership=tuple(member))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.membership, dtype=bool)


@dataclass(frozen=True)
class VariableLayout:
    n_bus: int
    n_gen: int
    n_branch: int

    @property
    def n_vars(self) -> int:
        return self.n_bus + self.n_gen + self.n_branch

    def theta(self, i: int) -> int:
        return i

    def pg(self, k: int) -> int:
        return self.n_bus + k

    def flow(self, k: int) -> int:
        return self.n_bus + self.n_gen + k


@dataclass
class DcOpfProblem:
    """Convex QP ``min 0.5 x'Qx + c'x + c0  s.t.  A_eq x = b_eq, G x <= h``.

    ``row_catalog[r]`` maps inequality row ``r`` back to its catalog index, or
    -1 for always-kept rows (generator lower bounds).  ``pg_bounds`` are the
    per-unit generator bounds used by the solver's structured cold start.
    """

    Q: np.ndarray
    c: np.ndarray
    c0: float
    A_eq: np.ndarray
    b_eq: np.ndarray
    G: np.ndarray
    h: np.ndarray
    row_catalog: np.ndarray
    catalog: ConstraintCatalog | None = None
    layout: VariableLayout | None = None
    base_mva: float = 1.0
    pg_bounds: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def n_vars(self) -> int:
        return self.Q.shape[0]

    @property
    def n_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def n_ineq(self) -> int:
        return self.G.shape[0]

    def objective_value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.c0)

    def is_full(self) -> bool:
        """True when every catalog row is present."""
        if self.catalog is None:
            return False
        present = set(int(r) for r in self.row_catalog if r >= 0)
        return present == set(range(len(self.catalog)))


def build_full(grid: Grid, scenario: Scenario) -> DcOpfProblem:
    """Assemble the full per-unit DC-OPF QP for one scenario."""
    if not scenario.matches(grid):
        raise DimensionMismatch("scenario does not match grid entity counts")

    base = grid.base_mva
    nb, ng, m = grid.n_buses, grid.n_gens, grid.n_branches
    layout = VariableLayout(n_bus=nb, n_gen=ng, n_branch=m)
    n = layout.n_vars

    # Per-unit cost: C_pu(P_pu) = C_MW(base * P_pu) / base.
    Q = np.zeros((n, n))
    c = np.zeros(n)
    c0 = 0.0
    for k, g in enumerate(grid.generators):
        c2, c1, cconst = g.cost
        if c2 < 0:
            raise ValidationError(f"generator {k}: non-convex cost")
        Q[layout.pg(k), layout.pg(k)] = 2.0 * c2 * base
        c[layout.pg(k)] = c1
        c0 += cconst / base

    x_scaled = np.array(
        [br.reactance_x * s for br, s in zip(grid.branches, scenario.x_scale)]
    )
    if np.any(x_scaled == 0.0):
        raise ValidationError("zero branch reactance after scaling")

    from_idx = np.array([grid.bus_index(br.from_bus) for br in grid.branches], dtype=int)
    to_idx = np.array([grid.bus_index(br.to_bus) for br in grid.branches], dtype=int)

    # Equalities: flow definitions (branch order), slack angle, nodal balances.
    n_eq = m + 1 + nb
    A_eq = np.zeros((n_eq, n))
    b_eq = np.zeros(n_eq)
    for k in range(m):
        A_eq[k, layout.flow(k)] = 1.0
        A_eq[k, from_idx[k]] -= 1.0 / x_scaled[k]
        A_eq[k, to_idx[k]] += 1.0 / x_scaled[k]
    A_eq[m, layout.theta(grid.slack_index())] = 1.0

    # Balance at bus i: sum(F out) - sum(F in) - sum(P at i) = -L_i.
    load_pu = np.zeros(nb)
    for i, s in zip(grid.load_bus_indices(), scenario.load_scale):
        load_pu[i] = grid.buses[i].load_p * s / base
    b_eq[m + 1 :] = -load_pu
    for k in range(m):
        A_eq[m + 1 + from_idx[k], layout.flow(k)] += 1.0
        A_eq[m + 1 + to_idx[k], layout.flow(k)] -= 1.0
    for k, g in enumerate(grid.generators):
        A_eq[m + 1 + grid.bus_index(g.bus_id), layout.pg(k)] -= 1.0

    catalog = build_catalog(grid)
    pmax_pu = np.array(
        [g.p_max * s / base for g, s in zip(grid.generators, scenario.pmax_scale)]
    )
    pmin_pu = np.array([g.p_min / base for g in grid.generators])
    rate_pu = np.array(
        [br.rate_f_max * s / base for br, s in zip(grid.branches, scenario.rate_scale)]
    )
    ang_max = np.array([br.angle_diff_max for br in grid.branches])

    n_rows = len(catalog) + ng  # catalog rows plus always-kept gen lower bounds
    G = np.zeros((n_rows, n))
    h = np.zeros(n_rows)
    row_catalog = np.full(n_rows, -1, dtype=int)

    r = 0
    for k in range(ng):  # P_g <= pmax
        G[r, layout.pg(k)] = 1.0
        h[r] = pmax_pu[k]
        row_catalog[r] = catalog.index_of(GEN_P_UPPER, k)
        r += 1
    for k in range(m):  # F <= rate
        G[r, layout.flow(k)] = 1.0
        h[r] = rate_pu[k]
        row_catalog[r] = catalog.index_of(FLOW_UPPER, k)
        r += 1
    for k in range(m):  # -F <= rate
        G[r, layout.flow(k)] = -1.0
        h[r] = rate_pu[k]
        row_catalog[r] = catalog.index_of(FLOW_LOWER, k)
        r += 1
    for k in range(m):  # theta_i - theta_j <= ang_max
        G[r, from_idx[k]] = 1.0
        G[r, to_idx[k]] -= 1.0
        h[r] = ang_max[k]
        row_catalog[r] = catalog.index_of(ANGLE_UPPER, k)
        r += 1
    for k in range(m):  # theta_j - theta_i <= ang_max
        G[r, to_idx[k]] = 1.0
        G[r, from_idx[k]] -= 1.0
        h[r] = ang_max[k]
        row_catalog[r] = catalog.index_of(ANGLE_LOWER, k)
        r += 1
    for k in range(ng):  # always kept: -P_g <= -pmin
        G[r, layout.pg(k)] = -1.0
        h[r] = -pmin_pu[k]
        r += 1

    return DcOpfProblem(
        Q=Q,
        c=c,
        c0=c0,
        A_eq=A_eq,
        b_eq=b_eq,
        G=G,
        h=h,
        row_catalog=row_catalog,
        catalog=catalog,
        layout=layout,
        base_mva=base,
        pg_bounds=(pmin_pu, pmax_pu),
    )


def build_reduced(full: DcOpfProblem, active: ActiveSet) -> DcOpfProblem:
    """Keep the selected catalog rows plus the always-kept rows."""
    if full.catalog is None or len(active) != len(full.catalog):
        raise DimensionMismatch(
            "active set is not aligned with the problem's constraint catalog"
        )
    member = active.to_array()
    keep = np.array(
        [r < 0 or member[r] for r in full.row_catalog], dtype=bool
    )
    return replace(
        full,
        G=full.G[keep],
        h=full.h[keep],
        row_catalog=full.row_catalog[keep],
    )


def _catalog_residuals(full: DcOpfProblem, solution: np.ndarray) -> np.ndarray:
    """Residual Gx - h per catalog entry, in catalog order."""
    if full.catalog is None:
        raise DimensionMismatch("problem has no constraint catalog")
    solution = np.asarray(solution, dtype=float)
    if solution.shape != (full.n_vars,):
        raise DimensionMismatch(
            f"solution has length {solution.shape}, expected ({full.n_vars},)"
        )
    if not full.is_full():
        raise DimensionMismatch("binding/violation checks require the full problem")
    res = full.G @ solution - full.h
    out = np.empty(len(full.catalog))
    for r, cat in enumerate(full.row_catalog):
        if cat >= 0:
            out[cat] = res[r]
    return out


def binding_status(full: DcOpfProblem, solution: np.ndarray, tol: float = 1e-5) -> ActiveSet:
    """Label a constraint binding when violated or within ``tol`` of its bound."""
    res = _catalog_residuals(full, solution)
    status = (res > 0.0) | (np.abs(res) < tol)
    return ActiveSet(membership=tuple(bool(v) for v in status))


def violated_constraints(
    full: DcOpfProblem, solution: np.ndarray, tol: float = 1e-8
) -> tuple[int, ...]:
    """Catalog indices with Gx - h > tol; empty certifies full feasibility."""
    res = _catalog_residuals(full, solution)
    return tuple(int(i) for i in np.nonzero(res > tol)[0])
