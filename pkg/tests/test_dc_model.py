from __future__ import annotations

import numpy as np
import pytest

from redopf.dc_model import (
    ActiveSet,
    FLOW_UPPER,
    GEN_P_UPPER,
    binding_status,
    build_catalog,
    build_full,
    build_reduced,
    violated_constraints,
)
from redopf.errors import DimensionMismatch
from redopf.grid import identity_scenario, sample_scenario
from redopf.qp import solve


def test_catalog_order_and_length(toy3):
    cat = build_catalog(toy3)
    assert len(cat) == toy3.n_gens + 4 * toy3.n_branches
    kinds = [e.kind for e in cat.entries]
    assert kinds == (
        ["GEN_P_UPPER"] * 4 + ["FLOW_UPPER"] * 3 + ["FLOW_LOWER"] * 3
        + ["ANGLE_UPPER"] * 3 + ["ANGLE_LOWER"] * 3
    )
    assert [e.entity_index for e in cat.entries[4:7]] == [0, 1, 2]


def test_full_problem_counts_toy2(toy2):
    prob = build_full(toy2, identity_scenario(toy2))
    assert prob.n_vars == 4  # 2 theta + 1 P + 1 F
    assert prob.n_eq == 4  # flow def + slack + 2 balances
    assert prob.n_ineq == len(prob.catalog) + 1  # catalog rows + gen lower bound


def test_x_scale_rescales_flow_definition_rows(toy2):
    base = identity_scenario(toy2)
    scaled = type(base)(
        load_scale=base.load_scale,
        pmax_scale=base.pmax_scale,
        rate_scale=base.rate_scale,
        x_scale=(1.1,),
        seed=0,
    )
    p0 = build_full(toy2, base)
    p1 = build_full(toy2, scaled)
    # Only the theta coefficients of the flow-definition row change, by 1/1.1.
    row0, row1 = p0.A_eq[0], p1.A_eq[0]
    theta = slice(0, 2)
    assert np.allclose(row1[theta], row0[theta] / 1.1)
    assert row1[2] == row0[2]
    assert np.array_equal(p0.A_eq[1:], p1.A_eq[1:])
    assert np.allclose(p0.G, p1.G) and np.allclose(p0.h, p1.h)


def test_row_provenance_bijection(toy3):
    prob = build_full(toy3, identity_scenario(toy3))
    cat_rows = prob.row_catalog[prob.row_catalog >= 0]
    assert sorted(cat_rows) == list(range(len(prob.catalog)))
    assert np.sum(prob.row_catalog < 0) == toy3.n_gens


def test_build_reduced_all_true_is_full(toy3):
    full = build_full(toy3, identity_scenario(toy3))
    red = build_reduced(full, ActiveSet.all_true(len(full.catalog)))
    assert np.array_equal(red.G, full.G)
    assert np.array_equal(red.h, full.h)
    assert np.array_equal(red.row_catalog, full.row_catalog)


def test_build_reduced_all_false_keeps_gen_lower_only(toy3):
    full = build_full(toy3, identity_scenario(toy3))
    red = build_reduced(full, ActiveSet.all_false(len(full.catalog)))
    assert red.n_ineq == toy3.n_gens
    assert np.all(red.row_catalog == -1)
    assert np.array_equal(red.A_eq, full.A_eq)
    assert np.array_equal(red.Q, full.Q)


def test_build_reduced_misaligned(toy3):
    full = build_full(toy3, identity_scenario(toy3))
    with pytest.raises(DimensionMismatch):
        build_reduced(full, ActiveSet.all_true(3))


def test_binding_status_thresholds(toy2):
    full = build_full(toy2, identity_scenario(toy2))
    cat = full.catalog
    flow_upper = cat.index_of(FLOW_UPPER, 0)
    layout = full.layout
    # Flow exactly at the 1.0 pu rate.
    x = np.zeros(full.n_vars)
    x[layout.flow(0)] = 1.0
    assert binding_status(full, x).membership[flow_upper]
    # Flow at 90% of the rate: slack far beyond the labeling tolerance.
    x[layout.flow(0)] = 0.9
    assert not binding_status(full, x).membership[flow_upper]
    # Flow violating the rate by 0.01 pu.
    x[layout.flow(0)] = 1.01
    assert binding_status(full, x).membership[flow_upper]
    assert flow_upper in violated_constraints(full, x)


def test_violated_constraints_full_solution_empty(toy3):
    full = build_full(toy3, identity_scenario(toy3))
    report = solve(full)
    assert report.ok
    assert violated_constraints(full, report.primal) == ()


def test_violated_constraints_wrong_length(toy3):
    full = build_full(toy3, identity_scenario(toy3))
    with pytest.raises(DimensionMismatch):
        violated_constraints(full, np.zeros(3))


def test_toy3_base_binding_set(toy3):
    """The congested toy binds gen 1 and 3 upper limits and the 1-3 line."""
    full = build_full(toy3, identity_scenario(toy3))
    report = solve(full)
    assert report.ok
    assert report.objective == pytest.approx(12.7, rel=1e-6)
    cat = full.catalog
    expected = {
        cat.index_of(GEN_P_UPPER, 0),
        cat.index_of(GEN_P_UPPER, 2),
        cat.index_of(FLOW_UPPER, 1),
    }
    assert set(binding_status(full, report.primal).indices()) == expected


def test_reduced_with_true_binding_set_matches_full(toy3):
    for seed in range(12):
        scen = sample_scenario(toy3, seed=seed)
        full = build_full(toy3, scen)
        rep = solve(full)
        assert rep.ok
        red = build_reduced(full, binding_status(full, rep.primal))
        rep_red = solve(red)
        assert rep_red.ok
        assert rep_red.objective == pytest.approx(rep.objective, rel=1e-6)


def test_missing_binding_flow_limit_is_the_violation(toy3):
    full = build_full(toy3, identity_scenario(toy3))
    rep = solve(full)
    truth = binding_status(full, rep.primal)
    flow_idx = full.catalog.index_of(FLOW_UPPER, 1)
    member = list(truth.membership)
    member[flow_idx] = False
    red = build_reduced(full, ActiveSet(membership=tuple(member)))
    rep_red = solve(red)
    assert rep_red.ok
    # The reduced problem is a relaxation and its optimum violates exactly
    # the dropped line limit.
    assert rep_red.objective <= rep.objective + 1e-9
    assert violated_constraints(full, rep_red.primal) == (flow_idx,)
