# tests/test_lp.py
import math

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog

from cgc import combine_throughputs, indicator, subnetwork_throughput_matrix
from experiments import RING_REQUIREMENTS, derive_requirements
from graph import DEFAULT_RHO, from_networkx, make_graph
from lp import (
    build_lp,
    check_feasibility,
    constraint_residuals,
    lp_objective_of,
    optimal_offered_load,
    solve_lp,
    validate_requirements,
)
from product_form import saturated_throughputs


def _highs_objective(g, r):
    m = subnetwork_throughput_matrix(g)
    N = m.n_subnets
    res = linprog(
        -m.aggregate(),
        A_ub=-m.th.T,
        b_ub=-np.asarray(r),
        A_eq=np.ones((1, N)),
        b_eq=[1.0],
        bounds=[(0.0, 1.0)] * N,
        method="highs",
    )
    return res.status, (None if res.fun is None else -res.fun)


def test_ring_optimum(ring):
    sol = optimal_offered_load(ring, RING_REQUIREMENTS)
    assert sol.optimal
    assert sol.objective == pytest.approx(1.7064, abs=1e-3)
    assert sol.f_star == pytest.approx([0.4261, 0.4261, 0.4271, 0.4271], abs=1e-3)
    assert np.all(sol.th_star >= np.asarray(RING_REQUIREMENTS) - 1e-9)
    assert math.fsum(sol.q_star) == pytest.approx(1.0, abs=1e-12)


def test_ring_support_is_small(ring):
    sol = optimal_offered_load(ring, RING_REQUIREMENTS)
    assert 1 <= sol.nonzero_count <= ring.n + 1
    used = dict(sol.support)
    assert used[0b1111] > 0.99


def test_edgeless_pair_uses_everything():
    g = make_graph(2, [])
    sol = optimal_offered_load(g, [0.0, 0.0])
    assert sol.objective == pytest.approx(1.68528, abs=1e-5)
    assert sol.support == ((3, 1.0),)


def test_zero_requirements_pick_best_row(ring):
    m = subnetwork_throughput_matrix(ring)
    sol = optimal_offered_load(ring, np.zeros(4))
    assert sol.objective == pytest.approx(m.aggregate().max())


def test_dominates_saturated_operation(chain3):
    th0 = saturated_throughputs(chain3)
    r = derive_requirements(th0)
    sol = optimal_offered_load(chain3, r)
    assert sol.optimal
    assert sol.objective >= th0.sum() - 1e-9


def test_residuals_are_non_negative(ring):
    m = subnetwork_throughput_matrix(ring)
    lp = build_lp(m, RING_REQUIREMENTS)
    sol = solve_lp(lp)
    res = constraint_residuals(sol, lp)
    assert len(res) == lp.n_rows
    assert min(res[:-1]) >= -1e-9
    assert abs(res[-1]) <= 1e-9
    assert lp_objective_of(m, sol.q_star) == pytest.approx(sol.objective)
    assert combine_throughputs(m, sol.q_star) == pytest.approx(sol.th_star)


def test_infeasible_pair_passes_necessary_check_but_fails_lp():
    g = make_graph(2, [(0, 1)])
    r = [0.5, 0.5]
    assert check_feasibility(g, r).ok
    sol = optimal_offered_load(g, r)
    assert sol.status == "infeasible"
    assert sol.q_star is None
    assert sol.certificate
    assert "cannot be met" in sol.message
    d = sol.to_dict()
    assert d["objective"] is None and d["certificate"]


def test_necessary_condition_flags_impossible_link():
    g = make_graph(2, [])
    report = check_feasibility(g, [0.9, 0.1])
    assert not report.ok
    assert report.violations[0][0] == 1
    assert "link 1" in report.describe()
    assert optimal_offered_load(g, [0.9, 0.1]).status == "infeasible"


def test_size_cap_status(ring):
    sol = optimal_offered_load(ring, np.zeros(4), max_links=3)
    assert sol.status == "size_cap_exceeded"
    assert not sol.optimal


@pytest.mark.parametrize("r", [[0.1, 0.1, 0.1], [0.1, -0.1, 0.0, 0.0], [0.1, 1.0, 0.0, 0.0], [np.nan] * 4])
def test_requirement_validation(ring, r):
    with pytest.raises(ValueError):
        validate_requirements(r, ring.n)


def test_emit_q(ring):
    sol = optimal_offered_load(ring, RING_REQUIREMENTS)
    assert "q_star" not in sol.to_dict()
    q = sol.to_dict(emit_q=True)["q_star"]
    assert len(q) == 16 and math.fsum(q) == pytest.approx(1.0)


def test_more_intensity_more_aggregate_when_unconstrained():
    values = [optimal_offered_load(make_graph(3, [], rho=rho), np.zeros(3)).objective for rho in (1.0, 2.0, 5.0)]
    assert values == sorted(values)


def _small_graphs():
    for G in nx.graph_atlas_g()[1:19]:   # every graph on 1 to 4 nodes
        yield from_networkx(G)


@pytest.mark.parametrize("g", list(_small_graphs()))
def test_agrees_with_highs_on_derived_requirements(g):
    th0 = saturated_throughputs(g)
    r = derive_requirements(th0)
    status, expected = _highs_objective(g, r)
    sol = optimal_offered_load(g, r)
    assert status == 0 and sol.optimal
    assert sol.objective == pytest.approx(expected, abs=1e-8)
    assert sol.nonzero_count <= g.n + 1


@pytest.mark.parametrize("rho", [1.0, DEFAULT_RHO, 20.0])
@pytest.mark.parametrize("index", range(1, 8))   # every graph on 1 to 3 nodes
def test_feasibility_verdicts_match_highs(index, rho):
    g = from_networkx(nx.graph_atlas(index), rho=rho)
    m = subnetwork_throughput_matrix(g)
    rng = np.random.default_rng(1000 * index + int(rho))
    verdicts = set()
    for _ in range(50):
        r = rng.uniform(0.0, rho / (1.0 + rho), size=g.n)
        status, expected = _highs_objective(g, r)
        sol = optimal_offered_load(g, r)
        assert sol.optimal == (status == 0), r
        verdicts.add(sol.status)
        if sol.optimal:
            assert sol.objective == pytest.approx(expected, abs=1e-8)
            res = constraint_residuals(sol, build_lp(m, r))
            assert min(res[:-1]) >= -1e-8
            assert abs(res[-1]) <= 1e-12
            assert sol.nonzero_count <= g.n + 1
        else:
            assert status == 2
            assert sol.status == "infeasible" and sol.certificate
    if g.edges:
        assert "infeasible" in verdicts


def test_single_subnetwork_is_a_feasible_point(ring):
    m = subnetwork_throughput_matrix(ring)
    q = indicator(4, 0b1111)
    assert lp_objective_of(m, q) == pytest.approx(1.70640, abs=1e-4)
