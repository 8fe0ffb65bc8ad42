import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from rabsplan.errors import RefusedInstanceError
from rabsplan.oracle import OracleLimits, exact_solve, exact_solve_with_stats
from rabsplan.planner import Plan, greedy_solve, validate_plan
from rabsplan.topology import filter_routes

from conftest import MBPS, custom_instance, line_instance


def brute_force_value(inst):
    """Independent optimum: every deployment, every allocation with sum <= K, scipy flow LP."""
    topo = inst.topology
    best = 0.0
    for size in range(1, min(inst.rabs_budget, inst.n_sites) + 1):
        for dep in itertools.combinations(range(inst.n_sites), size):
            on = set(dep) | {topo.mbs}
            routes = [r for r in filter_routes(inst.routes, dep).routes if r[0] in on]
            if not routes:
                continue
            edges = sorted({topo.edge_key(a, b) for r in routes for a, b in zip(r, r[1:])})
            resources = [("z", i) for i in dep] + [("y", e) for e in edges]
            for alloc in itertools.product(range(inst.rb_budget + 1), repeat=len(resources)):
                if sum(alloc) > inst.rb_budget:
                    continue
                cap = dict(zip(resources, alloc))
                if any(cap[("z", i)] * inst.access_rates_bps[i] > inst.demand_array[i] * (1 + 1e-9)
                       for i in dep):
                    continue
                A = [[1.0 if r[0] == i else 0.0 for r in routes] for i in dep]
                b = [cap[("z", i)] * inst.access_rates_bps[i] for i in dep]
                for e in edges:
                    A.append([1.0 if e in {topo.edge_key(a, c) for a, c in zip(r, r[1:])} else 0.0
                              for r in routes])
                    b.append(cap[("y", e)] * topo.edge_rates[topo.edge_index[e]])
                res = linprog(-np.ones(len(routes)), A_ub=A, b_ub=b, method="highs")
                best = max(best, -res.fun)
    return best


def test_no_rabs_budget():
    assert exact_solve(line_instance(N=0)) == Plan()


def test_symmetric_single_site_splits_evenly():
    inst = custom_instance(1, [("M", 0)], [1e12], N=1, K=2, H=1, access_rate=9.6e6)
    plan = exact_solve(inst)
    assert plan.backhaul_rbs == {(0, 1): 1}
    assert plan.access_rbs == {0: 1}
    assert plan.served_bps == pytest.approx(9.6e6)


def test_line_instance_dominates_greedy():
    inst = line_instance(N=1, K=4, H=2)
    inst.access_rates_bps[:] = 5 * MBPS
    exact = exact_solve(inst)
    assert validate_plan(inst, exact) == []
    assert exact.served_bps == pytest.approx(10e6)
    assert exact.served_bps >= greedy_solve(inst).served_bps


def test_saturation_formula_on_symmetric_instance():
    # Each site needs z=2 (10 Mbps of its 12) and y=1 on a 10 Mbps edge.
    inst = custom_instance(2, [("M", 0), ("M", 1)], [12 * MBPS] * 2, N=2, K=6, H=1,
                           access_rate=5 * MBPS, bh_rate=10 * MBPS)
    expected = sum(np.floor(d / 5e6) * 5e6 for d in inst.demand_array)
    assert exact_solve(inst).served_bps == pytest.approx(expected)


def test_pruning_keeps_the_optimum():
    inst = custom_instance(3, [("M", 0), (0, 1), (1, 2), ("M", 2)], [30e6, 50e6, 20e6],
                           N=2, K=6, H=3, access_rate=8e6)
    plain, n_plain = exact_solve_with_stats(inst)
    pruned, n_pruned = exact_solve_with_stats(inst, lp_bound_pruning=True)
    assert pruned.served_bps == pytest.approx(plain.served_bps)
    assert n_pruned <= n_plain


@pytest.mark.parametrize("limits, inst", [
    (OracleLimits(max_sites=1), line_instance()),
    (OracleLimits(max_K=3), line_instance(K=4)),
    (OracleLimits(max_routes=2), line_instance()),
    (OracleLimits(max_enumerations=1), line_instance(K=8)),
])
def test_refuses_large_instances(limits, inst):
    with pytest.raises(RefusedInstanceError):
        exact_solve(inst, limits)


@st.composite
def tiny_instances(draw):
    n = draw(st.integers(1, 3))
    pairs = [("M", i) for i in range(n)] + list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    demands = draw(st.lists(st.floats(0, 60), min_size=n, max_size=n))
    return custom_instance(n, [p for p, k in zip(pairs, keep) if k],
                           [d * MBPS for d in demands],
                           N=draw(st.integers(1, n)), K=draw(st.integers(1, 4)),
                           H=draw(st.integers(1, 3)), access_rate=8 * MBPS)


@given(tiny_instances())
@settings(max_examples=40, deadline=None)
def test_matches_independent_brute_force(inst):
    plan = exact_solve(inst)
    assert validate_plan(inst, plan) == []
    assert plan.served_bps == pytest.approx(brute_force_value(inst), rel=1e-6, abs=1e-3)
    assert plan.served_bps >= greedy_solve(inst).served_bps * (1 - 1e-6)


@given(tiny_instances(), st.randoms(use_true_random=False))
@settings(max_examples=25, deadline=None)
def test_relabelling_sites_keeps_the_value(inst, rnd):
    n = inst.n_sites
    perm = list(range(n))
    rnd.shuffle(perm)
    relabel = {i: perm[i] for i in range(n)}
    relabel[n] = n
    edges = [(relabel[e.i], relabel[e.j]) for e in inst.topology.edges]
    edges = [("M" if a == n else a, "M" if b == n else b) for a, b in edges]
    demands = np.empty(n)
    demands[perm] = inst.demand_array
    other = custom_instance(n, edges, demands, inst.rabs_budget, inst.rb_budget, inst.max_hops,
                            access_rate=8 * MBPS)
    assert exact_solve(other).served_bps == pytest.approx(exact_solve(inst).served_bps,
                                                          rel=1e-9, abs=1e-6)
