import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabsplan.errors import InvalidConfigError
from rabsplan.scenario import RadioParams, build_manhattan_grid
from rabsplan.topology import (Edge, NetworkTopology, build_topology, enumerate_routes,
                               filter_routes)

from conftest import tiny_scenario


def graph(n, pairs):
    return NetworkTopology(n, [Edge(min(a, b), max(a, b), 50.0, 9.6e6) for a, b in pairs])


def complete(n):
    return graph(n, itertools.combinations(range(n + 1), 2))


def brute_force_routes(topo, H):
    """Every ordered tuple of distinct sites that forms a path ending at the MBS."""
    out = set()
    for length in range(1, H + 1):
        for nodes in itertools.permutations(range(topo.n_sites), length):
            path = nodes + (topo.mbs,)
            if all(topo.has_edge(a, b) for a, b in zip(path, path[1:])):
                out.add(path)
    return out


def test_two_sites_50m_apart_are_linked():
    topo = build_topology(tiny_scenario([(50, 0), (100, 0)]))
    assert topo.has_edge(0, 1)
    assert topo.has_edge(0, topo.mbs)


def test_zero_threshold_prunes_everything():
    s = build_manhattan_grid(150, 50, radio=RadioParams(pathloss_threshold_db=0.0))
    assert build_topology(s).edges == ()


def test_full_grid_is_complete():
    topo = build_topology(build_manhattan_grid())
    assert len(topo.edges) == 26 * 25 // 2
    np.testing.assert_array_equal(topo.edge_rates, 9.6e6)


def test_line_graph_routes():
    topo = graph(2, [(0, 2), (0, 1)])
    r2 = enumerate_routes(topo, 2)
    assert set(r2.routes) == {(0, 2), (1, 0, 2)}
    assert [r2.route(k) for k in r2.by_source[1]] == [(1, 0, 2)]
    r1 = enumerate_routes(topo, 1)
    assert r1.routes == [(0, 2)]
    assert 1 not in r1.by_source


def test_complete_graph_three_candidates():
    routes = enumerate_routes(complete(3), 3)
    assert len(routes) == 15
    assert sorted(np.bincount(routes.hops)[1:]) == [3, 6, 6]


@pytest.mark.parametrize("H, count", [(1, 25), (2, 625), (3, 14_425)])
def test_full_grid_route_counts(H, count):
    assert len(enumerate_routes(build_topology(build_manhattan_grid()), H)) == count


def test_routes_are_simple_and_end_at_mbs():
    topo = complete(4)
    for r in enumerate_routes(topo, 4).routes:
        assert r[-1] == topo.mbs
        assert len(set(r)) == len(r)


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 6))
    pairs = list(itertools.combinations(range(n + 1), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return graph(n, [p for p, k in zip(pairs, keep) if k])


@given(random_graphs(), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_matches_brute_force(topo, H):
    assert set(enumerate_routes(topo, H).routes) == brute_force_routes(topo, H)


@given(random_graphs(), st.integers(1, 3))
@settings(max_examples=50, deadline=None)
def test_lower_hop_limit_gives_subset(topo, H):
    small = set(enumerate_routes(topo, H).routes)
    assert small <= set(enumerate_routes(topo, H + 1).routes)


@given(random_graphs(), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_membership_indices_rebuild_the_routes(topo, H):
    routes = enumerate_routes(topo, H)
    rebuilt = {k: set() for k in range(len(routes))}
    for (i, j), idx in routes.by_edge.items():
        for k in idx:
            rebuilt[int(k)].add((i, j))
    for k, r in enumerate(routes.routes):
        assert rebuilt[k] == {topo.edge_key(a, b) for a, b in zip(r, r[1:])}
    for src, idx in routes.by_source.items():
        assert all(routes.route(int(k))[0] == src for k in idx)


def test_filter_routes():
    topo = graph(2, [(0, 2), (0, 1)])
    routes = enumerate_routes(topo, 2)
    assert filter_routes(routes, []).routes == [(0, 2)]
    assert filter_routes(routes, [0]).routes == routes.routes
    assert filter_routes(routes, [0, 1]).routes == routes.routes
    kept = filter_routes(routes, [1])
    assert kept.routes == [(0, 2)]
    assert kept.ids.tolist() == [routes.routes.index((0, 2))]


def test_hop_limit_validation():
    with pytest.raises(InvalidConfigError):
        enumerate_routes(complete(2), 0)


def test_route_ceiling():
    with pytest.raises(InvalidConfigError, match="ceiling"):
        enumerate_routes(complete(6), 4, route_ceiling=100)


def test_dump_format():
    text = enumerate_routes(graph(2, [(0, 2), (0, 1)]), 2).dump()
    assert sorted(text.splitlines()) == ["0: 0>MBS", "1: 1>0>MBS"]
