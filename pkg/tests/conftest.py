import numpy as np
import pytest

from rabsplan.planner import ProblemInstance, make_instance
from rabsplan.scenario import Scenario, Site, build_manhattan_grid
from rabsplan.topology import Edge, NetworkTopology, enumerate_routes
from rabsplan.traffic import DemandVector, TrafficModel, sample_demands

MBPS = 1e6
BH_RATE = 9.6e6


def custom_instance(n_sites, edges, demands_bps, N, K, H, access_rate=35e6, bh_rate=BH_RATE):
    """Instance over a hand-made graph; ``edges`` use ``"M"`` for the macro BS."""
    mbs = n_sites
    es = []
    for a, b in edges:
        a = mbs if a == "M" else a
        b = mbs if b == "M" else b
        es.append(Edge(min(a, b), max(a, b), 50.0, bh_rate))
    topo = NetworkTopology(n_sites, es)
    routes = enumerate_routes(topo, H)
    rates = np.full(n_sites, float(access_rate))
    return ProblemInstance(topo, routes, DemandVector.from_array(demands_bps), rates, N, K, H)


def line_instance(N=1, K=4, H=2, d_a=10 * MBPS, d_b=20 * MBPS, direct_b=True):
    """MBS - A(0) - B(1), optionally with a direct MBS - B edge."""
    edges = [("M", 0), (0, 1)] + ([("M", 1)] if direct_b else [])
    return custom_instance(2, edges, [d_a, d_b], N, K, H)


def grid_instance(seed=0, N=6, K=300, H=3, sigma=1.0, side=250.0, spacing=50.0):
    scenario = build_manhattan_grid(side, spacing)
    demands = sample_demands(TrafficModel(sigma=sigma, seed=seed), scenario)
    return make_instance(scenario, demands, N, K, H)


def tiny_scenario(coords):
    return Scenario(tuple(Site(i, float(x), float(y)) for i, (x, y) in enumerate(coords)))


@pytest.fixture(scope="session")
def full_grid():
    return build_manhattan_grid()
