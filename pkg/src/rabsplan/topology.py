"""Backhaul graph and hop-bounded route enumeration towards the macro BS.

Node ids ``0..|V|-1`` are candidate sites; the macro BS is node ``|V|``.
Edges are undirected and stored with ``i < j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import InvalidConfigError, InvalidInputError
from .propagation import backhaul_unit_rate, pathloss_db
from .scenario import Scenario, euclidean_distance

# Guard against the O(V^H) growth of the route set.
DEFAULT_ROUTE_CEILING = 2_000_000


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    distance_m: float
    unit_backhaul_rate_bps: float


class NetworkTopology:
    def __init__(self, n_sites: int, edges: Iterable[Edge]):
        self.n_sites = int(n_sites)
        self.mbs = self.n_sites
        self.node_count = self.n_sites + 1
        self.edges: tuple[Edge, ...] = tuple(sorted(edges, key=lambda e: (e.i, e.j)))
        self.edge_index: dict[tuple[int, int], int] = {}
        self.edge_id = np.full((self.node_count, self.node_count), -1, dtype=np.int64)
        for k, e in enumerate(self.edges):
            if not (0 <= e.i < e.j < self.node_count):
                raise InvalidInputError(f"bad edge ({e.i}, {e.j})")
            if (e.i, e.j) in self.edge_index:
                raise InvalidInputError(f"duplicate edge ({e.i}, {e.j})")
            self.edge_index[(e.i, e.j)] = k
            self.edge_id[e.i, e.j] = self.edge_id[e.j, e.i] = k
        self.edge_rates = np.array([e.unit_backhaul_rate_bps for e in self.edges], dtype=float)
        self.edge_nodes = np.array([(e.i, e.j) for e in self.edges], dtype=np.int64).reshape(-1, 2)
        self.adjacency: list[list[int]] = [[] for _ in range(self.node_count)]
        for e in self.edges:
            self.adjacency[e.i].append(e.j)
            self.adjacency[e.j].append(e.i)
        for nbrs in self.adjacency:
            nbrs.sort()

    def edge_key(self, a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def has_edge(self, a: int, b: int) -> bool:
        return self.edge_key(a, b) in self.edge_index

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.cumsum([0] + [len(n) for n in self.adjacency]).astype(np.int64)
        indices = np.array([v for n in self.adjacency for v in n], dtype=np.int64)
        return indptr, indices

    def node_label(self, node: int) -> str:
        return "MBS" if node == self.mbs else str(node)

    def __repr__(self):
        return f"NetworkTopology(n_sites={self.n_sites}, edges={len(self.edges)})"


def build_topology(scenario: Scenario) -> NetworkTopology:
    """Keep every node pair whose mean path loss is within the radio threshold."""
    radio = scenario.radio
    nodes = [s.xy for s in scenario.sites] + [scenario.macro_bs]
    pairs = [(i, j) for i in range(len(nodes)) for j in range(i + 1, len(nodes))]
    if not pairs:
        return NetworkTopology(scenario.n_sites, [])
    dist = np.array([euclidean_distance(nodes[i], nodes[j]) for i, j in pairs])
    loss_db = np.asarray(pathloss_db(dist, radio))
    rates = np.asarray(backhaul_unit_rate(dist, radio))
    keep = loss_db <= radio.pathloss_threshold_db
    edges = [Edge(i, j, float(d), float(r))
             for (i, j), d, r, k in zip(pairs, dist, rates, keep) if k]
    return NetworkTopology(scenario.n_sites, edges)


class RouteSet:
    """Routes as a padded node array, plus edge/source membership indices.

    ``paths[k]`` lists the nodes of route ``k`` from its source to the macro BS,
    padded with -1. ``ids[k]`` is the route's index in the originally
    enumerated set, which stays stable through filtering.
    """

    def __init__(self, topology: NetworkTopology, paths: np.ndarray, max_hops: int,
                 ids: np.ndarray | None = None):
        self.topology = topology
        self.max_hops = int(max_hops)
        self.paths = np.asarray(paths, dtype=np.int64).reshape(-1, self.max_hops + 1)
        self.ids = (np.arange(len(self.paths), dtype=np.int64) if ids is None
                    else np.asarray(ids, dtype=np.int64))
        self.hops = (self.paths >= 0).sum(axis=1) - 1
        self.sources = self.paths[:, 0] if len(self.paths) else np.zeros(0, np.int64)

    def __len__(self):
        return len(self.paths)

    def route(self, k: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.paths[k, : self.hops[k] + 1])

    @property
    def routes(self) -> list[tuple[int, ...]]:
        return [self.route(k) for k in range(len(self))]

    @cached_property
    def edge_ids(self) -> np.ndarray:
        """``(n_routes, max_hops)`` topology edge ids per hop, -1 padded."""
        a = self.paths[:, :-1]
        b = self.paths[:, 1:]
        valid = (a >= 0) & (b >= 0)
        out = np.full(a.shape, -1, dtype=np.int64)
        out[valid] = self.topology.edge_id[a[valid], b[valid]]
        return out

    @cached_property
    def by_edge(self) -> dict[tuple[int, int], np.ndarray]:
        edges = self.topology.edges
        return {(edges[e].i, edges[e].j): idx for e, idx in _group(self.edge_ids).items()}

    @cached_property
    def by_source(self) -> dict[int, np.ndarray]:
        return _group(self.sources[:, None])

    @cached_property
    def _relays(self) -> np.ndarray:
        inner = self.paths[:, 1:-1].copy()
        inner[inner == self.topology.mbs] = -1
        inner.setflags(write=False)
        return inner

    def relay_nodes(self) -> np.ndarray:
        """Intermediate nodes of each route (source and macro BS excluded), -1 padded."""
        return self._relays

    def subset(self, mask: np.ndarray) -> "RouteSet":
        mask = np.asarray(mask, dtype=bool)
        return RouteSet(self.topology, self.paths[mask], self.max_hops, self.ids[mask])

    def dump(self) -> str:
        """One route per line: ``source_id: n0>n1>...>MBS``."""
        label = self.topology.node_label
        return "".join(f"{r[0]}: {'>'.join(label(v) for v in r)}\n" for r in self.routes)


def _group(keys: np.ndarray) -> dict:
    """Map each non-negative key to the sorted row indices in which it appears."""
    rows, cols = np.nonzero(keys >= 0)
    if rows.size == 0:
        return {}
    vals = keys[rows, cols]
    order = np.lexsort((rows, vals))
    vals, rows = vals[order], rows[order]
    cuts = np.flatnonzero(np.diff(vals)) + 1
    out = {}
    for chunk_v, chunk_r in zip(np.split(vals, cuts), np.split(rows, cuts)):
        out[int(chunk_v[0])] = np.unique(chunk_r)
    return out


def enumerate_routes(topology: NetworkTopology, max_hops: int,
                     route_ceiling: int = DEFAULT_ROUTE_CEILING) -> RouteSet:
    """Every simple path with at most ``max_hops`` edges from a site to the macro BS."""
    if int(max_hops) < 1:
        raise InvalidConfigError("max_hops must be >= 1")
    indptr, indices = topology.csr()
    paths = _kernels.enumerate_paths(indptr, indices, topology.mbs, int(max_hops), int(route_ceiling))
    if paths is None:
        raise InvalidConfigError(
            f"route enumeration exceeds the ceiling of {route_ceiling} routes "
            f"(|V|={topology.n_sites}, H={max_hops}); lower H or raise the ceiling")
    return RouteSet(topology, paths, max_hops)


def filter_routes(routes: RouteSet, deployed: Iterable[int]) -> RouteSet:
    """Keep routes whose relay nodes are all deployed; the source itself is exempt."""
    mask = np.zeros(routes.topology.node_count + 1, dtype=bool)
    for v in deployed:
        mask[int(v)] = True
    mask[-1] = True  # padding index -1
    return routes.subset(mask[routes.relay_nodes()].all(axis=1))
