"""Joint placement, RB allocation and route-flow planning.

The greedy planner places RABSs one at a time on the highest-demand site
reachable through already-deployed relays, then solves the relaxed LP over
RB shares and route flows, rounds RB counts down and re-optimises flows.

Inside the LP everything is expressed in Mbps to keep the tableau well
scaled; plans carry bps.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, PlannerError
from .lp import LpProblem, solve_lp
from .propagation import access_unit_rate
from .scenario import Scenario
from .topology import NetworkTopology, RouteSet, build_topology, enumerate_routes, filter_routes
from .traffic import DemandVector

logger = logging.getLogger(__name__)

LP_UNIT = 1e6  # bps per LP unit
INTEGRAL_TOL = 1e-6
FLOW_REL_TOL = 1e-6
# Objective cost per RB share (Mbps per RB) that picks, among max-flow LP
# optima, the one using the fewest RBs. One RB always carries far more than
# this, so the optimal flow value is unchanged.
RB_TIEBREAK = 1e-6


@dataclass
class ProblemInstance:
    topology: NetworkTopology
    routes: RouteSet
    demands: DemandVector
    access_rates_bps: np.ndarray
    rabs_budget: int
    rb_budget: int
    max_hops: int

    def __post_init__(self):
        n = self.topology.n_sites
        self.access_rates_bps = np.asarray(self.access_rates_bps, dtype=float).reshape(-1)
        if self.rabs_budget < 0 or self.rb_budget < 0 or self.max_hops < 1:
            raise InvalidConfigError("need N >= 0, K >= 0 and H >= 1")
        if set(self.demands.demands_bps) != set(range(n)) or self.access_rates_bps.shape != (n,):
            raise InvalidConfigError("demands and access rates must cover exactly the candidate sites")
        if self.routes.max_hops != self.max_hops:
            raise InvalidConfigError("route set was enumerated with a different hop limit")
        if not np.array_equal(self.routes.ids, np.arange(len(self.routes))):
            raise InvalidConfigError("instance routes must be the unfiltered enumeration")
        self.demand_array = self.demands.as_array(n)

    @property
    def n_sites(self) -> int:
        return self.topology.n_sites


def make_instance(scenario: Scenario, demands: DemandVector, rabs_budget: int, rb_budget: int,
                  max_hops: int, topology: NetworkTopology | None = None,
                  routes: RouteSet | None = None) -> ProblemInstance:
    """Assemble an instance; pass ``topology``/``routes`` to reuse them across instances."""
    topology = topology if topology is not None else build_topology(scenario)
    routes = routes if routes is not None else enumerate_routes(topology, max_hops)
    rate = access_unit_rate(scenario.access_cell_radius_m, scenario.radio)
    return ProblemInstance(topology, routes, demands, np.full(scenario.n_sites, rate),
                           int(rabs_budget), int(rb_budget), int(max_hops))


@dataclass
class Plan:
    deployment: tuple[int, ...] = ()
    backhaul_rbs: dict[tuple[int, int], int] = field(default_factory=dict)
    access_rbs: dict[int, int] = field(default_factory=dict)
    flows_bps: dict[int, float] = field(default_factory=dict)
    served_bps: float = 0.0

    def __post_init__(self):
        self.deployment = tuple(sorted(int(i) for i in self.deployment))

    @property
    def sum_backhaul_rbs(self) -> int:
        return int(sum(self.backhaul_rbs.values()))

    @property
    def sum_access_rbs(self) -> int:
        return int(sum(self.access_rbs.values()))

    def to_dict(self) -> dict:
        return {
            "deployment": list(self.deployment),
            "backhaul_rbs": [{"i": i, "j": j, "rbs": r} for (i, j), r in sorted(self.backhaul_rbs.items())],
            "access_rbs": [{"i": i, "rbs": r} for i, r in sorted(self.access_rbs.items())],
            "flows": [{"route_index": k, "bps": f} for k, f in sorted(self.flows_bps.items())],
            "served_bps": self.served_bps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "Plan":
        try:
            return cls(
                deployment=tuple(int(i) for i in data.get("deployment", [])),
                backhaul_rbs={(int(e["i"]), int(e["j"])): e["rbs"] for e in data.get("backhaul_rbs", [])},
                access_rbs={int(e["i"]): e["rbs"] for e in data.get("access_rbs", [])},
                flows_bps={int(e["route_index"]): float(e["bps"]) for e in data.get("flows", [])},
                served_bps=float(data.get("served_bps", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed plan: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Plan":
        return cls.from_dict(json.loads(text))


class Violation(NamedTuple):
    tag: str
    detail: str


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) or (isinstance(v, float) and v.is_integer())


def validate_plan(inst: ProblemInstance, plan: Plan) -> list[Violation]:
    """Check a plan against every model constraint; an empty list means feasible.

    Tags: ``edge_capacity``, ``edge_endpoint``, ``access_capacity``,
    ``access_inactive``, ``demand``, ``rabs_budget``, ``rb_budget``,
    ``integrality``, ``negative_flow``, ``relay``.
    """
    topo = inst.topology
    n = inst.n_sites
    out: list[Violation] = []

    deployed = np.zeros(topo.node_count, dtype=bool)
    for i in plan.deployment:
        if not 0 <= i < n:
            raise InvalidInputError(f"deployment refers to unknown site {i}")
        deployed[i] = True
    deployed[topo.mbs] = True
    for key in plan.backhaul_rbs:
        if topo.edge_key(*key) not in topo.edge_index:
            raise InvalidInputError(f"backhaul allocation on unknown edge {key}")
    for i in plan.access_rbs:
        if not 0 <= i < n:
            raise InvalidInputError(f"access allocation on unknown site {i}")
    for k in plan.flows_bps:
        if not 0 <= k < len(inst.routes):
            raise InvalidInputError(f"flow on unknown route {k}")

    for key, r in plan.backhaul_rbs.items():
        if not _is_int(r) or r < 0:
            out.append(Violation("integrality", f"edge {key} has {r!r} RBs"))
    for i, r in plan.access_rbs.items():
        if not _is_int(r) or r < 0:
            out.append(Violation("integrality", f"site {i} has {r!r} access RBs"))

    y = np.zeros(len(topo.edges))
    for key, r in plan.backhaul_rbs.items():
        y[topo.edge_index[topo.edge_key(*key)]] += r
    z = np.zeros(n)
    for i, r in plan.access_rbs.items():
        z[i] += r

    route_ids = np.array(sorted(plan.flows_bps), dtype=np.int64)
    f = np.array([plan.flows_bps[k] for k in route_ids], dtype=float)
    for k, v in zip(route_ids, f):
        if v < -1e-9:
            out.append(Violation("negative_flow", f"route {k} carries {v} bps"))
    f = np.maximum(f, 0.0)

    edge_load = np.zeros(len(topo.edges))
    site_load = np.zeros(n)
    if route_ids.size:
        paths = inst.routes.paths[route_ids]
        eids = inst.routes.edge_ids[route_ids]
        hop_mask = eids >= 0
        np.add.at(edge_load, eids[hop_mask], np.broadcast_to(f[:, None], eids.shape)[hop_mask])
        np.add.at(site_load, paths[:, 0], f)
        relays = inst.routes.relay_nodes()[route_ids]
        for k, v, rel in zip(route_ids, f, relays):
            bad = [int(x) for x in rel if x >= 0 and not deployed[x]]
            if v > 0 and bad:
                out.append(Violation("relay", f"route {k} relays through undeployed {bad}"))

    for e, edge in enumerate(topo.edges):
        rate = topo.edge_rates[e]
        cap = y[e] * rate
        tol = FLOW_REL_TOL * max(cap, rate)
        if edge_load[e] > cap + tol:
            out.append(Violation("edge_capacity",
                                 f"edge ({edge.i}, {edge.j}) load {edge_load[e]:.6g} > {cap:.6g}"))
        if edge_load[e] > tol and not (deployed[edge.i] and deployed[edge.j]):
            out.append(Violation("edge_endpoint",
                                 f"edge ({edge.i}, {edge.j}) carries flow with an undeployed endpoint"))

    for i in range(n):
        rate = inst.access_rates_bps[i]
        cap = z[i] * rate
        tol = FLOW_REL_TOL * max(cap, rate)
        if site_load[i] > cap + tol:
            out.append(Violation("access_capacity", f"site {i} load {site_load[i]:.6g} > {cap:.6g}"))
        if site_load[i] > tol and not deployed[i]:
            out.append(Violation("access_inactive", f"site {i} sources flow without a RABS"))
        d = inst.demand_array[i]
        if cap > d + FLOW_REL_TOL * max(d, 1.0):
            out.append(Violation("demand", f"site {i} access capacity {cap:.6g} exceeds demand {d:.6g}"))

    if len(set(plan.deployment)) > inst.rabs_budget:
        out.append(Violation("rabs_budget", f"{len(set(plan.deployment))} RABSs > N={inst.rabs_budget}"))
    total = y.sum() + z.sum()
    if total > inst.rb_budget + 1e-9:
        out.append(Violation("rb_budget", f"{total:g} RBs > K={inst.rb_budget}"))
    return out


# ---------------------------------------------------------------------------
# Greedy placement
# ---------------------------------------------------------------------------

def greedy_deploy(inst: ProblemInstance) -> tuple[tuple[int, ...], RouteSet]:
    """Place up to N RABSs by repeated argmax-demand over reachable sites.

    Returns the sites in placement order and the accumulated active routes:
    for each placed site, its routes that relay only through sites placed
    before it. Demand ties go to the lowest site id.
    """
    routes = inst.routes
    topo = inst.topology
    relays = routes.relay_nodes()
    usable = np.zeros(topo.node_count + 1, dtype=bool)
    usable[-1] = True  # relay padding
    usable[topo.mbs] = True
    active = np.zeros(len(routes), dtype=bool)
    order: list[int] = []
    for _ in range(inst.rabs_budget):
        ok = usable[relays].all(axis=1)
        reachable = np.unique(routes.sources[ok])
        reachable = reachable[~usable[reachable]]
        if reachable.size == 0:
            break
        best = int(reachable[np.argmax(inst.demand_array[reachable])])
        active |= ok & (routes.sources == best)
        usable[best] = True
        order.append(best)
    return tuple(order), routes.subset(active)


# ---------------------------------------------------------------------------
# LP assembly
# ---------------------------------------------------------------------------

@dataclass
class _Layout:
    deployment: tuple[int, ...]
    edges: np.ndarray          # topology edge ids with ŷ columns
    sites: np.ndarray          # site ids with ẑ columns
    routes: RouteSet           # routes with f columns
    edge_rates: np.ndarray     # LP units per RB
    site_rates: np.ndarray
    edge_incidence: np.ndarray  # (n_edges, n_routes)
    site_incidence: np.ndarray  # (n_sites, n_routes)

    @property
    def n_y(self):
        return len(self.edges)

    @property
    def n_z(self):
        return len(self.sites)


def _layout(inst: ProblemInstance, deployment: Iterable[int], routes: RouteSet) -> _Layout:
    topo = inst.topology
    dep = tuple(sorted(set(int(i) for i in deployment)))
    active = np.zeros(topo.node_count, dtype=bool)
    active[list(dep)] = True
    active[topo.mbs] = True
    # Only routes sourced at deployed sites and relaying through deployed sites can carry flow.
    routes = filter_routes(routes, dep)
    routes = routes.subset(active[routes.sources]) if len(routes) else routes

    ends = topo.edge_nodes
    edges = np.flatnonzero(active[ends[:, 0]] & active[ends[:, 1]]) if len(ends) else np.zeros(0, np.int64)
    sites = np.array(dep, dtype=np.int64)

    edge_row = np.full(len(topo.edges), -1, dtype=np.int64)
    edge_row[edges] = np.arange(len(edges))
    site_row = np.full(topo.node_count, -1, dtype=np.int64)
    site_row[sites] = np.arange(len(sites))

    n_r = len(routes)
    e_inc = np.zeros((len(edges), n_r))
    if n_r:
        eids = routes.edge_ids
        rr, hh = np.nonzero(eids >= 0)
        e_inc[edge_row[eids[rr, hh]], rr] = 1.0
    s_inc = np.zeros((len(sites), n_r))
    if n_r:
        s_inc[site_row[routes.sources], np.arange(n_r)] = 1.0
    return _Layout(dep, edges, sites, routes,
                   topo.edge_rates[edges] / LP_UNIT,
                   inst.access_rates_bps[sites] / LP_UNIT if len(sites) else np.zeros(0),
                   e_inc, s_inc)


def _relaxed_problem(inst: ProblemInstance, lay: _Layout,
                     access_pool: float | None = None,
                     backhaul_pool: float | None = None,
                     rb_cost: float = 0.0) -> LpProblem:
    ny, nz, nr = lay.n_y, lay.n_z, len(lay.routes)
    nv = ny + nz + nr
    fy, fz, ff = slice(0, ny), slice(ny, ny + nz), slice(ny + nz, nv)
    rows, rhs = [], []

    block = np.zeros((ny, nv))
    block[:, ff] = lay.edge_incidence
    block[:, fy] = -np.diag(lay.edge_rates)
    rows.append(block)
    rhs.append(np.zeros(ny))

    block = np.zeros((nz, nv))
    block[:, ff] = lay.site_incidence
    block[:, fz] = -np.diag(lay.site_rates)
    rows.append(block)
    rhs.append(np.zeros(nz))

    block = np.zeros((nz, nv))
    block[:, fz] = np.diag(lay.site_rates)
    rows.append(block)
    rhs.append(inst.demand_array[lay.sites] / LP_UNIT)

    budget = np.zeros((1, nv))
    budget[0, : ny + nz] = 1.0
    rows.append(budget)
    rhs.append([float(inst.rb_budget)])
    if access_pool is not None:
        pool = np.zeros((1, nv))
        pool[0, fz] = 1.0
        rows.append(pool)
        rhs.append([float(access_pool)])
    if backhaul_pool is not None:
        pool = np.zeros((1, nv))
        pool[0, fy] = 1.0
        rows.append(pool)
        rhs.append([float(backhaul_pool)])

    c = np.zeros(nv)
    c[ff] = 1.0
    c[: ny + nz] = -rb_cost
    edges = inst.topology.edges
    names = ([f"yhat[{edges[e].i},{edges[e].j}]" for e in lay.edges]
             + [f"zhat[{i}]" for i in lay.sites]
             + [f"f[{k}]" for k in lay.routes.ids])
    return LpProblem(c, np.vstack(rows), np.concatenate([np.asarray(r, float) for r in rhs]), names)


def build_relaxed_lp(inst: ProblemInstance, deployment: Iterable[int],
                     active_routes: RouteSet | None = None) -> LpProblem:
    """Relaxed LP for a fixed deployment (flows in Mbps, RB shares continuous).

    Shares touching undeployed sites are fixed to zero by omitting their
    columns; for deployed sites the per-variable bound of K is implied by
    the shared budget row and is not repeated.
    """
    routes = active_routes if active_routes is not None else inst.routes
    return _relaxed_problem(inst, _layout(inst, deployment, routes))


def _flow_problem(lay: _Layout, y: np.ndarray, z: np.ndarray) -> LpProblem:
    A = np.vstack([lay.edge_incidence, lay.site_incidence])
    b = np.concatenate([y * lay.edge_rates, z * lay.site_rates])
    return LpProblem(np.ones(len(lay.routes)), A, b)


def _solve_flows(lay: _Layout, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    if len(lay.routes) == 0:
        return np.zeros(0)
    sol = solve_lp(_flow_problem(lay, y, z))
    if not sol.is_optimal:
        raise PlannerError(f"flow LP returned {sol.status.value}")
    return sol.values


def _redistribute(inst, lay, y, z, flows, access_pool=None, backhaul_pool=None):
    """Spend leftover RBs one at a time on whichever resource adds the most flow."""
    current = flows.sum()
    while inst.rb_budget - y.sum() - z.sum() >= 1:
        best_gain, best_pick, best_flows = 0.0, None, None
        for kind, arr, rates in (("y", y, lay.edge_rates), ("z", z, lay.site_rates)):
            if kind == "y" and backhaul_pool is not None and y.sum() + 1 > backhaul_pool:
                continue
            if kind == "z" and access_pool is not None and z.sum() + 1 > access_pool:
                continue
            for v in range(len(arr)):
                if kind == "z":
                    demand = inst.demand_array[lay.sites[v]] / LP_UNIT
                    if (arr[v] + 1) * rates[v] > demand * (1 + FLOW_REL_TOL):
                        continue
                arr[v] += 1
                trial = _solve_flows(lay, y, z)
                arr[v] -= 1
                gain = trial.sum() - current
                if gain > best_gain + 1e-9 * max(1.0, current):
                    best_gain, best_pick, best_flows = gain, (arr, v), trial
        if best_pick is None:
            break
        arr, v = best_pick
        arr[v] += 1
        flows, current = best_flows, best_flows.sum()
    return y, z, flows


def _to_plan(inst: ProblemInstance, lay: _Layout, y, z, flows) -> Plan:
    edges = inst.topology.edges
    flows_bps = {}
    for k, v in zip(lay.routes.ids, flows):
        if v > 1e-12:
            flows_bps[int(k)] = float(v * LP_UNIT)
    return Plan(
        deployment=lay.deployment,
        backhaul_rbs={(edges[e].i, edges[e].j): int(r) for e, r in zip(lay.edges, y) if r > 0},
        access_rbs={int(i): int(r) for i, r in zip(lay.sites, z) if r > 0},
        flows_bps=flows_bps,
        served_bps=float(sum(flows_bps.values())),
    )


def solve_with_deployment(inst: ProblemInstance, deployment: Sequence[int],
                          routes: RouteSet | None = None, *,
                          access_pool: float | None = None,
                          backhaul_pool: float | None = None,
                          redistribute_rounding_slack: bool = False) -> Plan:
    """Relaxed LP, round-down and flow re-solve for a fixed deployment.

    ``routes`` defaults to every enumerated route usable under the
    deployment. ``access_pool``/``backhaul_pool`` cap the total RBs of each
    kind (used by the pre-allocated baseline).
    """
    lay = _layout(inst, deployment, routes if routes is not None else inst.routes)
    if inst.rb_budget == 0 or len(lay.routes) == 0:
        return Plan(deployment=lay.deployment)
    sol = solve_lp(_relaxed_problem(inst, lay, access_pool, backhaul_pool, RB_TIEBREAK))
    if not sol.is_optimal:
        raise PlannerError(f"relaxed LP returned {sol.status.value}; the zero plan is always feasible")
    shares = sol.values[: lay.n_y + lay.n_z]
    y_hat, z_hat = shares[: lay.n_y], shares[lay.n_y:]
    # Shares within INTEGRAL_TOL of an integer are kept, the rest rounded down;
    # flows are always re-solved against the integer capacities.
    y = np.floor(y_hat + INTEGRAL_TOL)
    z = np.floor(z_hat + INTEGRAL_TOL)
    flows = _solve_flows(lay, y, z)
    if redistribute_rounding_slack:
        y, z, flows = _redistribute(inst, lay, y, z, flows, access_pool, backhaul_pool)
    return _to_plan(inst, lay, y, z, flows)


def greedy_solve(inst: ProblemInstance, redistribute_rounding_slack: bool = False) -> Plan:
    if inst.rabs_budget == 0 or inst.rb_budget == 0:
        return Plan()
    order, active = greedy_deploy(inst)
    if not order:
        return Plan()
    plan = solve_with_deployment(inst, order, active,
                                 redistribute_rounding_slack=redistribute_rounding_slack)
    logger.debug("greedy: deployed %s, served %.3f Mbps", plan.deployment, plan.served_bps / 1e6)
    return plan
