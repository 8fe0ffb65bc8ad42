"""Exhaustive exact solver for tiny instances.

Enumerates deployments, then every integer RB allocation over the resources
those deployments can use, solving the flow LP for each. Two exact
reductions keep the search finite and small:

* only deployments of size ``min(N, |V|)`` are visited, since adding a RABS
  never removes a feasible plan;
* only allocations spending exactly K RBs are visited, with access RBs
  capped at ``floor(D_i / R_ac_i)``: spare RBs can always be parked on a
  backhaul edge without lowering the flow value.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidConfigError, RefusedInstanceError
from .lp import solve_lp
from .planner import (FLOW_REL_TOL, LP_UNIT, Plan, ProblemInstance, _layout,
                      _relaxed_problem, _solve_flows, _to_plan)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleLimits:
    max_sites: int = 9
    max_K: int = 8
    max_routes: int = 200
    max_enumerations: int = 10_000_000

    def __post_init__(self):
        if min(self.max_sites, self.max_K, self.max_routes, self.max_enumerations) <= 0:
            raise InvalidConfigError("oracle limits must be positive")


@dataclass
class _Candidate:
    deployment: tuple[int, ...]
    layout: object
    incidence: np.ndarray
    rates: np.ndarray
    caps: np.ndarray
    resources: list  # ("z", local index) or ("y", local index), in column order
    count: int


def _count_allocations(caps: np.ndarray, K: int) -> int:
    """Vectors over ``caps[:-1]`` with sum <= K (the last resource takes the rest)."""
    ways = np.zeros(K + 1, dtype=object)
    ways[0] = 1
    for cap in caps[:-1]:
        top = K if cap < 0 else min(int(cap), K)
        nxt = np.zeros(K + 1, dtype=object)
        for s in range(K + 1):
            if ways[s]:
                for a in range(0, min(top, K - s) + 1):
                    nxt[s + a] += ways[s]
        ways = nxt
    return int(sum(ways))


def _candidate(inst: ProblemInstance, deployment: tuple[int, ...]) -> _Candidate | None:
    lay = _layout(inst, deployment, inst.routes)
    if len(lay.routes) == 0:
        return None
    used_edges = np.flatnonzero(lay.edge_incidence.any(axis=1))
    live_sites = np.flatnonzero(lay.site_incidence.any(axis=1))
    z_caps = []
    for s in live_sites:
        site = lay.sites[s]
        rate = inst.access_rates_bps[site]
        z_caps.append(int(math.floor(inst.demand_array[site] / rate * (1 + FLOW_REL_TOL))))
    # Capped access resources first; the last column is an (uncapped) edge.
    resources = [("z", int(s)) for s in live_sites] + [("y", int(e)) for e in used_edges]
    incidence = np.vstack([lay.site_incidence[live_sites], lay.edge_incidence[used_edges]])
    rates = np.concatenate([lay.site_rates[live_sites], lay.edge_rates[used_edges]])
    caps = np.array(z_caps + [-1] * len(used_edges), dtype=np.int64)
    return _Candidate(lay.deployment, lay, incidence, rates, caps, resources,
                      _count_allocations(caps, inst.rb_budget))


def exact_solve_with_stats(inst: ProblemInstance, limits: OracleLimits | None = None,
                           lp_bound_pruning: bool = False) -> tuple[Plan, int]:
    """Optimal plan and the number of RB allocations evaluated.

    With ``lp_bound_pruning`` a deployment is skipped when its relaxed LP
    value cannot beat the incumbent; the optimum is unchanged.
    """
    limits = limits or OracleLimits()
    n = inst.n_sites
    if n > limits.max_sites:
        raise RefusedInstanceError(f"{n} sites > max_sites={limits.max_sites}", n)
    if inst.rb_budget > limits.max_K:
        raise RefusedInstanceError(f"K={inst.rb_budget} > max_K={limits.max_K}", inst.rb_budget)
    if len(inst.routes) > limits.max_routes:
        raise RefusedInstanceError(f"{len(inst.routes)} routes > max_routes={limits.max_routes}",
                                   len(inst.routes))
    size = min(inst.rabs_budget, n)
    if size == 0 or inst.rb_budget == 0:
        return Plan(), 0

    candidates = []
    total = 0
    for dep in itertools.combinations(range(n), size):
        cand = _candidate(inst, dep)
        if cand is not None:
            candidates.append(cand)
            total += cand.count
    if total > limits.max_enumerations:
        raise RefusedInstanceError(
            f"{total} allocations to enumerate > max_enumerations={limits.max_enumerations}", total)

    best_value, best = -1.0, None
    visited = 0
    for cand in candidates:
        if lp_bound_pruning and best is not None:
            bound = solve_lp(_relaxed_problem(inst, cand.layout)).objective_value
            if bound <= best_value + 1e-9 * max(1.0, best_value):
                continue
        value, alloc, seen = _kernels.best_allocation(cand.incidence, cand.rates, cand.caps,
                                                      inst.rb_budget)
        visited += seen
        if value < 0:
            raise RuntimeError(f"flow LP failed for deployment {cand.deployment}")
        if value > best_value + 1e-9 * max(1.0, best_value):
            best_value, best = value, (cand, alloc.copy())

    if best is None:
        return Plan(deployment=tuple(range(size))), visited
    cand, alloc = best
    lay = cand.layout
    y = np.zeros(lay.n_y)
    z = np.zeros(lay.n_z)
    for (kind, idx), a in zip(cand.resources, alloc):
        (z if kind == "z" else y)[idx] = a
    flows = _solve_flows(lay, y, z)
    logger.debug("exact: %s served %.3f Mbps after %d allocations",
                 lay.deployment, flows.sum(), visited)
    return _to_plan(inst, lay, y, z, flows), visited


def exact_solve(inst: ProblemInstance, limits: OracleLimits | None = None) -> Plan:
    return exact_solve_with_stats(inst, limits)[0]


__all__ = ["OracleLimits", "exact_solve", "exact_solve_with_stats"]
