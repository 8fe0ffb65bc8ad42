"""Baselines, Monte Carlo sweeps and the instance/experiment file formats."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import InvalidConfigError, RefusedInstanceError
from .oracle import OracleLimits, exact_solve
from .planner import (Plan, ProblemInstance, greedy_deploy, greedy_solve, make_instance,
                      solve_with_deployment, validate_plan)
from .scenario import RadioParams, Scenario, build_manhattan_grid
from .topology import build_topology, enumerate_routes
from .traffic import DEFAULT_MU_BPS, DemandVector, TrafficModel, sample_demands

logger = logging.getLogger(__name__)

METHODS = ("greedy", "exact", "random_fixed", "preallocated")
CSV_HEADER = ["method", "K", "N", "H", "sigma", "seed", "served_mbps", "wallclock_ms",
              "sum_y", "sum_z", "deployment"]


class ValidationFailure(RuntimeError):
    """A method produced a plan that violates the model constraints."""


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def random_placement(n_sites: int, count: int, placement_seed: int) -> tuple[int, ...]:
    rng = np.random.default_rng(np.random.SeedSequence([int(placement_seed), 0x5EED]))
    k = min(int(count), n_sites)
    return tuple(sorted(int(i) for i in rng.choice(n_sites, size=k, replace=False)))


def baseline_random_fixed(inst: ProblemInstance, placement_seed: int,
                          redistribute_rounding_slack: bool = False) -> Plan:
    """Fixed small cells on N lampposts drawn uniformly without replacement.

    RB allocation and flows are still optimised for that placement.
    """
    deployment = random_placement(inst.n_sites, inst.rabs_budget, placement_seed)
    if not deployment or inst.rb_budget == 0:
        return Plan(deployment=deployment)
    return solve_with_deployment(inst, deployment,
                                 redistribute_rounding_slack=redistribute_rounding_slack)


def baseline_preallocated(inst: ProblemInstance, redistribute_rounding_slack: bool = False) -> Plan:
    """Greedy placement with the RB budget split in half between access and backhaul."""
    if inst.rabs_budget == 0 or inst.rb_budget == 0:
        return Plan()
    order, active = greedy_deploy(inst)
    if not order:
        return Plan()
    access = inst.rb_budget // 2
    return solve_with_deployment(inst, order, active, access_pool=access,
                                 backhaul_pool=inst.rb_budget - access,
                                 redistribute_rounding_slack=redistribute_rounding_slack)


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------

def scenario_from_config(cfg: dict[str, Any]) -> Scenario:
    if "scenario" in cfg:
        return Scenario.from_dict(cfg["scenario"])
    grid = dict(cfg.get("grid", {}))
    try:
        return build_manhattan_grid(
            side_m=float(grid.get("side_m", 250.0)),
            spacing_m=float(grid.get("spacing_m", 50.0)),
            radio=RadioParams.from_dict(cfg.get("radio", {})),
            access_cell_radius_m=float(cfg.get("access_cell_radius_m", 25.0)),
            anchor=grid.get("anchor", "center"),
        )
    except TypeError as exc:
        raise InvalidConfigError(f"malformed grid/radio config: {exc}") from exc


def traffic_from_config(cfg: dict[str, Any], seed: int | None = None) -> TrafficModel:
    t = cfg.get("traffic", {})
    return TrafficModel(mu_bps=float(t.get("mu_bps", DEFAULT_MU_BPS)),
                        sigma=float(t.get("sigma", 1.0)),
                        seed=int(seed if seed is not None else t.get("seed", 0)))


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfigError(f"{path}: top level must be an object")
    return data


def instance_from_config(cfg: dict[str, Any], seed: int | None = None) -> ProblemInstance:
    """Build an instance from a config tree.

    Keys: ``scenario`` (full scenario tree) or ``grid``/``radio``/
    ``access_cell_radius_m``; ``traffic`` {mu_bps, sigma, seed} or explicit
    ``demands_bps`` {site_id: bps}; ``rabs_budget``, ``rb_budget``, ``max_hops``.
    """
    scenario = scenario_from_config(cfg)
    if "demands_bps" in cfg:
        demands = DemandVector({int(k): float(v) for k, v in cfg["demands_bps"].items()})
    else:
        demands = sample_demands(traffic_from_config(cfg, seed), scenario)
    try:
        return make_instance(scenario, demands, int(cfg.get("rabs_budget", 6)),
                             int(cfg.get("rb_budget", 300)), int(cfg.get("max_hops", 3)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidConfigError):
            raise
        raise InvalidConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    scenario: Scenario = field(default_factory=build_manhattan_grid)
    mu_bps: float = DEFAULT_MU_BPS
    sigmas: Sequence[float] = (1.0,)
    seeds: Sequence[int] = (0,)
    K_values: Sequence[int] = (300,)
    N_values: Sequence[int] = (6,)
    H_values: Sequence[int] = (3,)
    methods: Sequence[str] = ("greedy",)
    output: str | None = None
    oracle_limits: OracleLimits = field(default_factory=OracleLimits)
    redistribute_rounding_slack: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("sigmas", "seeds", "K_values", "N_values", "H_values", "methods"):
            if len(getattr(self, name)) == 0:
                raise InvalidConfigError(f"{name} must be non-empty")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise InvalidConfigError(f"unknown methods {sorted(bad)}; choose from {METHODS}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentSpec":
        seeds = data.get("seeds")
        if seeds is None:
            reps = int(data.get("replications", 1))
            if reps < 1:
                raise InvalidConfigError("replications must be >= 1")
            seeds = list(range(reps))
        traffic = data.get("traffic", {})
        return cls(
            scenario=scenario_from_config(data),
            mu_bps=float(traffic.get("mu_bps", data.get("mu_bps", DEFAULT_MU_BPS))),
            sigmas=[float(s) for s in data.get("sigmas", [traffic.get("sigma", 1.0)])],
            seeds=[int(s) for s in seeds],
            K_values=[int(k) for k in data.get("K", [300])],
            N_values=[int(k) for k in data.get("N", [6])],
            H_values=[int(k) for k in data.get("H", [3])],
            methods=list(data.get("methods", ["greedy"])),
            output=data.get("output"),
            oracle_limits=OracleLimits(**data.get("oracle_limits", {})),
            redistribute_rounding_slack=bool(data.get("redistribute_rounding_slack", False)),
            workers=int(data.get("workers", 1)),
        )


@dataclass
class ResultRow:
    method: str
    K: int
    N: int
    H: int
    sigma: float
    seed: int
    served_mbps: float | None
    wallclock_ms: float
    deployment: tuple[int, ...] = ()
    sum_y: int | None = None
    sum_z: int | None = None
    skipped: str | None = None

    def sort_key(self):
        return (self.method, self.K, self.N, self.H, self.sigma, self.seed)

    def csv_fields(self) -> list[str]:
        if self.skipped is not None:
            tail = ["", f"{self.wallclock_ms:.3f}", "", "", f"skipped: {self.skipped}"]
        else:
            tail = [f"{self.served_mbps:.6f}", f"{self.wallclock_ms:.3f}", str(self.sum_y),
                    str(self.sum_z), ";".join(str(i) for i in self.deployment)]
        return [self.method, str(self.K), str(self.N), str(self.H), repr(float(self.sigma)),
                str(self.seed)] + tail


def run_method(method: str, inst: ProblemInstance, seed: int, spec: ExperimentSpec) -> Plan:
    slack = spec.redistribute_rounding_slack
    if method == "greedy":
        return greedy_solve(inst, redistribute_rounding_slack=slack)
    if method == "preallocated":
        return baseline_preallocated(inst, redistribute_rounding_slack=slack)
    if method == "random_fixed":
        return baseline_random_fixed(inst, seed, redistribute_rounding_slack=slack)
    if method == "exact":
        return exact_solve(inst, spec.oracle_limits)
    raise InvalidConfigError(f"unknown method {method!r}")


def _run_group(spec: ExperimentSpec, sigma: float, seed: int) -> list[ResultRow]:
    """All (method, K, N, H) cells sharing one traffic draw."""
    topology = build_topology(spec.scenario)
    demands = sample_demands(TrafficModel(spec.mu_bps, sigma, seed), spec.scenario)
    rows = []
    for H in spec.H_values:
        routes = enumerate_routes(topology, H)
        for K in spec.K_values:
            for N in spec.N_values:
                inst = make_instance(spec.scenario, demands, N, K, H, topology, routes)
                for method in spec.methods:
                    t0 = time.perf_counter()
                    try:
                        plan = run_method(method, inst, seed, spec)
                    except RefusedInstanceError as exc:
                        ms = (time.perf_counter() - t0) * 1e3
                        rows.append(ResultRow(method, K, N, H, sigma, seed, None, ms, skipped=str(exc)))
                        continue
                    ms = (time.perf_counter() - t0) * 1e3
                    violations = validate_plan(inst, plan)
                    if violations:
                        raise ValidationFailure(
                            f"{method} K={K} N={N} H={H} sigma={sigma} seed={seed}: {violations}")
                    rows.append(ResultRow(method, K, N, H, sigma, seed, plan.served_bps / 1e6, ms,
                                          plan.deployment, plan.sum_backhaul_rbs, plan.sum_access_rbs))
    return rows


def run_experiment(spec: ExperimentSpec, out: str | Path | None = None) -> list[ResultRow]:
    groups = [(s, seed) for s in spec.sigmas for seed in spec.seeds]
    rows: list[ResultRow] = []
    if spec.workers > 1 and len(groups) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for chunk in pool.map(_run_group, [spec] * len(groups), *zip(*groups)):
                rows.extend(chunk)
    else:
        for sigma, seed in groups:
            rows.extend(_run_group(spec, sigma, seed))
    rows.sort(key=ResultRow.sort_key)
    target = out if out is not None else spec.output
    if target is not None:
        Path(target).write_text(rows_to_csv(rows))
    return rows


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()
