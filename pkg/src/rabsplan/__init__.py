"""Joint placement, RB allocation and routing for lamppost-anchored aerial base stations."""

from ._kernels import BACKEND
from .errors import (DomainError, InvalidConfigError, InvalidInputError, PlannerError,
                     RabsPlanError, RefusedInstanceError)
from .harness import (ExperimentSpec, baseline_preallocated, baseline_random_fixed,
                      run_experiment)
from .lp import LpProblem, LpSolution, LpStatus, solve_lp
from .oracle import OracleLimits, exact_solve
from .planner import (Plan, ProblemInstance, build_relaxed_lp, greedy_deploy, greedy_solve,
                      make_instance, solve_with_deployment, validate_plan)
from .propagation import (access_unit_rate, backhaul_unit_rate, link_budget, los_probability,
                          pathloss, pathloss_db)
from .scenario import RadioParams, Scenario, Site, build_manhattan_grid, euclidean_distance
from .topology import (NetworkTopology, RouteSet, build_topology, enumerate_routes,
                       filter_routes)
from .traffic import DemandVector, TrafficModel, sample_demands

__version__ = "0.1.0"
