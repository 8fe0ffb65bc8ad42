"""Command-line entry point.

Exit codes: 0 success, 1 infeasible plan or validation failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import RabsPlanError, RefusedInstanceError
from .harness import (ExperimentSpec, ValidationFailure, baseline_preallocated,
                      baseline_random_fixed, instance_from_config, load_config,
                      run_experiment, scenario_from_config)
from .oracle import OracleLimits, exact_solve_with_stats
from .planner import Plan, greedy_solve, validate_plan
from .propagation import link_budget
from .scenario import RadioParams
from .topology import build_topology, enumerate_routes

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _limits(cfg) -> OracleLimits:
    return OracleLimits(**cfg.get("oracle_limits", {}))


def cmd_plan(args) -> int:
    cfg = load_config(args.config)
    inst = instance_from_config(cfg, args.seed)
    slack = args.redistribute or bool(cfg.get("redistribute_rounding_slack", False))
    if args.method == "greedy":
        plan = greedy_solve(inst, redistribute_rounding_slack=slack)
    elif args.method == "prealloc":
        plan = baseline_preallocated(inst, redistribute_rounding_slack=slack)
    elif args.method == "random":
        seed = cfg.get("placement_seed", args.seed if args.seed is not None else 0)
        plan = baseline_random_fixed(inst, int(seed), redistribute_rounding_slack=slack)
    else:
        plan, _ = exact_solve_with_stats(inst, _limits(cfg))
    _emit(plan.to_json(), args.out)
    return EXIT_FAILED if validate_plan(inst, plan) else EXIT_OK


def cmd_oracle(args) -> int:
    cfg = load_config(args.instance)
    inst = instance_from_config(cfg)
    plan, count = exact_solve_with_stats(inst, _limits(cfg))
    print(json.dumps({"plan": plan.to_dict(), "enumerations": count}, indent=2))
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = ExperimentSpec.from_dict(load_config(args.spec))
    try:
        rows = run_experiment(spec, out=args.out)
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(f"wrote {len(rows)} rows to {args.out or spec.output}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = instance_from_config(load_config(args.instance))
    try:
        plan = Plan.from_json(Path(args.plan).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read plan: {exc}", file=sys.stderr)
        return EXIT_INVALID
    violations = validate_plan(inst, plan)
    for v in violations:
        print(f"{v.tag}: {v.detail}")
    if not violations:
        print("feasible")
    return EXIT_FAILED if violations else EXIT_OK


def cmd_linkbudget(args) -> int:
    radio = RadioParams()
    if args.config:
        radio = scenario_from_config(load_config(args.config)).radio
    print(json.dumps(link_budget(args.distance, radio).to_dict(), indent=2))
    return EXIT_OK


def cmd_routes(args) -> int:
    scenario = scenario_from_config(load_config(args.config))
    routes = enumerate_routes(build_topology(scenario), args.max_hops)
    sys.stdout.write(routes.dump())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rabsplan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan one instance with a method")
    p.add_argument("method", choices=["greedy", "exact", "random", "prealloc"])
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="traffic seed override")
    p.add_argument("--out", default=None)
    p.add_argument("--redistribute", action="store_true",
                   help="spend RBs left over after rounding")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("oracle", help="exact plan for a tiny instance")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a Monte Carlo sweep to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", help="check a plan against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("linkbudget", help="print the link budget at a distance")
    p.add_argument("--distance", type=float, required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_linkbudget)

    p = sub.add_parser("routes", help="dump hop-bounded routes")
    p.add_argument("--config", required=True)
    p.add_argument("--max-hops", type=int, required=True)
    p.set_defaults(func=cmd_routes)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RefusedInstanceError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RabsPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
