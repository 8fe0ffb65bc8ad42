import csv
import io

import pytest

from rabsplan.errors import InvalidConfigError
from rabsplan.harness import (CSV_HEADER, ExperimentSpec, baseline_preallocated,
                              baseline_random_fixed, instance_from_config, random_placement,
                              rows_to_csv, run_experiment)
from rabsplan.planner import greedy_solve, solve_with_deployment, validate_plan
from rabsplan.scenario import build_manhattan_grid

from conftest import custom_instance, grid_instance


def small_spec(**kw):
    base = dict(scenario=build_manhattan_grid(150, 50), seeds=[0, 1], K_values=[20, 60],
                N_values=[3], H_values=[2], methods=["greedy", "preallocated", "random_fixed"])
    base.update(kw)
    return ExperimentSpec(**base)


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_header_and_row_count(tmp_path):
    out = tmp_path / "r.csv"
    rows = run_experiment(small_spec(), out=out)
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert len(rows) == len(parse(text)) == 2 * 2 * 3


def test_single_cell_matches_direct_call():
    spec = small_spec(seeds=[5], K_values=[40], methods=["greedy"], N_values=[2], H_values=[3])
    [row] = run_experiment(spec)
    inst = instance_from_config({"grid": {"side_m": 150, "spacing_m": 50},
                                 "traffic": {"seed": 5}, "rabs_budget": 2, "rb_budget": 40,
                                 "max_hops": 3})
    assert row.served_mbps == pytest.approx(greedy_solve(inst).served_bps / 1e6, rel=1e-12)


def test_deterministic_modulo_wallclock():
    a, b = (parse(rows_to_csv(run_experiment(small_spec()))) for _ in range(2))
    for r in a + b:
        r.pop("wallclock_ms")
    assert a == b


def test_refused_exact_rows_are_marked_skipped():
    rows = parse(rows_to_csv(run_experiment(small_spec(methods=["exact"], seeds=[0]))))
    assert all(r["deployment"].startswith("skipped:") and r["served_mbps"] == "" for r in rows)


def test_parallel_matches_serial():
    strip = lambda rows: [r.csv_fields()[:7] for r in rows]  # noqa: E731
    assert strip(run_experiment(small_spec(workers=2))) == strip(run_experiment(small_spec()))


def test_random_placement_is_reproducible():
    assert random_placement(25, 6, 3) == random_placement(25, 6, 3)
    assert len(set(random_placement(25, 6, 3))) == 6
    assert random_placement(4, 9, 0) == (0, 1, 2, 3)


def test_random_with_every_site_equals_full_deployment():
    inst = grid_instance(seed=1, N=9, K=80, H=2, side=150.0)
    plan = baseline_random_fixed(inst, placement_seed=7)
    assert plan.served_bps == pytest.approx(
        solve_with_deployment(inst, range(9)).served_bps)


@pytest.mark.parametrize("seed", range(5))
def test_preallocated_never_beats_flexible(seed):
    inst = grid_instance(seed=seed, K=300, H=3)
    pre = baseline_preallocated(inst)
    assert validate_plan(inst, pre) == []
    assert pre.sum_access_rbs <= 150 and pre.sum_backhaul_rbs <= 150
    assert pre.served_bps <= greedy_solve(inst).served_bps * (1 + 1e-9)


def test_preallocated_symmetric_two_rbs():
    inst = custom_instance(1, [("M", 0)], [1e12], N=1, K=2, H=1, access_rate=9.6e6)
    pre = baseline_preallocated(inst)
    assert pre.access_rbs == {0: 1} and pre.backhaul_rbs == {(0, 1): 1}
    assert pre.served_bps == pytest.approx(greedy_solve(inst).served_bps)


def test_random_mean_below_greedy_on_full_grid():
    inst = grid_instance(seed=0)
    mean_random = sum(baseline_random_fixed(inst, s).served_bps for s in range(30)) / 30
    assert mean_random <= greedy_solve(inst).served_bps


@pytest.mark.parametrize("bad", [{"methods": ["nope"]}, {"seeds": []}, {"replications": 0}])
def test_bad_experiment_specs(bad):
    with pytest.raises(InvalidConfigError):
        ExperimentSpec.from_dict(bad)


def test_spec_from_dict_replications():
    spec = ExperimentSpec.from_dict({"replications": 3, "K": [10], "sigmas": [0.5, 1.5]})
    assert list(spec.seeds) == [0, 1, 2]
    assert list(spec.sigmas) == [0.5, 1.5]
