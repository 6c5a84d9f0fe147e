import math

import pytest
from hypothesis import given, settings, strategies as st

from ehpo.hpo import (
    Algorithm,
    Bump,
    BumpRule,
    DiscreteDistribution,
    GridConfig,
    HpPoint,
    Interval,
    LogFormatError,
    Plan,
    RandomSearchConfig,
    SearchError,
    SyntheticTask,
    TaskError,
    eval_trial,
    read_log,
    run_grid_search,
    run_plan,
    run_random_search,
    split_log,
    write_log,
)
from ehpo.hpo.logs import dumps_log, loads_log
from ehpo.hpo.seeds import derive_seed

from conftest import two_point_mu, two_point_task


def peak_task(noise=0.0):
    rule = BumpRule(0.0, (Bump(1.0, {"lam": 2.0}, {"lam": 1.0}),))
    return SyntheticTask("peak", {"lam": Interval(-10, 10)}, {"f": Algorithm(rule, noise)})


def test_eval_trial_closed_form():
    task = peak_task()
    assert eval_trial(task, "f", HpPoint({"lam": 2.0}), derive_seed(0, 0)).metric == 1.0
    assert eval_trial(task, "f", HpPoint({"lam": 0.0}), derive_seed(0, 0)).metric == pytest.approx(math.exp(-4))


def test_eval_trial_noise_replays_seed():
    task = peak_task(noise=0.05)
    hp = HpPoint({"lam": 0.0})
    got = eval_trial(task, "f", hp, derive_seed(9, 4)).metric
    u = derive_seed(9, 4).symmetric()
    assert got == min(1.0, max(0.0, math.exp(-4) + 0.05 * u))
    assert got == eval_trial(task, "f", hp, derive_seed(9, 4)).metric


def test_eval_trial_errors():
    task = peak_task()
    with pytest.raises(TaskError):
        eval_trial(task, "g", HpPoint({"lam": 0.0}), derive_seed(0, 0))
    with pytest.raises(TaskError):
        eval_trial(task, "f", HpPoint({"lam": 11.0}), derive_seed(0, 0))
    with pytest.raises(TaskError):
        eval_trial(task, "f", HpPoint({"mu": 0.0}), derive_seed(0, 0))


def test_random_search_counts_and_point_mass():
    task = two_point_task()
    log = run_random_search(task, "a", RandomSearchConfig(two_point_mu(0.5), 5), 7)
    assert len(log.trials) == 5 and log.total_time == 5
    log = run_random_search(task, "a", RandomSearchConfig(DiscreteDistribution.point_mass({"x": 2.0}), 5), 7)
    assert {t.hp for t in log.trials} == {HpPoint({"x": 2.0})}


def test_random_search_frequency():
    log = run_random_search(two_point_task(), "a", RandomSearchConfig(two_point_mu(0.8), 1000), 7)
    freq = sum(t.hp["x"] == 1.0 for t in log.trials) / 1000
    assert abs(freq - 0.8) <= 0.05


def test_grid_search_order_and_best():
    task = peak_task()
    g = GridConfig({"lam": [-1, 0, 1, 2, 3]})
    log = run_grid_search(task, "f", g, 0)
    assert [t.hp["lam"] for t in log.trials] == [-1, 0, 1, 2, 3]
    assert log.best_hp("f") == HpPoint({"lam": 2.0})
    single = run_grid_search(task, "f", GridConfig({"lam": [0.5]}), 0)
    assert len(single.trials) == 1 and single.best_hp() == HpPoint({"lam": 0.5})


def test_search_config_kind_checked():
    task = peak_task()
    with pytest.raises(SearchError):
        run_random_search(task, "f", GridConfig({"lam": [0]}), 0)
    with pytest.raises(SearchError):
        run_grid_search(task, "f", RandomSearchConfig(DiscreteDistribution.point_mass({"lam": 0.0}), 1), 0)


def test_joint_random_log_is_trial_index_major(deceptive):
    log = run_plan(deceptive.task, deceptive.plan("eps-low"), 3)
    assert [t.algorithm_id for t in log.trials] == ["sgd", "adam"] * 3
    assert [t.seed_index for t in log.trials] == [0, 0, 1, 1, 2, 2]


def test_split_log_partition():
    log = run_random_search(two_point_task(), "a", RandomSearchConfig(two_point_mu(0.5), 6), 1)
    parts = split_log(log, 3)
    assert [len(p.trials) for p in parts] == [2, 2, 2]
    assert sum((p.trials for p in parts), ()) == log.trials
    assert sum(p.total_time for p in parts) == log.total_time
    same = split_log(log, 1)[0]
    assert same.trials == log.trials and same.header.best_hp == log.header.best_hp


def test_split_log_600_into_200():
    log = run_random_search(two_point_task(), "a", RandomSearchConfig(two_point_mu(0.5), 600), 1)
    parts = split_log(log, 200)
    assert len(parts) == 200 and all(len(p.trials) == 3 for p in parts)


def test_split_log_errors():
    task = two_point_task()
    log = run_random_search(task, "a", RandomSearchConfig(two_point_mu(0.5), 6), 1)
    with pytest.raises(SearchError):
        split_log(log, 4)
    grid = run_grid_search(task, "a", GridConfig({"x": [1, 2]}), 1)
    with pytest.raises(SearchError):
        split_log(grid, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 30), st.floats(0.0, 0.5))
def test_log_invariants_and_determinism(seed, K, noise):
    task = two_point_task(noise=noise)
    cfg = RandomSearchConfig(two_point_mu(0.3), K)
    a, b = run_random_search(task, "a", cfg, seed), run_random_search(task, "a", cfg, seed)
    assert dumps_log(a) == dumps_log(b)
    assert a.total_time == len(a.trials) == K
    best = max(t.metric for t in a.trials)
    assert a.best_trial("a").metric == best and a.best_trial("a").hp == a.best_hp("a")


def test_seed_changes_draws_not_shape():
    task = peak_task(noise=0.1)
    g = GridConfig({"lam": [0, 1, 2]})
    a, b = run_grid_search(task, "f", g, 1), run_grid_search(task, "f", g, 2)
    assert [t.hp for t in a.trials] == [t.hp for t in b.trials]
    assert [t.metric for t in a.trials] != [t.metric for t in b.trials]


def test_log_round_trip(tmp_path, deceptive):
    for name in ("default-eps", "eps-low"):
        log = run_plan(deceptive.task, deceptive.plan(name), 11)
        write_log(log, tmp_path / f"{name}.ndjson")
        assert read_log(tmp_path / f"{name}.ndjson") == log


def test_log_rejects_bad_version_and_truncation(tmp_path):
    log = run_random_search(two_point_task(), "a", RandomSearchConfig(two_point_mu(0.5), 3), 0)
    text = dumps_log(log)
    with pytest.raises(LogFormatError, match="schema_version"):
        loads_log(text.replace("ehpo-log/1", "ehpo-log/9"))
    truncated = text[:-20]
    with pytest.raises(LogFormatError, match="line 4"):
        loads_log(truncated)
    with pytest.raises(LogFormatError, match="line 1"):
        loads_log("")
