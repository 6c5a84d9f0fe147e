import numpy as np
import pytest

from ehpo.hpo import DiscreteDistribution, HpPoint, Plan, RandomSearchConfig, TrialRecord, make_log, split_log
from ehpo.hpo.logs import GRID_SEARCH, RANDOM_SEARCH
from ehpo.logic import Atom, Not, consistency_audit
from ehpo.reasoners import (
    ComparativePolicy,
    DefendedReasoner,
    DefenseParams,
    NaiveReasoner,
    ReasonerError,
    ThresholdPolicy,
    decide,
    defended_conclude,
    majority,
    naive_conclude,
    subsample_majority_defend,
)

p, q, r = Atom("p"), Atom("q"), Atom("r")
POINT = HpPoint({"x": 0.0})


def joint_log(groups, procedure=RANDOM_SEARCH):
    """Build a log from a list of groups, each a dict algorithm -> list of metrics."""
    algs = list(groups[0])
    per_alg = sum(len(v) for v in groups[0].values()) // len(algs)
    dist = DiscreteDistribution((POINT,), (1.0,))
    plan = Plan({a: RandomSearchConfig(dist, per_alg * len(groups)) for a in algs})
    trials, i = [], 0
    for g in groups:
        for k in range(per_alg):
            for a in algs:
                trials.append(TrialRecord(a, POINT, i, float(g[a][k])))
                i += 1
    return make_log(procedure, "t", plan, 0, trials)


def test_comparative_examples():
    pol = ComparativePolicy("a", "b")
    assert naive_conclude([joint_log([{"a": [0.93], "b": [0.89]}])], pol) == {p}
    assert naive_conclude([joint_log([{"a": [0.9], "b": [0.9]}])], pol) == frozenset()
    assert naive_conclude([joint_log([{"a": [0.5], "b": [0.89]}])], pol) == {Not(p)}


def test_comparative_margin():
    pol = ComparativePolicy("a", "b", margin=0.05)
    assert naive_conclude([joint_log([{"a": [0.93], "b": [0.89]}])], pol) == frozenset()


def test_threshold_on_toy_task(toy_task, toy_policy):
    from ehpo.hpo import run_random_search
    from conftest import two_point_mu

    log = run_random_search(toy_task, "a", RandomSearchConfig(two_point_mu(1.0), 2), 0)
    assert naive_conclude([log], toy_policy) == {p}
    log = run_random_search(toy_task, "a", RandomSearchConfig(two_point_mu(0.0), 2), 0)
    assert naive_conclude([log], toy_policy) == {Not(p)}


def test_missing_algorithm_is_an_error():
    with pytest.raises(ReasonerError):
        naive_conclude([joint_log([{"a": [0.5]}])], ComparativePolicy("a", "b"))
    with pytest.raises(ReasonerError):
        naive_conclude([], ThresholdPolicy("a", 0.5))


def test_best_is_taken_across_logs():
    logs = [joint_log([{"a": [0.1]}]), joint_log([{"a": [0.9]}])]
    assert naive_conclude(logs, ThresholdPolicy("a", 0.8)) == {p}


def test_defended_intersection_examples():
    pol = ThresholdPolicy("a", 0.5)
    assert defended_conclude(joint_log([{"a": [0.9]}] * 3), 1, 3, pol) == {p}
    assert defended_conclude(joint_log([{"a": [0.9]}, {"a": [0.1]}, {"a": [0.9]}]), 1, 3, pol) == frozenset()


def test_defended_intersection_of_multi_proposition_sets():
    pols = [ThresholdPolicy("a", 0.5, "p"),
            ComparativePolicy("b", "c", 0.1, "q"),
            ComparativePolicy("d", "e", 0.1, "r")]
    groups = [
        {"a": [0.9], "b": [0.9], "c": [0.1], "d": [0.5], "e": [0.5]},
        {"a": [0.9], "b": [0.5], "c": [0.5], "d": [0.5], "e": [0.5]},
        {"a": [0.9], "b": [0.5], "c": [0.5], "d": [0.9], "e": [0.1]},
    ]
    log = joint_log(groups)
    per_group = [naive_conclude([g], pols) for g in split_log(log, 3)]
    assert per_group == [{p, q}, {p}, {p, r}]
    assert defended_conclude(log, 1, 3, pols) == {p}


def test_defended_wrong_shape_concludes_nothing():
    pol = ThresholdPolicy("a", 0.5)
    log = joint_log([{"a": [0.9, 0.9]}] * 3)
    assert defended_conclude(log, 2, 3, pol) == {p}
    assert defended_conclude(log, 3, 3, pol) == frozenset()
    assert defended_conclude(log, 1, 3, pol) == frozenset()
    assert defended_conclude(joint_log([{"a": [0.9]}] * 3, GRID_SEARCH), 1, 3, pol) == frozenset()


@pytest.mark.parametrize("votes, expected", [
    (["p"] * 6 + ["!p"] * 5, "p"),
    (["p"] * 4 + ["!p"] * 4 + ["nothing"] * 3, "nothing"),
    (["!p"] * 11, "!p"),
    (["p"] * 5 + ["nothing"] * 5 + ["!p"], "nothing"),
    (["nothing"] * 6 + ["p"] * 5, "nothing"),
])
def test_majority_examples(votes, expected):
    sets = [{p} if v == "p" else {Not(p)} if v == "!p" else set() for v in votes]
    assert majority(sets, p) == expected


def test_majority_needs_odd_count():
    with pytest.raises(ReasonerError):
        majority([{p}, {p}], p)


@pytest.mark.parametrize("fractions, threshold, expected", [
    ({"p": 0.213, "!p": 0.788}, 0.75, "!p"),
    ({"p": 0.213, "!p": 0.788}, 0.8, "nothing"),
    ({"p": 0.213, "!p": 0.788}, 0.9, "nothing"),
    ({"p": 0.168, "!p": 0.832}, 0.75, "!p"),
    ({"p": 0.168, "!p": 0.832}, 0.8, "!p"),
    ({"p": 0.168, "!p": 0.832}, 0.9, "nothing"),
])
def test_fraction_decisions(fractions, threshold, expected):
    assert decide(fractions, threshold).outcome == expected


def test_delta_edges():
    # 1 - delta = 0: any nonzero plurality side concludes
    assert decide({"p": 0.01, "!p": 0.0, "nothing": 0.99}, 0.0).outcome == "p"
    assert decide({"p": 0.0, "!p": 0.0, "nothing": 1.0}, 0.0).outcome == "nothing"
    # 1 - delta = 1: unanimity only
    assert decide({"p": 0.999, "nothing": 0.001}, 1.0).outcome == "nothing"
    assert decide({"p": 1.0}, 1.0).outcome == "p"


def test_delta_monotone():
    rng = np.random.default_rng(3)
    for _ in range(500):
        w = rng.dirichlet([1, 1, 1])
        fr = dict(zip(("p", "!p", "nothing"), w))
        outcomes = [decide(fr, t).outcome for t in np.linspace(0, 1, 41)]
        seen_nothing = False
        for o in outcomes:
            if seen_nothing:
                assert o == "nothing"
            seen_nothing = seen_nothing or o == "nothing"


@pytest.mark.parametrize("kwargs", [
    dict(K=3, R=10, kappa=4, sample_budget=10, delta=0.2),
    dict(K=3, R=3, kappa=5, sample_budget=10, delta=0.2),
    dict(K=3, R=10, kappa=3, sample_budget=0, delta=0.2),
    dict(K=3, R=10, kappa=3, sample_budget=10, delta=1.5),
])
def test_defense_params_validation(kwargs):
    with pytest.raises(ReasonerError):
        DefenseParams(**kwargs)


def random_groups(rng, n_groups, K, algs):
    levels = np.array([0.1, 0.4, 0.5, 0.6, 0.9])
    return [{a: list(rng.choice(levels, K)) for a in algs} for _ in range(n_groups)]


def test_subsample_majority_is_deterministic():
    rng = np.random.default_rng(0)
    groups = [joint_log([g]) for g in random_groups(rng, 25, 3, ["a", "b"])]
    params = DefenseParams(3, 25, 5, 200, 0.2)
    pol = ComparativePolicy("a", "b")
    d1 = subsample_majority_defend(groups, params, pol, 11)
    d2 = subsample_majority_defend(groups, params, pol, 11)
    assert d1 == d2 and d1.fractions == d2.fractions
    assert abs(sum(d1.fractions.values()) - 1.0) < 1e-12


def test_subsample_requires_enough_groups():
    groups = [joint_log([{"a": [0.9]}])] * 2
    with pytest.raises(ReasonerError):
        subsample_majority_defend(groups, DefenseParams(1, 5, 3, 10, 0.1), ThresholdPolicy("a", 0.5), 0)


def test_unanimous_groups_conclude():
    groups = [joint_log([{"a": [0.9]}])] * 7
    d = subsample_majority_defend(groups, DefenseParams(1, 7, 3, 50, 0.0), ThresholdPolicy("a", 0.5), 0)
    assert d.outcome == "p" and d.fractions["p"] == 1.0


def test_properties_on_random_logs():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        K = int(rng.integers(1, 4))
        R = int(rng.integers(1, 6))
        if rng.random() < 0.5:
            algs, pol = ["a"], ThresholdPolicy("a", float(rng.choice([0.3, 0.5, 0.7])))
        else:
            algs, pol = ["a", "b"], ComparativePolicy("a", "b", float(rng.choice([0.0, 0.1])))
        log = joint_log(random_groups(rng, R, K, algs))
        groups = split_log(log, R)
        defended = DefendedReasoner(pol, K, R).conclude(log)
        naive_all = NaiveReasoner(pol).conclude(log)
        per_group = [naive_conclude([g], pol) for g in groups]
        for found in per_group:
            assert defended <= found
            assert consistency_audit(found)
        assert consistency_audit(defended) and consistency_audit(naive_all)
        kappa = R if R % 2 else R - 1
        d = subsample_majority_defend(groups, DefenseParams(K, R, kappa, 5, float(rng.random())), pol, 0)
        concluded = {d.concluded} if d.concluded is not None else set()
        assert consistency_audit(concluded)
