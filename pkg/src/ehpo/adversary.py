"""The demon: how fast can an adversary make a reasoner believe p, or !p?

Exact odds enumerate the distribution of each algorithm's best metric
(the CDF of a maximum of K i.i.d. draws is the K-th power of the per-draw
CDF) and keep every probability as a ``Fraction``.  A (K, R)-defended
reasoner needs all R independent groups to agree, so its per-log odds are
the group odds to the power R.

Expected convince times use the rerun-until-success strategy with the best
allowable config.  Attempts are i.i.d. and cost the log size, and the
reasoner only sees the final log set, so no other strategy is faster in
expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .hpo.logs import Log
from .hpo.search import run_plan
from .hpo.seeds import DEMON, batch_generator, child_seed
from .hpo.space import DiscreteDistribution, GridConfig, Plan, RandomSearchConfig, RangeDistribution
from .hpo.task import SyntheticTask
from .logic.formula import Atom, Formula, Not, canon, format_formula
from .reasoners import (
    ComparativePolicy,
    DefendedReasoner,
    NaiveReasoner,
    ReasonerError,
    ThresholdPolicy,
    _policies,
    defended_conclude,
    naive_conclude,
)

Reasoner = Union[NaiveReasoner, DefendedReasoner]


class AdversaryError(ValueError):
    pass


# -- targets -------------------------------------------------------------------

def _target_policy(reasoner: Reasoner, target: Formula):
    """The policy deciding ``target`` and the sign it must produce (+1 p, -1 !p)."""
    target = canon(target)
    positive = target.inner if isinstance(target, Not) else target
    if not isinstance(positive, Atom):
        raise AdversaryError(f"target must be a proposition or its negation, got {format_formula(target)}")
    sign = -1 if isinstance(target, Not) else 1
    for pol in _policies(reasoner.policy):
        if pol.proposition == positive.name:
            return pol, sign
    raise AdversaryError(f"no policy of the reasoner decides {positive.name!r}")


def _verdict_sign(pol, best: Mapping[str, float]) -> int:
    v = pol.decide(best)
    return 1 if v is True else (-1 if v is False else 0)


# -- exact odds ------------------------------------------------------------------

def _fraction_weights(dist: DiscreteDistribution) -> list[Fraction]:
    # shortest repr, so a weight written 0.8 is exactly 4/5
    raw = [Fraction(repr(float(w))) for w in dist.weights]
    total = sum(raw)
    return [w / total for w in raw]


def best_of_k_distribution(task: SyntheticTask, algorithm_id: str, dist: DiscreteDistribution,
                           K: int) -> list[tuple[float, Fraction]]:
    """Exact law of the best metric over K i.i.d. draws (noiseless task)."""
    values: dict[float, Fraction] = {}
    for point, w in zip(dist.support, _fraction_weights(dist)):
        m = task.mean_metric(algorithm_id, point)
        values[m] = values.get(m, Fraction(0)) + w
    out = []
    cdf_prev = Fraction(0)
    acc = Fraction(0)
    for v in sorted(values):
        acc += values[v]
        cdf = acc ** K
        out.append((v, cdf - cdf_prev))
        cdf_prev = cdf
    return out


def _require_exact(task: SyntheticTask, plan: Plan) -> None:
    for alg, cfg in plan.configs:
        if task.algorithm(alg).noise != 0:
            raise AdversaryError(f"exact mode needs a noiseless task; {alg!r} has noise. Use montecarlo mode")
        if isinstance(cfg, RandomSearchConfig) and not isinstance(cfg.distribution, DiscreteDistribution):
            raise AdversaryError("exact mode needs finite-support distributions. Use montecarlo mode")


def _group_probability(task: SyntheticTask, plan: Plan, pol, sign: int, K: int) -> Fraction:
    laws = {alg: best_of_k_distribution(task, alg, plan[alg].distribution, K) for alg in pol.algorithms}
    names = list(laws)
    total = Fraction(0)

    def walk(i, best, prob):
        nonlocal total
        if i == len(names):
            if _verdict_sign(pol, best) == sign:
                total += prob
            return
        for v, w in laws[names[i]]:
            if w:
                best[names[i]] = v
                walk(i + 1, best, prob * w)

    walk(0, {}, Fraction(1))
    return total


def _grid_outcome(task: SyntheticTask, plan: Plan, pol, sign: int) -> Fraction:
    best = {}
    for alg in pol.algorithms:
        best[alg] = max(task.mean_metric(alg, hp) for hp in plan[alg].enumerate())
    return Fraction(int(_verdict_sign(pol, best) == sign))


def _group_layout(plan: Plan, reasoner: Reasoner):
    """Return ``(K, R)`` for the groups the reasoner reads, or None if it reads nothing."""
    trials = plan.configs[0][1].trials
    if isinstance(reasoner, DefendedReasoner):
        if trials != reasoner.K * reasoner.R:
            return None
        return reasoner.K, reasoner.R
    return trials, 1


def _covers(plan: Plan, pol, reasoner: Reasoner) -> bool:
    if any(a not in plan.algorithms for a in pol.algorithms):
        return False
    if isinstance(reasoner, DefendedReasoner):
        needed = set()
        for p in _policies(reasoner.policy):
            needed.update(p.algorithms)
        return set(plan.algorithms) == needed
    return True


def exact_convince_probability(task: SyntheticTask, plan: Plan, reasoner: Reasoner, target: Formula) -> Fraction:
    pol, sign = _target_policy(reasoner, target)
    _require_exact(task, plan)
    if not _covers(plan, pol, reasoner):
        return Fraction(0)
    if plan.kind == "grid":
        if isinstance(reasoner, DefendedReasoner):
            return Fraction(0)
        return _grid_outcome(task, plan, pol, sign)
    layout = _group_layout(plan, reasoner)
    if layout is None:
        return Fraction(0)
    K, R = layout
    return _group_probability(task, plan, pol, sign, K) ** R


# -- Monte Carlo -----------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    low: float
    high: float
    n: int
    successes: int


def wilson_interval(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    z = NormalDist().inv_cdf(0.5 + level / 2)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


class GroupSampler:
    """Vectorized draws of the best metric per algorithm for many groups at once."""

    def __init__(self, task: SyntheticTask, plan: Plan, algorithms: Sequence[str]):
        if plan.kind != "random":
            raise AdversaryError("sampling needs a random-search plan")
        self.task = task
        self.parts = []
        for alg in algorithms:
            cfg = plan[alg]
            noise = task.algorithm(alg).noise
            dist = cfg.distribution
            if isinstance(dist, DiscreteDistribution):
                means = np.array([task.mean_metric(alg, hp) for hp in dist.support])
                self.parts.append((alg, "discrete", (dist.cumulative(), means), noise))
            else:
                rule = task.algorithm(alg).rule
                self.parts.append((alg, "range", (dist, rule), noise))

    def best(self, gen: np.random.Generator, n: int, K: int) -> dict[str, np.ndarray]:
        out = {}
        for alg, kind, data, noise in self.parts:
            if kind == "discrete":
                cdf, means = data
                idx = np.minimum(np.searchsorted(cdf, gen.random((n, K)), side="right"), len(means) - 1)
                metrics = means[idx]
            else:
                dist, rule = data
                coords = {name: spec.from_unit(gen.random((n, K))) for name, spec in dist.ranges}
                metrics = np.clip(rule.evaluate(coords), 0.0, 1.0)
            if noise:
                metrics = np.clip(metrics + noise * (2.0 * gen.random((n, K)) - 1.0), 0.0, 1.0)
            out[alg] = metrics.max(axis=1)
        return out


def _vectorized_sign(pol, best: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(pol, ThresholdPolicy):
        return np.where(best[pol.algorithm] >= pol.theta, 1, -1)
    a, b = best[pol.algorithm_a], best[pol.algorithm_b]
    return np.where(a > b + pol.margin, 1, np.where(b > a + pol.margin, -1, 0))


def sample_log_hits(task: SyntheticTask, plan: Plan, reasoner: Reasoner, target: Formula, n: int,
                    gen: np.random.Generator) -> np.ndarray:
    """Boolean array: did each of n fresh logs convince the reasoner of target?

    Groups are drawn lazily: once a log has a group that misses, its
    remaining groups are never sampled.
    """
    pol, sign = _target_policy(reasoner, target)
    if not _covers(plan, pol, reasoner):
        return np.zeros(n, dtype=bool)
    layout = _group_layout(plan, reasoner)
    if layout is None:
        return np.zeros(n, dtype=bool)
    K, R = layout
    sampler = GroupSampler(task, plan, pol.algorithms)
    alive = np.arange(n)
    for _ in range(R):
        if alive.size == 0:
            break
        hit = _vectorized_sign(pol, sampler.best(gen, alive.size, K)) == sign
        alive = alive[hit]
    out = np.zeros(n, dtype=bool)
    out[alive] = True
    return out


def montecarlo_convince_probability(task: SyntheticTask, plan: Plan, reasoner: Reasoner, target: Formula,
                                    n: int, master_seed: int = 0) -> Estimate:
    if n < 1:
        raise AdversaryError("montecarlo mode needs at least one sample")
    pol, _ = _target_policy(reasoner, target)
    if plan.kind == "grid":
        # grid search is deterministic up to noise; run the engine directly
        hits = 0
        for i in range(n):
            log = run_plan(task, plan, child_seed(master_seed, DEMON, i))
            hits += canon(target) in conclude_on(reasoner, [log])
        lo, hi = wilson_interval(hits, n)
        return Estimate(hits / n, lo, hi, n, hits)
    gen = batch_generator(master_seed, DEMON)
    hits = int(sample_log_hits(task, plan, reasoner, target, n, gen).sum())
    lo, hi = wilson_interval(hits, n)
    return Estimate(hits / n, lo, hi, n, hits)


def convince_probability(task: SyntheticTask, config: Plan, reasoner: Reasoner, target: Formula,
                         mode: str = "exact", n: int = 100_000, master_seed: int = 0):
    """Probability that one freshly produced log convinces ``reasoner`` of ``target``.

    ``mode="exact"`` returns a ``Fraction``; ``mode="montecarlo"`` returns an
    :class:`Estimate` with a 95% Wilson interval.
    """
    if mode == "exact":
        return exact_convince_probability(task, config, reasoner, target)
    if mode == "montecarlo":
        return montecarlo_convince_probability(task, config, reasoner, target, n, master_seed)
    raise AdversaryError(f"unknown mode {mode!r}")


# -- expected times and verdicts ---------------------------------------------------

UNREACHABLE = math.inf


def expected_convince_time(Q, K: int, R: int = 1):
    """``K*R / Q**R``: expected cost of rerunning a K*R-trial search until it convinces.

    Exact for ``Fraction`` input; ``math.inf`` when Q is 0.
    """
    if Q < 0 or Q > 1:
        raise AdversaryError(f"Q={Q} is not a probability")
    if Q == 0:
        return UNREACHABLE
    if isinstance(Q, Fraction):
        return Fraction(K * R) / Q ** R
    return K * R / Q ** R


def log_cost(plan: Plan) -> int:
    return plan.total_trials


@dataclass(frozen=True)
class Odds:
    config: str
    q_p: Fraction
    q_notp: Fraction
    cost: int

    def time(self, which: str):
        q = self.q_p if which == "p" else self.q_notp
        return UNREACHABLE if q == 0 else Fraction(self.cost) / q


@dataclass(frozen=True)
class ConvincingOdds:
    per_config: tuple[Odds, ...]

    @property
    def Q(self):
        return max(o.q_p for o in self.per_config)

    @property
    def Q_not(self):
        return max(o.q_notp for o in self.per_config)


def convincing_odds(task: SyntheticTask, allowable: Mapping[str, Plan], reasoner: Reasoner,
                    proposition: Formula, mode: str = "exact", n: int = 100_000,
                    master_seed: int = 0) -> ConvincingOdds:
    prop = canon(proposition)
    rows = []
    for i, (name, plan) in enumerate(allowable.items()):
        qs = []
        for j, target in enumerate((prop, Not(prop))):
            q = convince_probability(task, plan, reasoner, target, mode, n, child_seed(master_seed, i, j))
            qs.append(q if isinstance(q, Fraction) else Fraction(q.value))
        rows.append(Odds(name, qs[0], qs[1], log_cost(plan)))
    return ConvincingOdds(tuple(rows))


@dataclass(frozen=True)
class Witness:
    config: str
    expected_time: object  # Fraction or math.inf

    def to_dict(self) -> dict:
        return {"config": self.config, **_time_fields(self.expected_time)}


def _time_fields(x) -> dict:
    if x == UNREACHABLE:
        return {"expected_time": None, "log10_expected_time": None, "reachable": False}
    log10 = math.log10(x.numerator) - math.log10(x.denominator)
    try:
        value = float(x)
    except OverflowError:
        value = None
    if value is not None and not math.isfinite(value):
        value = None
    return {"expected_time": value, "log10_expected_time": log10, "reachable": True}


@dataclass(frozen=True)
class DeceptionVerdict:
    kind: str  # "Deceptive" or "CertifiedNonDeceptive"
    budget: Fraction
    witness_p: Witness
    witness_notp: Witness
    odds: ConvincingOdds = field(repr=False, compare=False)

    @property
    def deceptive(self) -> bool:
        return self.kind == "Deceptive"

    def to_dict(self) -> dict:
        return {
            "verdict": self.kind,
            "budget": float(self.budget),
            "witness_p": self.witness_p.to_dict(),
            "witness_notp": self.witness_notp.to_dict(),
            "configs": [
                {"config": o.config, "cost": o.cost, "q_p": float(o.q_p), "q_notp": float(o.q_notp)}
                for o in self.odds.per_config
            ],
        }


def _fastest(odds: ConvincingOdds, which: str) -> Witness:
    best = None
    for o in odds.per_config:
        t = o.time(which)
        if best is None or t < best.expected_time:
            best = Witness(o.config, t)
    return best


def deception_verdict(task: SyntheticTask, allowable_configs: Mapping[str, Plan], reasoner: Reasoner,
                      proposition: Formula, budget, mode: str = "exact", n: int = 100_000,
                      master_seed: int = 0) -> DeceptionVerdict:
    """Deceptive iff both p and !p can be forced within ``budget`` expected time."""
    if not allowable_configs:
        raise AdversaryError("the allowable config set is empty")
    budget = Fraction(budget)
    odds = convincing_odds(task, allowable_configs, reasoner, proposition, mode, n, master_seed)
    wp, wn = _fastest(odds, "p"), _fastest(odds, "notp")
    both = wp.expected_time <= budget and wn.expected_time <= budget
    return DeceptionVerdict("Deceptive" if both else "CertifiedNonDeceptive", budget, wp, wn, odds)


# -- strategy simulation ---------------------------------------------------------------

@dataclass(frozen=True)
class RunHpo:
    config: Plan
    seed: int


@dataclass(frozen=True)
class Erase:
    indices: tuple[int, ...] | None = None  # None erases every log


@dataclass(frozen=True)
class Return:
    pass


DemonAction = Union[RunHpo, Erase, Return]


@dataclass(frozen=True)
class RerunUntilSuccess:
    """Run ``config`` with fresh seeds, erasing each miss, until the target is believed."""

    config: Plan
    target: Formula
    budget: float | None = None  # stop and give up once elapsed would exceed this


@dataclass(frozen=True)
class StrategyTrace:
    actions: tuple
    elapsed: int
    final_logs: tuple[Log, ...]


@dataclass(frozen=True)
class SimulationResult:
    success_rate: float
    mean_elapsed: float
    se_elapsed: float
    n: int
    elapsed: tuple[int, ...] = field(repr=False)


def conclude_on(reasoner: Reasoner, logs: Sequence[Log]) -> frozenset[Formula]:
    """Conclusions drawn from a whole log set (empty set concludes nothing)."""
    if not logs:
        return frozenset()
    if isinstance(reasoner, DefendedReasoner):
        return defended_conclude(logs[0], reasoner.K, reasoner.R, reasoner.policy) if len(logs) == 1 else frozenset()
    try:
        return naive_conclude(logs, reasoner.policy)
    except ReasonerError:
        return frozenset()


def run_script(task: SyntheticTask, actions: Iterable[DemonAction], step_cap: int = 10_000) -> StrategyTrace:
    logs: list[Log] = []
    taken = []
    elapsed = 0
    for step, action in enumerate(actions):
        if step >= step_cap:
            raise AdversaryError(f"strategy did not return within {step_cap} steps")
        taken.append(action)
        if isinstance(action, RunHpo):
            log = run_plan(task, action.config, action.seed)
            logs.append(log)
            elapsed += log.total_time
        elif isinstance(action, Erase):
            if action.indices is None:
                logs = []
            else:
                bad = [i for i in action.indices if not 0 <= i < len(logs)]
                if bad:
                    raise AdversaryError(f"cannot erase missing logs {bad}")
                drop = set(action.indices)
                logs = [l for i, l in enumerate(logs) if i not in drop]
        elif isinstance(action, Return):
            return StrategyTrace(tuple(taken), elapsed, tuple(logs))
        else:
            raise AdversaryError(f"unknown demon action {action!r}")
    raise AdversaryError("strategy ended without a Return action")


def _rerun_until_success(task: SyntheticTask, strategy: RerunUntilSuccess, reasoner: Reasoner,
                         master_seed: int, rep: int, step_cap: int) -> StrategyTrace:
    target = canon(strategy.target)
    actions, elapsed = [], 0
    cost = log_cost(strategy.config)
    for attempt in range(step_cap):
        if strategy.budget is not None and elapsed + cost > strategy.budget:
            actions.append(Return())
            return StrategyTrace(tuple(actions), elapsed, ())
        seed = child_seed(master_seed, DEMON, rep, attempt)
        actions.append(RunHpo(strategy.config, seed))
        log = run_plan(task, strategy.config, seed)
        elapsed += log.total_time
        if target in conclude_on(reasoner, [log]):
            actions.append(Return())
            return StrategyTrace(tuple(actions), elapsed, (log,))
        actions.append(Erase())
    raise AdversaryError(f"strategy did not return within {step_cap} steps")


def simulate_strategy(task: SyntheticTask, strategy, reasoner: Reasoner, master_seed: int, repetitions: int,
                      target: Formula | None = None, step_cap: int = 10_000) -> SimulationResult:
    """Run the demon loop ``repetitions`` times and score the final log sets.

    ``strategy`` is a :class:`RerunUntilSuccess` or a fixed list of actions.
    """
    if repetitions < 1:
        raise AdversaryError("need at least one repetition")
    if isinstance(strategy, RerunUntilSuccess):
        target = strategy.target if target is None else target
    if target is None:
        raise AdversaryError("a scripted strategy needs an explicit target")
    target = canon(target)
    elapsed, wins = [], 0
    for rep in range(repetitions):
        if isinstance(strategy, RerunUntilSuccess):
            trace = _rerun_until_success(task, strategy, reasoner, master_seed, rep, step_cap)
        else:
            trace = run_script(task, strategy, step_cap)
        elapsed.append(trace.elapsed)
        wins += target in conclude_on(reasoner, list(trace.final_logs))
    arr = np.asarray(elapsed, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return SimulationResult(wins / repetitions, float(arr.mean()), se, repetitions, tuple(elapsed))


def simulate_double_deception(task: SyntheticTask, plan_p: Plan, plan_notp: Plan, reasoner: Reasoner,
                              proposition: Formula, budget: float, simulations: int,
                              master_seed: int = 0) -> dict:
    """Count seed sequences in which rerun-until-success forces both p and !p within budget.

    Each simulation races two independent rerun-until-success demons, one
    per target, each capped at ``budget`` time units.  Logs are sampled
    with the vectorized group sampler.
    """
    prop = canon(proposition)
    within = {}
    for j, (plan, target) in enumerate(((plan_p, prop), (plan_notp, Not(prop)))):
        gen = batch_generator(master_seed, DEMON, j)
        cost = log_cost(plan)
        attempts = int(budget // cost)
        done = np.zeros(simulations, dtype=bool)
        pending = np.arange(simulations)
        for _ in range(attempts):
            if pending.size == 0:
                break
            hit = sample_log_hits(task, plan, reasoner, target, pending.size, gen)
            done[pending[hit]] = True
            pending = pending[~hit]
        within[j] = done
    both = within[0] & within[1]
    return {
        "simulations": simulations,
        "p_within_budget": int(within[0].sum()),
        "notp_within_budget": int(within[1].sum()),
        "both_within_budget": int(both.sum()),
    }
