"""Conclusion-drawing functions over HPO logs.

Three reasoners share one policy language:

* the naive reasoner picks the best trial per algorithm and applies a
  threshold or comparative policy;
* the (K, R)-defended reasoner splits one K*R-trial random-search log into
  R groups and keeps only what every group's naive reasoner concludes;
* the subsampled-majority defense repeatedly votes over kappa random groups
  and concludes only when a large enough share of the votes agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from ._jsonio import dumps
from .hpo.logs import RANDOM_SEARCH, Log
from .hpo.search import split_log
from .hpo.seeds import SUBSAMPLE, derive_seed
from .logic.derivation import consistency_audit
from .logic.formula import Atom, Formula, Not, format_formula


class ReasonerError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdPolicy:
    """Conclude p iff the target's best metric is at least theta."""

    algorithm: str
    theta: float
    proposition: str = "p"

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ReasonerError(f"theta {self.theta} outside [0, 1]")

    @property
    def algorithms(self) -> tuple[str, ...]:
        return (self.algorithm,)

    def decide(self, best: Mapping[str, float]) -> bool | None:
        return best[self.algorithm] >= self.theta


@dataclass(frozen=True)
class ComparativePolicy:
    """Conclude p iff algorithm a beats b by more than the margin."""

    algorithm_a: str
    algorithm_b: str
    margin: float = 0.0
    proposition: str = "p"

    def __post_init__(self):
        if self.margin < 0:
            raise ReasonerError(f"margin {self.margin} is negative")
        if self.algorithm_a == self.algorithm_b:
            raise ReasonerError("a comparative policy needs two different algorithms")

    @property
    def algorithms(self) -> tuple[str, ...]:
        return (self.algorithm_a, self.algorithm_b)

    def decide(self, best: Mapping[str, float]) -> bool | None:
        a, b = best[self.algorithm_a], best[self.algorithm_b]
        if a > b + self.margin:
            return True
        if b > a + self.margin:
            return False
        return None


Policy = Union[ThresholdPolicy, ComparativePolicy]


def _policies(policy) -> tuple[Policy, ...]:
    if isinstance(policy, (ThresholdPolicy, ComparativePolicy)):
        return (policy,)
    out = tuple(policy)
    if not out:
        raise ReasonerError("no policies given")
    return out


def policy_algorithms(policy) -> tuple[str, ...]:
    seen: list[str] = []
    for pol in _policies(policy):
        for alg in pol.algorithms:
            if alg not in seen:
                seen.append(alg)
    return tuple(seen)


def proposition(policy: Policy) -> Formula:
    return Atom(policy.proposition)


def best_metrics(logs: Iterable[Log]) -> dict[str, float]:
    best: dict[str, float] = {}
    for log in logs:
        for trial in log.trials:
            if trial.algorithm_id not in best or trial.metric > best[trial.algorithm_id]:
                best[trial.algorithm_id] = trial.metric
    return best


def naive_conclude(logs: Iterable[Log], policy) -> frozenset[Formula]:
    """Conclusions of the naive reasoner from the best trial per algorithm."""
    logs = list(logs)
    if not logs:
        raise ReasonerError("the naive reasoner needs at least one log")
    best = best_metrics(logs)
    out = set()
    for pol in _policies(policy):
        missing = [a for a in pol.algorithms if a not in best]
        if missing:
            raise ReasonerError(f"logs contain no trials for {', '.join(missing)}")
        verdict = pol.decide(best)
        if verdict is True:
            out.add(proposition(pol))
        elif verdict is False:
            out.add(Not(proposition(pol)))
    result = frozenset(out)
    if not consistency_audit(result):
        raise ReasonerError("inconsistent policies: two policies assert a proposition and its negation")
    return result


def _valid_defended_input(big_log: Log, K: int, R: int, algorithms: Sequence[str]) -> bool:
    if big_log.header.procedure_id != RANDOM_SEARCH or K < 1 or R < 1:
        return False
    counts = {a: 0 for a in algorithms}
    for trial in big_log.trials:
        if trial.algorithm_id not in counts:
            return False
        counts[trial.algorithm_id] += 1
    return all(c == K * R for c in counts.values())


def defended_conclude(big_log: Log, K: int, R: int, policy) -> frozenset[Formula]:
    """Intersection of the naive conclusions over the R contiguous groups.

    Every algorithm the policy reads must have exactly K*R trials in the
    log (and no other algorithm may appear); any other input concludes
    nothing.
    """
    algorithms = policy_algorithms(policy)
    if not _valid_defended_input(big_log, K, R, algorithms):
        return frozenset()
    common = None
    for group in split_log(big_log, R):
        try:
            found = naive_conclude([group], policy)
        except ReasonerError:
            return frozenset()
        common = found if common is None else common & found
        if not common:
            return frozenset()
    return frozenset(common)


class NaiveReasoner:
    """Naive reasoner viewed as a function of one log."""

    def __init__(self, policy):
        self.policy = policy

    def conclude(self, log: Log) -> frozenset[Formula]:
        try:
            return naive_conclude([log], self.policy)
        except ReasonerError:
            return frozenset()

    K = None
    R = 1


class DefendedReasoner:
    """(K, R)-defended reasoner viewed as a function of one log."""

    def __init__(self, policy, K: int, R: int):
        if K < 1 or R < 1:
            raise ReasonerError("K and R must be positive")
        self.policy = policy
        self.K = K
        self.R = R

    def conclude(self, log: Log) -> frozenset[Formula]:
        return defended_conclude(log, self.K, self.R, self.policy)


# -- subsampled majority ----------------------------------------------------------

P, NOT_P, NOTHING = "p", "!p", "nothing"
OUTCOMES = (P, NOT_P, NOTHING)


def vote(conclusions: Iterable[Formula], prop: Formula) -> str:
    conclusions = set(conclusions)
    if prop in conclusions:
        return P
    if Not(prop) in conclusions:
        return NOT_P
    return NOTHING


def majority(conclusions: Sequence[Iterable[Formula]], prop: Formula | str = "p") -> str:
    """Strict plurality among p / !p / nothing; every tie yields nothing."""
    if len(conclusions) % 2 == 0:
        raise ReasonerError(f"majority needs an odd number of votes, got {len(conclusions)}")
    prop = Atom(prop) if isinstance(prop, str) else prop
    return _plurality([vote(c, prop) for c in conclusions])


def _plurality(votes: Sequence[str]) -> str:
    counts = {o: votes.count(o) for o in OUTCOMES}
    top = max(counts.values())
    leaders = [o for o in OUTCOMES if counts[o] == top]
    return leaders[0] if len(leaders) == 1 else NOTHING


@dataclass(frozen=True)
class DefenseParams:
    K: int
    R: int
    kappa: int
    sample_budget: int
    delta: float

    def __post_init__(self):
        if self.kappa < 1 or self.kappa % 2 == 0:
            raise ReasonerError(f"kappa must be a positive odd number, got {self.kappa}")
        if self.kappa > self.R:
            raise ReasonerError(f"kappa {self.kappa} exceeds the group count {self.R}")
        if self.sample_budget < 1:
            raise ReasonerError("sample budget must be at least 1")
        if not 0.0 <= self.delta <= 1.0:
            raise ReasonerError(f"delta {self.delta} outside [0, 1]")
        if self.K < 1:
            raise ReasonerError("K must be positive")


@dataclass(frozen=True)
class DefenseDecision:
    outcome: str
    fractions: dict = field(hash=False)
    threshold: float
    proposition: str = "p"

    @property
    def concluded(self) -> Formula | None:
        if self.outcome == P:
            return Atom(self.proposition)
        if self.outcome == NOT_P:
            return Not(Atom(self.proposition))
        return None

    def to_dict(self) -> dict:
        concluded = self.concluded
        return {
            "proposition": self.proposition,
            "fractions": {k: self.fractions[k] for k in OUTCOMES},
            "one_minus_delta": self.threshold,
            "conclude": format_formula(concluded) if concluded is not None else "nothing",
        }


def decide(fractions: Mapping[str, float], one_minus_delta: float, proposition: str = "p") -> DefenseDecision:
    """Conclude the strictly larger of p / !p when it reaches the threshold.

    A zero fraction never concludes, so with threshold 0 only a side that
    won at least one iteration can be chosen.
    """
    fr = {o: float(fractions.get(o, 0.0)) for o in OUTCOMES}
    if any(not 0.0 <= v <= 1.0 for v in fr.values()):
        raise ReasonerError(f"fractions must lie in [0, 1]: {fr}")
    eligible = [o for o in (P, NOT_P) if fr[o] > 0 and fr[o] >= one_minus_delta]
    outcome = NOTHING
    if len(eligible) == 1:
        outcome = eligible[0]
    elif len(eligible) == 2 and fr[P] != fr[NOT_P]:
        outcome = P if fr[P] > fr[NOT_P] else NOT_P
    return DefenseDecision(outcome, fr, one_minus_delta, proposition)


def _sample_without_replacement(stream, n: int, k: int) -> list[int]:
    pool = list(range(n))
    for i in range(k):
        j = i + stream.below(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def subsample_votes(group_logs: Sequence[Log], params: DefenseParams, policy: Policy,
                    master_seed: int) -> list[str]:
    """One majority vote per iteration; iteration m uses its own stream."""
    if len(group_logs) < params.kappa:
        raise ReasonerError(f"{len(group_logs)} groups are fewer than kappa={params.kappa}")
    prop = proposition(policy)
    per_group = [vote(naive_conclude([g], policy), prop) for g in group_logs]
    votes = []
    for m in range(params.sample_budget):
        stream = derive_seed(master_seed, m, SUBSAMPLE)
        chosen = _sample_without_replacement(stream, len(group_logs), params.kappa)
        votes.append(_plurality([per_group[i] for i in chosen]))
    return votes


def subsample_majority_defend(group_logs: Sequence[Log], params: DefenseParams, policy: Policy,
                              master_seed: int) -> DefenseDecision:
    if params.kappa % 2 == 0:
        raise ReasonerError("kappa must be odd")
    votes = subsample_votes(group_logs, params, policy, master_seed)
    n = len(votes)
    fractions = {o: votes.count(o) / n for o in OUTCOMES}
    return decide(fractions, 1.0 - params.delta, policy.proposition)


def decision_report(decisions: Sequence[DefenseDecision]) -> str:
    return dumps([d.to_dict() for d in decisions])
