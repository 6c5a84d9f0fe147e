"""Rényi-infinity divergences, the defended budget R, and numeric audits of its proof."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .hpo.space import DiscreteDistribution, HpPoint, Plan, RandomSearchConfig, product_distribution

AUDIT_TOL = 1e-12
GRID_T = (10**2, 10**3, 10**4, 10**5, 10**6)
GRID_GAMMA_K = (0.1, 0.5, 1.0, 2.0, 5.0)
GRID_K = (1, 5, 10, 50)


class CertificationError(ValueError):
    pass


def renyi_inf(mu: DiscreteDistribution, nu: DiscreteDistribution) -> float:
    """``max_x ln(mu(x) / nu(x))`` over the support of mu, in nats."""
    if mu.dimensions != nu.dimensions:
        raise CertificationError("distributions live on different HP dimensions")
    nu_w = dict(zip(nu.support, nu.weights))
    best = -math.inf
    for x, w in zip(mu.support, mu.weights):
        if w <= 0:
            continue
        v = nu_w.get(x, 0.0)
        if v <= 0:
            return math.inf
        best = max(best, math.log(w) - math.log(v))
    return max(best, 0.0) if best > -math.inf else 0.0


def plan_distribution(plan: Plan) -> DiscreteDistribution:
    """Per-draw joint distribution of a random-search plan."""
    if plan.kind != "random":
        raise CertificationError("only random-search plans have a sampling distribution")
    parts = {}
    for alg, cfg in plan.configs:
        if not isinstance(cfg.distribution, DiscreteDistribution):
            raise CertificationError("discretize continuous ranges before certifying")
        parts[alg] = cfg.distribution
    if len(parts) == 1:
        return next(iter(parts.values()))
    return product_distribution(parts)


def pairwise_gamma(configs: Sequence[DiscreteDistribution]) -> float:
    """Largest divergence over ordered pairs; a single config gives 0."""
    configs = list(configs)
    if not configs:
        raise CertificationError("need at least one allowable distribution")
    gamma = 0.0
    for a, b in itertools.permutations(range(len(configs)), 2):
        d = renyi_inf(configs[a], configs[b])
        if math.isinf(d):
            raise CertificationError(
                "allowable set violates the bounded-divergence hypothesis: "
                f"config {b} gives zero weight to a point config {a} can sample")
        gamma = max(gamma, d)
    return gamma


def _ceil_sqrt_fraction(x: Fraction) -> int:
    """Exact ceiling of sqrt(x) for a nonnegative rational."""
    if x <= 0:
        return 0
    # sqrt(n/d) = sqrt(n*d)/d; find smallest r with r*r*d >= n
    n, d = x.numerator, x.denominator
    r = math.isqrt(n // d)
    while r * r * d < n:
        r += 1
    while r > 0 and (r - 1) * (r - 1) * d >= n:
        r -= 1
    return r


def required_R(t, gamma: float, K: int) -> int:
    """Smallest integer R with R >= sqrt(t * exp(gamma*K) / K), at least 1."""
    if t <= 0 or gamma < 0 or K < 1:
        raise CertificationError("need t > 0, gamma >= 0 and K >= 1")
    try:
        growth = math.exp(gamma * K)
    except OverflowError:
        raise CertificationError(
            f"exp(gamma*K) overflows for gamma*K={gamma * K:g}; reduce K or tighten the allowable set") from None
    if math.isinf(growth):
        raise CertificationError("exp(gamma*K) overflows; reduce K or tighten the allowable set")
    value = Fraction(t) * Fraction(growth) / K
    return max(1, _ceil_sqrt_fraction(value))


@dataclass(frozen=True)
class ContradictionCheck:
    passed: bool
    lhs: float
    rhs: float
    trivial: bool = False


def contradiction_check(t, gamma: float, K: int, R: int) -> ContradictionCheck:
    """Pass iff (K*R/t)^(1/R) > 1/(1+exp(-gamma*K)), or trivially when K*R > t."""
    if R < 1 or K < 1 or t <= 0:
        raise CertificationError("need t > 0, K >= 1 and R >= 1")
    lhs = (K * R / t) ** (1.0 / R)
    rhs = 1.0 / (1.0 + math.exp(-gamma * K))
    if K * R > t:
        return ContradictionCheck(True, lhs, rhs, trivial=True)
    return ContradictionCheck(lhs > rhs, lhs, rhs)


# -- audits -------------------------------------------------------------------------

@dataclass
class AuditEntry:
    name: str
    passed: bool
    detail: str = ""
    flagged: bool = False


@dataclass
class AuditReport:
    entries: list[AuditEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries if not e.flagged)

    def add(self, name, passed, detail="", flagged=False):
        self.entries.append(AuditEntry(name, bool(passed), detail, flagged))

    def to_dict(self) -> list[dict]:
        return [{"name": e.name, "passed": e.passed, "flagged": e.flagged, "detail": e.detail}
                for e in self.entries]


def kfold_product(dist: DiscreteDistribution, K: int) -> DiscreteDistribution:
    return product_distribution({f"d{i}": dist for i in range(K)})


def _random_distribution(rng: np.random.Generator, size: int, names=("x",)) -> DiscreteDistribution:
    w = rng.random(size) + 0.05
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return DiscreteDistribution(tuple(HpPoint({names[0]: float(i)}) for i in range(size)), tuple(float(v) for v in w))


def audit_additivity(n: int, rng: np.random.Generator, report: AuditReport, max_K: int = 5) -> None:
    worst = 0.0
    for _ in range(n):
        size = int(rng.integers(2, 4))
        mu, nu = _random_distribution(rng, size), _random_distribution(rng, size)
        base = renyi_inf(mu, nu)
        for K in range(1, max_K + 1):
            worst = max(worst, abs(renyi_inf(kfold_product(mu, K), kfold_product(nu, K)) - K * base))
    report.add("renyi K-additivity", worst <= AUDIT_TOL, f"{n} pairs, K<=5, max error {worst:.3e}")


def audit_q_bound(n: int, rng: np.random.Generator, report: AuditReport) -> None:
    """Exact Q + Q_not stays below 2/(1+exp(-gamma*K)) on random enumerable instances."""
    from .adversary import convincing_odds
    from .hpo.task import Algorithm, PointSet, SyntheticTask, TableRule
    from .logic.formula import Atom
    from .reasoners import NaiveReasoner, ThresholdPolicy

    worst_gap = -math.inf
    for _ in range(n):
        size = int(rng.integers(2, 5))
        values = [float(v) for v in np.round(rng.random(size), 3)]
        points = [HpPoint({"x": float(i)}) for i in range(size)]
        task = SyntheticTask("audit", {"x": PointSet(tuple(float(i) for i in range(size)))},
                             {"a": Algorithm(TableRule(tuple(zip(points, values))))})
        theta = float(np.round(rng.random(), 3))
        K = int(rng.integers(1, 4))
        dists = [_random_distribution(rng, size) for _ in range(int(rng.integers(1, 4)))]
        gamma = pairwise_gamma(dists)
        allowable = {f"c{i}": Plan({"a": RandomSearchConfig(d, K)}) for i, d in enumerate(dists)}
        odds = convincing_odds(task, allowable, NaiveReasoner(ThresholdPolicy("a", theta)), Atom("p"))
        total = float(odds.Q + odds.Q_not)
        bound = 2.0 / (1.0 + math.exp(-gamma * K))
        worst_gap = max(worst_gap, total - bound)
    report.add("Q + Q_not bound", worst_gap <= AUDIT_TOL, f"{n} instances, max excess {worst_gap:.3e}")


def audit_grid(report: AuditReport) -> list[dict]:
    rows, failures = [], 0
    for t, gk, K in itertools.product(GRID_T, GRID_GAMMA_K, GRID_K):
        gamma = gk / K
        R = required_R(t, gamma, K)
        chk = contradiction_check(t, gamma, K, R)
        failures += not chk.passed
        rows.append({"t": t, "gamma_K": gk, "K": K, "R": R, "lhs": chk.lhs, "rhs": chk.rhs,
                     "passed": chk.passed, "trivial": chk.trivial})
    report.add("contradiction grid", failures == 0, f"{len(rows)} grid points, {failures} failures")
    return rows


def audit_exp_step(report: AuditReport, gamma_k_values=GRID_GAMMA_K) -> None:
    """Record whether 1/(1+exp(-x)) <= exp(-exp(-x)) holds at sample points.

    This intermediate inequality is not needed by the final check and is
    false for moderate x, so it is reported but flagged rather than failed.
    """
    holds = []
    for x in gamma_k_values:
        lhs = 1.0 / (1.0 + math.exp(-x))
        rhs = math.exp(-math.exp(-x))
        holds.append(f"x={x:g}: {lhs:.4f} {'<=' if lhs <= rhs else '>'} {rhs:.4f}")
    report.add("intermediate exp bound", all("<=" in h for h in holds), "; ".join(holds), flagged=True)


def proof_chain_audit(n: int = 100, seed: int = 0) -> AuditReport:
    if n < 1:
        raise CertificationError("need at least one audit sample")
    rng = np.random.default_rng(seed)
    report = AuditReport()
    audit_additivity(n, rng, report)
    audit_q_bound(n, rng, report)
    audit_grid(report)
    audit_exp_step(report)
    return report


@dataclass(frozen=True)
class Certificate:
    gamma: float
    K: int
    t: float
    R: int
    check: ContradictionCheck
    audit: AuditReport | None = None

    def to_dict(self) -> dict:
        out = {
            "gamma": self.gamma,
            "K": self.K,
            "t": float(self.t),
            "R": self.R,
            "contradiction_check": {"passed": self.check.passed, "lhs": self.check.lhs,
                                    "rhs": self.check.rhs, "trivial": self.check.trivial},
        }
        if self.audit is not None:
            out["audits"] = self.audit.to_dict()
        return out


def certify(allowable: Mapping[str, Plan], K: int, t, audit_samples: int = 0, seed: int = 0) -> Certificate:
    dists = [plan_distribution(p) for p in allowable.values()]
    gamma = pairwise_gamma(dists)
    R = required_R(t, gamma, K)
    audit = proof_chain_audit(audit_samples, seed) if audit_samples else None
    return Certificate(gamma, K, t, R, contradiction_check(t, gamma, K, R), audit)
