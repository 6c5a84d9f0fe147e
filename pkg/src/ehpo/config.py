"""Experiment config files (YAML, schema ``ehpo-config/1``).

Everything is resolved and validated up front, so a bad reference fails
before any trial runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Any, Mapping

import yaml

from .hpo.logs import LogFormatError, plan_from_dict
from .hpo.space import HpPoint, Plan, RandomSearchConfig
from .hpo.task import Algorithm, Bump, BumpRule, Interval, LogisticRule, PointSet, SyntheticTask, TableRule
from .reasoners import ComparativePolicy, ReasonerError, ThresholdPolicy

SCHEMA = "ehpo-config/1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    task: SyntheticTask
    policy: Any
    configs: dict[str, Plan]
    allowable: dict[str, tuple[str, ...]]
    budget: Fraction
    master_seed: int
    reasoner: dict = field(default_factory=dict)
    defense: dict = field(default_factory=dict)
    certify: dict = field(default_factory=dict)
    scout: dict = field(default_factory=dict)

    def plan(self, name: str) -> Plan:
        try:
            return self.configs[name]
        except KeyError:
            raise ConfigError(f"unknown HPO config {name!r}; known: {', '.join(self.configs)}") from None

    def allowable_set(self, name: str) -> dict[str, Plan]:
        if name not in self.allowable:
            raise ConfigError(f"unknown allowable set {name!r}; known: {', '.join(self.allowable)}")
        return {n: self.configs[n] for n in self.allowable[name]}


def _rule(data: Mapping):
    family = data.get("family")
    if family == "bumps":
        return BumpRule(float(data.get("base", 0.0)),
                        tuple(Bump(float(b["height"]), b["center"], b["width"]) for b in data.get("bumps", [])))
    if family == "logistic":
        return LogisticRule(data["dimension"], float(data["midpoint"]), float(data["slope"]),
                            float(data.get("low", 0.0)), float(data.get("high", 1.0)))
    if family == "table":
        return TableRule(tuple((HpPoint({k: float(v) for k, v in e["point"].items()}), float(e["value"]))
                               for e in data["entries"]))
    raise ConfigError(f"unknown scoring family {family!r}")


def _domain(data: Mapping):
    out = {}
    for name, spec in data.items():
        if "interval" in spec:
            lo, hi = spec["interval"]
            out[name] = Interval(float(lo), float(hi))
        elif "points" in spec:
            out[name] = PointSet(tuple(float(v) for v in spec["points"]))
        else:
            raise ConfigError(f"domain of {name!r} needs 'interval' or 'points'")
    return out


def build_task(data: Mapping) -> SyntheticTask:
    algs = {name: Algorithm(_rule(a["rule"]), float(a.get("noise", 0.0))) for name, a in data["algorithms"].items()}
    return SyntheticTask(str(data["id"]), _domain(data["domain"]), algs)


def build_policy(data: Mapping):
    prop = str(data.get("proposition", "p"))
    if "threshold" in data:
        t = data["threshold"]
        return ThresholdPolicy(str(t["algorithm"]), float(t["theta"]), prop)
    if "comparative" in data:
        c = data["comparative"]
        return ComparativePolicy(str(c["a"]), str(c["b"]), float(c.get("margin", 0.0)), prop)
    raise ConfigError("policy needs 'threshold' or 'comparative'")


def _validate(cfg: ExperimentConfig) -> None:
    task = cfg.task
    for alg in (cfg.policy.algorithms if cfg.policy is not None else ()):
        task.algorithm(alg)
    for name, plan in cfg.configs.items():
        for alg, hc in plan.configs:
            task.algorithm(alg)
            if tuple(hc.dimensions) != task.dimensions:
                raise ConfigError(f"config {name!r}: {alg} uses dimensions {hc.dimensions}, "
                                  f"task has {task.dimensions}")
            if isinstance(hc, RandomSearchConfig) and hasattr(hc.distribution, "support"):
                for hp in hc.distribution.support:
                    task.check_hp(hp)
            elif hc.kind == "grid":
                for hp in hc.enumerate():
                    task.check_hp(hp)
    for set_name, names in cfg.allowable.items():
        for n in names:
            if n not in cfg.configs:
                raise ConfigError(f"allowable set {set_name!r} names unknown HPO config {n!r}")
    if cfg.defense:
        name = cfg.defense.get("config")
        if name is not None and name not in cfg.configs:
            raise ConfigError(f"defense names unknown HPO config {name!r}")
        kappa = int(cfg.defense.get("kappa", 1))
        if kappa % 2 == 0:
            raise ConfigError(f"defense kappa must be odd, got {kappa}")
    if cfg.certify:
        s = cfg.certify.get("set")
        if s is not None and s not in cfg.allowable:
            raise ConfigError(f"certify names unknown allowable set {s!r}")
    if cfg.scout:
        task.algorithm(cfg.scout["algorithm"])


def config_from_dict(data: Mapping) -> ExperimentConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a mapping")
    if data.get("schema") != SCHEMA:
        raise ConfigError(f"config schema must be {SCHEMA!r}, got {data.get('schema')!r}")
    try:
        task = build_task(data["task"])
        policy = build_policy(data["policy"]) if "policy" in data else None
        configs = {str(k): plan_from_dict(v) for k, v in (data.get("configs") or {}).items()}
        allowable = {str(k): tuple(str(n) for n in v) for k, v in (data.get("allowable") or {}).items()}
        cfg = ExperimentConfig(
            task=task,
            policy=policy,
            configs=configs,
            allowable=allowable,
            budget=Fraction(str(data.get("budget", 10000))),
            master_seed=int(data.get("master_seed", 0)),
            reasoner=dict(data.get("reasoner") or {}),
            defense=dict(data.get("defense") or {}),
            certify=dict(data.get("certify") or {}),
            scout=dict(data.get("scout") or {}),
        )
        _validate(cfg)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, LogFormatError, ReasonerError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(yaml.safe_load(fh))


def bundled_config_text(name: str) -> str:
    return (resources.files("ehpo") / "data" / f"{name}.yaml").read_text(encoding="utf-8")


def bundled_config(name: str) -> ExperimentConfig:
    return config_from_dict(yaml.safe_load(bundled_config_text(name)))


def with_overrides(cfg: ExperimentConfig, seed: int | None = None, budget=None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        changes["master_seed"] = int(seed)
    if budget is not None:
        changes["budget"] = Fraction(str(budget))
    return replace(cfg, **changes) if changes else cfg


def with_trials(plan: Plan, trials: int) -> Plan:
    """Same sampling distributions, a different trial count per algorithm."""
    if plan.kind != "random":
        return plan
    return Plan({alg: RandomSearchConfig(c.distribution, trials) for alg, c in plan.configs})
