"""Synthetic tasks: closed-form mean-performance functions plus bounded noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .seeds import SeedStream
from .space import HpPoint


class TaskError(ValueError):
    pass


@dataclass(frozen=True)
class Bump:
    height: float
    center: tuple[tuple[str, float], ...]
    width: tuple[tuple[str, float], ...]

    def __init__(self, height, center, width):
        center = tuple(center.items()) if isinstance(center, Mapping) else tuple(center)
        width = tuple(width.items()) if isinstance(width, Mapping) else tuple(width)
        if not 0.0 <= height <= 1.0:
            raise TaskError(f"bump height {height} outside [0, 1]")
        if dict(center).keys() != dict(width).keys():
            raise TaskError("bump center and width name different dimensions")
        if any(w <= 0 for _, w in width):
            raise TaskError("bump widths must be positive")
        object.__setattr__(self, "height", float(height))
        object.__setattr__(self, "center", tuple((k, float(v)) for k, v in center))
        object.__setattr__(self, "width", tuple((k, float(v)) for k, v in width))


@dataclass(frozen=True)
class BumpRule:
    """``max(base, max_k height_k * exp(-sum_d ((x_d - c_d) / w_d)^2))``.

    Dimensions a bump does not name do not affect it.
    """

    base: float
    bumps: tuple[Bump, ...]

    family = "bumps"

    def __post_init__(self):
        if not 0.0 <= self.base <= 1.0:
            raise TaskError(f"base {self.base} outside [0, 1]")
        object.__setattr__(self, "bumps", tuple(self.bumps))

    def __call__(self, hp: HpPoint) -> float:
        return float(self.evaluate({k: np.float64(v) for k, v in hp.items}))

    def evaluate(self, coords: Mapping[str, np.ndarray]):
        out = None
        for bump in self.bumps:
            expo = 0.0
            for (name, c), (_, w) in zip(bump.center, bump.width):
                expo = expo + ((coords[name] - c) / w) ** 2
            value = bump.height * np.exp(-expo)
            out = value if out is None else np.maximum(out, value)
        if out is None:
            return np.full(np.shape(next(iter(coords.values()))), self.base)
        return np.maximum(out, self.base)

    def to_dict(self):
        return {
            "family": self.family,
            "base": self.base,
            "bumps": [
                {"height": b.height, "center": dict(b.center), "width": dict(b.width)} for b in self.bumps
            ],
        }


@dataclass(frozen=True)
class LogisticRule:
    """Monotone sigmoid in one dimension, from ``low`` to ``high``."""

    dimension: str
    midpoint: float
    slope: float
    low: float = 0.0
    high: float = 1.0

    family = "logistic"

    def __post_init__(self):
        if not (0.0 <= self.low <= 1.0 and 0.0 <= self.high <= 1.0):
            raise TaskError("logistic levels must lie in [0, 1]")

    def __call__(self, hp: HpPoint) -> float:
        return float(self.evaluate({k: np.float64(v) for k, v in hp.items}))

    def evaluate(self, coords):
        z = self.slope * (coords[self.dimension] - self.midpoint)
        return self.low + (self.high - self.low) / (1.0 + np.exp(-z))

    def to_dict(self):
        return {"family": self.family, "dimension": self.dimension, "midpoint": self.midpoint,
                "slope": self.slope, "low": self.low, "high": self.high}


@dataclass(frozen=True)
class TableRule:
    """Explicit metric per point of a finite domain."""

    entries: tuple[tuple[HpPoint, float], ...]

    family = "table"

    def __post_init__(self):
        clean = []
        for point, value in self.entries:
            point = point if isinstance(point, HpPoint) else HpPoint(point)
            if not 0.0 <= value <= 1.0:
                raise TaskError(f"table value {value} outside [0, 1]")
            clean.append((point, float(value)))
        object.__setattr__(self, "entries", tuple(clean))

    def __call__(self, hp: HpPoint) -> float:
        for point, value in self.entries:
            if point == hp:
                return value
        raise TaskError(f"{hp} has no table entry")

    def evaluate(self, coords):
        raise TaskError("table rules only evaluate on discrete supports")

    def to_dict(self):
        return {"family": self.family,
                "entries": [{"point": p.as_dict(), "value": v} for p, v in self.entries]}


ScoringRule = Union[BumpRule, LogisticRule, TableRule]


@dataclass(frozen=True)
class Algorithm:
    rule: ScoringRule
    noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.noise < 1.0:
            raise TaskError(f"noise amplitude {self.noise} outside [0, 1)")


@dataclass(frozen=True)
class Interval:
    low: float
    high: float

    def __contains__(self, x: float) -> bool:
        return self.low <= x <= self.high


@dataclass(frozen=True)
class PointSet:
    values: tuple[float, ...]

    def __contains__(self, x: float) -> bool:
        return any(x == v for v in self.values)


@dataclass(frozen=True)
class SyntheticTask:
    task_id: str
    hp_domain: tuple[tuple[str, Union[Interval, PointSet]], ...]
    algorithms: tuple[tuple[str, Algorithm], ...]

    def __init__(self, task_id, hp_domain, algorithms):
        dom = tuple(hp_domain.items()) if isinstance(hp_domain, Mapping) else tuple(hp_domain)
        algs = tuple(algorithms.items()) if isinstance(algorithms, Mapping) else tuple(algorithms)
        if not dom:
            raise TaskError("task has an empty HP domain")
        if not algs:
            raise TaskError("task defines no algorithms")
        object.__setattr__(self, "task_id", task_id)
        object.__setattr__(self, "hp_domain", dom)
        object.__setattr__(self, "algorithms", algs)

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.hp_domain)

    def algorithm(self, algorithm_id: str) -> Algorithm:
        for name, alg in self.algorithms:
            if name == algorithm_id:
                return alg
        raise TaskError(f"unknown algorithm {algorithm_id!r} for task {self.task_id!r}")

    def check_hp(self, hp: HpPoint) -> None:
        if hp.names != self.dimensions:
            raise TaskError(f"{hp} does not match task dimensions {self.dimensions}")
        for name, region in self.hp_domain:
            if hp[name] not in region:
                raise TaskError(f"{hp} lies outside the domain of {name!r}")

    def mean_metric(self, algorithm_id: str, hp: HpPoint) -> float:
        alg = self.algorithm(algorithm_id)
        self.check_hp(hp)
        value = alg.rule(hp)
        if not math.isfinite(value):
            raise TaskError(f"mean function is not finite at {hp}")
        return min(1.0, max(0.0, value))


def points_domain(values: Sequence[float]) -> PointSet:
    return PointSet(tuple(float(v) for v in values))
