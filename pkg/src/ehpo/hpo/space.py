"""Hyperparameter points, sampling distributions and hyper-HP configurations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class HpPoint:
    """An ordered assignment of real values to named HP dimensions."""

    items: tuple[tuple[str, float], ...]

    def __init__(self, coords: Mapping[str, float] | Sequence[tuple[str, float]]):
        pairs = tuple(coords.items()) if isinstance(coords, Mapping) else tuple(coords)
        names = [name for name, _ in pairs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names in {names}")
        clean = []
        for name, value in pairs:
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"coordinate {name}={value} is not finite")
            clean.append((str(name), value))
        object.__setattr__(self, "items", tuple(clean))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.items)

    def __getitem__(self, name: str) -> float:
        for key, value in self.items:
            if key == name:
                return value
        raise KeyError(name)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.items)

    def as_dict(self) -> dict[str, float]:
        return dict(self.items)

    def replace(self, **updates: float) -> "HpPoint":
        merged = dict(self.items)
        for key, value in updates.items():
            if key not in merged:
                raise KeyError(key)
            merged[key] = value
        return HpPoint(merged)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.items)
        return f"HpPoint({inner})"


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support distribution over HP points."""

    support: tuple[HpPoint, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        support = tuple(p if isinstance(p, HpPoint) else HpPoint(p) for p in self.support)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if not support:
            raise ValueError("distribution has empty support")
        if len(support) != len(weights):
            raise ValueError("support and weights differ in length")
        if len(set(support)) != len(support):
            raise ValueError("duplicate support points")
        if any(not math.isfinite(w) or w < 0 for w in weights):
            raise ValueError("weights must be finite and nonnegative")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {math.fsum(weights)!r}, not 1")
        names = support[0].names
        if any(p.names != names for p in support):
            raise ValueError("support points use different dimensions")

    @classmethod
    def uniform(cls, points: Sequence[HpPoint | Mapping[str, float]]) -> "DiscreteDistribution":
        n = len(points)
        return cls(tuple(points), tuple([1.0 / n] * n))

    @classmethod
    def point_mass(cls, point: HpPoint | Mapping[str, float]) -> "DiscreteDistribution":
        return cls((point,), (1.0,))

    @property
    def dimensions(self) -> tuple[str, ...]:
        return self.support[0].names

    def prob(self, point: HpPoint) -> float:
        for p, w in zip(self.support, self.weights):
            if p == point:
                return w
        return 0.0

    def cumulative(self) -> np.ndarray:
        cdf = np.cumsum(np.asarray(self.weights, dtype=float))
        cdf[-1] = 1.0
        return cdf

    def sample_index(self, u: float) -> int:
        """Inverse-CDF lookup for a uniform draw in [0, 1)."""
        idx = int(np.searchsorted(self.cumulative(), u, side="right"))
        return min(idx, len(self.support) - 1)


@dataclass(frozen=True)
class RangeSpec:
    low: float
    high: float
    scale: str = "uniform"

    def __post_init__(self):
        if self.scale not in ("uniform", "log-uniform"):
            raise ValueError(f"unknown range scale {self.scale!r}")
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or self.low > self.high:
            raise ValueError(f"bad range [{self.low}, {self.high}]")
        if self.scale == "log-uniform" and self.low <= 0:
            raise ValueError("log-uniform range needs a positive lower bound")

    def from_unit(self, u):
        if self.scale == "uniform":
            return self.low + (self.high - self.low) * u
        lo, hi = math.log(self.low), math.log(self.high)
        return np.exp(lo + (hi - lo) * u) if isinstance(u, np.ndarray) else math.exp(lo + (hi - lo) * u)


@dataclass(frozen=True)
class RangeDistribution:
    """Independent per-dimension uniform or log-uniform ranges."""

    ranges: tuple[tuple[str, RangeSpec], ...]

    def __init__(self, ranges: Mapping[str, RangeSpec] | Sequence[tuple[str, RangeSpec]]):
        pairs = tuple(ranges.items()) if isinstance(ranges, Mapping) else tuple(ranges)
        if not pairs:
            raise ValueError("range distribution has no dimensions")
        for name, spec in pairs:
            if not isinstance(spec, RangeSpec):
                raise TypeError(f"range for {name!r} must be a RangeSpec, got {type(spec).__name__}")
        object.__setattr__(self, "ranges", pairs)

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.ranges)


Distribution = Union[DiscreteDistribution, RangeDistribution]


@dataclass(frozen=True)
class GridConfig:
    """Cartesian-product grid; dimensions enumerate in declared order."""

    points: tuple[tuple[str, tuple[float, ...]], ...]

    def __init__(self, points: Mapping[str, Sequence[float]] | Sequence[tuple[str, Sequence[float]]]):
        pairs = tuple(points.items()) if isinstance(points, Mapping) else tuple(points)
        if not pairs:
            raise ValueError("grid has no dimensions")
        clean = []
        for name, values in pairs:
            values = tuple(float(v) for v in values)
            if not values:
                raise ValueError(f"grid dimension {name!r} has an empty point list")
            clean.append((str(name), values))
        object.__setattr__(self, "points", tuple(clean))

    kind = "grid"

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.points)

    @property
    def size(self) -> int:
        return math.prod(len(v) for _, v in self.points)

    def enumerate(self) -> Iterator[HpPoint]:
        names = self.dimensions
        for combo in itertools.product(*(v for _, v in self.points)):
            yield HpPoint(tuple(zip(names, combo)))


@dataclass(frozen=True)
class RandomSearchConfig:
    """Random search: K independent draws from a distribution."""

    distribution: Distribution
    trials: int

    kind = "random"

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trial count must be a positive integer, got {self.trials}")

    @property
    def dimensions(self) -> tuple[str, ...]:
        return self.distribution.dimensions

    @property
    def size(self) -> int:
        return self.trials


HyperHpConfig = Union[GridConfig, RandomSearchConfig]


@dataclass(frozen=True)
class Plan:
    """One hyper-HP choice per algorithm; running it yields a single log."""

    configs: tuple[tuple[str, HyperHpConfig], ...] = field(default=())

    def __init__(self, configs: Mapping[str, HyperHpConfig] | Sequence[tuple[str, HyperHpConfig]]):
        pairs = tuple(configs.items()) if isinstance(configs, Mapping) else tuple(configs)
        if not pairs:
            raise ValueError("plan names no algorithms")
        kinds = {cfg.kind for _, cfg in pairs}
        if len(kinds) != 1:
            raise ValueError("a plan cannot mix grid and random search")
        if kinds == {"random"} and len({cfg.trials for _, cfg in pairs}) != 1:
            raise ValueError("random-search plans need the same trial count for every algorithm")
        object.__setattr__(self, "configs", pairs)

    @property
    def kind(self) -> str:
        return self.configs[0][1].kind

    @property
    def algorithms(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.configs)

    def __getitem__(self, algorithm_id: str) -> HyperHpConfig:
        return dict(self.configs)[algorithm_id]

    @property
    def total_trials(self) -> int:
        return sum(cfg.size for _, cfg in self.configs)


def product_distribution(parts: Mapping[str, DiscreteDistribution]) -> DiscreteDistribution:
    """Joint per-draw distribution of independent per-algorithm draws.

    Coordinates are renamed ``<algorithm>.<dim>`` so the joint support is a
    plain set of HP points.
    """
    names = list(parts)
    supports, weights = [], []
    for combo in itertools.product(*(range(len(parts[n].support)) for n in names)):
        coords = []
        w = 1.0
        for name, idx in zip(names, combo):
            dist = parts[name]
            coords.extend((f"{name}.{k}", v) for k, v in dist.support[idx].items)
            w *= dist.weights[idx]
        supports.append(HpPoint(coords))
        weights.append(w)
    total = math.fsum(weights)
    return DiscreteDistribution(tuple(supports), tuple(w / total for w in weights))
