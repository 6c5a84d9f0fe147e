"""HPO logs: the record of one run, and their newline-delimited file form.

File layout: the first line is the header object, every later line one
trial.  ``schema_version`` must be ``"ehpo-log/1"``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .._jsonio import atomic_write_text, dumps
from .space import (
    DiscreteDistribution,
    GridConfig,
    HpPoint,
    Plan,
    RandomSearchConfig,
    RangeDistribution,
    RangeSpec,
)

SCHEMA_VERSION = "ehpo-log/1"

GRID_SEARCH = "grid-search"
RANDOM_SEARCH = "random-search"


class LogFormatError(ValueError):
    """A log file or log dict could not be decoded."""


@dataclass(frozen=True)
class TrialRecord:
    algorithm_id: str
    hp: HpPoint
    seed_index: int
    metric: float
    cost: int = 1

    def __post_init__(self):
        if self.cost != 1:
            raise ValueError("every trial costs exactly one time unit")
        if not 0.0 <= self.metric <= 1.0:
            raise ValueError(f"metric {self.metric} outside [0, 1]")


@dataclass(frozen=True)
class LogHeader:
    procedure_id: str
    task_id: str
    plan: Plan
    master_seed: int
    best_hp: tuple[tuple[str, HpPoint], ...]
    total_time: int
    schema_version: str = SCHEMA_VERSION


@dataclass(frozen=True)
class Log:
    header: LogHeader
    trials: tuple[TrialRecord, ...]

    @property
    def total_time(self) -> int:
        return self.header.total_time

    @property
    def algorithms(self) -> tuple[str, ...]:
        seen = []
        for trial in self.trials:
            if trial.algorithm_id not in seen:
                seen.append(trial.algorithm_id)
        return tuple(seen)

    def trials_for(self, algorithm_id: str) -> tuple[TrialRecord, ...]:
        return tuple(t for t in self.trials if t.algorithm_id == algorithm_id)

    def best_trial(self, algorithm_id: str) -> TrialRecord:
        """First trial attaining the maximum metric for ``algorithm_id``."""
        best = None
        for trial in self.trials:
            if trial.algorithm_id == algorithm_id and (best is None or trial.metric > best.metric):
                best = trial
        if best is None:
            raise KeyError(f"log has no trials for {algorithm_id!r}")
        return best

    def best_hp(self, algorithm_id: str | None = None) -> HpPoint:
        table = dict(self.header.best_hp)
        if algorithm_id is None:
            if len(table) != 1:
                raise ValueError("log covers several algorithms; name one")
            return next(iter(table.values()))
        return table[algorithm_id]


def make_log(procedure_id: str, task_id: str, plan: Plan, master_seed: int,
             trials: Sequence[TrialRecord]) -> Log:
    """Assemble a log, deriving best HP per algorithm and the total time."""
    trials = tuple(trials)
    best: dict[str, TrialRecord] = {}
    for trial in trials:
        cur = best.get(trial.algorithm_id)
        if cur is None or trial.metric > cur.metric:
            best[trial.algorithm_id] = trial
    header = LogHeader(
        procedure_id=procedure_id,
        task_id=task_id,
        plan=plan,
        master_seed=master_seed,
        best_hp=tuple((alg, t.hp) for alg, t in best.items()),
        total_time=sum(t.cost for t in trials),
    )
    return Log(header, trials)


# -- dict conversion ---------------------------------------------------------

def config_to_dict(cfg) -> dict:
    if isinstance(cfg, GridConfig):
        return {"grid": {name: list(values) for name, values in cfg.points}}
    dist = cfg.distribution
    body: dict = {"trials": cfg.trials}
    if isinstance(dist, DiscreteDistribution):
        body["support"] = [p.as_dict() for p in dist.support]
        body["weights"] = list(dist.weights)
    else:
        body["ranges"] = {name: {"low": r.low, "high": r.high, "scale": r.scale} for name, r in dist.ranges}
    return {"random": body}


def config_from_dict(data: Mapping):
    if not isinstance(data, Mapping) or len(data) != 1:
        raise LogFormatError(f"hyper-HP config must have exactly one of 'grid'/'random': {data!r}")
    (kind, body), = data.items()
    if kind == "grid":
        return GridConfig({str(k): [float(v) for v in vals] for k, vals in body.items()})
    if kind == "random":
        trials = body["trials"]
        if "support" in body:
            dist = DiscreteDistribution(
                tuple(HpPoint({str(k): float(v) for k, v in p.items()}) for p in body["support"]),
                tuple(float(w) for w in body["weights"]),
            )
        elif "ranges" in body:
            dist = RangeDistribution({
                str(name): RangeSpec(float(r["low"]), float(r["high"]), r.get("scale", "uniform"))
                for name, r in body["ranges"].items()
            })
        else:
            raise LogFormatError("random-search config needs 'support' or 'ranges'")
        return RandomSearchConfig(dist, int(trials))
    raise LogFormatError(f"unknown hyper-HP config kind {kind!r}")


def plan_to_dict(plan: Plan) -> dict:
    return {alg: config_to_dict(cfg) for alg, cfg in plan.configs}


def plan_from_dict(data: Mapping) -> Plan:
    return Plan({str(alg): config_from_dict(cfg) for alg, cfg in data.items()})


def header_to_dict(header: LogHeader) -> dict:
    return {
        "schema_version": header.schema_version,
        "procedure_id": header.procedure_id,
        "task_id": header.task_id,
        "hyper_hp_config": plan_to_dict(header.plan),
        "master_seed": header.master_seed,
        "best_hp": {alg: hp.as_dict() for alg, hp in header.best_hp},
        "total_time": header.total_time,
    }


def trial_to_dict(trial: TrialRecord) -> dict:
    return {
        "algorithm_id": trial.algorithm_id,
        "hp": trial.hp.as_dict(),
        "seed_index": trial.seed_index,
        "metric": trial.metric,
        "cost": trial.cost,
    }


def header_from_dict(data: Mapping) -> LogHeader:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise LogFormatError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION!r}")
    return LogHeader(
        procedure_id=str(data["procedure_id"]),
        task_id=str(data["task_id"]),
        plan=plan_from_dict(data["hyper_hp_config"]),
        master_seed=int(data["master_seed"]),
        best_hp=tuple((str(alg), HpPoint({k: float(v) for k, v in hp.items()}))
                      for alg, hp in data["best_hp"].items()),
        total_time=int(data["total_time"]),
        schema_version=version,
    )


def trial_from_dict(data: Mapping) -> TrialRecord:
    return TrialRecord(
        algorithm_id=str(data["algorithm_id"]),
        hp=HpPoint({str(k): float(v) for k, v in data["hp"].items()}),
        seed_index=int(data["seed_index"]),
        metric=float(data["metric"]),
        cost=int(data["cost"]),
    )


# -- files -------------------------------------------------------------------

def dumps_log(log: Log) -> str:
    lines = [dumps(header_to_dict(log.header))]
    lines.extend(dumps(trial_to_dict(t)) for t in log.trials)
    return "\n".join(lines) + "\n"


def write_log(log: Log, destination) -> None:
    atomic_write_text(destination, dumps_log(log))


def loads_log(text: str) -> Log:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LogFormatError("line 1: empty log")
    records = []
    for lineno, line in enumerate(lines, start=1):
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"line {lineno}: malformed record ({exc.msg})") from None
    try:
        header = header_from_dict(records[0])
    except LogFormatError as exc:
        raise LogFormatError(f"line 1: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise LogFormatError(f"line 1: bad header ({exc})") from None
    trials = []
    for lineno, rec in enumerate(records[1:], start=2):
        try:
            trials.append(trial_from_dict(rec))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise LogFormatError(f"line {lineno}: malformed trial record ({exc})") from None
    log = Log(header, tuple(trials))
    if header.total_time != len(trials):
        raise LogFormatError(f"line 1: total_time {header.total_time} disagrees with {len(trials)} trials")
    return log


def read_log(source) -> Log:
    with open(os.fspath(source), encoding="utf-8") as fh:
        return loads_log(fh.read())


def read_logs(sources: Iterable) -> list[Log]:
    return [read_log(s) for s in sources]
