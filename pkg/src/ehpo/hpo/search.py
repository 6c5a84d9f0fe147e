"""Running HPO procedures: single trials, grid and random search, splitting."""

from __future__ import annotations

from typing import Mapping

from .logs import GRID_SEARCH, RANDOM_SEARCH, Log, TrialRecord, make_log
from .seeds import EVALUATION, HP_DRAW, SeedStream, derive_seed, label_key
from .space import (
    DiscreteDistribution,
    GridConfig,
    HpPoint,
    Plan,
    RandomSearchConfig,
    RangeDistribution,
)
from .task import SyntheticTask, TaskError


class SearchError(ValueError):
    pass


def eval_trial(task: SyntheticTask, algorithm_id: str, hp: HpPoint, seed: SeedStream,
               seed_index: int | None = None) -> TrialRecord:
    """Evaluate one trial: clamped mean plus amplitude-scaled symmetric noise."""
    alg = task.algorithm(algorithm_id)
    mean = task.mean_metric(algorithm_id, hp)
    u = seed.symmetric()
    metric = min(1.0, max(0.0, mean + alg.noise * u))
    index = seed.stream_index if seed_index is None else seed_index
    return TrialRecord(algorithm_id, hp, index, metric)


def _eval_stream(master_seed: int, algorithm_id: str, index: int) -> SeedStream:
    return derive_seed(master_seed, index, EVALUATION, label_key(algorithm_id))


def draw_hp(distribution, stream: SeedStream) -> HpPoint:
    if isinstance(distribution, DiscreteDistribution):
        return distribution.support[distribution.sample_index(stream.uniform())]
    if isinstance(distribution, RangeDistribution):
        return HpPoint(tuple((name, spec.from_unit(stream.uniform())) for name, spec in distribution.ranges))
    raise SearchError(f"unsupported distribution {type(distribution).__name__}")


def _random_trial(task, algorithm_id, cfg: RandomSearchConfig, master_seed, index) -> TrialRecord:
    hp_stream = derive_seed(master_seed, index, HP_DRAW, label_key(algorithm_id))
    hp = draw_hp(cfg.distribution, hp_stream)
    return eval_trial(task, algorithm_id, hp, _eval_stream(master_seed, algorithm_id, index))


def _check_config(task: SyntheticTask, algorithm_id: str, cfg) -> None:
    task.algorithm(algorithm_id)
    if tuple(cfg.dimensions) != task.dimensions:
        raise TaskError(f"config dimensions {cfg.dimensions} do not match task dimensions {task.dimensions}")


def run_plan(task: SyntheticTask, plan: Plan, master_seed: int) -> Log:
    """Run every algorithm's hyper-HP config and return one joint log.

    Grid logs are algorithm-major.  Random logs interleave by trial index
    (trial i of every algorithm, then trial i+1), so any contiguous split
    on a multiple of the algorithm count keeps the algorithms balanced.
    """
    for alg, cfg in plan.configs:
        _check_config(task, alg, cfg)
    trials: list[TrialRecord] = []
    if plan.kind == "grid":
        for alg, cfg in plan.configs:
            for index, hp in enumerate(cfg.enumerate()):
                trials.append(eval_trial(task, alg, hp, _eval_stream(master_seed, alg, index)))
        return make_log(GRID_SEARCH, task.task_id, plan, master_seed, trials)
    trials_per_alg = plan.configs[0][1].trials
    for index in range(trials_per_alg):
        for alg, cfg in plan.configs:
            trials.append(_random_trial(task, alg, cfg, master_seed, index))
    return make_log(RANDOM_SEARCH, task.task_id, plan, master_seed, trials)


def run_random_search(task: SyntheticTask, algorithm_id: str, config: RandomSearchConfig,
                      master_seed: int) -> Log:
    if not isinstance(config, RandomSearchConfig):
        raise SearchError("run_random_search needs a random-search config")
    return run_plan(task, Plan({algorithm_id: config}), master_seed)


def run_grid_search(task: SyntheticTask, algorithm_id: str, config: GridConfig, master_seed: int) -> Log:
    if not isinstance(config, GridConfig):
        raise SearchError("run_grid_search needs a grid config")
    return run_plan(task, Plan({algorithm_id: config}), master_seed)


def split_log(log: Log, R: int) -> list[Log]:
    """Cut a random-search log into R contiguous, equally sized sub-logs."""
    if log.header.procedure_id != RANDOM_SEARCH:
        raise SearchError("only random-search logs hold interchangeable trials and may be split")
    if R < 1:
        raise SearchError(f"R must be at least 1, got {R}")
    n = len(log.trials)
    if n % R:
        raise SearchError(f"{n} trials cannot be split into {R} equal parts")
    size = n // R
    h = log.header
    return [
        make_log(h.procedure_id, h.task_id, h.plan, h.master_seed, log.trials[i * size:(i + 1) * size])
        for i in range(R)
    ]


def run_random_plan(task: SyntheticTask, distributions: Mapping[str, DiscreteDistribution],
                    trials: int, master_seed: int) -> Log:
    """Convenience: same trial count K for every algorithm."""
    return run_plan(task, Plan({alg: RandomSearchConfig(d, trials) for alg, d in distributions.items()}),
                    master_seed)
