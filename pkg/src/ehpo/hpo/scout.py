"""Dynamic range scouting for a single positive hyperparameter.

Each round evaluates a log-uniform grid over the current range.  If the
best point is the top endpoint the lower bound moves up a decade; if it is
the bottom endpoint the upper bound moves down a decade; an interior best
point ends the search.  A range spanning one decade or less is pinned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeds import SCOUT, derive_seed, label_key
from .search import eval_trial
from .space import HpPoint
from .task import SyntheticTask


@dataclass(frozen=True)
class ScoutRound:
    low: float
    high: float
    grid: tuple[float, ...]
    metrics: tuple[float, ...]
    best_index: int


def _decade_grid(log_lo: float, log_hi: float, n: int) -> np.ndarray:
    return np.linspace(log_lo, log_hi, n)


def scout_hyper_hps(task: SyntheticTask, algorithm_id: str, start_range: tuple[float, float],
                    grid_points_per_round: int, max_rounds: int, master_seed: int, *,
                    dimension: str | None = None, base_hp: HpPoint | None = None,
                    log_coordinates: bool = False, history: list | None = None) -> tuple[float, float]:
    """Return the final ``(low, high)`` range.

    ``dimension`` defaults to the task's only dimension; other dimensions
    are held at ``base_hp``.  With ``log_coordinates`` the task sees
    ``log10(value)`` rather than the value itself.
    """
    low, high = (float(start_range[0]), float(start_range[1]))
    if not (0 < low <= high):
        raise ValueError(f"start range must be a nonempty positive interval, got {start_range}")
    if grid_points_per_round < 3:
        raise ValueError("need at least 3 grid points per round")
    if dimension is None:
        if len(task.dimensions) != 1:
            raise ValueError("task has several dimensions; name the one to scout")
        dimension = task.dimensions[0]
    task.algorithm(algorithm_id)

    log_lo, log_hi = math.log10(low), math.log10(high)
    stream_index = 0
    for round_no in range(max_rounds):
        exponents = _decade_grid(log_lo, log_hi, grid_points_per_round)
        metrics = []
        for e in exponents:
            coord = float(e) if log_coordinates else float(10.0 ** e)
            hp = base_hp.replace(**{dimension: coord}) if base_hp is not None else HpPoint({dimension: coord})
            seed = derive_seed(master_seed, stream_index, SCOUT, label_key(algorithm_id))
            stream_index += 1
            metrics.append(eval_trial(task, algorithm_id, hp, seed).metric)
        best = int(np.argmax(metrics))
        if history is not None:
            history.append(ScoutRound(10.0 ** log_lo, 10.0 ** log_hi,
                                      tuple(float(10.0 ** e) for e in exponents), tuple(metrics), best))
        if log_hi - log_lo <= 1.0:
            break
        if best == len(metrics) - 1:
            log_lo = min(log_lo + 1.0, log_hi - 1.0)
        elif best == 0:
            log_hi = max(log_hi - 1.0, log_lo + 1.0)
        else:
            break
    return (10.0 ** log_lo, 10.0 ** log_hi)
