"""Seeded synthetic HPO: tasks, search procedures, logs."""

from .logs import (
    GRID_SEARCH,
    RANDOM_SEARCH,
    SCHEMA_VERSION,
    Log,
    LogFormatError,
    LogHeader,
    TrialRecord,
    make_log,
    read_log,
    write_log,
)
from .scout import ScoutRound, scout_hyper_hps
from .search import SearchError, eval_trial, run_grid_search, run_plan, run_random_search, split_log
from .seeds import SeedStream, derive_seed
from .space import (
    DiscreteDistribution,
    GridConfig,
    HpPoint,
    Plan,
    RandomSearchConfig,
    RangeDistribution,
    RangeSpec,
    product_distribution,
)
from .task import (
    Algorithm,
    Bump,
    BumpRule,
    Interval,
    LogisticRule,
    PointSet,
    SyntheticTask,
    TableRule,
    TaskError,
)
