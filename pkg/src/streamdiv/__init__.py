"""Stream-based max-min diversification.

Select a fixed number of instances from a sequentially revealed stream,
deciding irrevocably at each arrival, so that the minimum pairwise distance
of the final selection is as large as possible.  The package provides the
online selection strategies, offline reference oracles, and a benchmark
harness that measures failure rates and achieved distances over repeated
trials.
"""

from __future__ import annotations

from streamdiv.analytics import (
    DeltaSchedule,
    RoundParams,
    acceptance_mean,
    acceptance_std,
    expected_rank,
    learning_cutoff,
    switch_index,
)
from streamdiv.data import (
    Dataset,
    file_dataset,
    load_csv,
    reshuffle,
    save_csv,
    synthetic_dataset,
    synthetic_walks,
    z_normalize,
)
from streamdiv.engine import (
    DecisionTrace,
    ReplayReport,
    format_trace,
    parse_trace,
    replay,
    run,
)
from streamdiv.metrics import (
    Instance,
    SelectionState,
    candidate_score,
    distance,
    failure_rate,
    is_failure,
    mindist_between,
    mindist_within,
    reward,
    selected_score,
    selection_state,
)
from streamdiv.oracle import OracleResult, brute_force, greedy_maxmin
from streamdiv.seeding import derive_key, generator
from streamdiv.strategies import (
    Decision,
    Policy,
    StrategyConfig,
    StrategyKind,
    make_policy,
    simplek_offline_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Decision",
    "DecisionTrace",
    "DeltaSchedule",
    "Instance",
    "OracleResult",
    "Policy",
    "ReplayReport",
    "RoundParams",
    "SelectionState",
    "StrategyConfig",
    "StrategyKind",
    "acceptance_mean",
    "acceptance_std",
    "brute_force",
    "candidate_score",
    "derive_key",
    "distance",
    "expected_rank",
    "failure_rate",
    "file_dataset",
    "format_trace",
    "generator",
    "greedy_maxmin",
    "is_failure",
    "learning_cutoff",
    "load_csv",
    "make_policy",
    "mindist_between",
    "mindist_within",
    "parse_trace",
    "replay",
    "reshuffle",
    "reward",
    "run",
    "save_csv",
    "selected_score",
    "selection_state",
    "simplek_offline_threshold",
    "switch_index",
    "synthetic_dataset",
    "synthetic_walks",
    "z_normalize",
    "__version__",
]
