"""Seeded experiment runner.

Runs labeled strategy configurations over reshuffled copies of one dataset,
aggregates per-trial rewards and failure flags into boxplot-style summaries,
and writes machine-readable result files.  Trial ``t`` derives everything
from ``base_seed + t``, so any (strategy, trial) cell can be reproduced in
isolation and all strategies inside a trial see the identical stream.

Percentiles use the nearest-rank method: the p-th percentile of n sorted
values is the value at 1-based rank ``ceil(p/100 * n)``.  Whiskers follow
the 1.5 IQR convention; points beyond the fences are reported as outliers.
Wall times come from the engine and exclude dataset generation, shuffling,
and I/O.  Timing columns are excluded from determinism guarantees.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from streamdiv.analytics import DeltaSchedule
from streamdiv.data import Dataset, reshuffle, synthetic_dataset
from streamdiv.engine import run
from streamdiv.seeding import generator
from streamdiv.strategies import StrategyConfig

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentResult",
    "RunStats",
    "ScalingReport",
    "ScalingRow",
    "TrialRecord",
    "TuneCell",
    "TuneReport",
    "emit_results",
    "format_csv",
    "render_table",
    "run_experiment",
    "summary_dict",
    "scaling_benchmark",
    "tune_delta",
]

CSV_HEADER = "strategy,trial,seed,reward,failed,time"


@dataclass(frozen=True)
class ExperimentConfig:
    """One dataset, several labeled strategies, ``trials`` paired repetitions."""

    dataset: Dataset
    strategies: Mapping[str, StrategyConfig]  # label -> config, order preserved
    b: int
    trials: int
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.b < 1:
            raise ValueError(f"b must be >= 1, got {self.b}")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        for label, cfg in self.strategies.items():
            if "," in label or "\n" in label:
                raise ValueError(f"strategy label {label!r} not CSV-safe")
            if cfg.b != self.b:
                raise ValueError(
                    f"strategy {label!r} has b={cfg.b}, experiment has b={self.b}"
                )
            if cfg.n_total != self.dataset.n:
                raise ValueError(
                    f"strategy {label!r} expects n_total={cfg.n_total}, "
                    f"dataset has {self.dataset.n} rows"
                )


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one (strategy, trial) cell."""

    strategy: str
    trial: int
    seed: int
    reward: float
    failed: bool
    wall_time: float


@dataclass(frozen=True)
class RunStats:
    """Boxplot five-number summary plus failure rate for one strategy."""

    strategy: str
    trials: int
    failure_rate: float  # percent of trials with any forced acceptance
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]
    mean_time: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.failure_rate <= 100.0:
            raise ValueError(f"failure_rate out of range: {self.failure_rate}")
        ordered = (self.whisker_low, self.q1, self.median, self.q3, self.whisker_high)
        finite = [v for v in ordered if not math.isnan(v)]
        if any(a > b for a, b in zip(finite, finite[1:])):
            raise ValueError(f"summary not ordered: {ordered}")


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: tuple[TrialRecord, ...]  # sorted by (strategy, trial)
    stats: dict[str, RunStats]  # in configuration order


def _nearest_rank(sorted_values: np.ndarray, p: float) -> float:
    rank = max(1, math.ceil(p / 100.0 * len(sorted_values)))
    return float(sorted_values[rank - 1])


def _stats_for(label: str, records: Sequence[TrialRecord]) -> RunStats:
    rewards = np.sort(np.asarray([r.reward for r in records], dtype=float))
    q1 = _nearest_rank(rewards, 25)
    median = _nearest_rank(rewards, 50)
    q3 = _nearest_rank(rewards, 75)
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = rewards[(rewards >= lo_fence) & (rewards <= hi_fence)]
    outliers = rewards[(rewards < lo_fence) | (rewards > hi_fence)]
    return RunStats(
        strategy=label,
        trials=len(records),
        failure_rate=100.0 * sum(r.failed for r in records) / len(records),
        median=median,
        q1=q1,
        q3=q3,
        whisker_low=float(inside[0]) if inside.size else q1,
        whisker_high=float(inside[-1]) if inside.size else q3,
        outliers=tuple(float(v) for v in outliers),
        mean_time=float(np.mean([r.wall_time for r in records])),
    )


def _run_cell(
    points: np.ndarray,
    base_seed: int,
    label: str,
    cfg: StrategyConfig,
    trial: int,
) -> TrialRecord:
    seed = base_seed + trial
    try:
        stream = reshuffle(points, generator(seed, "shuffle"))
        trace = run(replace(cfg, rng_seed=seed), stream)
    except Exception as err:
        raise RuntimeError(
            f"strategy {label!r} failed on trial {trial}: {err}"
        ) from err
    return TrialRecord(
        strategy=label,
        trial=trial,
        seed=seed,
        reward=trace.reward,
        failed=trace.failed,
        wall_time=trace.wall_time,
    )


_POOL_POINTS: np.ndarray | None = None
_POOL_SEED: int = 0


def _pool_init(points: np.ndarray, base_seed: int) -> None:
    global _POOL_POINTS, _POOL_SEED
    _POOL_POINTS = points
    _POOL_SEED = base_seed


def _pool_cell(task: tuple[str, StrategyConfig, int]) -> TrialRecord:
    label, cfg, trial = task
    assert _POOL_POINTS is not None
    return _run_cell(_POOL_POINTS, _POOL_SEED, label, cfg, trial)


def run_experiment(
    config: ExperimentConfig, workers: int | None = None
) -> ExperimentResult:
    """Run every (strategy, trial) cell and aggregate.

    Each trial reshuffles the dataset with ``generator(base_seed + t,
    "shuffle")`` and hands every strategy the same permutation; strategy
    randomness is reseeded with ``base_seed + t`` as well.  ``workers``
    bounds a process pool; ``None`` or 1 runs serially.  Results are
    identical either way: records are sorted before aggregation.
    """
    points = config.dataset.points
    tasks = [
        (label, cfg, trial)
        for label, cfg in config.strategies.items()
        for trial in range(config.trials)
    ]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_pool_init,
            initargs=(points, config.base_seed),
        ) as pool:
            records = list(pool.map(_pool_cell, tasks, chunksize=4))
    else:
        records = [
            _run_cell(points, config.base_seed, label, cfg, trial)
            for label, cfg, trial in tasks
        ]
    records.sort(key=lambda r: (r.strategy, r.trial))
    by_label: dict[str, list[TrialRecord]] = {label: [] for label in config.strategies}
    for record in records:
        by_label[record.strategy].append(record)
    stats = {label: _stats_for(label, cells) for label, cells in by_label.items()}
    return ExperimentResult(config=config, records=tuple(records), stats=stats)


def format_csv(records: Sequence[TrialRecord]) -> str:
    """Per-trial records as delimited text, one row per (strategy, trial)."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.strategy},{r.trial},{r.seed},{r.reward!r},{int(r.failed)},{r.wall_time!r}"
        )
    return "\n".join(lines) + "\n"


def summary_dict(result: ExperimentResult) -> dict:
    """JSON-ready summary: one entry per strategy in configuration order."""
    cfg = result.config
    strategies = {}
    for label in cfg.strategies:
        s = result.stats[label]
        strategies[label] = {
            "trials": s.trials,
            "failure_rate": s.failure_rate,
            "median": s.median,
            "q1": s.q1,
            "q3": s.q3,
            "whisker_low": s.whisker_low,
            "whisker_high": s.whisker_high,
            "outliers": list(s.outliers),
            "mean_time": s.mean_time,
        }
    return {
        "dataset": cfg.dataset.name,
        "n": cfg.dataset.n,
        "d": cfg.dataset.d,
        "b": cfg.b,
        "trials": cfg.trials,
        "base_seed": cfg.base_seed,
        "strategies": strategies,
    }


def emit_results(
    result: ExperimentResult,
    out_dir: str | Path,
    formats: Sequence[str] = ("csv", "json"),
) -> dict[str, Path]:
    """Write ``results.csv`` and/or ``summary.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    for fmt in formats:
        if fmt == "csv":
            path = out_dir / "results.csv"
            path.write_text(format_csv(result.records), encoding="utf-8")
        elif fmt == "json":
            path = out_dir / "summary.json"
            path.write_text(
                json.dumps(summary_dict(result), indent=2) + "\n", encoding="utf-8"
            )
        else:
            raise ValueError(f"unknown output format: {fmt!r}")
        written[fmt] = path
    return written


def render_table(results: Sequence[ExperimentResult]) -> str:
    """Text table: one row per strategy, one ``rate%% | median`` column per dataset."""
    if not results:
        return ""
    labels: list[str] = []
    for result in results:
        for label in result.config.strategies:
            if label not in labels:
                labels.append(label)
    headers = ["strategy"] + [
        f"{r.config.dataset.name} (b={r.config.b}, T={r.config.trials})"
        for r in results
    ]
    rows = [headers]
    for label in labels:
        cells = [label]
        for result in results:
            s = result.stats.get(label)
            cells.append("-" if s is None else f"{s.failure_rate:.1f} | {s.median:.1f}")
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ScalingRow:
    n: int
    median_time: float


@dataclass(frozen=True)
class ScalingReport:
    strategy: str
    rows: tuple[ScalingRow, ...]
    doubling_ratios: tuple[float, ...]  # consecutive median-time ratios
    mean_ratio: float  # geometric mean of the ratios, nan when < 2 sizes


def scaling_benchmark(
    strategy: str,
    sizes: Sequence[int],
    reps: int,
    *,
    d: int = 64,
    b: int = 10,
    base_seed: int = 0,
    params: Mapping[str, object] | None = None,
) -> ScalingReport:
    """Median wall time per stream length, plus consecutive growth ratios.

    Every (size, rep) cell runs the strategy on a fresh shuffle of a
    synthetic dataset of that size; timing covers the engine run only.
    """
    sizes = list(sizes)
    if any(a >= b2 for a, b2 in zip(sizes, sizes[1:])):
        raise ValueError(f"sizes must be strictly increasing, got {sizes}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    rows = []
    for n in sizes:
        dataset = synthetic_dataset(n, d, seed=base_seed)
        times = []
        for rep in range(reps):
            seed = base_seed + rep
            stream = reshuffle(dataset.points, generator(seed, "shuffle"))
            cfg = StrategyConfig(
                kind=strategy, b=b, n_total=n, rng_seed=seed, **(params or {})
            )
            times.append(run(cfg, stream).wall_time)
        rows.append(ScalingRow(n=n, median_time=_nearest_rank(np.sort(times), 50)))
    ratios = tuple(
        rows[i + 1].median_time / rows[i].median_time for i in range(len(rows) - 1)
    )
    mean_ratio = (
        float(np.exp(np.mean(np.log(ratios)))) if ratios else math.nan
    )
    return ScalingReport(
        strategy=str(strategy),
        rows=tuple(rows),
        doubling_ratios=ratios,
        mean_ratio=mean_ratio,
    )


@dataclass(frozen=True)
class TuneCell:
    shift: float
    scale: float
    median: float
    failure_rate: float


@dataclass(frozen=True)
class TuneReport:
    constant_median: float
    constant_failure_rate: float
    cells: tuple[TuneCell, ...]
    best: TuneCell | None  # highest median among cells within the failure cap


def tune_delta(
    dataset: Dataset,
    *,
    b: int,
    trials: int,
    shifts: Sequence[float],
    scales: Sequence[float],
    base_seed: int = 0,
    max_failure: float = 2.0,
    workers: int | None = None,
) -> TuneReport:
    """Grid sweep over exponential relaxation schedules vs the constant one.

    All grid cells and the constant baseline run inside one paired
    experiment, so medians are comparable trial by trial.
    """
    n = dataset.n
    strategies: dict[str, StrategyConfig] = {
        "constant": StrategyConfig(kind="frm", b=b, n_total=n)
    }
    grid: list[tuple[float, float]] = [(v1, v2) for v1 in shifts for v2 in scales]
    for v1, v2 in grid:
        strategies[f"exp-{v1:g}-{v2:g}"] = StrategyConfig(
            kind="frm",
            b=b,
            n_total=n,
            delta=DeltaSchedule(kind="exponential", shift=v1, scale=v2),
        )
    result = run_experiment(
        ExperimentConfig(
            dataset=dataset,
            strategies=strategies,
            b=b,
            trials=trials,
            base_seed=base_seed,
        ),
        workers=workers,
    )
    cells = []
    for (v1, v2), label in zip(grid, list(strategies)[1:]):
        s = result.stats[label]
        cells.append(
            TuneCell(shift=v1, scale=v2, median=s.median, failure_rate=s.failure_rate)
        )
    best = None
    for cell in cells:
        if cell.failure_rate <= max_failure and (
            best is None or cell.median > best.median
        ):
            best = cell
    constant = result.stats["constant"]
    return TuneReport(
        constant_median=constant.median,
        constant_failure_rate=constant.failure_rate,
        cells=tuple(cells),
        best=best,
    )
