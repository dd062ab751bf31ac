"""Command-line interface: experiments, scaling benchmarks, offline oracles.

Strategy tokens: frm, frm-exp (exponential relaxation schedule), kleinberg,
optimistic, mean, submodular, single-ref, simplek, dyn-simplek.

A config file given with --config holds flat ``key=value`` lines (keys are
flag names without the leading dashes); its values override the flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from streamdiv.analytics import DeltaSchedule
from streamdiv.data import Dataset, file_dataset, synthetic_dataset
from streamdiv.harness import (
    ExperimentConfig,
    emit_results,
    render_table,
    run_experiment,
    scaling_benchmark,
    tune_delta,
)
from streamdiv.oracle import brute_force, greedy_maxmin
from streamdiv.strategies import StrategyConfig

__all__ = ["main", "build_strategy", "STRATEGY_TOKENS"]

_KIND_BY_TOKEN = {
    "frm": "frm",
    "frm-exp": "frm",
    "kleinberg": "kleinberg",
    "optimistic": "optimistic",
    "mean": "mean",
    "submodular": "submodular",
    "single-ref": "single_ref",
    "simplek": "simplek",
    "dyn-simplek": "dyn_simplek",
}
STRATEGY_TOKENS = tuple(_KIND_BY_TOKEN)

# config-file keys and how to convert their values, by flag destination
_INT_KEYS = {"n", "d", "b", "trials", "seed", "reps", "workers", "cutoff", "ref_rank"}
_FLOAT_KEYS = {"v1", "v2", "ref_fraction", "max_failure"}
_STR_KEYS = {
    "dataset",
    "strategies",
    "out",
    "format",
    "sizes",
    "shifts",
    "scales",
    "method",
    "strategy",
}


def build_strategy(
    token: str,
    *,
    b: int,
    n_total: int,
    v1: float = 412.0,
    v2: float = 72.0,
    cutoff: int | None = None,
    ref_fraction: float | None = None,
    ref_rank: int | None = None,
) -> StrategyConfig:
    """Strategy configuration for a CLI token."""
    kind = _KIND_BY_TOKEN.get(token)
    if kind is None:
        raise ValueError(
            f"unknown strategy {token!r}; choose from {', '.join(STRATEGY_TOKENS)}"
        )
    kwargs: dict = {}
    if kind == "frm":
        if token == "frm-exp":
            kwargs["delta"] = DeltaSchedule(kind="exponential", shift=v1, scale=v2)
        if cutoff is not None:
            kwargs["cutoff"] = cutoff
    if kind == "single_ref":
        if ref_fraction is not None:
            kwargs["cutoff_fraction"] = ref_fraction
        if ref_rank is not None:
            kwargs["ref_rank"] = ref_rank
    return StrategyConfig(kind=kind, b=b, n_total=n_total, **kwargs)


def _resolve_dataset(spec: str, n: int, d: int, seed: int) -> Dataset:
    if spec == "synthetic":
        return synthetic_dataset(n, d, seed=seed)
    if spec.startswith("csv:"):
        return file_dataset(spec[len("csv:") :])
    raise ValueError(f"unknown dataset spec {spec!r}; use 'synthetic' or 'csv:PATH'")


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _apply_config_file(args: argparse.Namespace, path: str) -> None:
    """Overlay flat key=value lines from ``path`` onto parsed flags."""
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not hasattr(args, key):
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        if key in _INT_KEYS:
            setattr(args, key, int(value))
        elif key in _FLOAT_KEYS:
            setattr(args, key, float(value))
        elif key in _STR_KEYS:
            setattr(args, key, value)
        else:
            raise ValueError(f"{path}:{lineno}: key {key!r} cannot be set from a file")


def _add_dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--dataset",
        default="synthetic",
        help="'synthetic' or 'csv:PATH' (default: synthetic)",
    )
    parser.add_argument("--n", type=int, default=1000, help="stream length (synthetic)")
    parser.add_argument("--d", type=int, default=16, help="dimension (synthetic)")
    parser.add_argument("--seed", type=int, default=0, help="base seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamdiv",
        description="Stream-based max-min diversification experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a strategy comparison experiment")
    _add_dataset_flags(p_run)
    p_run.add_argument("--b", type=int, default=10, help="selection budget")
    p_run.add_argument("--trials", type=int, default=100, help="number of trials")
    p_run.add_argument(
        "--strategies",
        default="frm,kleinberg,optimistic,mean,submodular",
        help="comma list of strategy tokens",
    )
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.add_argument(
        "--format", default="csv,json", help="comma list from: csv, json"
    )
    p_run.add_argument("--workers", type=int, default=None, help="process pool size")
    p_run.add_argument("--v1", type=float, default=412.0, help="frm-exp shift")
    p_run.add_argument("--v2", type=float, default=72.0, help="frm-exp scale")
    p_run.add_argument("--cutoff", type=int, default=None, help="frm learning cutoff")
    p_run.add_argument(
        "--ref-fraction", type=float, default=None, help="single-ref learning fraction"
    )
    p_run.add_argument(
        "--ref-rank", type=int, default=None, help="single-ref threshold rank"
    )
    p_run.add_argument("--config", default=None, help="key=value file overriding flags")

    p_bench = sub.add_parser("bench", help="wall-time scaling benchmark")
    p_bench.add_argument("--strategy", default="frm", help="strategy token")
    p_bench.add_argument(
        "--sizes", default="2000,4000,8000", help="comma list of stream lengths"
    )
    p_bench.add_argument("--reps", type=int, default=5, help="repetitions per size")
    p_bench.add_argument("--d", type=int, default=64)
    p_bench.add_argument("--b", type=int, default=10)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--config", default=None, help="key=value file overriding flags")

    p_oracle = sub.add_parser("oracle", help="offline reference selection")
    _add_dataset_flags(p_oracle)
    p_oracle.add_argument("--b", type=int, required=True, help="selection budget")
    p_oracle.add_argument(
        "--method", choices=("exact", "greedy"), default="exact"
    )
    p_oracle.add_argument("--config", default=None, help="key=value file overriding flags")

    p_tune = sub.add_parser(
        "tune-delta", help="grid sweep over exponential relaxation schedules"
    )
    _add_dataset_flags(p_tune)
    p_tune.add_argument("--b", type=int, default=10)
    p_tune.add_argument("--trials", type=int, default=100)
    p_tune.add_argument("--shifts", default="300,412,500", help="comma list of shifts")
    p_tune.add_argument("--scales", default="36,72,144", help="comma list of scales")
    p_tune.add_argument(
        "--max-failure", type=float, default=2.0, help="failure-rate cap in percent"
    )
    p_tune.add_argument("--workers", type=int, default=None)
    p_tune.add_argument("--config", default=None, help="key=value file overriding flags")

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    dataset = _resolve_dataset(args.dataset, args.n, args.d, args.seed)
    tokens = [tok.strip() for tok in args.strategies.split(",") if tok.strip()]
    if not tokens:
        raise ValueError("no strategies given")
    strategies = {
        token: build_strategy(
            token,
            b=args.b,
            n_total=dataset.n,
            v1=args.v1,
            v2=args.v2,
            cutoff=args.cutoff,
            ref_fraction=args.ref_fraction,
            ref_rank=args.ref_rank,
        )
        for token in tokens
    }
    config = ExperimentConfig(
        dataset=dataset,
        strategies=strategies,
        b=args.b,
        trials=args.trials,
        base_seed=args.seed,
    )
    result = run_experiment(config, workers=args.workers)
    formats = [fmt.strip() for fmt in args.format.split(",") if fmt.strip()]
    written = emit_results(result, args.out, formats)
    print(render_table([result]), end="")
    for path in written.values():
        print(f"wrote {path}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    report = scaling_benchmark(
        args.strategy,
        _int_list(args.sizes),
        args.reps,
        d=args.d,
        b=args.b,
        base_seed=args.seed,
    )
    print(f"strategy: {report.strategy}")
    for row in report.rows:
        print(f"n={row.n}  median_time={row.median_time:.6f}s")
    if report.doubling_ratios:
        ratios = "  ".join(f"{r:.3f}" for r in report.doubling_ratios)
        print(f"doubling ratios: {ratios}")
        print(f"mean ratio: {report.mean_ratio:.3f}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    dataset = _resolve_dataset(args.dataset, args.n, args.d, args.seed)
    solver = brute_force if args.method == "exact" else greedy_maxmin
    result = solver(dataset.points, args.b)
    print(f"method: {result.method}")
    print("positions: " + " ".join(str(p) for p in result.positions))
    print(f"optimum: {result.optimum!r}")
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    dataset = _resolve_dataset(args.dataset, args.n, args.d, args.seed)
    report = tune_delta(
        dataset,
        b=args.b,
        trials=args.trials,
        shifts=_float_list(args.shifts),
        scales=_float_list(args.scales),
        base_seed=args.seed,
        max_failure=args.max_failure,
        workers=args.workers,
    )
    print(
        f"constant: median={report.constant_median:.4f} "
        f"failure={report.constant_failure_rate:.1f}%"
    )
    for cell in report.cells:
        print(
            f"exp shift={cell.shift:g} scale={cell.scale:g}: "
            f"median={cell.median:.4f} failure={cell.failure_rate:.1f}%"
        )
    if report.best is None:
        print(f"no schedule stayed within {args.max_failure:g}% failures")
    else:
        print(
            f"best: shift={report.best.shift:g} scale={report.best.scale:g} "
            f"median={report.best.median:.4f}"
        )
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "bench": _cmd_bench,
    "oracle": _cmd_oracle,
    "tune-delta": _cmd_tune,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config_file(args, args.config)
        return _COMMANDS[args.command](args)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
