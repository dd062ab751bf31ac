"""Drives one strategy over one stream: sequential consultation, automatic
first acceptance, the by-default fill rule, incremental scoring, and the
complete per-step decision record.

Consultation order at each step: (1) the by-default fill rule (remaining
instances == open budget: accept, forced, no consultation), (2) the
automatic acceptance at the strategy's declared first selection position,
(3) a filled budget rejects without consultation, (4) the policy decides.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from streamdiv.metrics import distances_to, is_failure, mindist_within
from streamdiv.strategies import make_policy
from streamdiv.strategies.base import Decision, StrategyConfig, StrategyKind

__all__ = [
    "DecisionTrace",
    "ReplayReport",
    "run",
    "replay",
    "format_trace",
    "parse_trace",
]

TRACE_FORMAT = "decision-trace 1"

# strategies whose per-round terminal defaults may mark mid-stream
# decisions as forced (round context, not stream context)
_ROUND_FORCED_KINDS = frozenset(
    {StrategyKind.FRM.value, StrategyKind.SUBMODULAR.value}
)


@dataclass(frozen=True)
class DecisionTrace:
    """Complete record of one run: every verdict, every score, the outcome.

    ``scores_at_decision[j-1]`` is the arriving instance's min distance to
    the then-selected set, NaN while nothing is selected yet.  ``reward``
    is NaN and ``selected_scores_final`` empty for single-instance budgets
    (no pair to measure).  ``selected_vectors`` is carried for convenience
    and excluded from serialization.
    """

    n_total: int
    b: int
    d: int
    strategy: str
    decisions: tuple[Decision, ...]
    positions: tuple[int, ...]
    scores_at_decision: tuple[float, ...]
    selected_scores_final: tuple[float, ...]
    reward: float
    failed: bool
    wall_time: float
    selected_vectors: np.ndarray | None = field(repr=False, compare=False, default=None)


@dataclass(frozen=True)
class ReplayReport:
    """Outcome of re-verifying a trace against its stream."""

    passed: bool
    step: int | None = None
    message: str = ""


def _as_stream(stream) -> np.ndarray:
    points = np.asarray(stream, dtype=float)
    if points.ndim != 2:
        raise ValueError(f"stream must be a 2-d array, got ndim={points.ndim}")
    if points.shape[1] < 1:
        raise ValueError("stream instances need at least one dimension")
    if not np.all(np.isfinite(points)):
        raise ValueError("stream contains non-finite values")
    return points


def run(config: StrategyConfig, stream) -> DecisionTrace:
    """One irrevocable pass of ``config``'s strategy over ``stream``."""
    points = _as_stream(stream)
    n, d = points.shape
    if n != config.n_total:
        raise ValueError(
            f"stream length {n} does not match configured horizon {config.n_total}"
        )
    b = config.b

    start = time.perf_counter()
    policy = make_policy(config)
    first_pos = policy.first_selection_position()
    chosen = np.empty((b, d))
    positions: list[int] = []
    decisions: list[Decision] = []
    scores: list[float] = []
    k = 0
    for j in range(1, n + 1):
        x = points[j - 1]
        if k == 0:
            score = math.nan
        else:
            score = float(np.min(distances_to(chosen[:k], x)))
        if is_failure(j, n, k, b):
            decision = Decision(accept=True, forced=True)
        elif k == 0 and j == first_pos:
            decision = Decision(accept=True)
        elif k == b:
            decision = Decision(accept=False)
        else:
            decision = policy.decide(j, score, x)
        decisions.append(decision)
        scores.append(score)
        if decision.accept:
            chosen[k] = x
            positions.append(j)
            k += 1
            policy.notify_accept(j, x)
    if k != b:
        raise RuntimeError(f"run ended with {k} acceptances for budget {b}")

    if b >= 2:
        final_scores = tuple(
            float(np.min(distances_to(np.delete(chosen, i, axis=0), chosen[i])))
            for i in range(b)
        )
        trace_reward = mindist_within(chosen)
    else:
        final_scores = ()
        trace_reward = math.nan
    elapsed = time.perf_counter() - start

    return DecisionTrace(
        n_total=n,
        b=b,
        d=d,
        strategy=StrategyKind(config.kind).value,
        decisions=tuple(decisions),
        positions=tuple(positions),
        scores_at_decision=tuple(scores),
        selected_scores_final=final_scores,
        reward=trace_reward,
        failed=any(dec.forced for dec in decisions),
        wall_time=elapsed,
        selected_vectors=chosen,
    )


def _same_float(a: float, b: float) -> bool:
    return a == b or (math.isnan(a) and math.isnan(b))


def replay(trace: DecisionTrace, stream) -> ReplayReport:
    """Re-verify ``trace`` against the stream it was produced on.

    Recomputes every score and the reward from scratch, checks the budget,
    the accept positions, the forced-flag placement (by-default fill steps,
    plus round boundaries for the round-based strategies), and the failed
    flag.  Returns the first divergence instead of raising.
    """
    points = _as_stream(stream)
    n, d = points.shape
    if n != trace.n_total or d != trace.d:
        return ReplayReport(
            False, None, f"stream shape {points.shape} does not match trace ({trace.n_total}, {trace.d})"
        )
    if len(trace.decisions) != n or len(trace.scores_at_decision) != n:
        return ReplayReport(False, None, "trace does not cover every stream step")

    b = trace.b
    round_length = n // b
    allowed_round_ends = {r * round_length for r in range(2, b)} | {n}
    round_forced_ok = trace.strategy in _ROUND_FORCED_KINDS

    selected: list[np.ndarray] = []
    positions: list[int] = []
    for j in range(1, n + 1):
        x = points[j - 1]
        decision = trace.decisions[j - 1]
        k = len(selected)
        if k == 0:
            score = math.nan
        else:
            score = float(np.min(distances_to(np.stack(selected), x)))
        if not _same_float(score, trace.scores_at_decision[j - 1]):
            return ReplayReport(
                False,
                j,
                f"score mismatch at step {j}: recomputed {score!r}, "
                f"trace has {trace.scores_at_decision[j - 1]!r}",
            )
        if decision.forced:
            stream_forced = k < b and is_failure(j, n, k, b)
            round_end = round_forced_ok and j in allowed_round_ends
            if not (stream_forced or round_end):
                return ReplayReport(
                    False, j, f"forced acceptance at step {j} has no by-default cause"
                )
        if decision.accept:
            if len(selected) == b:
                return ReplayReport(False, j, f"more than {b} acceptances by step {j}")
            selected.append(x)
            positions.append(j)

    if len(positions) != b:
        return ReplayReport(
            False, None, f"{len(positions)} acceptances recorded for budget {b}"
        )
    if tuple(positions) != trace.positions:
        return ReplayReport(
            False, None, f"accept positions {tuple(positions)} != trace {trace.positions}"
        )
    if trace.failed != any(dec.forced for dec in trace.decisions):
        return ReplayReport(False, None, "failed flag disagrees with forced decisions")

    if b >= 2:
        fresh_reward = mindist_within(np.stack(selected))
        if not _same_float(fresh_reward, trace.reward):
            return ReplayReport(
                False,
                None,
                f"reward mismatch: recomputed {fresh_reward!r}, trace has {trace.reward!r}",
            )
        mat = np.stack(selected)
        for i in range(b):
            fresh = float(np.min(distances_to(np.delete(mat, i, axis=0), mat[i])))
            if not _same_float(fresh, trace.selected_scores_final[i]):
                return ReplayReport(
                    False,
                    None,
                    f"final score mismatch for selection {i}: "
                    f"recomputed {fresh!r}, trace has {trace.selected_scores_final[i]!r}",
                )
    else:
        if not math.isnan(trace.reward) or trace.selected_scores_final != ():
            return ReplayReport(
                False, None, "single-selection trace must carry NaN reward and no final scores"
            )

    return ReplayReport(True)


def _fmt_float(value: float) -> str:
    return repr(float(value))


def _fmt_threshold(value: float | None) -> str:
    return "-" if value is None else _fmt_float(value)


def format_trace(trace: DecisionTrace) -> str:
    """Serialize a trace to the flat line-oriented record format.

    One decision per line (step, score, threshold, accept, forced); header
    lines carry the run-level fields.  Timing is excluded: traces are
    compared bit-for-bit across platforms.
    """
    lines = [
        TRACE_FORMAT,
        f"strategy {trace.strategy}",
        f"n {trace.n_total}",
        f"b {trace.b}",
        f"d {trace.d}",
        "positions " + " ".join(str(p) for p in trace.positions),
        "selected_scores " + " ".join(_fmt_float(s) for s in trace.selected_scores_final),
        f"reward {_fmt_float(trace.reward)}",
        f"failed {int(trace.failed)}",
    ]
    for j, (decision, score) in enumerate(
        zip(trace.decisions, trace.scores_at_decision), start=1
    ):
        lines.append(
            f"{j} {_fmt_float(score)} {_fmt_threshold(decision.threshold)} "
            f"{int(decision.accept)} {int(decision.forced)}"
        )
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> DecisionTrace:
    """Inverse of ``format_trace``; timing comes back as NaN (not recorded)."""
    lines = text.splitlines()
    if not lines or lines[0] != TRACE_FORMAT:
        raise ValueError(f"not a {TRACE_FORMAT!r} record")
    header: dict[str, str] = {}
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        key, _, rest = line.partition(" ")
        if key in {"strategy", "n", "b", "d", "positions", "selected_scores", "reward", "failed"}:
            header[key] = rest
        else:
            body_start = i
            break
    missing = {"strategy", "n", "b", "d", "positions", "selected_scores", "reward", "failed"} - set(header)
    if missing:
        raise ValueError(f"trace header is missing {sorted(missing)}")
    n = int(header["n"])
    decisions: list[Decision] = []
    scores: list[float] = []
    body = lines[body_start:] if body_start is not None else []
    if len(body) != n:
        raise ValueError(f"expected {n} decision lines, found {len(body)}")
    for expected_step, line in enumerate(body, start=1):
        parts = line.split(" ")
        if len(parts) != 5:
            raise ValueError(f"malformed decision line: {line!r}")
        step, score, threshold, accept, forced = parts
        if int(step) != expected_step:
            raise ValueError(f"decision lines out of order at {line!r}")
        scores.append(float(score))
        decisions.append(
            Decision(
                accept=bool(int(accept)),
                threshold=None if threshold == "-" else float(threshold),
                forced=bool(int(forced)),
            )
        )
    positions = tuple(int(p) for p in header["positions"].split()) if header["positions"] else ()
    final_scores = (
        tuple(float(s) for s in header["selected_scores"].split())
        if header["selected_scores"]
        else ()
    )
    return DecisionTrace(
        n_total=n,
        b=int(header["b"]),
        d=int(header["d"]),
        strategy=header["strategy"],
        decisions=tuple(decisions),
        positions=positions,
        scores_at_decision=tuple(scores),
        selected_scores_final=final_scores,
        reward=float(header["reward"]),
        failed=bool(int(header["failed"])),
        wall_time=math.nan,
    )
