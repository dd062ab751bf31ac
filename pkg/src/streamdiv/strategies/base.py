"""Shared strategy plumbing: kinds, configuration, decisions, the policy protocol.

A policy sees the stream one instance at a time through ``decide`` and is
told about every acceptance (its own, the engine's automatic first pick,
and forced fills) through ``notify_accept``.  The engine owns the budget
and the forced-fill rule; a policy only answers "accept or not, at what
threshold" for the steps where it is consulted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, runtime_checkable

import numpy as np

from streamdiv.analytics import DeltaSchedule

__all__ = [
    "StrategyKind",
    "Decision",
    "StrategyConfig",
    "Policy",
    "SINGLE_REF_DEFAULTS",
    "PrefixThreshold",
]

# (cutoff fraction, reference rank) tuned per budget; only these two budgets
# ship with defaults, other budgets need explicit parameters.
SINGLE_REF_DEFAULTS: dict[int, tuple[float, int]] = {
    5: (0.2525, 2),
    50: (0.1536, 9),
}


class StrategyKind(str, Enum):
    FRM = "frm"
    KLEINBERG = "kleinberg"
    OPTIMISTIC = "optimistic"
    MEAN = "mean"
    SUBMODULAR = "submodular"
    SINGLE_REF = "single_ref"
    SIMPLEK = "simplek"
    DYN_SIMPLEK = "dyn_simplek"


@dataclass(frozen=True)
class Decision:
    """One accept/reject verdict, with the threshold that produced it.

    ``threshold`` is None when no threshold was consulted (learning-phase
    rejections, automatic or forced acceptances).  ``forced`` marks
    by-default acceptances: the stream or round ran out of room.
    """

    accept: bool
    threshold: float | None = None
    forced: bool = False

    def __post_init__(self) -> None:
        if self.forced and not self.accept:
            raise ValueError("a forced decision is always an acceptance")


@dataclass(frozen=True)
class StrategyConfig:
    """Everything needed to instantiate one strategy for one stream.

    ``delta`` and ``cutoff`` apply to the round-threshold strategy (frm);
    ``cutoff_fraction`` and ``ref_rank`` to single_ref, where they default
    from ``SINGLE_REF_DEFAULTS`` for the shipped budgets.
    """

    kind: StrategyKind
    b: int
    n_total: int
    rng_seed: int = 0
    delta: DeltaSchedule | None = None
    cutoff: int | None = None
    cutoff_fraction: float | None = None
    ref_rank: int | None = None

    def __post_init__(self) -> None:
        kind = StrategyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        b, n = self.b, self.n_total
        if b < 1:
            raise ValueError(f"budget must be positive, got {b}")
        if n < b:
            raise ValueError(f"stream of {n} cannot yield {b} selections")

        if kind is StrategyKind.FRM:
            if b < 2:
                raise ValueError("frm needs a budget of at least 2")
            rounds = n // b
            if rounds < 4:
                raise ValueError(
                    f"frm rounds of {rounds} instances are too short to learn from"
                )
            if self.cutoff is not None and not 1 <= self.cutoff < rounds:
                raise ValueError(
                    f"cutoff override must satisfy 1 <= cutoff < {rounds}, got {self.cutoff}"
                )
        elif kind is StrategyKind.OPTIMISTIC:
            learn = math.floor(n / math.e)
            if b > n - learn:
                raise ValueError(
                    f"budget {b} exceeds the {n - learn} instances after the learning phase"
                )
        elif kind is StrategyKind.MEAN:
            if n < b + 1:
                raise ValueError("mean-threshold needs one extra instance to bootstrap")
        elif kind is StrategyKind.SUBMODULAR:
            if n // b < 2:
                raise ValueError(f"subsequences of {n // b} instances are too short")
        elif kind is StrategyKind.SINGLE_REF:
            fraction, rank = self.cutoff_fraction, self.ref_rank
            if fraction is None or rank is None:
                if b not in SINGLE_REF_DEFAULTS:
                    raise ValueError(
                        f"no tuned single_ref parameters for budget {b}; "
                        "pass cutoff_fraction and ref_rank explicitly"
                    )
                default_fraction, default_rank = SINGLE_REF_DEFAULTS[b]
                fraction = fraction if fraction is not None else default_fraction
                rank = rank if rank is not None else default_rank
                object.__setattr__(self, "cutoff_fraction", fraction)
                object.__setattr__(self, "ref_rank", rank)
            if not 0.0 < fraction < 1.0:
                raise ValueError(f"cutoff fraction must be in (0, 1), got {fraction}")
            cutoff_size = math.floor(fraction * n)
            if not 1 <= rank <= cutoff_size:
                raise ValueError(
                    f"reference rank {rank} outside the learning phase of {cutoff_size}"
                )
        elif kind is StrategyKind.SIMPLEK:
            if n < 2 * b:
                raise ValueError(f"simplek stores half the stream; need n >= {2 * b}")
        elif kind is StrategyKind.DYN_SIMPLEK:
            if n < 2 * b + 2:
                raise ValueError(f"dyn_simplek needs n >= {2 * b + 2}, got {n}")


@runtime_checkable
class Policy(Protocol):
    """Per-stream decision maker; single use, strictly sequential."""

    def first_selection_position(self) -> int:
        """1-based stream position the engine accepts automatically."""
        ...

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        """Verdict for step ``j`` given its current score and vector."""
        ...

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        """Called after every acceptance, whoever made it."""
        ...


class PrefixThreshold:
    """Record scores through a learning prefix; serve rank-th-best thresholds.

    The rank-th best of fewer than ``rank`` observations falls back to the
    worst observation; with no observations at all the threshold is +inf
    (nothing can beat it, the forced-fill rule takes over at the tail).
    """

    def __init__(self) -> None:
        self._scores: list[float] = []
        self._sorted: list[float] | None = None

    def observe(self, score: float) -> None:
        self._scores.append(score)
        self._sorted = None

    def kth_best(self, rank: int) -> float:
        if rank < 1:
            raise ValueError(f"rank must be positive, got {rank}")
        if not self._scores:
            return math.inf
        if self._sorted is None:
            self._sorted = sorted(self._scores, reverse=True)
        return self._sorted[min(rank, len(self._sorted)) - 1]

    def __len__(self) -> int:
        return len(self._scores)
