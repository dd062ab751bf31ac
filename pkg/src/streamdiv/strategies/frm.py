"""Round-based threshold selection with a relaxing threshold (the frm strategy).

The stream is split into ``b`` rounds of ``n = N // b`` instances (the
remainder extends the last round) and each round contributes exactly one
selection.  Round 1 is satisfied by the automatic first acceptance.  Every
later round:

1. rejects its first ``c`` instances and records the best score seen (the
   learning phase);
2. then accepts the first instance whose score strictly beats the current
   threshold.  The threshold starts at the learning-phase best and stays
   there while acceptance is still likely; from the round's switch step
   onward it relaxes: each step it slides ``delta(step)`` positions down
   the descending list of scores seen so far in the round (the slide
   accumulates across steps, and the instance under decision joins the
   list only after its verdict);
3. accepts the round's last instance by default, marked forced, if nothing
   beat the threshold.
"""

from __future__ import annotations

import math
from bisect import bisect_right, insort
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from streamdiv.analytics import DeltaSchedule, RoundParams, learning_cutoff, switch_index
from streamdiv.strategies.base import Decision

__all__ = ["FrmRoundState", "RoundOutcome", "frm_round", "FrmPolicy"]


class FrmRoundState:
    """Sequential stepper for one round; feed scores, get decisions."""

    def __init__(self, params: RoundParams) -> None:
        self.params = params
        self.pos = 0
        self.tau = -math.inf
        self.theta: float | None = None
        self._seen: list[float] = []  # ascending

    def step(self, score: float) -> Decision:
        self.pos += 1
        pos, p = self.pos, self.params
        if pos > p.n:
            raise ValueError(f"round of {p.n} stepped {pos} times")
        last = pos == p.n

        if pos <= p.c:
            self.tau = max(self.tau, score)
            insort(self._seen, score)
            if last:  # cannot happen with c < n; guard for safety
                return Decision(accept=True, threshold=None, forced=True)
            return Decision(accept=False)

        if self.theta is None:
            self.theta = self.tau
        if pos >= p.switch:
            drop = p.delta.at(pos)
            if drop > 0:
                seen = self._seen
                # descending rank of theta, first occurrence on ties
                rank = len(seen) - bisect_right(seen, self.theta) + 1
                idx = min(rank + drop, len(seen))
                self.theta = seen[len(seen) - idx]

        threshold = self.theta
        if score > threshold:
            decision = Decision(accept=True, threshold=threshold)
        elif last:
            decision = Decision(accept=True, threshold=threshold, forced=True)
        else:
            decision = Decision(accept=False, threshold=threshold)
        insort(self._seen, score)
        return decision


@dataclass(frozen=True)
class RoundOutcome:
    """Result of playing one round to its first acceptance."""

    decisions: tuple[Decision, ...]
    accept_position: int  # 1-based within the round
    forced: bool


def frm_round(scores: Iterable[float], params: RoundParams) -> RoundOutcome:
    """Play one round over ``scores``, stopping at the first acceptance.

    Scores are consumed strictly one at a time (no lookahead).  The round
    always ends in an acceptance: by threshold, or forced at the last step.
    """
    if params.n < 4:
        raise ValueError(f"round too short: {params.n}")
    state = FrmRoundState(params)
    decisions: list[Decision] = []
    for score in scores:
        decision = state.step(score)
        decisions.append(decision)
        if decision.accept:
            return RoundOutcome(
                decisions=tuple(decisions),
                accept_position=state.pos,
                forced=decision.forced,
            )
    raise ValueError(f"round ended after {state.pos} of {params.n} scores without accepting")


class FrmPolicy:
    """Stream policy running one ``FrmRoundState`` per round."""

    def __init__(
        self,
        n_total: int,
        b: int,
        delta: DeltaSchedule | None = None,
        cutoff: int | None = None,
    ) -> None:
        if b < 2:
            raise ValueError("frm needs a budget of at least 2")
        self.n_total = n_total
        self.b = b
        self.round_length = n_total // b
        if self.round_length < 4:
            raise ValueError(f"rounds of {self.round_length} are too short")
        self.delta = delta if delta is not None else DeltaSchedule()
        self.cutoff_override = cutoff
        self._current_round = 0
        self._state: FrmRoundState | None = None
        self._satisfied = False

    def _locate(self, j: int) -> tuple[int, int, int]:
        """Round number, 1-based position within it, and its length."""
        r = min((j - 1) // self.round_length + 1, self.b)
        start = (r - 1) * self.round_length + 1
        length = (self.n_total - start + 1) if r == self.b else self.round_length
        return r, j - start + 1, length

    def first_selection_position(self) -> int:
        return 1

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        r, pos, length = self._locate(j)
        if r == 1:  # satisfied by the automatic first acceptance
            return Decision(accept=False)
        if r != self._current_round:
            self._current_round = r
            c = self.cutoff_override
            if c is None:
                c = learning_cutoff(length)
            params = RoundParams(
                n=length, c=c, switch=switch_index(c, length), delta=self.delta
            )
            self._state = FrmRoundState(params)
            self._satisfied = False
        if self._satisfied:
            return Decision(accept=False)
        assert self._state is not None and self._state.pos == pos - 1
        return self._state.step(score)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        r, _, _ = self._locate(j)
        if r == self._current_round:
            self._satisfied = True
