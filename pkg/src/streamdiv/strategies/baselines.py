"""Comparison strategies: recursive-halving, optimistic, mean-threshold,
per-subsequence secretary, and single-reference-rank selection.

All of them receive scores computed by the engine against the current
selected set, are consulted only while the budget is open and the stream
is not in the forced-fill regime, and learn thresholds from score values
recorded at observation time (never recomputed later).  The mean-threshold
strategy is the one exception: its threshold is the mean of the selected
set's leave-one-out scores, recomputed after every acceptance.
"""

from __future__ import annotations

import math

import numpy as np

from streamdiv.metrics import distances_to
from streamdiv.strategies.base import Decision, PrefixThreshold

__all__ = [
    "KleinbergPolicy",
    "OptimisticPolicy",
    "MeanPolicy",
    "SubmodularPolicy",
    "SingleRefPolicy",
]


class KleinbergPolicy:
    """Recursive halving: budget and prefix both halve, level by level.

    Level 0 spans the whole stream with the full budget.  Each deeper level
    spans a Binomial(previous length, 1/2) prefix with half the budget,
    down to budget 1; the automatic first acceptance consumes that
    innermost slot (and counts toward every enclosing budget, since the
    segments are nested prefixes).  Once a level's child prefix has ended,
    the level accepts any instance whose score beats the child-budget-th
    best score observed inside the child prefix, while its own budget has
    room.  An undersized child prefix falls back to its worst observed
    score; an empty one to +inf.
    """

    def __init__(self, n_total: int, b: int, rng: np.random.Generator) -> None:
        self.n_total = n_total
        self.b = b
        ends = [n_total]
        budgets = [b]
        while budgets[-1] > 1:
            ends.append(int(rng.binomial(ends[-1], 0.5)))
            budgets.append(budgets[-1] // 2)
        self.ends = ends  # ends[0] = N >= ends[1] >= ...
        self.budgets = budgets  # budgets[-1] == 1 (== b when b == 1)
        self._prefix_scores: list[list[float]] = [[] for _ in ends]
        self._thresholds: dict[int, float] = {}
        self._accepted = 0

    def first_selection_position(self) -> int:
        return 1

    def _level_of(self, j: int) -> int:
        """Deepest level whose segment still contains ``j``."""
        level = 0
        while level + 1 < len(self.ends) and j <= self.ends[level + 1]:
            level += 1
        return level

    def _threshold(self, level: int) -> float:
        """Frozen threshold for phase-B of ``level``: child-budget-th best."""
        if level not in self._thresholds:
            child_scores = self._prefix_scores[level + 1]
            if not child_scores:
                self._thresholds[level] = math.inf
            else:
                rank = self.budgets[level + 1]
                ordered = sorted(child_scores, reverse=True)
                self._thresholds[level] = ordered[min(rank, len(ordered)) - 1]
        return self._thresholds[level]

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        # record the score for every segment the position falls in
        for level, end in enumerate(self.ends):
            if j <= end:
                self._prefix_scores[level].append(score)
        level = self._level_of(j)
        if level == len(self.ends) - 1:
            # innermost segment: its single slot went to the first instance
            return Decision(accept=False)
        threshold = self._threshold(level)
        if self._accepted < self.budgets[level] and score > threshold:
            return Decision(accept=True, threshold=threshold)
        return Decision(accept=False, threshold=None if math.isinf(threshold) else threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        self._accepted += 1


class OptimisticPolicy:
    """One learning phase, then thresholds that step down rank by rank.

    Rejects positions 2..floor(N/e) while recording their scores.  With
    ``k`` instances accepted so far (the automatic first one included),
    the threshold is the (b-k)-th best recorded score, so it starts at the
    (b-1)-th best and tightens to the best as slots fill.
    """

    def __init__(self, n_total: int, b: int) -> None:
        self.n_total = n_total
        self.b = b
        self.learn_end = math.floor(n_total / math.e)
        self._prefix = PrefixThreshold()
        self._accepted = 0

    def first_selection_position(self) -> int:
        return 1

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        if j <= self.learn_end:
            self._prefix.observe(score)
            return Decision(accept=False)
        threshold = self._prefix.kth_best(self.b - self._accepted)
        if score > threshold:
            return Decision(accept=True, threshold=threshold)
        return Decision(accept=False, threshold=None if math.isinf(threshold) else threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        self._accepted += 1


class MeanPolicy:
    """Accept anything scoring above the mean of past acceptance scores.

    The second instance is always rejected and its distance to the first
    becomes the first's score (the bootstrap).  Every later acceptance
    contributes the score it arrived with; the score a selected instance
    carries never changes afterwards, so the threshold moves by averaging
    rather than jumping to the newest record.
    """

    def __init__(self, n_total: int, b: int) -> None:
        self.n_total = n_total
        self.b = b
        self._selected: list[np.ndarray] = []
        self._scores: list[float] = []

    def first_selection_position(self) -> int:
        return 1

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        if j == 2:
            # the offered score is exactly the distance to the first instance
            self._scores = [score]
            return Decision(accept=False)
        threshold = sum(self._scores) / len(self._scores)
        return Decision(accept=score > threshold, threshold=threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        if self._selected:
            self._scores.append(
                float(np.min(distances_to(np.stack(self._selected), x)))
            )
        self._selected.append(x)


class SubmodularPolicy:
    """Classic secretary inside each of ``b`` equal subsequences.

    Every subsequence rejects its first floor(N/(b*e)) instances, then
    accepts the first score strictly above that prefix's maximum; its last
    instance is accepted by default (forced) if nothing qualified.  The
    first subsequence is satisfied by the automatic first acceptance.
    """

    def __init__(self, n_total: int, b: int) -> None:
        self.n_total = n_total
        self.b = b
        self.round_length = n_total // b
        if self.round_length < 2:
            raise ValueError(f"subsequences of {self.round_length} are too short")
        self.learn_length = math.floor(n_total / (b * math.e))
        self._current_round = 0
        self._prefix_max = -math.inf
        self._satisfied = False

    def first_selection_position(self) -> int:
        return 1

    def _locate(self, j: int) -> tuple[int, int, int]:
        r = min((j - 1) // self.round_length + 1, self.b)
        start = (r - 1) * self.round_length + 1
        length = (self.n_total - start + 1) if r == self.b else self.round_length
        return r, j - start + 1, length

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        r, pos, length = self._locate(j)
        if r == 1:
            return Decision(accept=False)
        if r != self._current_round:
            self._current_round = r
            self._prefix_max = -math.inf
            self._satisfied = False
        if self._satisfied:
            return Decision(accept=False)
        if pos <= self.learn_length:
            self._prefix_max = max(self._prefix_max, score)
            return Decision(accept=False)
        threshold = self._prefix_max
        if score > threshold:
            return Decision(
                accept=True, threshold=None if math.isinf(threshold) else threshold
            )
        if pos == length:
            return Decision(
                accept=True,
                threshold=None if math.isinf(threshold) else threshold,
                forced=True,
            )
        return Decision(accept=False, threshold=None if math.isinf(threshold) else threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        r, _, _ = self._locate(j)
        if r == self._current_round:
            self._satisfied = True


class SingleRefPolicy:
    """One learning phase, one fixed reference-rank threshold.

    Rejects the first floor(fraction*N) instances, then accepts anything
    strictly above the ref_rank-th best recorded learning score until the
    budget is filled.
    """

    def __init__(self, n_total: int, b: int, cutoff_fraction: float, ref_rank: int) -> None:
        if not 0.0 < cutoff_fraction < 1.0:
            raise ValueError(f"cutoff fraction must be in (0, 1), got {cutoff_fraction}")
        self.n_total = n_total
        self.b = b
        self.learn_end = math.floor(cutoff_fraction * n_total)
        if not 1 <= ref_rank <= self.learn_end:
            raise ValueError(
                f"reference rank {ref_rank} outside the learning phase of {self.learn_end}"
            )
        self.ref_rank = ref_rank
        self._prefix = PrefixThreshold()

    def first_selection_position(self) -> int:
        return 1

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        if j <= self.learn_end:
            self._prefix.observe(score)
            return Decision(accept=False)
        threshold = self._prefix.kth_best(self.ref_rank)
        if score > threshold:
            return Decision(accept=True, threshold=threshold)
        return Decision(accept=False, threshold=None if math.isinf(threshold) else threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        pass
