"""Distance and score primitives for online max-min selection.

Definitions
-----------
- candidate score of an arriving instance: its minimum Euclidean distance
  to the instances selected so far.
- selected score of an already-selected instance: its minimum distance to
  the *other* selected instances (leave-one-out).
- reward of a finished run: the minimum selected score, which equals the
  minimum pairwise distance within the selected set.
- failure at step ``j``: the stream is about to run out of room, i.e. the
  number of remaining instances (``N - j + 1``) equals the number of empty
  slots (``b - k``), so everything left must be accepted by default.

All distance computations funnel through :func:`distances_to` so that the
incremental path used by the engine and the from-scratch path used in
tests and replay agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Instance",
    "SelectionState",
    "distances_to",
    "distance",
    "mindist_between",
    "mindist_within",
    "candidate_score",
    "selected_score",
    "selection_state",
    "reward",
    "is_failure",
    "failure_rate",
]


@dataclass(frozen=True)
class Instance:
    """One stream element: a 1-based stream position and its vector."""

    id: int
    vector: np.ndarray

    def __post_init__(self) -> None:
        vec = np.asarray(self.vector, dtype=float)
        if vec.ndim != 1:
            raise ValueError(f"instance vector must be 1-d, got shape {vec.shape}")
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class SelectionState:
    """Selected instances (in stream order) and their leave-one-out scores.

    ``selected_scores[l]`` is the minimum distance from ``selected[l]`` to
    the other selected instances; for a singleton selection the score is
    ``inf`` (no pair constraint yet).
    """

    selected: tuple[Instance, ...]
    selected_scores: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.selected)

    def matrix(self) -> np.ndarray:
        return np.stack([inst.vector for inst in self.selected])


def distances_to(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Euclidean distances from each row of ``points`` to the vector ``x``.

    Parameters
    ----------
    points : (m, d) array
    x : (d,) array

    Returns
    -------
    (m,) array of distances.
    """
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    if points.ndim != 2 or x.ndim != 1 or points.shape[1] != x.shape[0]:
        raise ValueError(
            f"shape mismatch: points {points.shape} vs vector {x.shape}"
        )
    diff = points - x
    return np.sqrt(np.sum(diff * diff, axis=1))


def distance(a: np.ndarray | Instance, b: np.ndarray | Instance) -> float:
    """Euclidean distance between two vectors (or instances)."""
    va = a.vector if isinstance(a, Instance) else np.asarray(a, dtype=float)
    vb = b.vector if isinstance(b, Instance) else np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(va)) and np.all(np.isfinite(vb))):
        raise ValueError("distance requires finite vectors")
    return float(distances_to(va.reshape(1, -1), vb)[0])


def _vectors(group: Iterable[np.ndarray | Instance]) -> list[np.ndarray]:
    return [
        g.vector if isinstance(g, Instance) else np.asarray(g, dtype=float)
        for g in group
    ]


def mindist_between(
    group_a: Iterable[np.ndarray | Instance],
    group_b: Iterable[np.ndarray | Instance],
) -> float:
    """Minimum distance over all cross pairs (a, b), a in A, b in B."""
    va, vb = _vectors(group_a), _vectors(group_b)
    if not va or not vb:
        raise ValueError("mindist_between requires two nonempty groups")
    mat = np.stack(va)
    return float(min(np.min(distances_to(mat, x)) for x in vb))


def mindist_within(group: Iterable[np.ndarray | Instance]) -> float:
    """Minimum pairwise distance within a group of at least two vectors."""
    vecs = _vectors(group)
    if len(vecs) < 2:
        raise ValueError("mindist_within requires at least two vectors")
    mat = np.stack(vecs)
    best = math.inf
    for i in range(1, len(vecs)):
        best = min(best, float(np.min(distances_to(mat[:i], mat[i]))))
    return best


def candidate_score(state: SelectionState, x: np.ndarray | Instance) -> float:
    """Score of an arriving instance: min distance to the selected set."""
    if state.k == 0:
        raise ValueError("candidate_score is undefined for an empty selection")
    vx = x.vector if isinstance(x, Instance) else np.asarray(x, dtype=float)
    return float(np.min(distances_to(state.matrix(), vx)))


def selected_score(state: SelectionState, l: int) -> float:
    """Leave-one-out score of ``state.selected[l]`` against the others."""
    if state.k < 2:
        raise ValueError("selected_score requires at least two selected instances")
    if not 0 <= l < state.k:
        raise IndexError(f"selected index {l} out of range for k={state.k}")
    mat = state.matrix()
    others = np.delete(mat, l, axis=0)
    return float(np.min(distances_to(others, mat[l])))


def selection_state(instances: Sequence[Instance]) -> SelectionState:
    """Build a SelectionState, computing leave-one-out scores from scratch."""
    selected = tuple(instances)
    if len(selected) == 0:
        return SelectionState(selected=(), selected_scores=())
    if len(selected) == 1:
        return SelectionState(selected=selected, selected_scores=(math.inf,))
    state = SelectionState(selected=selected, selected_scores=())
    scores = tuple(selected_score(state, l) for l in range(len(selected)))
    return SelectionState(selected=selected, selected_scores=scores)


def reward(trace) -> float:
    """Final reward of a completed run: min pairwise distance of its selection.

    Accepts any object carrying ``b``, ``positions`` and ``selected_vectors``
    (a decision trace).  Undefined (NaN) for single-instance budgets.
    """
    if len(trace.positions) != trace.b:
        raise ValueError(
            f"trace is incomplete: {len(trace.positions)} acceptances for budget {trace.b}"
        )
    if trace.b < 2:
        return math.nan
    return mindist_within(np.asarray(trace.selected_vectors))


def is_failure(j: int, n_total: int, k: int, b: int) -> bool:
    """True when step ``j`` is a by-default acceptance: remaining == needed.

    ``n_total`` is the stream length, ``k`` the number selected before step
    ``j``, ``b`` the budget.
    """
    if not 1 <= j <= n_total:
        raise ValueError(f"step {j} outside stream of length {n_total}")
    if not 0 <= k <= b:
        raise ValueError(f"selected count {k} outside budget {b}")
    return n_total - j + 1 == b - k


def failure_rate(flags: Iterable[bool]) -> float:
    """Fraction of trials flagged as failed, in [0, 1]."""
    flags = list(flags)
    if not flags:
        raise ValueError("failure_rate requires at least one trial flag")
    return sum(bool(f) for f in flags) / len(flags)
