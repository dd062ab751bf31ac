"""Offline references: exact max-min selection by enumeration for small
inputs, and the farthest-point greedy approximation for larger ones.

Positions are 1-based, matching decision-trace positions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

__all__ = ["OracleResult", "brute_force", "greedy_maxmin", "ENUMERATION_CAP"]

ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    """A selection, its min pairwise distance, and how it was found."""

    positions: tuple[int, ...]
    optimum: float
    method: str  # "exact" or "greedy"


def _as_batch(points, b: int) -> np.ndarray:
    batch = np.asarray(points, dtype=float)
    if batch.ndim == 1:
        batch = batch.reshape(-1, 1)
    if batch.ndim != 2:
        raise ValueError(f"points must form a 2-d array, got ndim={batch.ndim}")
    if b < 2:
        raise ValueError(f"a selection of {b} has no pairwise distance to maximize")
    if len(batch) < b:
        raise ValueError(f"cannot select {b} from {len(batch)} points")
    if not np.all(np.isfinite(batch)):
        raise ValueError("points contain non-finite values")
    return batch


def brute_force(points, b: int, *, cap: int = ENUMERATION_CAP) -> OracleResult:
    """Exact optimum by enumerating every size-``b`` subset in lexicographic
    order; the first subset attaining the maximum wins ties, so the result
    is the lexicographically smallest optimal position set.
    """
    batch = _as_batch(points, b)
    n = len(batch)
    subsets = math.comb(n, b)
    if subsets > cap:
        raise ValueError(
            f"{subsets} subsets exceed the enumeration cap of {cap}; "
            "use greedy_maxmin for inputs this large"
        )
    dist = squareform(pdist(batch))
    best_value = -math.inf
    best_combo: tuple[int, ...] | None = None
    for combo in itertools.combinations(range(n), b):
        value = min(dist[i][j] for i, j in itertools.combinations(combo, 2))
        if value > best_value:
            best_value = value
            best_combo = combo
    assert best_combo is not None
    return OracleResult(
        positions=tuple(i + 1 for i in best_combo),
        optimum=float(best_value),
        method="exact",
    )


def greedy_maxmin(points, b: int) -> OracleResult:
    """Farthest-point approximation: start from the most distant pair, then
    repeatedly add the point farthest from the current selection (ties to
    the smallest index).  On metric inputs the result is at least half the
    exact optimum.
    """
    batch = _as_batch(points, b)
    n = len(batch)
    dist = squareform(pdist(batch))
    # lexicographically first pair realizing the maximum distance
    iu, ju = np.triu_indices(n, k=1)
    flat_best = int(np.argmax(dist[iu, ju]))
    i, j = int(iu[flat_best]), int(ju[flat_best])
    chosen = [i, j]
    dmin = np.minimum(dist[i], dist[j])
    while len(chosen) < b:
        dmin[chosen] = -math.inf
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        np.minimum(dmin, dist[nxt], out=dmin)
    chosen.sort()
    value = min(dist[a][c] for a, c in itertools.combinations(chosen, 2))
    return OracleResult(
        positions=tuple(i + 1 for i in chosen),
        optimum=float(value),
        method="greedy",
    )
