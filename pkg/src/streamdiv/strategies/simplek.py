"""Store-half strategies: a static offline-computed threshold, and a
dynamic variant that mixes it with an empirical-quantile threshold.

Both reject the whole first half of the stream (storing it), start
selecting at position floor(N/2)+1 (the engine's automatic acceptance is
moved there), and accept on score >= threshold (non-strict, unlike every
other strategy here).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

from streamdiv.metrics import distances_to
from streamdiv.strategies.base import Decision

__all__ = [
    "simplek_offline_threshold",
    "SimplekPolicy",
    "DynSimplekPolicy",
]


def _greedy_accepts(points: np.ndarray, gamma: float, stop_at: int) -> int:
    """Count a left-to-right greedy pass: accept the first instance, then
    every instance at distance >= gamma from all accepted so far.

    Stops counting at ``stop_at`` acceptances.  Between two acceptances the
    accepted set is constant, so the next acceptance is the first index
    whose current min-distance reaches gamma; everything skipped over was
    genuinely rejected.
    """
    n = len(points)
    dmin = distances_to(points, points[0])
    count = 1
    ptr = 1
    while count < stop_at and ptr < n:
        qualifying = dmin[ptr:] >= gamma
        offset = int(np.argmax(qualifying))
        if not qualifying[offset]:
            break
        idx = ptr + offset
        count += 1
        ptr = idx + 1
        if count < stop_at and ptr < n:
            np.minimum(dmin, distances_to(points, points[idx]), out=dmin)
    return count


def simplek_offline_threshold(stored: np.ndarray, b: int) -> float:
    """Largest pairwise distance of ``stored`` that still lets a greedy
    left-to-right pass (accept first; accept anything at distance >= gamma
    from all accepted) pick at least ``b`` instances.

    Found by binary search over the sorted distinct pairwise distances.
    The smallest pairwise distance always qualifies (every instance gets
    accepted there), so the search never comes back empty.
    """
    points = np.asarray(stored, dtype=float)
    if points.ndim != 2:
        raise ValueError(f"stored instances must be a 2-d array, got ndim={points.ndim}")
    if b < 1:
        raise ValueError(f"budget must be positive, got {b}")
    if len(points) < b:
        raise ValueError(f"cannot select {b} from {len(points)} stored instances")
    if len(points) < 2:
        raise ValueError("need at least two stored instances to form a threshold")
    values = np.unique(pdist(points))
    lo = 0  # values[0] = min pairwise distance: feasible by construction
    hi = len(values)
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _greedy_accepts(points, float(values[mid]), b) >= b:
            lo = mid
        else:
            hi = mid
    return float(values[lo])


class SimplekPolicy:
    """Static store-half strategy: one offline threshold for the whole
    selection phase, accept on score >= threshold.
    """

    def __init__(self, n_total: int, b: int) -> None:
        self.n_total = n_total
        self.b = b
        self.half = n_total // 2
        self._stored: np.ndarray | None = None
        self._gamma_off: float | None = None

    def first_selection_position(self) -> int:
        return self.half + 1

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        if j <= self.half:
            if self._stored is None:
                self._stored = np.empty((self.half, x.shape[0]))
            self._stored[j - 1] = x
            return Decision(accept=False)
        if self._gamma_off is None:
            self._gamma_off = simplek_offline_threshold(self._stored, self.b)
        threshold = self._gamma_off
        if score >= threshold:
            return Decision(accept=True, threshold=threshold)
        return Decision(accept=False, threshold=threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        pass


class DynSimplekPolicy:
    """Dynamic store-half strategy: threshold = min(offline threshold,
    empirical quantile chosen so the expected number of qualifying future
    arrivals matches the open budget).

    The quantile is taken over the candidate scores (min distance to the
    current selected set) of every stored instance and every second-half
    arrival seen so far, the current one included, selected ones excluded.
    Those scores are maintained incrementally: each acceptance can only
    lower them, by the distance to the newly selected vector.
    """

    def __init__(self, n_total: int, b: int) -> None:
        self.n_total = n_total
        self.b = b
        self.half = n_total // 2
        self._vecs: np.ndarray | None = None  # pool vectors, first `count` rows live
        self._mins = np.empty(n_total)  # pool candidate scores, aligned with _vecs
        self._count = 0
        self._accepted = 0
        self._gamma_off: float | None = None

    def first_selection_position(self) -> int:
        return self.half + 1

    def decide(self, j: int, score: float, x: np.ndarray) -> Decision:
        if j <= self.half:
            if self._vecs is None:
                self._vecs = np.empty((self.n_total, x.shape[0]))
            self._vecs[self._count] = x
            self._count += 1
            return Decision(accept=False)
        if self._gamma_off is None:
            self._gamma_off = simplek_offline_threshold(self._vecs[: self.half], self.b)
        open_budget = self.b - self._accepted
        future = self.n_total - j
        if open_budget >= future:
            gamma_j = 0.0  # more slots than arrivals left: any score qualifies
        else:
            pool = self._count + 1  # current arrival counts as seen
            rank = (pool * open_budget + future - 1) // future  # ceil, >= 1
            scores = np.append(self._mins[: self._count], score)
            gamma_j = float(np.partition(scores, pool - rank)[pool - rank])
        threshold = min(self._gamma_off, gamma_j)
        if score >= threshold:
            return Decision(accept=True, threshold=threshold)
        self._vecs[self._count] = x
        self._mins[self._count] = score
        self._count += 1
        return Decision(accept=False, threshold=threshold)

    def notify_accept(self, j: int, x: np.ndarray) -> None:
        live = self._mins[: self._count]
        fresh = distances_to(self._vecs[: self._count], x)
        if self._accepted == 0:
            live[:] = fresh
        else:
            np.minimum(live, fresh, out=live)
        self._accepted += 1
