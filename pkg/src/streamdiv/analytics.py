"""Closed-form quantities behind the threshold-relaxing selection rule.

For a learning cutoff ``c`` inside a round of length ``n``:

- ``expected_rank(n, b, c)`` is the closed-form estimate ``b (n + b) / (c + b)``
  of the final rank of the learned threshold when ``b`` instances are chosen.
  It is exact for ``b = 1`` (single pick per round) and for ``c = n``.
- ``acceptance_mean(j, c, n)`` is the probability that the round has accepted
  by step ``j`` under the single-pick rule, with ``gamma = (n + 1) / (c + 1)``
  and ``q = 1 - (gamma - 1) / n``:

      mu_j = (1 - q**(j - c)) / (1 - q**(n - c))

  normalised so that ``mu_c = 0`` and ``mu_n = 1`` hold exactly in floats.
- ``acceptance_std`` is the Bernoulli deviation ``sqrt(mu (1 - mu))``.
- ``switch_index(c, n)`` is the first step at which the acceptance
  probability reaches one half; before it a static threshold is safe,
  from it onward the threshold should start relaxing.

``DeltaSchedule`` gives the per-step relaxation amount: a constant single
rank per step, or an exponential ramp that stays at zero for a long
plateau and then grows sharply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "expected_rank",
    "acceptance_mean",
    "acceptance_std",
    "switch_index",
    "learning_cutoff",
    "DeltaSchedule",
    "RoundParams",
]

# e**700 is near the float64 overflow edge; the schedule saturates there.
_EXP_CAP = 700.0


def _check_cutoff(c: int, n: int) -> None:
    if n < 2:
        raise ValueError(f"round length must be at least 2, got {n}")
    if not 1 <= c < n:
        raise ValueError(f"cutoff must satisfy 1 <= c < n, got c={c}, n={n}")


def expected_rank(n: int, b: int, c: int, *, allow_small_sample: bool = False) -> float:
    """Closed-form rank estimate ``b (n + b) / (c + b)``.

    Estimates the absolute rank (1 = best) of the ``b``-th best value in a
    uniform sample of ``c`` items from a ranked pool of ``n``.  Exact for
    ``b = 1``; for larger ``b`` it is an approximation.  A sample smaller
    than ``b`` has no ``b``-th best, so ``c < b`` is rejected unless
    ``allow_small_sample`` opts in to evaluating the bare formula anyway.
    """
    if b < 1:
        raise ValueError(f"budget must be positive, got {b}")
    if n < 1 or not 1 <= c <= n:
        raise ValueError(f"need 1 <= c <= n with n >= 1, got c={c}, n={n}")
    if c < b and not allow_small_sample:
        raise ValueError(f"sample size {c} smaller than budget {b}")
    return b * (n + b) / (c + b)


def _log_q(c: int, n: int) -> float:
    gamma = (n + 1) / (c + 1)
    q = 1.0 - (gamma - 1.0) / n
    # 1 <= c < n keeps q strictly inside (0, 1).
    return math.log(q)


def acceptance_mean(j: int, c: int, n: int) -> float:
    """Probability the round has accepted by step ``j`` (cutoff ``c``, length ``n``).

    Defined for ``c <= j <= n``; equals 0 at ``j = c`` and 1 at ``j = n``
    exactly, and is nondecreasing in ``j``.
    """
    _check_cutoff(c, n)
    if not c <= j <= n:
        raise ValueError(f"step must satisfy c <= j <= n, got j={j}, c={c}, n={n}")
    log_q = _log_q(c, n)
    # 1 - q**m as -expm1(m log q): accurate near both endpoints and
    # monotone in m, which makes the ratio monotone in j.
    num = -math.expm1((j - c) * log_q)
    den = -math.expm1((n - c) * log_q)
    return num / den


def acceptance_std(j: int, c: int, n: int) -> float:
    """Bernoulli standard deviation ``sqrt(mu (1 - mu))`` at step ``j``."""
    mu = acceptance_mean(j, c, n)
    return math.sqrt(mu * (1.0 - mu))


def switch_index(c: int, n: int) -> int:
    """Smallest step ``j`` with ``acceptance_mean(j, c, n) >= 1/2``.

    Always lies in ``(c, n]`` because the mean starts at 0 and ends at 1.
    """
    _check_cutoff(c, n)
    lo, hi = c, n  # invariant: mu(lo) < 1/2 <= mu(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if acceptance_mean(mid, c, n) >= 0.5:
            hi = mid
        else:
            lo = mid
    return hi


def learning_cutoff(n: int) -> int:
    """Learning-phase length for a round of ``n`` instances: ``max(1, isqrt(n) - 1)``.

    ``isqrt(n) - 1`` equals ``floor(sqrt(n) - 1)`` exactly for integer ``n``.
    Rounds shorter than 4 leave no room for a learning phase and are rejected.
    """
    if n < 4:
        raise ValueError(f"round too short for a learning phase: {n}")
    return max(1, math.isqrt(n) - 1)


@dataclass(frozen=True)
class DeltaSchedule:
    """Per-step threshold relaxation amount.

    kind="constant": one rank per step.
    kind="exponential": ``max(0, floor(exp((j - shift) / scale)))`` ranks at
    step ``j``; zero through the plateau, then a sharp ramp.  ``shift`` and
    ``scale`` are only meaningful for the exponential kind.
    """

    kind: str = "constant"
    shift: float = 412.0
    scale: float = 72.0

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "exponential"):
            raise ValueError(f"unknown schedule kind: {self.kind!r}")
        if self.kind == "exponential" and self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def at(self, j: int) -> int:
        """Relaxation amount (ranks to drop) at step ``j`` of a round."""
        if self.kind == "constant":
            return 1
        exponent = min((j - self.shift) / self.scale, _EXP_CAP)
        return max(0, math.floor(math.exp(exponent)))


@dataclass(frozen=True)
class RoundParams:
    """Parameters of one selection round.

    ``n`` is the round length, ``c`` the learning cutoff, ``switch`` the
    step at which the threshold starts relaxing, ``delta`` the per-step
    relaxation schedule.  ``switch`` always lies past the learning phase;
    a value above ``n`` is allowed and means the threshold never relaxes.
    The canonical parameters come from :meth:`solved`, which puts the
    switch at the first step where the acceptance probability reaches 1/2.
    """

    n: int
    c: int
    switch: int
    delta: DeltaSchedule

    def __post_init__(self) -> None:
        _check_cutoff(self.c, self.n)
        if self.switch < self.c + 1:
            raise ValueError(
                f"switch must come after the learning phase: switch={self.switch}, c={self.c}"
            )

    @classmethod
    def solved(
        cls,
        n: int,
        c: int | None = None,
        delta: DeltaSchedule | None = None,
    ) -> "RoundParams":
        """Round parameters with the default cutoff and the solved switch."""
        if c is None:
            c = learning_cutoff(n)
        return cls(
            n=n,
            c=c,
            switch=switch_index(c, n),
            delta=delta if delta is not None else DeltaSchedule(),
        )
