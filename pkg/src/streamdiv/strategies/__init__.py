"""Decision strategies: round-threshold selection plus the comparison field.

``make_policy`` turns a validated ``StrategyConfig`` into a fresh,
single-use policy instance for one stream run.
"""

from __future__ import annotations

from streamdiv.seeding import generator
from streamdiv.strategies.base import (
    SINGLE_REF_DEFAULTS,
    Decision,
    Policy,
    PrefixThreshold,
    StrategyConfig,
    StrategyKind,
)
from streamdiv.strategies.baselines import (
    KleinbergPolicy,
    MeanPolicy,
    OptimisticPolicy,
    SingleRefPolicy,
    SubmodularPolicy,
)
from streamdiv.strategies.frm import FrmPolicy, FrmRoundState, RoundOutcome, frm_round
from streamdiv.strategies.simplek import (
    DynSimplekPolicy,
    SimplekPolicy,
    simplek_offline_threshold,
)

__all__ = [
    "StrategyKind",
    "StrategyConfig",
    "Decision",
    "Policy",
    "PrefixThreshold",
    "SINGLE_REF_DEFAULTS",
    "FrmPolicy",
    "FrmRoundState",
    "RoundOutcome",
    "frm_round",
    "KleinbergPolicy",
    "OptimisticPolicy",
    "MeanPolicy",
    "SubmodularPolicy",
    "SingleRefPolicy",
    "SimplekPolicy",
    "DynSimplekPolicy",
    "simplek_offline_threshold",
    "make_policy",
]


def make_policy(config: StrategyConfig) -> Policy:
    """Fresh policy instance for one run of ``config``."""
    kind = config.kind
    if kind is StrategyKind.FRM:
        return FrmPolicy(
            config.n_total, config.b, delta=config.delta, cutoff=config.cutoff
        )
    if kind is StrategyKind.KLEINBERG:
        rng = generator(config.rng_seed, "kleinberg")
        return KleinbergPolicy(config.n_total, config.b, rng)
    if kind is StrategyKind.OPTIMISTIC:
        return OptimisticPolicy(config.n_total, config.b)
    if kind is StrategyKind.MEAN:
        return MeanPolicy(config.n_total, config.b)
    if kind is StrategyKind.SUBMODULAR:
        return SubmodularPolicy(config.n_total, config.b)
    if kind is StrategyKind.SINGLE_REF:
        return SingleRefPolicy(
            config.n_total, config.b, config.cutoff_fraction, config.ref_rank
        )
    if kind is StrategyKind.SIMPLEK:
        return SimplekPolicy(config.n_total, config.b)
    if kind is StrategyKind.DYN_SIMPLEK:
        return DynSimplekPolicy(config.n_total, config.b)
    raise ValueError(f"unknown strategy kind: {config.kind!r}")
