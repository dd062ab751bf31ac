"""Strategy behaviors: configuration checks, per-policy hand references."""

import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from streamdiv import (
    DeltaSchedule,
    RoundParams,
    StrategyConfig,
    StrategyKind,
    generator,
    run,
    simplek_offline_threshold,
)
from streamdiv.strategies import (
    DynSimplekPolicy,
    KleinbergPolicy,
    PrefixThreshold,
    SingleRefPolicy,
    SubmodularPolicy,
    frm_round,
    make_policy,
)


def stream_1d(values):
    return np.asarray(values, dtype=float).reshape(-1, 1)


def accept_positions(trace):
    return tuple(j for j, d in enumerate(trace.decisions, start=1) if d.accept)


# ---------------------------------------------------------------- frm rounds


def constant_params(n, c, switch):
    return RoundParams(n=n, c=c, switch=switch, delta=DeltaSchedule())


def test_frm_round_accepts_above_learning_max():
    # switch past the round end: the threshold stays at the learning max
    outcome = frm_round([5.0, 3.0, 6.0, 2.0], constant_params(4, 1, 5))
    assert outcome.accept_position == 3
    assert not outcome.forced
    assert [d.accept for d in outcome.decisions] == [False, False, True]
    assert outcome.decisions[2].threshold == 5.0


def test_frm_round_forces_at_round_end():
    outcome = frm_round([5.0, 3.0, 2.0, 1.0], constant_params(4, 1, 5))
    assert outcome.accept_position == 4
    assert outcome.forced
    assert outcome.decisions[3].accept and outcome.decisions[3].forced


def test_frm_round_relaxation_walks_through_ties():
    # after the switch the threshold pointer drops one rank per step; with a
    # run of equal scores it stays on that value until something beats it
    scores = [4.0, 7.0, 5.0, 5.0, 5.0, 5.0, 5.0, 6.0, 1.0]
    outcome = frm_round(scores, constant_params(9, 2, 4))
    assert outcome.accept_position == 8
    assert not outcome.forced
    # step 3 is static (before the switch), steps 4+ relaxed to the 5.0 tie
    assert outcome.decisions[2].threshold == 7.0
    assert [d.threshold for d in outcome.decisions[3:]] == [5.0] * 5
    assert outcome.decisions[7].accept


def test_frm_round_rejects_short_rounds():
    with pytest.raises(ValueError):
        frm_round([1.0, 2.0, 3.0], constant_params(3, 1, 4))


def test_frm_round_requires_enough_scores():
    with pytest.raises(ValueError):
        frm_round([5.0, 3.0], constant_params(4, 1, 5))


# ------------------------------------------------------------ configuration


def test_config_accepts_string_kind():
    cfg = StrategyConfig(kind="frm", b=5, n_total=100)
    assert cfg.kind is StrategyKind.FRM


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="frm", b=0, n_total=10),
        dict(kind="frm", b=5, n_total=4),
        dict(kind="frm", b=1, n_total=100),
        dict(kind="frm", b=2, n_total=7),
        dict(kind="frm", b=2, n_total=100, cutoff=0),
        dict(kind="frm", b=2, n_total=100, cutoff=50),
        dict(kind="optimistic", b=8, n_total=10),
        dict(kind="mean", b=5, n_total=5),
        dict(kind="submodular", b=3, n_total=5),
        dict(kind="single_ref", b=7, n_total=100),
        dict(kind="single_ref", b=5, n_total=100, cutoff_fraction=1.5, ref_rank=1),
        dict(kind="single_ref", b=5, n_total=100, cutoff_fraction=0.25, ref_rank=26),
        dict(kind="simplek", b=5, n_total=9),
        dict(kind="dyn_simplek", b=5, n_total=11),
    ],
)
def test_config_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        StrategyConfig(**kwargs)


def test_config_fills_single_ref_defaults():
    cfg = StrategyConfig(kind="single_ref", b=5, n_total=100)
    assert (cfg.cutoff_fraction, cfg.ref_rank) == (0.2525, 2)
    cfg = StrategyConfig(kind="single_ref", b=50, n_total=1000)
    assert (cfg.cutoff_fraction, cfg.ref_rank) == (0.1536, 9)


def test_make_policy_covers_every_kind():
    for kind in StrategyKind:
        policy = make_policy(StrategyConfig(kind=kind, b=5, n_total=100, rng_seed=3))
        assert hasattr(policy, "decide")


# ------------------------------------------------------------ prefix helper


def test_prefix_threshold_ranks():
    prefix = PrefixThreshold()
    assert prefix.kth_best(1) == math.inf
    for s in [3.0, 9.0, 5.0]:
        prefix.observe(s)
    assert prefix.kth_best(1) == 9.0
    assert prefix.kth_best(2) == 5.0
    assert prefix.kth_best(3) == 3.0
    assert prefix.kth_best(7) == 3.0  # clamps to the worst observation
    assert len(prefix) == 3
    with pytest.raises(ValueError):
        prefix.kth_best(0)


# --------------------------------------------------------------- optimistic


def test_optimistic_threshold_counts_the_automatic_acceptance():
    # learning phase is positions 1..3; with one instance already selected
    # the threshold is the best learning score (10), not the 2nd best (4):
    # the step scoring 5 is a decoy that only the correct reading rejects
    trace = run(
        StrategyConfig(kind="optimistic", b=2, n_total=10),
        stream_1d([0.0, 4.0, 10.0, -5.0, -11.0, 0.3, 0.7, 1.1, 0.2, 0.9]),
    )
    assert accept_positions(trace) == (1, 5)
    assert not trace.decisions[3].accept
    assert trace.decisions[4].threshold == 10.0
    assert not trace.failed


def test_optimistic_identical_points_fill_forced():
    trace = run(StrategyConfig(kind="optimistic", b=3, n_total=10), stream_1d([5.0] * 10))
    assert accept_positions(trace) == (1, 9, 10)
    assert trace.failed
    assert [d.forced for d in trace.decisions[-2:]] == [True, True]


# ---------------------------------------------------------------- kleinberg


def test_kleinberg_two_budget_reference():
    # independent step-through of the b=2 structure: one halved prefix of
    # length m, threshold = best score seen at positions 2..m, one merit
    # acceptance afterwards; seed chosen so the draw lands mid-stream
    seed = 1
    m = int(generator(seed, "kleinberg").binomial(20, 0.5))
    assert m == 10  # frozen draw; the reference below depends on it
    values = [0.0, 1.5, -2.5, 0.8, 2.0, -1.0, 0.4, -1.8, 2.2, 1.2,
              0.6, 3.0, -0.2, 4.0, 0.1, -0.5, 1.9, 0.3, -2.2, 0.7]
    theta = max(abs(v - values[0]) for v in values[1:m])
    assert theta == 2.5
    expected = next(
        j for j, v in enumerate(values, start=1) if j > m and abs(v - values[0]) > theta
    )
    trace = run(
        StrategyConfig(kind="kleinberg", b=2, n_total=20, rng_seed=seed),
        stream_1d(values),
    )
    assert accept_positions(trace) == (1, expected) == (1, 12)
    assert trace.decisions[11].threshold == theta
    assert not trace.failed


def test_kleinberg_budget_halving_structure():
    policy = KleinbergPolicy(1000, 10, generator(0, "kleinberg"))
    assert policy.budgets == [10, 5, 2, 1]
    assert policy.ends[0] == 1000
    assert all(a >= b for a, b in zip(policy.ends, policy.ends[1:]))


def test_kleinberg_identical_points_fill_forced():
    trace = run(
        StrategyConfig(kind="kleinberg", b=3, n_total=20, rng_seed=4),
        stream_1d([2.0] * 20),
    )
    assert accept_positions(trace) == (1, 19, 20)
    assert trace.failed


# --------------------------------------------------------------------- mean


def test_mean_bootstrap_and_frozen_scores():
    # x2 is rejected and its distance to x1 seeds the threshold; x3 joins
    # with the score it arrived with (9), so the bar moves to (1+9)/2, not
    # to the new record
    trace = run(
        StrategyConfig(kind="mean", b=3, n_total=6),
        stream_1d([0.0, 1.0, 9.0, 9.5, -6.0, 100.0]),
    )
    assert accept_positions(trace) == (1, 3, 5)
    assert trace.decisions[2].threshold == 1.0  # mean of the bootstrap score
    assert trace.decisions[3].threshold == 5.0  # mean of {1, 9}
    assert trace.decisions[4].threshold == 5.0  # x4 rejected, bar unchanged
    assert not trace.failed
    # x4 scored min(9.5, 0.5) = 0.5 against the selected set, below the bar
    assert trace.scores_at_decision[3] == 0.5


def test_mean_rejects_below_the_running_mean():
    trace = run(
        StrategyConfig(kind="mean", b=3, n_total=6),
        stream_1d([0.0, 1.0, 9.0, 9.5, 4.0, 100.0]),
    )
    # x5 scores min(4, 5) = 4.0 < 5.0: rejected, then the tail forces
    assert accept_positions(trace) == (1, 3, 6)
    assert trace.decisions[4].threshold == 5.0
    assert trace.decisions[5].forced
    assert trace.failed


def test_mean_identical_points_fill_forced():
    trace = run(StrategyConfig(kind="mean", b=3, n_total=6), stream_1d([5.0] * 6))
    assert accept_positions(trace) == (1, 5, 6)
    assert trace.decisions[2].threshold == 0.0
    assert trace.failed


# --------------------------------------------------------------- submodular


def test_submodular_round_behaviors():
    # N=12, b=3: rounds of 4, learning cutoff floor(12/(3e)) = 1 per round
    policy = SubmodularPolicy(12, 3)
    assert policy.learn_length == 1
    policy.notify_accept(1, None)  # the automatic first acceptance
    assert not any(policy.decide(j, 9.9, None).accept for j in range(2, 5))
    # rising scores: first post-cutoff step beats the prefix max
    assert not policy.decide(5, 1.0, None).accept
    verdict = policy.decide(6, 2.0, None)
    assert verdict.accept and verdict.threshold == 1.0 and not verdict.forced
    policy.notify_accept(6, None)
    assert not policy.decide(7, 99.0, None).accept  # round already satisfied
    assert not policy.decide(8, 99.0, None).accept
    # falling scores: nothing beats the prefix max, round end forces
    assert not policy.decide(9, 4.0, None).accept
    assert not policy.decide(10, 3.0, None).accept
    assert not policy.decide(11, 2.0, None).accept
    verdict = policy.decide(12, 1.0, None)
    assert verdict.accept and verdict.forced and verdict.threshold == 4.0


def test_submodular_cutoff_arithmetic():
    assert SubmodularPolicy(5000, 10).learn_length == 183
    assert SubmodularPolicy(5000, 10).round_length == 500


def test_submodular_rejects_short_subsequences():
    with pytest.raises(ValueError):
        SubmodularPolicy(5, 3)


# --------------------------------------------------------------- single_ref


def test_single_ref_strict_exceedance_on_ties():
    policy = SingleRefPolicy(10, 2, 0.3, 2)
    for j in (2, 3):
        assert not policy.decide(j, 3.0, None).accept
    rejected = policy.decide(4, 3.0, None)
    assert not rejected.accept and rejected.threshold == 3.0
    assert policy.decide(5, 3.01, None).accept


def test_single_ref_validates_rank_against_cutoff():
    with pytest.raises(ValueError):
        SingleRefPolicy(10, 2, 0.3, 4)  # cutoff is 3, rank 4 unreachable
    with pytest.raises(ValueError):
        SingleRefPolicy(10, 2, 0.0, 1)


# ------------------------------------------------------------ simplek family


def enumerated_offline_threshold(points, b):
    # independent oracle: try every candidate from the largest down, with a
    # direct quadratic greedy pass
    pts = np.asarray(points, dtype=float)
    dists = sorted(
        {float(np.linalg.norm(pts[i] - pts[j])) for i, j in combinations(range(len(pts)), 2)},
        reverse=True,
    )
    for gamma in dists:
        accepted = [pts[0]]
        for x in pts[1:]:
            if min(float(np.linalg.norm(x - a)) for a in accepted) >= gamma:
                accepted.append(x)
        if len(accepted) >= b:
            return gamma
    raise AssertionError("no feasible threshold")


def test_offline_threshold_examples():
    pts = stream_1d([0.0, 1.0, 2.0, 10.0])
    assert simplek_offline_threshold(pts, 2) == 10.0
    # full budget: the chain must take everything, so the minimum pairwise
    # distance is the only feasible value
    assert simplek_offline_threshold(pts, 4) == 1.0
    assert simplek_offline_threshold(stream_1d([0.0, 7.0]), 2) == 7.0


def test_offline_threshold_matches_enumeration():
    rng = generator(17, "offline-threshold")
    for _ in range(25):
        pts = rng.normal(size=(8, 2))
        b = int(rng.integers(2, 7))
        assert simplek_offline_threshold(pts, b) == enumerated_offline_threshold(pts, b)


def test_offline_threshold_validation():
    with pytest.raises(ValueError):
        simplek_offline_threshold(stream_1d([0.0, 1.0]), 3)
    with pytest.raises(ValueError):
        simplek_offline_threshold(stream_1d([0.0]), 1)
    with pytest.raises(ValueError):
        simplek_offline_threshold(stream_1d([0.0, 1.0]), 0)


def test_simplek_accepts_on_equality():
    # stored half {0,1,2,10} gives an offline threshold of exactly 10, and
    # the score-10 arrival is accepted: exceedance is non-strict here
    trace = run(
        StrategyConfig(kind="simplek", b=2, n_total=8),
        stream_1d([0.0, 1.0, 2.0, 10.0, 0.0, 10.0, 3.0, 4.0]),
    )
    assert accept_positions(trace) == (5, 6)
    assert trace.decisions[5].threshold == 10.0
    assert not trace.failed
    assert trace.reward == 10.0


def test_simplek_static_threshold_can_force_the_tail():
    trace = run(
        StrategyConfig(kind="simplek", b=3, n_total=12),
        stream_1d([0.0, 1.0, 2.0, 3.0, 4.0, 10.0, 5.0, 5.1, 5.2, 4.9, 7.0, 6.0]),
    )
    assert accept_positions(trace) == (7, 11, 12)
    assert [d.threshold for d in trace.decisions[7:10]] == [4.0, 4.0, 4.0]
    assert trace.failed


def test_dyn_simplek_hand_reference():
    # hand-simulated: stored {3,0,1,8,4,2} gives an offline threshold of 5;
    # at step 8 the pool quantile is 4 (7+1 scores, rank ceil(8*1/4)=2), the
    # score 1 is rejected; at step 9 rank ceil(8*1/3)=3 gives 4 again and
    # the score 4.5 is accepted on the non-strict comparison
    values = [3.0, 0.0, 1.0, 8.0, 4.0, 2.0, 5.0, 6.0, 0.5, 9.0, 7.0, 2.5]
    assert simplek_offline_threshold(stream_1d(values[:6]), 2) == 5.0
    trace = run(StrategyConfig(kind="dyn_simplek", b=2, n_total=12), stream_1d(values))
    assert accept_positions(trace) == (7, 9)
    assert trace.decisions[7].threshold == 4.0
    assert trace.decisions[8].threshold == 4.0
    assert not trace.failed
    assert trace.reward == 4.5


def test_dyn_simplek_tail_rule_floors_the_threshold():
    # once open slots match remaining arrivals the quantile floor (0) takes
    # over, so the tail is filled by merit of the rule, never by Def-style
    # forcing
    values = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 10.1, 10.2, 0.5, 7.0, 9.0]
    trace = run(StrategyConfig(kind="dyn_simplek", b=3, n_total=12), stream_1d(values))
    assert accept_positions(trace) == (7, 10, 11)
    assert [d.threshold for d in trace.decisions[7:11]] == [2.0, 2.0, 0.0, 0.0]
    assert not trace.failed
    assert trace.reward == 3.0


def test_dyn_simplek_quantile_matches_fraction_arithmetic():
    # the engine's integer rank equals ceil(pool * open / future) computed
    # with exact rationals
    values = [3.0, 0.0, 1.0, 8.0, 4.0, 2.0, 5.0, 6.0, 0.5, 9.0, 7.0, 2.5]
    pool_scores = sorted(
        [abs(v - 5.0) for v in values[:6]] + [1.0, 4.5], reverse=True
    )
    rank = math.ceil(Fraction(8 * 1, 12 - 9))
    assert pool_scores[rank - 1] == 4.0


def test_dyn_simplek_first_selection_is_after_the_stored_half():
    assert DynSimplekPolicy(12, 2).first_selection_position() == 7
    assert DynSimplekPolicy(13, 2).first_selection_position() == 7
