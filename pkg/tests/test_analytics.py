"""Closed-form acceptance-probability quantities."""

import math
import random

import pytest

from streamdiv import (
    DeltaSchedule,
    RoundParams,
    acceptance_mean,
    acceptance_std,
    expected_rank,
    learning_cutoff,
    switch_index,
)

# frozen against a 60-digit arbitrary-precision evaluation of the same formula
MU_REFS = [
    ((260, 21, 500), 0.99997607972133936673),
    ((50, 9, 100), 0.98016208345204520772),
    ((120, 21, 500), 0.9878165807393703409),
]
SIGMA_REFS = [
    ((260, 21, 500), 0.0048907776969416700975),
    ((50, 9, 100), 0.13944308378328117603),
    ((120, 21, 500), 0.10970407264887378532),
]


def test_expected_rank_exact_values():
    assert expected_rank(100, 1, 9) == 10.1
    assert expected_rank(9, 1, 2) == 10.0 / 3.0
    # full sample: the b-th best of everything has rank exactly b
    for b in (1, 3, 7):
        assert expected_rank(50, b, 50) == float(b)


def test_expected_rank_monotone_in_sample_size():
    values = [expected_rank(100, 3, c) for c in range(3, 101)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert all(v >= 3.0 for v in values)


def test_expected_rank_validation():
    with pytest.raises(ValueError):
        expected_rank(10, 0, 3)
    with pytest.raises(ValueError):
        expected_rank(10, 1, 0)
    with pytest.raises(ValueError):
        expected_rank(10, 1, 11)
    # sample smaller than budget has no b-th best unless the caller opts in
    with pytest.raises(ValueError):
        expected_rank(10, 5, 3)
    assert expected_rank(10, 5, 3, allow_small_sample=True) == 5 * 15 / 8


def test_acceptance_mean_boundaries_exact():
    for c, n in [(1, 2), (2, 9), (9, 100), (21, 500), (44, 2000)]:
        assert acceptance_mean(c, c, n) == 0.0
        assert acceptance_mean(n, c, n) == 1.0


def test_acceptance_mean_frozen_references():
    for (j, c, n), ref in MU_REFS:
        assert acceptance_mean(j, c, n) == pytest.approx(ref, abs=1e-13)


def test_acceptance_mean_monotone_full_scans():
    rng = random.Random(97)
    for _ in range(20):
        n = rng.randint(5, 2500)
        c = rng.randint(1, n - 1)
        prev = -1.0
        for j in range(c, n + 1):
            mu = acceptance_mean(j, c, n)
            assert mu >= prev, (j, c, n)
            prev = mu
        assert prev == 1.0


def test_acceptance_mean_domain_checks():
    with pytest.raises(ValueError):
        acceptance_mean(5, 9, 100)  # j below cutoff
    with pytest.raises(ValueError):
        acceptance_mean(101, 9, 100)  # j past round end
    with pytest.raises(ValueError):
        acceptance_mean(5, 100, 100)  # cutoff not below round length


def test_acceptance_std_frozen_references():
    for (j, c, n), ref in SIGMA_REFS:
        assert acceptance_std(j, c, n) == pytest.approx(ref, abs=1e-13)


def test_acceptance_std_endpoints_zero():
    assert acceptance_std(9, 9, 100) == 0.0
    assert acceptance_std(100, 9, 100) == 0.0


def test_switch_index_frozen_references():
    assert switch_index(21, 500) == 37
    assert switch_index(9, 100) == 17
    assert switch_index(2, 9) == 4


def test_switch_index_trend_in_round_length():
    # with the default cutoff rule the switch moves later as rounds grow
    by_cutoff_rule = [switch_index(learning_cutoff(n), n) for n in (100, 200, 400)]
    assert by_cutoff_rule == sorted(by_cutoff_rule)
    # with the cutoff held fixed it settles downward toward an asymptote
    fixed_c = [switch_index(9, n) for n in (50, 100, 200, 400, 1000)]
    assert fixed_c == sorted(fixed_c, reverse=True)


def test_switch_index_is_first_crossing():
    rng = random.Random(31)
    for _ in range(25):
        n = rng.randint(5, 2000)
        c = rng.randint(1, n - 1)
        j = switch_index(c, n)
        assert c < j <= n
        assert acceptance_mean(j, c, n) >= 0.5
        assert acceptance_mean(j - 1, c, n) < 0.5


def test_learning_cutoff_table():
    # max(1, isqrt(n) - 1)
    cases = {4: 1, 8: 1, 9: 2, 16: 3, 100: 9, 500: 21, 10000: 99}
    for n, c in cases.items():
        assert learning_cutoff(n) == c


def test_learning_cutoff_rejects_short_rounds():
    for n in (0, 1, 2, 3):
        with pytest.raises(ValueError):
            learning_cutoff(n)


def test_delta_schedule_constant():
    sched = DeltaSchedule(kind="constant")
    assert [sched.at(j) for j in (1, 10, 10**6)] == [1, 1, 1]


def test_delta_schedule_exponential_ramp():
    sched = DeltaSchedule(kind="exponential", shift=412.0, scale=72.0)
    assert sched.at(1) == 0
    assert sched.at(411) == 0
    assert sched.at(412) == 1
    assert sched.at(484) == math.floor(math.e)  # one scale above the shift
    assert sched.at(500) == math.floor(math.exp((500 - 412) / 72))


def test_delta_schedule_exponential_saturates():
    sched = DeltaSchedule(kind="exponential", shift=0.0, scale=1.0)
    big = sched.at(10**9)  # exponent is capped, no overflow
    assert big == math.floor(math.exp(700.0))


def test_delta_schedule_validation():
    with pytest.raises(ValueError):
        DeltaSchedule(kind="linear")
    with pytest.raises(ValueError):
        DeltaSchedule(kind="exponential", scale=0.0)


def test_delta_schedule_exponential_monotone():
    sched = DeltaSchedule(kind="exponential", shift=412.0, scale=72.0)
    values = [sched.at(j) for j in range(1, 1000)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_round_params_solved():
    params = RoundParams.solved(500)
    assert (params.n, params.c, params.switch) == (500, 21, 37)
    assert acceptance_mean(params.switch - 1, params.c, params.n) < 0.5
    assert acceptance_mean(params.switch, params.c, params.n) >= 0.5
    custom = RoundParams.solved(500, c=9)
    assert custom.c == 9 and custom.switch == switch_index(9, 500)


def test_round_params_allows_disabled_relaxation():
    # a switch past the round end means the threshold never relaxes
    params = RoundParams(n=4, c=1, switch=10, delta=DeltaSchedule())
    assert params.switch > params.n


def test_round_params_validation():
    with pytest.raises(ValueError):
        RoundParams(n=4, c=4, switch=5, delta=DeltaSchedule())
    with pytest.raises(ValueError):
        RoundParams(n=9, c=2, switch=2, delta=DeltaSchedule())
