import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dysthe.resonance import (
    SUP_SCAN_LIMIT,
    FactorizationState,
    ResonanceQuery,
    count_bruteforce,
    count_divisor,
    divisor_count,
    divisors,
    factorize,
    growth_report,
    resonance_buckets,
    sup_scan,
)
from dysthe.spectral import dispersion

COUNTERS = [count_bruteforce, count_divisor]


@pytest.mark.parametrize("counter", COUNTERS)
@pytest.mark.parametrize(
    "j, count, solutions",
    [
        (0, 1, {(0, 0)}),
        (-4, 6, {(1, -1), (-1, 1), (1, 0), (0, 1), (-1, 0), (0, -1)}),
        (10**9, 0, set()),
    ],
)
def test_small_queries(counter, j, count, solutions):
    res = counter(ResonanceQuery(1, 0, j))
    assert res.count == count
    assert set(res.solutions) == solutions
    assert res.runtime_ms >= 0


def test_n5_family_contains_hand_checked_pair():
    brute = count_bruteforce(ResonanceQuery(5, 0, 0))
    div = count_divisor(ResonanceQuery(5, 0, 0))
    assert brute.solutions == div.solutions
    assert {(4, -2), (-2, 4)} <= set(div.solutions)
    assert div.count == 4


def test_factorization_state_uses_dispersion_minus_j():
    st_ = FactorizationState(2, 5)
    assert st_.k == dispersion(2) - 5
    assert st_.l == 9 * st_.k - 4 * (4 - 6) ** 2


@given(st.integers(-40, 40), st.integers(-40, 40), st.integers(-40, 40))
def test_factored_form_vanishes_on_solutions(n1, n2, n3):
    n = n1 + n2 + n3
    j = dispersion(n1) + dispersion(n2) + dispersion(n3)
    state = FactorizationState(n, j)
    assert state.residual(n1 + n2, n1 * n2) == 0


@given(st.integers(0, 6), st.integers(-18, 18), st.integers(-2000, 2000))
def test_oracles_agree_on_random_queries(N, n, j):
    q = ResonanceQuery(N, n, j)
    assert count_bruteforce(q).solutions == count_divisor(q).solutions


def test_oracles_agree_on_every_achieved_bucket():
    for (n, j), mult in resonance_buckets(5).items():
        q = ResonanceQuery(5, n, j)
        a, b = count_bruteforce(q), count_divisor(q)
        assert a.solutions == b.solutions
        # bucket multiplicity counts only pairs whose third mode is also bounded
        assert mult <= a.count


@given(st.integers(-10**6, 10**6), st.integers(-10**18, 10**18))
def test_l_is_never_zero(n, j):
    # 4 - 3n is 1 mod 3, so 9 never divides 4(4 - 3n)^2
    assert FactorizationState(n, j).l % 9 != 0


def test_candidates_bounded_by_divisor_count():
    for (n, j) in list(resonance_buckets(4))[::7]:
        l = FactorizationState(n, j).l
        assert count_divisor(ResonanceQuery(4, n, j)).candidates <= 2 * divisor_count(l)


@pytest.mark.parametrize("l, count", [(1, 1), (12, 6), (64, 7), (-12, 6), (2**31 - 1, 2)])
def test_divisor_count(l, count):
    assert divisor_count(l) == count


def test_divisors_and_factorize():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert factorize(2**10 * 3**4 * 65537 * 65539) == {2: 10, 3: 4, 65537: 1, 65539: 1}
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        divisor_count(0)


@given(st.integers(1, 10**6))
def test_divisor_count_matches_naive(m):
    naive = sum(1 for d in range(1, math.isqrt(m) + 1) if m % d == 0 for _ in ((d,) if d * d == m else (d, m // d)))
    assert divisor_count(m) == naive


@pytest.mark.parametrize("N, best, witness", [(0, 1, (0, 0)), (1, 6, (0, -4))])
def test_sup_scan_small(N, best, witness):
    sup, wit = sup_scan(N)
    assert sup == best
    assert witness in wit


def test_sup_scan_regression_and_monotone():
    values = [sup_scan(N)[0] for N in (0, 1, 2, 4, 8, 16)]
    assert values[-1] == 18
    assert values == sorted(values)


def test_sup_scan_limit():
    with pytest.raises(ValueError, match=str(SUP_SCAN_LIMIT)):
        sup_scan(SUP_SCAN_LIMIT + 1)


def test_growth_report_shapes():
    assert growth_report([1]) == [(1, 6, None)]
    assert growth_report([0]) == [(0, 1, None)]
    rows = growth_report([8, 16, 32])
    assert [r[0] for r in rows] == [8, 16, 32]
    assert all(r[2] < 1 for r in rows[1:])


def test_negative_bandlimit_rejected():
    with pytest.raises(ValueError):
        ResonanceQuery(-1, 0, 0)


def test_bruteforce_python_fallback_agrees():
    # |n| large enough to leave the vectorised branch
    n = 200_000
    j = dispersion(1) + dispersion(-1) + dispersion(n)
    res = count_bruteforce(ResonanceQuery(1, n, j))
    assert (1, -1) in res.solutions
    assert res.solutions == count_divisor(ResonanceQuery(1, n, j)).solutions


def test_buckets_total_is_all_triples():
    N = 3
    assert sum(resonance_buckets(N).values()) == (2 * N + 1) ** 3
    assert np.all(np.array(list(resonance_buckets(N).values())) >= 1)
