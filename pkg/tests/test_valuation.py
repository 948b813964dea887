import math
import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, strategies as st

from padicharm.core import INFINITE, PrecisionError, SizeCapError, vp
from padicharm.valuation import (
    DEFAULT_POLICY,
    EscalationPolicy,
    exact_H,
    exact_H_table,
    stirling,
    stirling_mod,
    vp_H,
    vp_H_sweep,
)


def brute_H(n, k):
    return sum(
        (Fraction(1, math.prod(c)) for c in combinations(range(1, n + 1), k)),
        Fraction(0),
    )


def cycle_count(perm):
    seen = [False] * len(perm)
    cycles = 0
    for i in range(len(perm)):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return cycles


def brute_stirling(n, k):
    return sum(1 for perm in permutations(range(n)) if cycle_count(perm) == k)


@pytest.mark.parametrize(
    "n, k, expected",
    [
        (1, 1, Fraction(1)),
        (3, 2, Fraction(1)),
        (4, 2, Fraction(35, 24)),
        (5, 2, Fraction(15, 8)),
        (6, 2, Fraction(203, 90)),
        (4, 0, Fraction(1)),
    ],
)
def test_exact_H_examples(n, k, expected):
    assert exact_H(n, k) == expected


def test_exact_H_matches_brute_force():
    for n in range(1, 13):
        for k in range(0, n + 1):
            assert exact_H(n, k) == brute_H(n, k)


def test_exact_H_rejections():
    with pytest.raises(ValueError):
        exact_H(3, 4)
    with pytest.raises(SizeCapError):
        exact_H(5000, 2)
    assert exact_H(5000, 2, cap=5000) > 0


def test_exact_H_table_consistent():
    table = exact_H_table(20, 4)
    for n in range(21):
        for k in range(min(n, 4) + 1):
            assert table[n][k] == exact_H(n, k)


@given(st.integers(min_value=1, max_value=60), st.integers(min_value=0, max_value=6))
def test_exact_H_positive(n, k):
    if k <= n:
        assert exact_H(n, k) > 0


@pytest.mark.parametrize("n, k, expected", [(4, 2, 11), (5, 5, 1), (8, 3, 13132)])
def test_stirling_examples(n, k, expected):
    assert stirling(n, k) == expected


def test_stirling_matches_cycle_counts():
    for n in range(1, 8):
        for k in range(0, n + 1):
            assert stirling(n, k) == brute_stirling(n, k)


def test_stirling_factorial_identity():
    # n! * H(n, k) = s(n+1, k+1)
    table = exact_H_table(12, 12)
    for n in range(1, 13):
        nf = math.factorial(n)
        for k in range(1, n + 1):
            assert table[n][k] * nf == stirling(n + 1, k + 1)


def test_stirling_rejections():
    with pytest.raises(ValueError):
        stirling(4, 5)
    with pytest.raises(ValueError):
        stirling(0, 0)
    assert stirling(3, 0) == 0


@pytest.mark.parametrize(
    "n, k, p, M, expected",
    [(6, 3, 2, 5, 1), (4, 2, 3, 2, 2), (5, 5, 7, 3, 1)],
)
def test_stirling_mod_examples(n, k, p, M, expected):
    assert stirling_mod(n, k, p, M) == expected


@given(
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=0, max_value=8),
    st.sampled_from([2, 3, 5, 7]),
    st.integers(min_value=1, max_value=12),
)
def test_stirling_mod_matches_exact(n, k, p, M):
    if k <= n:
        assert stirling_mod(n, k, p, M) == stirling(n, k) % p ** M


def test_stirling_mod_modulus_cap():
    with pytest.raises(PrecisionError):
        stirling_mod(10, 3, 2, 100, max_modulus_bits=64)


@pytest.mark.parametrize(
    "n, k, p, expected",
    [(7, 2, 2, -2), (3, 2, 2, 0), (5, 2, 2, -3), (4, 1, 5, 2)],
)
def test_vp_H_examples(n, k, p, expected):
    assert vp_H(n, k, p) == expected


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_vp_H_matches_exact_rationals(p):
    table = exact_H_table(48, 5)
    for n in range(1, 49):
        for k in range(1, min(n, 5) + 1):
            expected = vp(table[n][k], p)
            assert expected is not INFINITE
            assert vp_H(n, k, p) == expected


def test_vp_H_escalation_is_sound():
    rng = random.Random(20240817)
    for _ in range(200):
        n = rng.randint(2, 400)
        k = rng.randint(1, min(n, 6))
        p = rng.choice([2, 3, 5, 7])
        base = vp_H(n, k, p)
        doubled = EscalationPolicy(
            initial_guard=2 * DEFAULT_POLICY.initial_guard,
            growth_factor=DEFAULT_POLICY.growth_factor,
            max_modulus_bits=DEFAULT_POLICY.max_modulus_bits,
        )
        assert vp_H(n, k, p, doubled) == base


def test_vp_H_precision_cap_is_loud():
    tight = EscalationPolicy(initial_guard=1, growth_factor=2, max_modulus_bits=64)
    with pytest.raises(PrecisionError):
        vp_H(500, 3, 2, tight)


def test_vp_H_rejections():
    with pytest.raises(ValueError):
        vp_H(3, 0, 2)
    with pytest.raises(ValueError):
        vp_H(3, 4, 2)
    with pytest.raises(ValueError):
        vp_H(3, 2, 4)


@pytest.mark.parametrize("p, k", [(2, 2), (3, 2), (5, 3), (7, 1)])
def test_vp_H_sweep_matches_single_calls(p, k):
    sweep = vp_H_sweep(80, k, p)
    assert set(sweep) == set(range(k, 81))
    for n in range(k, 81):
        assert sweep[n] == vp_H(n, k, p)
