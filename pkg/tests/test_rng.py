from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagcodes.rng import XorShift64Star, splitmix64


def test_splitmix_reference_value():
    # first output of the reference splitmix64 with state 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_reference_streams():
    # frozen from an independent numpy uint64 implementation
    expected = {
        0: [8916199331640804048, 16032783972208265725, 12954103179475586193, 16173463928478733820],
        42: [3580622183945639842, 10378725325292465923, 8967075514996744559, 5001014893397904463],
    }
    for seed, values in expected.items():
        r = XorShift64Star(seed)
        assert [r.next_u64() for _ in range(4)] == values


def test_determinism_and_independence():
    a, b, c = XorShift64Star(7), XorShift64Star(7), XorShift64Star(8)
    sa = [a.next_u64() for _ in range(10)]
    assert sa == [b.next_u64() for _ in range(10)]
    assert sa != [c.next_u64() for _ in range(10)]


@pytest.mark.parametrize("q", [2, 3, 5, 9])
def test_below_is_roughly_uniform(q):
    r = XorShift64Star(1)
    counts = Counter(r.below(q) for _ in range(9000))
    assert set(counts) == set(range(q))
    assert all(abs(c - 9000 / q) < 0.1 * 9000 / q + 50 for c in counts.values())


def test_uniform_and_helpers():
    r = XorShift64Star(3)
    xs = [r.uniform() for _ in range(1000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert 0.4 < sum(xs) / len(xs) < 0.6
    s = r.sample(10, 4)
    assert len(set(s)) == 4 and all(0 <= i < 10 for i in s)
    m = r.integers(0, 3, size=(2, 5))
    assert m.shape == (2, 5) and m.min() >= 0 and m.max() < 3
    with pytest.raises(ValueError):
        r.below(0)


@given(st.integers(0, 2**64 - 1), st.integers(1, 10**6))
def test_below_stays_in_range_and_replays(seed, bound):
    a, b = XorShift64Star(seed), XorShift64Star(seed)
    draws = [a.below(bound) for _ in range(20)]
    assert all(0 <= x < bound for x in draws)
    assert draws == [b.below(bound) for _ in range(20)]


@given(st.integers(0, 2**64 - 1), st.integers(0, 40), st.integers(0, 40))
def test_sample_is_distinct_subset(seed, population, k):
    k = min(k, population)
    picked = XorShift64Star(seed).sample(population, k)
    assert len(set(picked)) == k and all(0 <= i < population for i in picked)
