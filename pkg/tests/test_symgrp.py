import math
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from flagcodes.errors import DegreeMismatch, DegreeTooLarge, ParseError
from flagcodes.symgrp import (
    Composition,
    Permutation,
    all_perms,
    depth_histogram,
    double_coset,
    format_perm,
    max_depth,
    min_double_coset_rep,
    parse_perm,
    perm_compose,
    perm_depth,
    perm_inverse,
    perm_length,
    perm_longest,
    perm_sum_of_distances,
    perm_transposition_length,
    young_contains,
    young_subgroup,
)

perms = st.integers(1, 8).flatmap(lambda n: st.permutations(range(1, n + 1))).map(Permutation)


def depth_by_definition(p):
    n = len(p)
    return sum(sum(1 for k in range(1, i + 1) if p[k - 1] > i) for i in range(1, n))


def min_transpositions_bfs(pi):
    """Shortest word in all transpositions, by breadth-first search."""
    n = pi.n
    start = Permutation.identity(n)
    gens = [Permutation.transposition(n, a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    frontier, seen, dist = [start], {start}, 0
    while pi not in seen:
        dist += 1
        nxt = []
        for w in frontier:
            for s in gens:
                v = w * s
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return dist


def test_length_examples():
    assert perm_length(Permutation.identity(4)) == 0
    assert perm_length(Permutation.transposition(4, 2, 3)) == 1
    assert perm_length(perm_longest(4)) == 6


def test_depth_examples():
    assert perm_depth(Permutation.identity(5)) == 0
    assert perm_depth(perm_longest(4)) == 4
    assert perm_depth(Permutation.from_cycle(3, (1, 2, 3))) == 2
    assert perm_depth(perm_longest(5)) == 6


def test_transposition_length_examples():
    assert perm_transposition_length(Permutation.identity(4)) == 0
    assert perm_transposition_length(Permutation.transposition(5, 1, 4)) == 1
    assert perm_transposition_length(Permutation.from_cycle(5, (2, 4, 5))) == 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_transposition_length_matches_search(n):
    for pi in all_perms(n):
        assert perm_transposition_length(pi) == min_transpositions_bfs(pi)


def test_sum_of_distances_examples():
    assert perm_sum_of_distances(Permutation.identity(3)) == 0
    assert perm_sum_of_distances(perm_longest(4)) == 8
    assert perm_sum_of_distances(Permutation((3, 2, 1))) == 4


def test_longest():
    assert perm_longest(2) == Permutation((2, 1))
    assert perm_longest(4).images == (4, 3, 2, 1)
    for n in range(1, 8):
        assert perm_length(perm_longest(n)) == n * (n - 1) // 2


@given(perms)
def test_depth_formulas_agree(pi):
    assert perm_depth(pi) == depth_by_definition(pi.images)
    assert perm_sum_of_distances(pi) == 2 * perm_depth(pi)


@given(perms)
def test_depth_bounds(pi):
    l, d, lt = perm_length(pi), perm_depth(pi), perm_transposition_length(pi)
    assert l + lt <= 2 * d <= 2 * l


@given(perms)
def test_inverse_and_composition(pi):
    ident = Permutation.identity(pi.n)
    assert pi * ident == pi == ident * pi
    assert pi * pi.inverse() == ident
    assert perm_length(pi) == perm_length(pi.inverse())


@given(perms, st.data())
def test_composition_applies_left_factor_first(a, data):
    b = Permutation(data.draw(st.permutations(range(1, a.n + 1))))
    for i in range(1, a.n + 1):
        assert (a * b)(i) == b(a(i))


def test_inverse_symmetry_sym6():
    for pi in all_perms(6):
        inv = perm_inverse(pi)
        assert perm_depth(pi) == perm_depth(inv)
        assert perm_length(pi) == perm_length(inv)


@pytest.mark.parametrize("n", range(1, 8))
def test_depth_one_iff_adjacent_transposition(n):
    adj = {Permutation.transposition(n, i, i + 1) for i in range(1, n)}
    for pi in all_perms(n):
        assert (perm_depth(pi) == 1) == (perm_length(pi) == 1) == (pi in adj)


@pytest.mark.parametrize("n", range(1, 9))
def test_max_depth(n):
    hist = depth_histogram(n)
    assert max(hist) == max_depth(n) == perm_depth(perm_longest(n))
    assert sum(hist.values()) == math.factorial(n)


def test_histograms():
    assert depth_histogram(1) == {0: 1}
    assert depth_histogram(3) == {0: 1, 1: 2, 2: 3}
    h4 = depth_histogram(4)
    assert h4[4] == 4 == math.factorial(2) ** 2
    # odd n: the top count follows n * ((n-1)/2)!^2 (brute force is authoritative)
    for n in (3, 5, 7):
        assert depth_histogram(n)[max_depth(n)] == n * math.factorial((n - 1) // 2) ** 2
    with pytest.raises(DegreeTooLarge):
        depth_histogram(10)


def test_histogram_matches_definition_n5():
    counts = {}
    for p in permutations(range(1, 6)):
        d = depth_by_definition(p)
        counts[d] = counts.get(d, 0) + 1
    assert depth_histogram(5) == dict(sorted(counts.items()))


def test_parse_and_format():
    pi = parse_perm("4: 4 3 2 1")
    assert pi == perm_longest(4)
    assert format_perm(pi) == "4: 4 3 2 1"
    assert parse_perm("2 1 3") == Permutation((2, 1, 3))
    for bad in ("1 1 2", "3: 1 2", "x: 1", "1 a"):
        with pytest.raises(ParseError):
            parse_perm(bad)


def test_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        perm_compose(Permutation.identity(2), Permutation.identity(3))
    with pytest.raises(DegreeMismatch):
        young_contains(Composition((2, 2)), Permutation.identity(3))


def test_young_subgroups():
    n = 4
    assert all(young_contains(Composition((n,)), pi) for pi in all_perms(n))
    ones = Composition((1,) * n)
    assert [pi for pi in all_perms(n) if young_contains(ones, pi)] == [Permutation.identity(n)]
    T = Composition((2, 2))
    members = [pi for pi in all_perms(4) if young_contains(T, pi)]
    assert len(members) == 4
    assert set(members) == set(young_subgroup(T))
    assert len(young_subgroup(Composition((1, 3, 2)))) == 1 * 6 * 2


def _compositions(n):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def test_double_coset_representatives():
    T = Composition((2, 2))
    Y = young_subgroup(T)
    # partition Sym_4 by brute force products y1 * pi * y2
    remaining = set(all_perms(4))
    reps = set()
    while remaining:
        pi = next(iter(remaining))
        coset = {a * pi * b for a in Y for b in Y}
        assert coset == double_coset(pi, T)
        shortest = min(perm_length(w) for w in coset)
        assert sum(perm_length(w) == shortest for w in coset) == 1
        reps.add(min_double_coset_rep(pi, T))
        remaining -= coset
    assert {min_double_coset_rep(pi, T) for pi in all_perms(4)} == reps
    assert min_double_coset_rep(Permutation.identity(4), T).is_identity()


@pytest.mark.parametrize("n", range(1, 7))
def test_unique_minimal_representative_all_compositions(n):
    for parts in _compositions(n):
        T = Composition(parts)
        seen = set()
        for pi in all_perms(n):
            if pi in seen:
                continue
            coset = double_coset(pi, T)
            seen |= coset
            lengths = [perm_length(w) for w in coset]
            assert lengths.count(min(lengths)) == 1
            rep = min_double_coset_rep(pi, T)
            assert min_double_coset_rep(rep, T) == rep
            if young_contains(T, pi):
                assert rep.is_identity()


def test_double_coset_size_cap():
    with pytest.raises(DegreeTooLarge):
        min_double_coset_rep(Permutation.identity(9), Composition((9,)))


def test_matrix_is_homomorphic():
    from flagcodes.gfq import gf
    F = gf(2)
    for a in all_perms(3):
        for b in all_perms(3):
            assert (a * b).matrix(F) == a.matrix(F) @ b.matrix(F)
