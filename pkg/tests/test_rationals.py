from fractions import Fraction

import pytest

from molab.rationals import (cw_index, cw_term, enumerate_unit_rationals, least_index_rational, simplest_rational,
                             unit_index, unit_rational)


def brute_force_unit(count):
    """Breadth-first Calkin-Wilf tree, keeping the terms in (0, 1)."""
    out, level = [], [Fraction(1)]
    while len(out) < count:
        nxt = []
        for q in level:
            a, b = q.numerator, q.denominator
            nxt += [Fraction(a, a + b), Fraction(a + b, b)]
        level = nxt
        out += [q for q in level if q < 1]
    return out[:count]


def test_sequence_matches_tree_enumeration():
    assert enumerate_unit_rationals(200) == brute_force_unit(200)


def test_index_inverts_term():
    for i in range(1, 3000):
        assert cw_index(cw_term(i)) == i


def test_first_terms():
    assert [unit_rational(n) for n in (1, 2, 3)] == [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)]
    assert unit_index(Fraction(1, 7)) == 32


def test_least_index_rational_in_a_window():
    q, n = least_index_rational(0.45, 0.55)
    assert (q, n) == (Fraction(1, 2), 1)
    seq = brute_force_unit(4000)
    for lo, hi in [(0.2, 0.22), (0.61, 0.63), (0.9, 0.95)]:
        q, n = least_index_rational(lo, hi)
        expected = next(i for i, r in enumerate(seq, start=1) if lo < r < hi)
        assert n == expected and seq[n - 1] == q


def test_simplest_rational_has_smallest_denominator():
    q = simplest_rational(0.3, 0.34)
    assert q == Fraction(1, 3)


def test_tiny_window_far_down_the_sequence_raises():
    with pytest.raises(OverflowError):
        least_index_rational(1e-9, 2e-9)
