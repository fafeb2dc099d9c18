"""Calkin-Wilf enumeration of the rationals in (0, 1).

The Calkin-Wilf sequence lists every positive rational exactly once.
Entry ``2n`` is the left child of entry ``n`` and always lies in (0, 1), so
``r_n = cw(2n)`` enumerates the rationals of the unit interval:
1/2, 1/3, 2/3, 1/4, 3/5, 2/5, 3/4, 1/5, ...

Tree depth is the sum of the continued-fraction digits, so the rational of
least index inside an open interval is the simplest rational there (least
Stern-Brocot depth), which :func:`simplest_rational` finds directly.
"""

from __future__ import annotations

import math
from fractions import Fraction

MAX_INDEX_BITS = 1_000_000


def cw_term(index: int) -> Fraction:
    """Calkin-Wilf entry with 1-based ``index``."""
    if index < 1:
        raise ValueError("Calkin-Wilf indices start at 1")
    a, b = 1, 1
    for bit in bin(index)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def cw_index(q: Fraction) -> int:
    """1-based Calkin-Wilf position of a positive rational."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("only positive rationals appear in the sequence")
    a, b = q.numerator, q.denominator
    runs: list[tuple[int, int]] = []  # (bit, count), leaf to root
    depth = 0
    while (a, b) != (1, 1):
        if a < b:
            k = (b - 1) // a
            b -= k * a
            runs.append((0, k))
        else:
            k = (a - 1) // b
            a -= k * b
            runs.append((1, k))
        depth += k
        if depth > MAX_INDEX_BITS:
            raise OverflowError(f"Calkin-Wilf index of {q} exceeds {MAX_INDEX_BITS} bits")
    idx = 1
    for bit, count in reversed(runs):
        idx <<= count
        if bit:
            idx |= (1 << count) - 1
    return idx


def unit_rational(n: int) -> Fraction:
    """``r_n``: the n-th rational of (0, 1) in Calkin-Wilf order."""
    if n < 1:
        raise ValueError("enumeration starts at n = 1")
    return cw_term(2 * n)


def unit_index(q: Fraction) -> int:
    """Inverse of :func:`unit_rational`."""
    q = Fraction(q)
    if not 0 < q < 1:
        raise ValueError(f"{q} is not in (0, 1)")
    return cw_index(q) // 2


def enumerate_unit_rationals(count: int) -> list[Fraction]:
    return [unit_rational(n) for n in range(1, count + 1)]


def _simplest_between(x: Fraction, y: Fraction | None) -> Fraction:
    """Simplest rational in the open interval (x, y); ``y=None`` means +inf."""
    fl = math.floor(x)
    cand = fl + 1
    if y is None or cand < y:
        return Fraction(cand)
    # no integer strictly inside: x and y share the integer part fl
    lo = Fraction(fl)
    inv_hi = None if x == lo else 1 / (x - lo)
    return lo + 1 / _simplest_between(1 / (y - lo), inv_hi)


def simplest_rational(lo: float, hi: float) -> Fraction:
    """Least-index rational of (0, 1) inside the open interval (lo, hi)."""
    a = max(Fraction(lo), Fraction(0))
    b = min(Fraction(hi), Fraction(1))
    if not a < b:
        raise ValueError(f"({lo}, {hi}) does not meet (0, 1)")
    return _simplest_between(a, b)


def least_index_rational(lo: float, hi: float) -> tuple[Fraction, int]:
    """Simplest rational in (lo, hi) and its position in the enumeration."""
    q = simplest_rational(lo, hi)
    return q, unit_index(q)
