"""
Fourier-Motzkin elimination over exact rationals.

A system is a list of rows ``(a, b)`` meaning ``a . x + b >= 0`` with ``a`` a
tuple of ints and ``b`` a Fraction.  Rows are kept with primitive ``a`` and
deduplicated keeping the tightest constant, which is all the redundancy
removal the small systems here need.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import ceil, floor, gcd


class Infeasible(Exception):
    pass


class BudgetExceeded(Exception):
    pass


def normalize(rows):
    """Primitive coefficient vectors, tightest constant per direction.

    Raises Infeasible on a constant row ``b >= 0`` with ``b < 0``.
    """
    best: dict[tuple[int, ...], Fraction] = {}
    for a, b in rows:
        g = reduce(gcd, a, 0)
        if g == 0:
            if b < 0:
                raise Infeasible()
            continue
        a = tuple(x // g for x in a)
        b = Fraction(b) / g
        if a not in best or b < best[a]:
            best[a] = b
    return sorted(best.items())


def eliminate(rows, j: int):
    """Project out variable ``j`` (its column becomes zero)."""
    pos, neg, out = [], [], []
    for a, b in rows:
        (pos if a[j] > 0 else neg if a[j] < 0 else out).append((a, b))
    for ap, bp in pos:
        for an, bn in neg:
            s, t = -an[j], ap[j]
            a = tuple(s * x + t * y for x, y in zip(ap, an))
            out.append((a, s * bp + t * bn))
    return normalize(out)


def variable_bounds(rows, nvars: int, keep: int, budget: int):
    """Rational (lower, upper) bounds on x_keep implied by the system.

    Either side is None when unbounded.  Raises Infeasible or BudgetExceeded.
    """
    rows = normalize(rows)
    todo = [j for j in range(nvars) if j != keep]
    while todo:
        # cheapest elimination first
        def cost(j):
            p = sum(1 for a, _ in rows if a[j] > 0)
            n = sum(1 for a, _ in rows if a[j] < 0)
            return p * n - p - n
        j = min(todo, key=cost)
        todo.remove(j)
        rows = eliminate(rows, j)
        if len(rows) > budget:
            raise BudgetExceeded(len(rows))
    lo = hi = None
    for a, b in rows:
        c = a[keep]
        if c > 0:
            v = -b / c
            lo = v if lo is None else max(lo, v)
        elif c < 0:
            v = b / -c
            hi = v if hi is None else min(hi, v)
    if lo is not None and hi is not None and lo > hi:
        raise Infeasible()
    return lo, hi


def integer_range(lo: Fraction, hi: Fraction) -> range:
    return range(ceil(lo), floor(hi) + 1)
