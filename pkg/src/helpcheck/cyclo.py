"""
Exact arithmetic in cyclotomic fields Q(zeta_n).

An element is stored sparsely as a map exponent -> rational coefficient
together with the root order n, meaning sum(c * zeta_n**e).  Values of
different orders are combined by lifting both to the lcm order.

Rationals are ``fractions.Fraction`` throughout; nothing here touches
floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
import numbers

Rational = Fraction


class CycloError(ValueError):
    pass


class SubfieldError(CycloError):
    """Raised when a trace is requested over a field that does not contain x."""


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of n as ((p, e), ...) in increasing p."""
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == ((n, 1),)


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def phi(n: int) -> int:
    """Euler's totient."""
    result = n
    for p, _ in factorize(n):
        result = result // p * (p - 1)
    return result


def moebius(n: int) -> int:
    fs = factorize(n)
    if any(e > 1 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def ramanujan(m: int, j: int) -> int:
    """Ramanujan sum c_m(j), the trace of zeta_m**j down to Q."""
    if m < 1:
        raise ValueError(f"expected a positive integer, got {m}")
    g = gcd(j % m, m)  # gcd(0, m) == m
    q = m // g
    return moebius(q) * phi(m) // phi(q)


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first.

    Obtained by dividing x^n - 1 by Phi_d for every proper divisor d.
    """
    num = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        num = _exact_divide(num, cyclotomic_poly(d))
    return tuple(num)


def _exact_divide(num: list[int], den: tuple[int, ...]) -> list[int]:
    # den is monic with integer coefficients, so the quotient is integral
    num = list(num)
    dd = len(den) - 1
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            quot[i - dd] = c
            for j, dc in enumerate(den):
                num[i - dd + j] -= c * dc
    assert not any(num), "non-exact cyclotomic division"
    return quot


def _as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, numbers.Rational):
        return Fraction(q.numerator, q.denominator)
    raise TypeError(f"not a rational: {q!r}")


class Cyclotomic:
    """Immutable element of Q(zeta_n)."""

    __slots__ = ("order", "terms")

    def __init__(self, order: int, terms=()):
        if order < 1:
            raise CycloError(f"root order must be positive, got {order}")
        acc: dict[int, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for e, c in items:
            e %= order
            acc[e] = acc.get(e, Fraction(0)) + _as_fraction(c)
        object.__setattr__(self, "order", order)
        object.__setattr__(
            self, "terms", tuple(sorted((e, c) for e, c in acc.items() if c))
        )

    def __setattr__(self, name, value):
        raise AttributeError("Cyclotomic is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeta(cls, n: int, e: int = 1) -> Cyclotomic:
        return cls(n, [(e, 1)])

    @classmethod
    def rational(cls, q, order: int = 1) -> Cyclotomic:
        return cls(order, [(0, q)])

    @classmethod
    def coerce(cls, x) -> Cyclotomic:
        if isinstance(x, Cyclotomic):
            return x
        return cls.rational(_as_fraction(x))

    # -- structure --------------------------------------------------------

    def lift(self, n: int) -> Cyclotomic:
        """The same field element written over zeta_n (order must divide n)."""
        if n % self.order:
            raise CycloError(f"cannot lift order {self.order} to {n}")
        f = n // self.order
        return Cyclotomic(n, [(e * f, c) for e, c in self.terms])

    def is_zero(self) -> bool:
        return not self.canonical().terms

    def is_rational(self) -> bool:
        t = self.canonical().terms
        return not t or (len(t) == 1 and t[0][0] == 0)

    def to_rational(self) -> Fraction:
        t = self.canonical().terms
        if not t:
            return Fraction(0)
        if len(t) == 1 and t[0][0] == 0:
            return t[0][1]
        raise CycloError(f"{self} is not rational")

    def canonical(self) -> Cyclotomic:
        """Reduce the polynomial representative modulo Phi_order."""
        n = self.order
        poly = cyclotomic_poly(n)
        deg = len(poly) - 1
        if all(e < deg for e, _ in self.terms):
            return self
        coef = [Fraction(0)] * n
        for e, c in self.terms:
            coef[e] = c
        for i in range(n - 1, deg - 1, -1):
            c = coef[i]
            if c:
                for j, pc in enumerate(poly):
                    if pc:
                        coef[i - deg + j] -= c * pc
        return Cyclotomic(n, [(e, c) for e, c in enumerate(coef[:deg]) if c])

    def galois(self, a: int) -> Cyclotomic:
        """Apply the automorphism zeta_n -> zeta_n**a."""
        if gcd(a, self.order) != 1:
            raise CycloError(f"{a} is not a unit modulo {self.order}")
        return Cyclotomic(self.order, [(a * e, c) for e, c in self.terms])

    def conjugate(self) -> Cyclotomic:
        return self.galois(-1)

    def trace(self) -> Fraction:
        """Trace from Q(zeta_order) down to Q."""
        n = self.order
        return sum((c * ramanujan(n, e) for e, c in self.terms), Fraction(0))

    def normalized_trace(self) -> Fraction:
        # invariant under lifting: Tr / [Q(zeta_n):Q]
        return self.trace() / phi(self.order)

    def __complex__(self) -> complex:
        import cmath
        return sum(
            (float(c) * cmath.exp(2j * cmath.pi * e / self.order) for e, c in self.terms),
            0j,
        )

    # -- arithmetic -------------------------------------------------------

    def _common(self, other) -> tuple[Cyclotomic, Cyclotomic]:
        other = Cyclotomic.coerce(other)
        n = lcm(self.order, other.order)
        return self.lift(n), other.lift(n)

    def __add__(self, other):
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        return Cyclotomic(a.order, a.terms + b.terms)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, [(e, -c) for e, c in self.terms])

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            return self + (-Cyclotomic.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Rational):
            return self.scale(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(other)
        acc = []
        for e1, c1 in a.terms:
            for e2, c2 in b.terms:
                acc.append((e1 + e2, c1 * c2))
        return Cyclotomic(a.order, acc)

    __rmul__ = __mul__

    def scale(self, q) -> Cyclotomic:
        q = _as_fraction(q)
        return Cyclotomic(self.order, [(e, q * c) for e, c in self.terms])

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = Cyclotomic.rational(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, numbers.Rational):
            other = Cyclotomic.rational(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(other)
        return a.canonical().terms == b.canonical().terms

    def __hash__(self):
        # equal elements have equal normalised traces; rationals hash like Fraction
        return hash(self.normalized_trace())

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"Cyclotomic({self.order}, {[(e, str(c)) for e, c in self.terms]})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            if e == 0:
                mono = str(c)
            else:
                root = f"z{self.order}" + (f"^{e}" if e != 1 else "")
                if c == 1:
                    mono = root
                elif c == -1:
                    mono = "-" + root
                else:
                    mono = f"{c}*{root}"
            parts.append(mono)
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    # -- literal syntax ---------------------------------------------------

    def to_literal(self):
        """Data-file literal; plain integers for integer constants."""
        if self.is_rational():
            q = self.to_rational()
            if q.denominator == 1:
                return q.numerator
        terms = []
        for e, c in self.terms:
            terms.append([e, c.numerator] if c.denominator == 1 else [e, c.numerator, c.denominator])
        return {"n": self.order, "terms": terms}

    @classmethod
    def from_literal(cls, lit) -> Cyclotomic:
        if isinstance(lit, bool):
            raise CycloError(f"bad cyclotomic literal {lit!r}")
        if isinstance(lit, int):
            return cls.rational(lit)
        if not isinstance(lit, dict) or set(lit) != {"n", "terms"}:
            raise CycloError(f"bad cyclotomic literal {lit!r}")
        n = lit["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise CycloError(f"bad root order in literal {lit!r}")
        terms = []
        for t in lit["terms"]:
            if not isinstance(t, list) or len(t) not in (2, 3) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in t
            ):
                raise CycloError(f"bad term {t!r} in literal {lit!r}")
            den = t[2] if len(t) == 3 else 1
            if den <= 0:
                raise CycloError(f"non-positive denominator in literal {lit!r}")
            terms.append((t[0], Fraction(t[1], den)))
        return cls(n, terms)


def make(order: int, terms) -> Cyclotomic:
    return Cyclotomic(order, terms)


def galois(x: Cyclotomic, a: int) -> Cyclotomic:
    return x.galois(a)


def canonical(x: Cyclotomic) -> Cyclotomic:
    return x.canonical()


def trace_over(x, m: int) -> Fraction:
    """Tr_{Q(zeta_m)/Q}(x) for x lying in Q(zeta_m).

    x is lifted to N = lcm(x.order, m); membership in the subfield is
    checked as invariance under every sigma_a with a = 1 mod m.
    """
    x = Cyclotomic.coerce(x)
    n = lcm(x.order, m)
    x = x.lift(n)
    if n != m:
        for a in range(1 + m, n, m):
            if gcd(a, n) == 1 and x.galois(a) != x:
                raise SubfieldError(f"{x} does not lie in Q(zeta_{m})")
    return x.trace() * phi(m) / phi(n)
