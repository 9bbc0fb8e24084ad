"""
HeLP constraints for torsion units of V(ZG).

For a unit u of order k with partial augmentations nu (one integer per
admissible class, summing to 1) and a character chi,

    k * mu_l(u, chi) = sum_{d | k} Tr_{Q(z^d)/Q}( chi(u^d) z^(-d l) ),   z = zeta_k,

must be a non-negative multiple of k for every l.  The d = 1 term is linear
in nu; the others depend on the partial augmentations of the proper powers
u^d, which are taken from the solution sets of smaller orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd
import logging

from . import fm
from .cyclo import Cyclotomic, divisors, lcm, trace_over
from .rules import NONEXISTENT, TRIVIAL, RuleOutcome, apply_rules
from .tables import CharacterTable, GroupData, class_of_power

log = logging.getLogger(__name__)

EXCEPTIONAL = "exceptional"


class UnboundedRelaxation(RuntimeError):
    def __init__(self, k: int, cls: str):
        self.order, self.cls = k, cls
        super().__init__(f"order {k}: relaxation is unbounded in nu_{cls}")


@dataclass(frozen=True, order=True)
class PAVector:
    order: int
    classes: tuple[str, ...]
    values: tuple[int, ...]

    def __getitem__(self, cls: str) -> int:
        return self.values[self.classes.index(cls)]

    def items(self):
        return zip(self.classes, self.values)

    @property
    def support(self) -> list[str]:
        return [c for c, v in self.items() if v]

    @property
    def trivial_class(self) -> str | None:
        s = self.support
        return s[0] if len(s) == 1 else None

    @classmethod
    def indicator(cls, g: GroupData, k: int, at: str) -> PAVector:
        classes = admissible_classes(g, k)
        return cls(k, classes, tuple(int(c == at) for c in classes))

    def __str__(self):
        return "(" + ", ".join(map(str, self.values)) + ")"


@dataclass(frozen=True)
class PowerAssignment:
    """Partial augmentations of the proper powers of u.

    ``choices`` holds (m, PA of u^(k/m)) for each m | k with 1 < m < k.
    """

    order: int
    choices: tuple[tuple[int, PAVector], ...] = ()

    def choice(self, m: int) -> PAVector:
        for mm, v in self.choices:
            if mm == m:
                return v
        raise KeyError(f"no choice for order {m} in assignment for order {self.order}")

    @property
    def overapproximated(self) -> bool:
        return any(v.trivial_class is None for _, v in self.choices)

    def describe(self) -> str:
        if not self.choices:
            return "(no proper powers)"
        parts = []
        for m, v in reversed(self.choices):
            target = v.trivial_class or str(dict(zip(v.classes, v.values)))
            parts.append(f"u^{self.order // m} -> {target}")
        return ", ".join(parts)


@dataclass(frozen=True)
class AffineForm:
    """k * mu_l as an affine function of the partial augmentations."""

    scale: int
    classes: tuple[str, ...]
    coeffs: tuple[Fraction, ...]
    constant: Fraction

    def numerator(self, v) -> Fraction:
        vals = v.values if isinstance(v, PAVector) else v
        return sum((c * x for c, x in zip(self.coeffs, vals)), self.constant)

    def evaluate(self, v):
        """(mu, admissible) where admissible means mu is a non-negative integer."""
        mu = self.numerator(v) / self.scale
        return mu, mu >= 0 and mu.denominator == 1

    def coeff(self, cls: str) -> Fraction:
        return self.coeffs[self.classes.index(cls)]


@dataclass(frozen=True)
class Constraint:
    table: str   # "*" or the characteristic
    char: int    # 1-based row
    l: int
    form: AffineForm

    @property
    def label(self) -> str:
        return f"mu_{self.l}(u, chi_{self.char}, {self.table})"


def evaluate(f: AffineForm, v):
    return f.evaluate(v)


# -- structural pieces ------------------------------------------------------

def candidate_orders(g: GroupData) -> list[int]:
    return divisors(g.exponent)[1:]


def admissible_classes(g: GroupData, k: int) -> tuple[str, ...]:
    """Non-identity classes whose element order divides k."""
    return tuple(c.name for c in g.classes if c.order > 1 and k % c.order == 0)


def applicable_tables(g: GroupData, k: int) -> list[CharacterTable]:
    return [t for t in g.tables if t.characteristic == 0 or k % t.characteristic]


def power_assignments(g: GroupData, k: int, prior) -> list[PowerAssignment]:
    """Compatible choices of partial augmentations for u^d, d | k, 1 < d < k.

    ``prior`` maps each smaller order to an object with a ``solutions``
    sequence.  A choice that is trivial at class c forces every smaller
    power to be trivial at the corresponding power of c; combinations with
    a non-trivial choice are kept unchecked (marked ``overapproximated``).
    """
    mids = divisors(k)[1:-1]
    pools = []
    for m in mids:
        if m not in prior:
            raise KeyError(f"no result for order {m} (needed by order {k})")
        sols = list(prior[m].solutions)
        if not sols:
            return []
        pools.append(sols)
    out = []
    for combo in product(*pools):
        chosen = dict(zip(mids, combo))
        if _compatible(g, chosen):
            out.append(PowerAssignment(k, tuple(zip(mids, combo))))
    return out


def _compatible(g: GroupData, chosen: dict[int, PAVector]) -> bool:
    for m, v in chosen.items():
        c = v.trivial_class
        if c is None:
            continue
        for m2, v2 in chosen.items():
            if m2 < m and m % m2 == 0:
                if v2.trivial_class is None:
                    continue
                if v2.trivial_class != class_of_power(g, c, m // m2):
                    return False
    return True


def induced_assignment(g: GroupData, k: int, cls: str) -> PowerAssignment:
    """The power assignment of a group element of order k in ``cls``."""
    choices = []
    for m in divisors(k)[1:-1]:
        choices.append((m, PAVector.indicator(g, m, class_of_power(g, cls, k // m))))
    return PowerAssignment(k, tuple(choices))


# -- the mu forms -----------------------------------------------------------

def character_of_power(g, t: CharacterTable, row: int, v: PAVector) -> Cyclotomic:
    """chi(w) = sum_c nu_c chi(c) for a unit w with partial augmentations v."""
    total = Cyclotomic.rational(0)
    for c, n in v.items():
        if n:
            total = total + t.value(row, c).scale(n)
    return total


def mu_form(g: GroupData, t: CharacterTable, char: int, k: int, l: int,
            a: PowerAssignment, root: int = 1) -> AffineForm:
    """Affine form of k * mu_l(u, chi_char) with z = zeta_k**root."""
    if gcd(root, k) != 1:
        raise ValueError(f"zeta_{k}^{root} is not a primitive root")
    if t.characteristic and k % t.characteristic == 0:
        raise ValueError(f"characteristic-{t.characteristic} table does not apply to order {k}")
    row = char - 1
    if not 0 <= row < len(t.rows):
        raise IndexError(f"table {t.label} has no chi_{char}")
    classes = admissible_classes(g, k)
    z = Cyclotomic.zeta(k, -root * l)
    coeffs = tuple(trace_over(t.value(row, c) * z, k) for c in classes)
    constant = Fraction(0)
    for d in divisors(k)[1:]:
        m = k // d
        if m == 1:
            val = t.value(row, "1a")
        else:
            val = character_of_power(g, t, row, a.choice(m))
        constant += trace_over(val * Cyclotomic.zeta(m, -root * l), m)
    return AffineForm(k, classes, coeffs, constant)


def constraints(g: GroupData, k: int, a: PowerAssignment, tables=None, root: int = 1):
    """Every (table, character, l) constraint for order k, in a fixed order."""
    out = []
    for t in tables if tables is not None else applicable_tables(g, k):
        for r in range(len(t.rows)):
            for l in range(k):
                out.append(Constraint(t.label, r + 1, l, mu_form(g, t, r + 1, k, l, a, root)))
    return out


# -- solving ----------------------------------------------------------------

@dataclass
class SolveOptions:
    box: int | None = None        # fallback half-width; default max ordinary degree
    fm_budget: int = 5000         # row count at which elimination gives up
    root: int = 1
    certificates: bool = True
    certificate_limit: int = 20000


@dataclass
class Solution:
    """Outcome of solving one (order, assignment) pair."""

    assignment: PowerAssignment
    vectors: list[PAVector]
    bounds: dict[str, tuple[int, int]] = field(default_factory=dict)
    fallback: list[str] = field(default_factory=list)  # classes bounded by the box
    certificate: list[Constraint] | None = None
    n_constraints: int = 0


def _integer_rows(cons):
    """(coeffs, constant, modulus) with integer entries, duplicates removed."""
    seen = {}
    for c in cons:
        f = c.form
        den = reduce(lcm, (x.denominator for x in f.coeffs + (f.constant,)), 1)
        key = (tuple(int(x * den) for x in f.coeffs), int(f.constant * den), f.scale * den)
        seen.setdefault(key, c)
    return list(seen.items())


def _satisfies(rows, vals) -> bool:
    for (a, b, mod), _ in rows:
        s = b
        for x, y in zip(a, vals):
            s += x * y
        if s < 0 or s % mod:
            return False
    return True


def solve(g: GroupData, k: int, a: PowerAssignment, options: SolveOptions | None = None,
          tables=None) -> Solution:
    """All integer partial augmentations passing every HeLP constraint."""
    opts = options or SolveOptions()
    classes = admissible_classes(g, k)
    result = Solution(a, [])
    if not classes:
        return result
    cons = constraints(g, k, a, tables, opts.root)
    rows = _integer_rows(cons)
    result.n_constraints = len(cons)
    m = len(classes)

    if m == 1:
        v = (1,)
        if _satisfies(rows, v):
            result.vectors = [PAVector(k, classes, v)]
        result.bounds = {classes[0]: (1, 1)}
        return result

    # x_{m-1} = 1 - sum of the others
    reduced = []
    for (a_, b, mod), _ in rows:
        last = a_[-1]
        reduced.append((tuple(x - last for x in a_[:-1]), Fraction(b + last)))
    ranges = []
    box = opts.box if opts.box is not None else max(
        g.ordinary.degree(r) for r in range(len(g.ordinary.rows)))
    for i in range(m - 1):
        try:
            lo, hi = fm.variable_bounds(reduced, m - 1, i, opts.fm_budget)
        except fm.Infeasible:
            return result
        except fm.BudgetExceeded:
            log.info("order %d: elimination budget exceeded for nu_%s, using box %d",
                     k, classes[i], box)
            result.fallback.append(classes[i])
            lo, hi = Fraction(-box), Fraction(box)
        if lo is None or hi is None:
            if opts.box is None:
                raise UnboundedRelaxation(k, classes[i])
            # an explicit box also caps a relaxation that is unbounded
            if classes[i] not in result.fallback:
                result.fallback.append(classes[i])
            lo = Fraction(-box) if lo is None else max(lo, Fraction(-box))
            hi = Fraction(box) if hi is None else min(hi, Fraction(box))
        r = fm.integer_range(lo, hi)
        ranges.append(r)
        result.bounds[classes[i]] = (r.start, r.stop - 1)

    points = []
    for free in product(*ranges):
        vals = free + (1 - sum(free),)
        points.append(vals)
    found = [v for v in points if _satisfies(rows, v)]
    result.vectors = sorted(PAVector(k, classes, v) for v in found)
    if points:
        result.bounds[classes[-1]] = (min(p[-1] for p in points), max(p[-1] for p in points))
    if opts.certificates and len(points) <= opts.certificate_limit:
        result.certificate = _greedy_certificate(rows, points, set(found))
    return result


def _greedy_certificate(rows, points, solutions):
    """A small set of constraints that, with the derived bounds, leaves only the solutions."""
    kills: list[set[int]] = [set() for _ in rows]
    for pi, vals in enumerate(points):
        if vals in solutions:
            continue
        for ri, ((a, b, mod), _) in enumerate(rows):
            s = b + sum(x * y for x, y in zip(a, vals))
            if s < 0 or s % mod:
                kills[ri].add(pi)
    alive = {pi for pi, v in enumerate(points) if v not in solutions}
    chosen = []
    while alive:
        ri = max(range(len(rows)), key=lambda i: (len(kills[i] & alive), -i))
        gain = kills[ri] & alive
        if not gain:
            break
        chosen.append(ri)
        alive -= gain
    return [rows[i][1] for i in sorted(chosen)]


def classify(g: GroupData, k: int, a: PowerAssignment, v: PAVector) -> str | None:
    """The class u is rationally conjugate into, or None if exceptional.

    This is the conjugacy criterion itself: u and each proper power carry a
    single nonzero partial augmentation.
    """
    c = v.trivial_class
    if c is None or v[c] != 1:
        return None
    if any(w.trivial_class is None for _, w in a.choices):
        return None
    return c


# -- whole-group driver -----------------------------------------------------

@dataclass
class CaseResult:
    order: int
    method: str                        # "rule" or "help"
    status: str                        # trivial / nonexistent / exceptional
    admissible: tuple[str, ...] = ()
    rule: RuleOutcome | None = None
    also: list[RuleOutcome] = field(default_factory=list)
    branches: list[Solution] = field(default_factory=list)
    solutions: tuple[PAVector, ...] = ()
    exceptional: tuple[tuple[PowerAssignment, PAVector], ...] = ()
    flags: list[str] = field(default_factory=list)


@dataclass
class CheckOptions:
    rules: frozenset | None = None     # None = every rule; empty = HeLP only
    solve: SolveOptions = field(default_factory=SolveOptions)


def solve_case(g: GroupData, k: int, prior, solve_opts: SolveOptions | None = None) -> CaseResult:
    """Run HeLP for order k over every compatible power assignment."""
    classes = admissible_classes(g, k)
    res = CaseResult(k, "help", NONEXISTENT, classes)
    if not classes:
        res.flags.append("no admissible classes")
        return res
    assigns = power_assignments(g, k, prior)
    if not assigns:
        res.flags.append("no compatible power assignment")
    sols, exc = set(), []
    for a in assigns:
        s = solve(g, k, a, solve_opts)
        res.branches.append(s)
        if a.overapproximated:
            res.flags.append(f"over-approximated assignment: {a.describe()}")
        if s.fallback:
            res.flags.append(f"box fallback for {', '.join(s.fallback)} ({a.describe()})")
        for v in s.vectors:
            sols.add(v)
            c = classify(g, k, a, v)
            if c is None:
                exc.append((a, v))
            elif g.class_order(c) != k:
                res.flags.append(
                    f"solution {v} sits on {c} of order {g.class_order(c)}: a unit with these "
                    f"partial augmentations would be conjugate to an element of order {k} "
                    "in that class, so it does not occur")
    res.solutions = tuple(sorted(sols))
    res.exceptional = tuple(exc)
    if exc:
        res.status = EXCEPTIONAL
    elif sols:
        res.status = TRIVIAL
    return res


def check_group(g: GroupData, options: CheckOptions | None = None,
                orders=None) -> list[CaseResult]:
    """Decide every candidate order in increasing order.

    ``orders`` restricts the run; it should be closed under taking divisors
    so that each case sees its powers.
    """
    opts = options or CheckOptions()
    prior: dict[int, CaseResult] = {}
    out = []
    todo = candidate_orders(g) if orders is None else sorted(set(orders) - {1})
    for k in todo:
        fired = apply_rules(g, k, prior, opts.rules)
        if fired:
            rule = fired[0]
            res = CaseResult(k, "rule", rule.decision, admissible_classes(g, k), rule, fired[1:])
            if rule.decision == TRIVIAL:
                res.solutions = tuple(sorted(
                    PAVector.indicator(g, k, c) for c in g.classes_of_order(k)))
        else:
            res = solve_case(g, k, prior, opts.solve)
        log.debug("order %d: %s (%s)", k, res.status, res.method)
        prior[k] = res
        out.append(res)
    return out


def verdict(results) -> str:
    if any(r.status == EXCEPTIONAL for r in results):
        return "inconclusive"
    return "verified"
