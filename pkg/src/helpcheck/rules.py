"""
Cited theorems about torsion units in ZG for G = PSL(2, p^f), used as filters
ahead of the HeLP solver.

They are trusted, not derived: each fires only when ``g.psl`` metadata is
present and its hypotheses hold, and otherwise abstains (returns None).
``power-closure`` is the exception; it is a plain consequence of u^(k/m)
having order m and needs no metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cyclo import divisors, is_prime
from .tables import GroupData

TRIVIAL = "trivial"
NONEXISTENT = "nonexistent"


@dataclass(frozen=True)
class RuleOutcome:
    rule_id: str
    decision: str
    justification: str
    source: str = ""


def _psl(g: GroupData):
    return g.psl if g.psl else (None, None)


def rule_p_order(g: GroupData, k: int, prior=None):
    p, f = _psl(g)
    if p is None or k != p or p == 2 or f > 2:
        return None
    return RuleOutcome(
        "p-order", TRIVIAL,
        f"PSL(2,{p}^{f}) with p odd and f <= 2: units of order p are rationally conjugate "
        "to group elements",
        "Hertweck 2007, Prop. 6.1")


def rule_p_divisible(g: GroupData, k: int, prior=None):
    p, f = _psl(g)
    if p is None or f != 1 or p == 2 or k % p or k == p:
        return None
    return RuleOutcome(
        "p-divisible", NONEXISTENT,
        f"PSL(2,{p}), p odd: a torsion unit of order divisible by {p} has order {p}, "
        f"so none of order {k} exists",
        "Hertweck 2007, Prop. 6.3")


def rule_p_regular(g: GroupData, k: int, prior=None):
    p, _ = _psl(g)
    if p is None or k % p == 0 or g.classes_of_order(k):
        return None
    return RuleOutcome(
        "p-regular", NONEXISTENT,
        f"{p}-regular torsion units have the order of some group element, "
        f"and G has no element of order {k}",
        "Hertweck 2007, Prop. 6.7")


def rule_prime_order(g: GroupData, k: int, prior=None):
    p, _ = _psl(g)
    if p is None or not is_prime(k) or k == p:
        return None
    if g.classes_of_order(k):
        return RuleOutcome(
            "prime-order", TRIVIAL,
            f"units of prime order {k} != {p} are rationally conjugate to group elements",
            "Hertweck 2007, Prop. 6.4")
    # no element of order k: existence is settled by the p-regular rule
    inner = rule_p_regular(g, k)
    if inner is None:
        return None
    return RuleOutcome("prime-order", NONEXISTENT,
                       inner.justification + " (via p-regular)", "Hertweck 2007, Props. 6.4 and 6.7")


def rule_order_six(g: GroupData, k: int, prior=None):
    p, _ = _psl(g)
    if p is None or p in (2, 3) or k != 6:
        return None
    if g.classes_of_order(6):
        return RuleOutcome("order-six", TRIVIAL,
                           "units of order 6 are rationally conjugate to group elements",
                           "Hertweck 2007, Prop. 6.6")
    return RuleOutcome(
        "order-six", NONEXISTENT,
        "units of order 6 would be rationally conjugate to group elements, "
        "and G has no element of order 6",
        "Hertweck 2007, Prop. 6.6")


def rule_power_closure(g: GroupData, k: int, prior=None):
    """Order k is impossible once some order m | k, 1 < m < k, is."""
    for m in divisors(k)[1:-1]:
        res = (prior or {}).get(m)
        if res is not None and res.status == NONEXISTENT:
            return RuleOutcome(
                "power-closure", NONEXISTENT,
                f"u^{k // m} would be a torsion unit of order {m}, which does not exist")
    return None


# application order; the first rule that decides is reported
RULES = {
    "p-order": rule_p_order,
    "p-divisible": rule_p_divisible,
    "prime-order": rule_prime_order,
    "order-six": rule_order_six,
    "p-regular": rule_p_regular,
    "power-closure": rule_power_closure,
}


# numbering of the cited propositions, accepted wherever a rule id is
ALIASES = {
    "6.1": "p-order",
    "6.3": "p-divisible",
    "6.4": "prime-order",
    "6.6": "order-six",
    "6.7": "p-regular",
}


def resolve(rule_id: str) -> str:
    """Canonical rule id; raises KeyError for unknown ids."""
    rid = ALIASES.get(rule_id, rule_id)
    if rid not in RULES:
        raise KeyError(rule_id)
    return rid


def apply_rules(g: GroupData, k: int, prior, enabled=None):
    """All deciding outcomes for order k, in application order."""
    out = []
    for rid, fn in RULES.items():
        if enabled is not None and rid not in enabled:
            continue
        res = fn(g, k, prior)
        if res is not None:
            out.append(res)
    return out
