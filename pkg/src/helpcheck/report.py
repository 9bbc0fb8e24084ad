"""
Report assembly.  Results are first turned into a plain dict (the JSON
schema); markdown is rendered from that dict only, so both formats carry
the same content and a parsed JSON report re-renders byte for byte.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
import json

from .engine import (EXCEPTIONAL, AffineForm, CaseResult, Constraint, PAVector,
                     Solution, applicable_tables, verdict)
from .rules import NONEXISTENT, TRIVIAL
from .tables import GroupData

SCHEMA = "helpcheck.report/1"

_STATUS_TEXT = {
    TRIVIAL: "all trivial",
    NONEXISTENT: "nonexistent",
    EXCEPTIONAL: "exceptional solutions remain",
}

# rules whose theorem speaks of conjugacy but which here rule out existence
_VACUOUS = {"p-divisible", "p-regular", "prime-order", "order-six"}


def qstr(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def nu(cls: str) -> str:
    return f"ν_{cls}"


def _linear(classes, coeffs) -> str:
    parts = []
    for c, x in zip(classes, coeffs):
        if not x:
            continue
        mag = abs(x)
        term = nu(c) if mag == 1 else f"{qstr(mag)}{nu(c)}"
        parts.append(("- " if x < 0 else "+ ") + term)
    if not parts:
        return "0"
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


class GammaNames:
    """Names recurring coefficient patterns gamma_1, gamma_2, ... within one case.

    ``seed`` pre-registers patterns (as integer tuples) so a rendering can
    follow an externally fixed naming.
    """

    def __init__(self, classes, seed=()):
        self.classes = tuple(classes)
        self.patterns: list[tuple[int, ...]] = []
        for p in seed:
            self.patterns.append(tuple(p))

    def split(self, coeffs) -> tuple[Fraction, int | None, tuple]:
        """coeffs = factor * pattern; returns (factor, gamma index or None, pattern)."""
        coeffs = tuple(Fraction(c) for c in coeffs)
        for i, p in enumerate(self.patterns):
            f = _multiple(coeffs, p)
            if f is not None:
                return f, i, p
        nz = [c for c in coeffs if c]
        if not nz:
            return Fraction(0), None, coeffs
        den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for c in nz), 1)
        ints = [int(c * den) for c in coeffs]
        g = reduce(gcd, ints, 0)
        if ints[next(i for i, c in enumerate(ints) if c)] < 0:
            g = -g
        pattern = tuple(c // g for c in ints)
        factor = Fraction(g, den)
        if len(nz) == 1:
            return factor, None, pattern
        self.patterns.append(pattern)
        return factor, len(self.patterns) - 1, pattern

    def definitions(self) -> dict[str, str]:
        return {f"γ_{i + 1}": _linear(self.classes, p) for i, p in enumerate(self.patterns)}

    def used_definitions(self, used) -> dict[str, str]:
        d = self.definitions()
        return {k: d[k] for k in d if k in used}


def _multiple(coeffs, pattern):
    f = None
    for c, p in zip(coeffs, pattern):
        if p == 0:
            if c:
                return None
            continue
        r = c / p
        if f is None:
            f = r
        elif r != f:
            return None
    return f if f else None


def render_form(form: AffineForm, names: GammaNames | None = None) -> str:
    """k*mu in grouped style, e.g. ``(2γ_1 + 4)/6``."""
    names = names or GammaNames(form.classes)
    factor, gi, pattern = names.split(form.coeffs)
    if factor == 0:
        body = qstr(form.constant)
        return f"{body}/{form.scale}"
    if gi is None:
        lin = _linear(form.classes, [factor * p for p in pattern])
    else:
        sym = f"γ_{gi + 1}"
        if factor == 1:
            lin = sym
        elif factor == -1:
            lin = "-" + sym
        else:
            lin = f"{qstr(factor)}{sym}"
    if form.constant > 0:
        lin += f" + {qstr(form.constant)}"
    elif form.constant < 0:
        lin += f" - {qstr(-form.constant)}"
    return f"({lin})/{form.scale}"


def form_dict(c: Constraint, names: GammaNames) -> dict:
    return {
        "mu": f"μ_{c.l}(u, χ_{c.char}, {c.table})",
        "table": c.table, "char": c.char, "l": c.l,
        "form": render_form(c.form, names),
        "scale": c.form.scale,
        "coeffs": {cls: qstr(x) for cls, x in zip(c.form.classes, c.form.coeffs)},
        "constant": qstr(c.form.constant),
    }


def _pa_dict(v: PAVector) -> dict:
    return {c: x for c, x in v.items()}


def branch_dict(g: GroupData, k: int, s: Solution, names: GammaNames, forms=None) -> dict:
    from .engine import classify
    a = s.assignment
    d = {
        "assignment": a.describe(),
        "powers": [
            {"order": m, "power": k // m, "pa": _pa_dict(v), "class": v.trivial_class}
            for m, v in reversed(a.choices)
        ],
        "overapproximated": a.overapproximated,
        "constraints": s.n_constraints,
        "bounds": {c: list(b) for c, b in s.bounds.items()},
        "fallback": list(s.fallback),
        "certificate": None if s.certificate is None else [
            form_dict(c, names) for c in s.certificate],
        "solutions": [
            {"nu": list(v.values), "class": classify(g, k, a, v)} for v in s.vectors
        ],
    }
    if forms is not None:
        d["forms"] = [form_dict(c, names) for c in forms]
    return d


def case_dict(g: GroupData, r: CaseResult, all_forms: bool = False) -> dict:
    from .engine import constraints
    names = GammaNames(r.admissible)
    d = {
        "order": r.order,
        "method": r.method,
        "status": r.status,
        "admissible": list(r.admissible),
        "tables": [t.label for t in applicable_tables(g, r.order)] if r.method == "help" else [],
    }
    if r.rule is not None:
        d["rule"] = {
            "id": r.rule.rule_id, "source": r.rule.source,
            "justification": r.rule.justification,
            "also": [o.rule_id for o in r.also],
        }
        if r.rule.decision == NONEXISTENT and r.rule.rule_id in _VACUOUS:
            d["note"] = ("no torsion unit of this order exists, so any statement that such "
                         "units are rationally conjugate to group elements holds vacuously")
    d["branches"] = [
        branch_dict(g, r.order, s, names,
                    constraints(g, r.order, s.assignment) if all_forms else None)
        for s in r.branches
    ]
    d["gammas"] = names.definitions()
    d["solutions"] = [list(v.values) for v in r.solutions]
    d["flags"] = list(r.flags)
    return d


def group_dict(g: GroupData) -> dict:
    return {
        "name": g.name, "order": g.order, "exponent": g.exponent,
        "psl": None if g.psl is None else {"p": g.psl[0], "f": g.psl[1]},
        "classes": [{"name": c.name, "order": c.order} for c in g.classes],
        "tables": [t.label for t in g.tables],
    }


def check_report(g: GroupData, results, rules=None, stamp=None) -> dict:
    v = verdict(results)
    rep = {
        "schema": SCHEMA,
        "command": "check",
        "group": group_dict(g),
        "rules": "all" if rules is None else sorted(rules),
        "cases": [case_dict(g, r) for r in results],
        "verdict": v,
        "flags": [f"order {r.order}: {f}" for r in results for f in r.flags
                  if f.startswith(("over-approximated", "box fallback"))],
    }
    if stamp:
        rep["stamp"] = stamp
    return rep


def solve_report(g: GroupData, k: int, result: CaseResult | None, note: str | None = None,
                 stamp=None) -> dict:
    rep = {
        "schema": SCHEMA,
        "command": "solve",
        "group": group_dict(g),
        "order": k,
        "note": note,
        "case": None if result is None else case_dict(g, result, all_forms=True),
    }
    if stamp:
        rep["stamp"] = stamp
    return rep


def to_json(rep: dict) -> str:
    return json.dumps(rep, indent=2, ensure_ascii=False) + "\n"


# -- markdown ---------------------------------------------------------------

def _method_text(c: dict) -> str:
    if c["method"] == "rule":
        return f"rule {c['rule']['id']}"
    return "HeLP"


def _case_md(c: dict, out: list[str], show_forms: bool = False) -> None:
    k = c["order"]
    out.append(f"## Order {k}")
    out.append("")
    adm = c["admissible"]
    if adm:
        out.append("Admissible classes: " + ", ".join(adm)
                   + f" ({' + '.join(nu(x) for x in adm)} = 1)")
    else:
        out.append("Admissible classes: none")
    out.append(f"Method: {_method_text(c)}")
    if c.get("rule"):
        r = c["rule"]
        src = f" [{r['source']}]" if r["source"] else ""
        out.append(f"Justification: {r['justification']}{src}")
        if r["also"]:
            out.append("Also decided by: " + ", ".join(r["also"]))
    if c.get("note"):
        out.append(f"Note: {c['note']}")
    if c["method"] == "help":
        out.append("Tables used: " + ", ".join(c["tables"]))
    out.append("")
    used = set()
    for b in c["branches"]:
        out.append(f"### Assignment: {b['assignment']}")
        out.append("")
        flag = " (over-approximated: non-trivial power choice)" if b["overapproximated"] else ""
        out.append(f"Constraints: {b['constraints']}{flag}")
        if b["bounds"]:
            out.append("Derived bounds: " + ", ".join(
                f"{nu(x)} ∈ [{lo}, {hi}]" for x, (lo, hi) in b["bounds"].items()))
        if b["fallback"]:
            out.append("Box fallback for: " + ", ".join(b["fallback"]))
        if b["certificate"]:
            out.append("")
            out.append("Certifying subset (each μ must be a non-negative integer; "
                       "checked over the derived bounds):")
            out.append("")
            for f in b["certificate"]:
                out.append(f"- {f['mu']} = {f['form']}")
                used.update(_gamma_tokens(f["form"]))
        if show_forms and "forms" in b:
            out.append("")
            out.append("| μ | k·μ / k |")
            out.append("|---|---|")
            for f in b["forms"]:
                out.append(f"| {f['mu']} | {f['form']} |")
                used.update(_gamma_tokens(f["form"]))
        out.append("")
        if b["solutions"]:
            out.append("Solutions (" + ", ".join(nu(x) for x in adm) + "):")
            out.append("")
            for s in b["solutions"]:
                cls = f"trivial, conjugate into {s['class']}" if s["class"] else "EXCEPTIONAL"
                out.append(f"- ({', '.join(map(str, s['nu']))}): {cls}")
        else:
            out.append("Solutions: none")
        out.append("")
    defs = {g: d for g, d in c["gammas"].items() if g in used}
    if defs:
        out.append("where " + "; ".join(f"{g} = {d}" for g, d in defs.items()))
        out.append("")
    out.append(f"Outcome: {_STATUS_TEXT[c['status']]}")
    for f in c["flags"]:
        out.append(f"Flag: {f}")
    out.append("")


def _gamma_tokens(s: str):
    import re
    return re.findall(r"γ_\d+", s)


def _header_md(rep: dict, out: list[str]) -> None:
    g = rep["group"]
    out.append(f"- group order {g['order']}, exponent {g['exponent']}, "
               f"{len(g['classes'])} classes: "
               + ", ".join(c["name"] for c in g["classes"]))
    if g["psl"]:
        q = g['psl']['p'] if g['psl']['f'] == 1 else f"{g['psl']['p']}^{g['psl']['f']}"
        out.append(f"- PSL(2, {q}) metadata present")
    out.append("- character tables: " + ", ".join(g["tables"]))
    if "stamp" in rep:
        out.append(f"- generated {rep['stamp']}")


def check_markdown(rep: dict) -> str:
    out = [f"# HeLP check: {rep['group']['name']}", ""]
    _header_md(rep, out)
    rules = rep["rules"]
    out.append("- rules: " + (rules if isinstance(rules, str) else (", ".join(rules) or "none")))
    out.append("")
    out.append("| order | method | outcome | solutions |")
    out.append("|---|---|---|---|")
    for c in rep["cases"]:
        out.append(f"| {c['order']} | {_method_text(c)} | {_STATUS_TEXT[c['status']]} "
                   f"| {len(c['solutions'])} |")
    out.append("")
    for c in rep["cases"]:
        _case_md(c, out)
    if rep["flags"]:
        out.append("## Flags")
        out.append("")
        out.extend(f"- {f}" for f in rep["flags"])
        out.append("")
    name = rep["group"]["name"]
    if rep["verdict"] == "verified":
        out.append(f"**Verdict: Zassenhaus conjecture verified for {name}.** Every candidate "
                   "order is either impossible or admits only partial augmentations of "
                   "units rationally conjugate to group elements.")
    else:
        bad = [str(c["order"]) for c in rep["cases"] if c["status"] == EXCEPTIONAL]
        out.append(f"**Verdict: inconclusive for {name}.** Exceptional partial augmentations "
                   f"remain for orders {', '.join(bad)}.")
    return "\n".join(out) + "\n"


def solve_markdown(rep: dict) -> str:
    out = [f"# HeLP solve: {rep['group']['name']}, order {rep['order']}", ""]
    _header_md(rep, out)
    out.append("")
    if rep["note"]:
        out.append(f"Note: {rep['note']}")
        out.append("")
    if rep["case"] is not None:
        _case_md(rep["case"], out, show_forms=True)
    return "\n".join(out) + "\n"


def render_expanded(form: AffineForm) -> str:
    """k*mu with every partial augmentation written out."""
    lin = _linear(form.classes, form.coeffs)
    if lin == "0":
        return f"{qstr(form.constant)}/{form.scale}"
    if form.constant > 0:
        lin += f" + {qstr(form.constant)}"
    elif form.constant < 0:
        lin += f" - {qstr(-form.constant)}"
    return f"({lin})/{form.scale}"


def mu_report(g: GroupData, k: int, table: str, char: int, l: int, assignment, form: AffineForm,
              nu_values=None, stamp=None) -> dict:
    names = GammaNames(form.classes)
    rep = {
        "schema": SCHEMA,
        "command": "mu",
        "group": group_dict(g),
        "order": k, "table": table, "char": char, "l": l,
        "assignment": assignment.describe(),
        "mu": f"μ_{l}(u, χ_{char}, {table})",
        "form": render_expanded(form),
        "grouped": render_form(form, names),
        "gammas": names.definitions(),
        "scale": form.scale,
        "coeffs": {c: qstr(x) for c, x in zip(form.classes, form.coeffs)},
        "constant": qstr(form.constant),
        "evaluation": None,
    }
    if nu_values is not None:
        mu, ok = form.evaluate(nu_values)
        rep["evaluation"] = {"nu": dict(zip(form.classes, nu_values)), "mu": qstr(mu),
                             "admissible": ok}
    if stamp:
        rep["stamp"] = stamp
    return rep


def mu_markdown(rep: dict) -> str:
    out = [f"# μ-form: {rep['group']['name']}, order {rep['order']}", ""]
    if "stamp" in rep:
        out += [f"- generated {rep['stamp']}", ""]
    out.append(f"Powers: {rep['assignment']}")
    out.append("")
    out.append(f"{rep['mu']} = {rep['form']}")
    if rep["gammas"]:
        defs = "; ".join(f"{k} = {v}" for k, v in rep["gammas"].items())
        out.append(f"  = {rep['grouped']}, where {defs}")
    ev = rep["evaluation"]
    if ev is not None:
        out.append("")
        at = ", ".join(f"{nu(c)} = {x}" for c, x in ev["nu"].items())
        verdict_ = "admissible" if ev["admissible"] else "violates HeLP"
        out.append(f"At {at}: μ = {ev['mu']} ({verdict_})")
    return "\n".join(out) + "\n"


def classes_report(g: GroupData, stamp=None) -> dict:
    rep = {
        "schema": SCHEMA,
        "command": "classes",
        "group": group_dict(g),
        "powermaps": {str(pm.prime): [g.classes[i].name for i in pm.images]
                      for pm in g.powermaps},
        "coverage": {t.label: [c for c in t.classes] for t in g.tables},
    }
    if stamp:
        rep["stamp"] = stamp
    return rep


def classes_markdown(rep: dict) -> str:
    g = rep["group"]
    out = [f"# Classes of {g['name']}", ""]
    _header_md(rep, out)
    out.append("")
    primes = list(rep["powermaps"])
    tabs = list(rep["coverage"])
    out.append("| class | order | " + " | ".join(f"^{p}" for p in primes)
               + " | " + " | ".join(f"table {t}" for t in tabs) + " |")
    out.append("|---|---|" + "---|" * (len(primes) + len(tabs)))
    for i, c in enumerate(g["classes"]):
        cells = [c["name"], str(c["order"])]
        cells += [rep["powermaps"][p][i] for p in primes]
        cells += ["yes" if c["name"] in rep["coverage"][t] else "-" for t in tabs]
        out.append("| " + " | ".join(cells) + " |")
    return "\n".join(out) + "\n"


def validate_report(name: str, problems, warnings, stamp=None) -> dict:
    rep = {
        "schema": SCHEMA,
        "command": "validate",
        "source": name,
        "clean": not problems,
        "problems": list(problems),
        "warnings": list(warnings),
    }
    if stamp:
        rep["stamp"] = stamp
    return rep


def validate_markdown(rep: dict) -> str:
    out = [f"# Validation: {rep['source']}", ""]
    if "stamp" in rep:
        out += [f"- generated {rep['stamp']}", ""]
    out.append("Dataset is clean." if rep["clean"] else
               f"Dataset has {len(rep['problems'])} problem(s):")
    if rep["problems"]:
        out.append("")
        out.extend(f"- {p}" for p in rep["problems"])
    if rep["warnings"]:
        out.append("")
        out.append("Warnings (not fatal):")
        out.append("")
        out.extend(f"- {w}" for w in rep["warnings"])
    return "\n".join(out) + "\n"


_MARKDOWN = {
    "check": check_markdown,
    "solve": solve_markdown,
    "mu": mu_markdown,
    "classes": classes_markdown,
    "validate": validate_markdown,
}


def render(rep: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(rep)
    try:
        return _MARKDOWN[rep["command"]](rep)
    except KeyError:
        raise ValueError(f"no markdown renderer for {rep.get('command')!r}") from None


def from_json(text: str) -> dict:
    rep = json.loads(text)
    if rep.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {rep.get('schema')!r}")
    return rep
