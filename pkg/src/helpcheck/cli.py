"""
Command line interface.

    helpcheck check psl_2_8
    helpcheck solve --group psl_2_17 --order 8
    helpcheck mu --group psl_2_8 --order 6 --table '*' --char 2 --l 1
    helpcheck classes --group data.json
    helpcheck validate --group data.json

Exit status: 0 verified / success, 1 error, 2 inconclusive.
"""

from __future__ import annotations

import argparse
from datetime import datetime, timezone
import logging
import sys

from . import report
from .cyclo import divisors
from .engine import (EXCEPTIONAL, CheckOptions, PAVector, PowerAssignment, SolveOptions,
                     UnboundedRelaxation, admissible_classes, check_group, mu_form,
                     solve_case)
from .rules import ALIASES, RULES
from .rules import resolve as resolve_rule
from .tables import DatasetError, consistency_warnings, load_group

OK, ERROR, INCONCLUSIVE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which here means "inconclusive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def _pairs(text: str, what: str) -> list[tuple[str, str]]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, val = item.partition("=")
        if not sep or not key or not val:
            raise UsageError(f"{what}: expected key=value, got {item!r}")
        out.append((key.strip(), val.strip()))
    return out


def parse_assign(text: str | None) -> dict[int, str]:
    """``"2=2a,3=3a"`` -> {2: "2a", 3: "3a"} (order of the power -> class)."""
    out = {}
    for k, v in _pairs(text or "", "--assign"):
        try:
            out[int(k)] = v
        except ValueError:
            raise UsageError(f"--assign: {k!r} is not an order") from None
    return out


def parse_nu(text: str) -> dict[str, int]:
    out = {}
    for k, v in _pairs(text, "--nu"):
        try:
            out[k] = int(v)
        except ValueError:
            raise UsageError(f"--nu: {v!r} is not an integer") from None
    return out


def _rules(args) -> frozenset | None:
    if args.no_rules:
        return frozenset()
    if args.only_rules is None:
        return None
    ids, unknown = set(), []
    for r in filter(None, (s.strip() for s in args.only_rules.split(","))):
        try:
            ids.add(resolve_rule(r))
        except KeyError:
            unknown.append(r)
    if unknown:
        raise UsageError(f"unknown rule id(s) {', '.join(unknown)}; "
                         f"known: {', '.join(RULES)} (or {', '.join(ALIASES)})")
    return frozenset(ids)


def _stamp(args):
    if not args.stamp:
        return None
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _group(args):
    src = args.group or args.source
    if not src:
        raise UsageError("no group given (use --group FILE|BUILTIN)")
    return load_group(src)


def _options(args) -> CheckOptions:
    return CheckOptions(rules=_rules(args), solve=SolveOptions(box=args.box))


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)}")


def cmd_check(args):
    g = _group(args)
    opts = _options(args)
    results = check_group(g, opts)
    rep = report.check_report(g, results, opts.rules, _stamp(args))
    return rep, OK if rep["verdict"] == "verified" else INCONCLUSIVE


def cmd_solve(args):
    _need(args, "order")
    g = _group(args)
    k = args.order
    if k < 2:
        raise UsageError("--order must be at least 2")
    if g.exponent % k:
        note = (f"the order of a torsion unit must divide exp(G) = {g.exponent}; "
                f"{k} does not, so no unit of order {k} exists")
        return report.solve_report(g, k, None, note, _stamp(args)), OK
    opts = _options(args)
    prior = {r.order: r for r in check_group(g, opts, divisors(k)[1:-1])}
    res = solve_case(g, k, prior, opts.solve)
    rep = report.solve_report(g, k, res, None, _stamp(args))
    return rep, INCONCLUSIVE if res.status == EXCEPTIONAL else OK


def _table(g, label: str):
    if label in ("*", "0"):
        return g.ordinary
    try:
        p = int(label)
    except ValueError:
        raise UsageError(f"--table: expected 0, * or a prime, got {label!r}") from None
    try:
        return g.table(p)
    except KeyError:
        have = ", ".join(t.label for t in g.tables)
        raise UsageError(f"no characteristic-{p} table (available: {have})") from None


def _assignment(g, k: int, given: dict[int, str]) -> PowerAssignment:
    mids = divisors(k)[1:-1]
    extra = sorted(set(given) - set(mids))
    if extra:
        raise UsageError(f"--assign: {extra} are not proper divisors of {k}")
    choices = []
    for m in mids:
        if m in given:
            cls = given[m]
            if cls not in g.index:
                raise UsageError(f"--assign: unknown class {cls!r}")
            if g.class_order(cls) != m:
                raise UsageError(f"--assign: class {cls} has order {g.class_order(cls)}, not {m}")
        else:
            opts = g.classes_of_order(m)
            if len(opts) != 1:
                raise UsageError(
                    f"u^{k // m} has order {m}: give its class with --assign {m}=CLASS "
                    f"(classes of order {m}: {', '.join(opts) or 'none'})")
            cls = opts[0]
        choices.append((m, PAVector.indicator(g, m, cls)))
    return PowerAssignment(k, tuple(choices))


def cmd_mu(args):
    _need(args, "order", "table", "char", "l")
    g = _group(args)
    k = args.order
    if k < 2 or g.exponent % k:
        raise UsageError(f"order {k} does not divide exp(G) = {g.exponent}")
    t = _table(g, args.table)
    if t.characteristic and k % t.characteristic == 0:
        raise UsageError(
            f"the characteristic-{t.characteristic} table gives no constraint for order {k}: "
            f"{t.characteristic} divides {k}, so u is not {t.characteristic}-regular and its "
            "Brauer character is undefined")
    if not 1 <= args.char <= len(t.rows):
        raise UsageError(f"table {t.label} has characters 1..{len(t.rows)}")
    a = _assignment(g, k, parse_assign(args.assign))
    form = mu_form(g, t, args.char, k, args.l % k, a)
    values = None
    if args.nu is not None:
        nus = parse_nu(args.nu)
        classes = admissible_classes(g, k)
        bad = sorted(set(nus) - set(classes))
        if bad:
            raise UsageError(f"--nu: {', '.join(bad)} not admissible for order {k} "
                             f"(admissible: {', '.join(classes)})")
        values = tuple(nus.get(c, 0) for c in classes)
        if sum(values) != 1:
            raise UsageError("--nu: partial augmentations must sum to 1")
    rep = report.mu_report(g, k, t.label, args.char, args.l, a, form, values, _stamp(args))
    return rep, OK


def cmd_classes(args):
    g = _group(args)
    return report.classes_report(g, _stamp(args)), OK


def cmd_validate(args):
    src = args.group or args.source
    if not src:
        raise UsageError("no group given (use --group FILE|BUILTIN)")
    warnings = []
    try:
        g = load_group(src)
        problems = []
        warnings = consistency_warnings(g)
    except DatasetError as exc:
        problems = exc.problems
    rep = report.validate_report(str(src), problems, warnings, _stamp(args))
    return rep, OK if not problems else ERROR


COMMANDS = {
    "check": (cmd_check, "verify the conjecture for every candidate order"),
    "solve": (cmd_solve, "HeLP solutions for a single order"),
    "mu": (cmd_mu, "one mu-form as an affine function of partial augmentations"),
    "classes": (cmd_classes, "list classes, power maps and table coverage"),
    "validate": (cmd_validate, "check a dataset against its invariants"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("source", nargs="?", help="dataset file or builtin name")
    common.add_argument("--group", help="dataset file or builtin (psl_2_8, psl_2_17)")
    common.add_argument("--format", choices=("md", "json"), default="md")
    common.add_argument("--stamp", action="store_true", help="add a generation timestamp")
    common.add_argument("-v", "--verbose", action="store_true")
    rules = common.add_mutually_exclusive_group()
    rules.add_argument("--no-rules", action="store_true", help="HeLP only")
    rules.add_argument("--only-rules", metavar="ID,...", help=f"subset of: {', '.join(RULES)}")
    common.add_argument("--order", type=int, metavar="K")
    common.add_argument("--table", metavar="0|p|*")
    common.add_argument("--char", type=int, metavar="I", help="1-based character index")
    common.add_argument("--l", type=int, metavar="J", dest="l")
    common.add_argument("--assign", metavar="ORDER=CLASS,...")
    common.add_argument("--nu", metavar="CLASS=INT,...")
    common.add_argument("--box", type=int, metavar="B",
                        help="bound used when elimination exceeds its budget")

    parser = _Parser(prog="helpcheck", description=__doc__.split("\n\n")[0].strip() or None,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fn, _ = COMMANDS[args.command]
    try:
        rep, code = fn(args)
    except (UsageError, DatasetError, UnboundedRelaxation, OSError) as exc:
        print(f"helpcheck {args.command}: {exc}", file=sys.stderr)
        return ERROR
    sys.stdout.write(report.render(rep, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
