"""
Groups described by class data, power maps and character tables.

A dataset is one JSON object per group::

    {"name": "...", "order": 504, "exponent": 126, "psl": {"p": 2, "f": 3},
     "classes": [{"name": "1a", "order": 1}, ...],
     "powermaps": {"2": ["1a", "1a", ...], ...},
     "tables": [{"char": 0, "classes": [...], "chars": [[...], ...]}, ...]}

Character values are cyclotomic literals ``{"n": 9, "terms": [[4, -1], [5, -1]]}``
or plain integers.  A table may also declare ``"symbols": {"A": <literal>}``
and then use ``"A"`` / ``"-A"`` as entries, which keeps transcriptions of
printed tables readable.  ``provenance`` and ``notes`` keys are carried
along untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from math import gcd
import io
import json
import os

from .cyclo import Cyclotomic, CycloError, factorize, is_prime, lcm


class DatasetError(ValueError):
    """Schema or invariant violation; ``problems`` lists every finding."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ClassInfo:
    name: str
    order: int


@dataclass(frozen=True)
class PowerMap:
    prime: int
    images: tuple[int, ...]  # class index -> class index


@dataclass(frozen=True, eq=False)
class CharacterTable:
    characteristic: int
    classes: tuple[str, ...]
    rows: tuple[tuple[Cyclotomic, ...], ...]
    symbols: dict = field(default_factory=dict, compare=False)
    source_rows: tuple = field(default=(), compare=False)

    @property
    def label(self) -> str:
        return "*" if self.characteristic == 0 else str(self.characteristic)

    def covers(self, cls: str) -> bool:
        return cls in self._col

    @cached_property
    def _col(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}

    def value(self, row: int, cls: str) -> Cyclotomic:
        """Value of the character in 0-based ``row`` at class ``cls``."""
        try:
            col = self._col[cls]
        except KeyError:
            raise KeyError(
                f"class {cls} is not covered by the characteristic-{self.characteristic} table"
            ) from None
        return self.rows[row][col]

    def degree(self, row: int) -> int:
        return int(self.value(row, "1a").to_rational())

    def __eq__(self, other):
        if not isinstance(other, CharacterTable):
            return NotImplemented
        return (self.characteristic, self.classes, self.rows) == (
            other.characteristic, other.classes, other.rows)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GroupData:
    name: str
    order: int
    exponent: int
    classes: tuple[ClassInfo, ...]
    powermaps: tuple[PowerMap, ...]
    tables: tuple[CharacterTable, ...]
    psl: tuple[int, int] | None = None
    provenance: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @cached_property
    def index(self) -> dict[str, int]:
        return {c.name: i for i, c in enumerate(self.classes)}

    def class_order(self, name: str) -> int:
        return self.classes[self.index[name]].order

    def classes_of_order(self, n: int) -> list[str]:
        return [c.name for c in self.classes if c.order == n]

    def powermap(self, p: int) -> PowerMap | None:
        for pm in self.powermaps:
            if pm.prime == p:
                return pm
        return None

    def table(self, characteristic: int) -> CharacterTable:
        for t in self.tables:
            if t.characteristic == characteristic:
                return t
        raise KeyError(f"{self.name} has no characteristic-{characteristic} table")

    @property
    def ordinary(self) -> CharacterTable:
        return self.table(0)

    def __eq__(self, other):
        if not isinstance(other, GroupData):
            return NotImplemented
        return (self.name, self.order, self.exponent, self.classes,
                self.powermaps, self.tables, self.psl) == (
            other.name, other.order, other.exponent, other.classes,
            other.powermaps, other.tables, other.psl)

    __hash__ = None


def class_of_power(g: GroupData, cls: str, d: int) -> str:
    """Class containing x**d for x in ``cls``, composed from prime power maps.

    Only d modulo the element order matters, so an exponent involving a
    prime without a power map is replaced by a congruent one that factors
    over the available maps.
    """
    if d < 1:
        raise ValueError(f"power must be positive, got {d}")
    i = g.index[cls]
    n = g.classes[i].order
    r = d % n
    if r == 0:
        return g.classes[0].name
    have = {pm.prime for pm in g.powermaps}
    for t in range(64 * n):
        cand = r + t * n
        if all(p in have for p, _ in factorize(cand)):
            break
    else:
        raise KeyError(f"{g.name}: no power maps to compute {cls}^{d}")
    for p, e in factorize(cand) if cand > 1 else ():
        for _ in range(e):
            i = g.powermap(p).images[i]
    return g.classes[i].name


# -- loading ---------------------------------------------------------------

_TOP_KEYS = {"name", "order", "exponent", "psl", "classes", "powermaps", "tables",
             "provenance", "notes"}
_TABLE_KEYS = {"char", "classes", "chars", "symbols", "notes"}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _parse_entry(entry, symbols, where):
    if isinstance(entry, str):
        neg = entry.startswith("-")
        key = entry[1:] if neg else entry
        if key not in symbols:
            raise DatasetError(f"{where}: unknown symbol {entry!r}")
        return -symbols[key] if neg else symbols[key]
    try:
        return Cyclotomic.from_literal(entry)
    except CycloError as exc:
        raise DatasetError(f"{where}: {exc}") from None


def parse_group(data) -> GroupData:
    """Build a GroupData from a decoded JSON object, checking every invariant."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise DatasetError("top level must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown top-level keys {sorted(unknown)}")
    for key in ("name", "order", "exponent", "classes", "powermaps", "tables"):
        if key not in data:
            problems.append(f"missing key {key!r}")
    if problems:
        raise DatasetError(problems)

    name = data["name"]
    order, exponent = data["order"], data["exponent"]
    if not isinstance(name, str):
        problems.append("name must be a string")
    if not (_is_int(order) and order >= 1):
        problems.append(f"order must be a positive integer, got {order!r}")
    if not (_is_int(exponent) and exponent >= 1):
        problems.append(f"exponent must be a positive integer, got {exponent!r}")
    if problems:
        raise DatasetError(problems)

    psl = None
    if data.get("psl") is not None:
        p_, f_ = data["psl"].get("p"), data["psl"].get("f")
        if not (_is_int(p_) and is_prime(p_) and _is_int(f_) and f_ >= 1):
            raise DatasetError(f"psl metadata needs prime p and positive f, got {data['psl']!r}")
        psl = (p_, f_)

    classes = []
    for i, c in enumerate(data["classes"]):
        if not (isinstance(c, dict) and set(c) == {"name", "order"}
                and isinstance(c["name"], str) and _is_int(c["order"]) and c["order"] >= 1):
            raise DatasetError(f"classes[{i}]: expected {{name, order}}, got {c!r}")
        classes.append(ClassInfo(c["name"], c["order"]))
    index = {c.name: i for i, c in enumerate(classes)}

    powermaps = []
    pm_data = data["powermaps"]
    if not isinstance(pm_data, dict):
        raise DatasetError("powermaps must be an object keyed by prime")
    for key in sorted(pm_data, key=lambda s: int(s) if s.isdigit() else -1):
        if not key.isdigit() or not is_prime(int(key)):
            problems.append(f"powermaps: key {key!r} is not a prime")
            continue
        images = pm_data[key]
        if not isinstance(images, list) or len(images) != len(classes):
            problems.append(f"powermaps[{key}]: expected {len(classes)} images")
            continue
        bad = [x for x in images if x not in index]
        if bad:
            problems.append(f"powermaps[{key}]: unknown classes {bad}")
            continue
        powermaps.append(PowerMap(int(key), tuple(index[x] for x in images)))

    tables = []
    for ti, t in enumerate(data["tables"]):
        where = f"tables[{ti}]"
        if not isinstance(t, dict) or not {"char", "classes", "chars"} <= set(t) \
                or set(t) - _TABLE_KEYS:
            problems.append(f"{where}: expected keys char, classes, chars")
            continue
        symbols = {}
        for sym, lit in (t.get("symbols") or {}).items():
            symbols[sym] = _parse_entry(lit, {}, f"{where}.symbols[{sym}]")
        tcls = t["classes"]
        if not isinstance(tcls, list) or not all(isinstance(x, str) for x in tcls):
            problems.append(f"{where}: classes must be a list of names")
            continue
        rows = []
        for ri, row in enumerate(t["chars"]):
            if not isinstance(row, list):
                problems.append(f"{where} chi_{ri + 1}: row must be a list")
                continue
            rows.append(tuple(
                _parse_entry(x, symbols, f"{where} chi_{ri + 1}[{j}]") for j, x in enumerate(row)
            ))
        tables.append(CharacterTable(
            characteristic=t["char"], classes=tuple(tcls), rows=tuple(rows),
            symbols=t.get("symbols") or {}, source_rows=tuple(map(tuple, t["chars"])),
        ))

    if problems:
        raise DatasetError(problems)

    g = GroupData(
        name=name, order=order, exponent=exponent, classes=tuple(classes),
        powermaps=tuple(powermaps), tables=tuple(tables), psl=psl,
        provenance=dict(data.get("provenance") or {}), notes=tuple(data.get("notes") or ()),
    )
    problems = validate(g)
    if problems:
        raise DatasetError(problems)
    return _canonicalize(g)


def _canonicalize(g: GroupData) -> GroupData:
    tables = []
    for t in g.tables:
        rows = []
        for row in t.rows:
            out = []
            for cls, v in zip(t.classes, row):
                n = lcm(v.order, g.class_order(cls))
                out.append(v.lift(n).canonical())
            rows.append(tuple(out))
        tables.append(CharacterTable(t.characteristic, t.classes, tuple(rows),
                                     t.symbols, t.source_rows))
    return GroupData(g.name, g.order, g.exponent, g.classes, g.powermaps, tuple(tables),
                     g.psl, g.provenance, g.notes)


def validate(g: GroupData) -> list[str]:
    """Every invariant violation of ``g``, with class/table coordinates."""
    problems = []
    if g.order % g.exponent:
        problems.append(f"exponent {g.exponent} does not divide order {g.order}")
    names = [c.name for c in g.classes]
    if len(set(names)) != len(names):
        problems.append("class names are not unique")
    if not g.classes or g.classes[0].name != "1a" or g.classes[0].order != 1:
        problems.append("first class must be '1a' of order 1")
    if sum(c.order == 1 for c in g.classes) != 1:
        problems.append("exactly one class must have element order 1")
    for c in g.classes:
        if g.exponent % c.order:
            problems.append(f"class {c.name}: order {c.order} does not divide exponent {g.exponent}")

    primes = [p for p, _ in factorize(g.exponent)]
    have = {pm.prime for pm in g.powermaps}
    for p in primes:
        if p not in have:
            problems.append(f"missing {p}-power map")
    for pm in g.powermaps:
        for i, j in enumerate(pm.images):
            n = g.classes[i].order
            want = n // gcd(n, pm.prime)
            if g.classes[j].order != want:
                problems.append(
                    f"powermap {pm.prime}: {g.classes[i].name} -> {g.classes[j].name} "
                    f"has order {g.classes[j].order}, expected {want}")

    chars = [t.characteristic for t in g.tables]
    if chars.count(0) != 1:
        problems.append(f"expected exactly one characteristic-0 table, found {chars.count(0)}")
    if len(set(chars)) != len(chars):
        problems.append("duplicate table characteristics")
    for t in g.tables:
        where = f"table p={t.characteristic}"
        p = t.characteristic
        if not (_is_int(p) and (p == 0 or is_prime(p))):
            problems.append(f"{where}: characteristic must be 0 or a prime")
            continue
        if p and g.order % p:
            problems.append(f"{where}: {p} does not divide the group order")
        if not t.classes or t.classes[0] != "1a":
            problems.append(f"{where}: first covered class must be '1a'")
        if len(set(t.classes)) != len(t.classes):
            problems.append(f"{where}: repeated class")
        for c in t.classes:
            if c not in g.index:
                problems.append(f"{where}: unknown class {c}")
            elif p and g.class_order(c) % p == 0:
                problems.append(f"{where}: class {c} is {p}-singular")
        if p == 0 and set(t.classes) != set(g.index):
            problems.append(f"{where}: ordinary table must cover every class")
        for ri, row in enumerate(t.rows):
            rw = f"{where} chi_{ri + 1}"
            if len(row) != len(t.classes):
                problems.append(f"{rw}: length {len(row)} != {len(t.classes)} classes")
                continue
            deg = row[0]
            if not deg.is_rational() or deg.to_rational().denominator != 1 \
                    or deg.to_rational() <= 0:
                problems.append(f"{rw}: degree {deg} is not a positive integer")
            for c, v in zip(t.classes, row):
                if c not in g.index:
                    continue
                n = g.class_order(c)
                if not _in_subfield(v, n):
                    problems.append(f"{rw} at {c}: value {v} not in Q(zeta_{n})")
    return problems


def _in_subfield(v: Cyclotomic, m: int) -> bool:
    n = lcm(v.order, m)
    x = v.lift(n)
    return all(x.galois(a) == x for a in range(1 + m, n, m) if gcd(a, n) == 1)


def consistency_warnings(g: GroupData) -> list[str]:
    """Power maps that disagree with the Galois action on character values.

    For a prime q not dividing the order of x, chi(x**q) = sigma_q(chi(x)) in
    every table.  Disagreement means columns are labelled inconsistently
    between the power maps and that table; it is reported, not rejected.
    """
    out = []
    for t in g.tables:
        for pm in g.powermaps:
            q = pm.prime
            for cls in t.classes:
                i = g.index[cls]
                n = g.classes[i].order
                if n % q == 0 or n <= 2:
                    continue
                img = g.classes[pm.images[i]].name
                if not t.covers(img):
                    continue
                bad = [r + 1 for r in range(len(t.rows))
                       if t.value(r, cls).galois(q) != t.value(r, img)]
                if bad:
                    out.append(
                        f"table {t.label}: {cls}^{q} -> {img} contradicts the Galois action "
                        f"on rows {bad}")
    return out


def load_group(source) -> GroupData:
    """Load from a path, an open (byte or text) stream, raw bytes, or a builtin name."""
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("utf-8")
    elif isinstance(source, (str, os.PathLike)):
        if isinstance(source, str) and source in BUILTINS:
            text = builtin_text(source)
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"not valid JSON: {exc}") from None
    return parse_group(data)


BUILTINS = ("psl_2_8", "psl_2_17")


def builtin_text(name: str) -> str:
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin dataset {name!r}")
    return resources.files("helpcheck.data").joinpath(f"{name}.json").read_text("utf-8")


def dump_group(g: GroupData) -> dict:
    """Serialise back to the data-file schema (values written out as literals)."""
    data = {"name": g.name, "order": g.order, "exponent": g.exponent}
    if g.psl:
        data["psl"] = {"p": g.psl[0], "f": g.psl[1]}
    data["classes"] = [{"name": c.name, "order": c.order} for c in g.classes]
    data["powermaps"] = {
        str(pm.prime): [g.classes[j].name for j in pm.images] for pm in g.powermaps
    }
    data["tables"] = [
        {"char": t.characteristic, "classes": list(t.classes),
         "chars": [[v.to_literal() for v in row] for row in t.rows]}
        for t in g.tables
    ]
    if g.provenance:
        data["provenance"] = g.provenance
    if g.notes:
        data["notes"] = list(g.notes)
    return data


def dumps_group(g: GroupData) -> str:
    return json.dumps(dump_group(g), indent=1)


def load_builtin(name: str) -> GroupData:
    return load_group(io.StringIO(builtin_text(name)))
