import copy
import io
import json
import math

import pytest
from hypothesis import given, strategies as st

from helpcheck.cyclo import Cyclotomic, make
from helpcheck.tables import (BUILTINS, DatasetError, builtin_text, class_of_power,
                              consistency_warnings, dumps_group, load_builtin, load_group,
                              parse_group, validate)

P8 = load_builtin("psl_2_8")
P17 = load_builtin("psl_2_17")


def raw(name="psl_2_8"):
    return json.loads(builtin_text(name))


def test_builtin_shapes():
    assert (len(P8.classes), P8.order, P8.exponent) == (9, 504, 126)
    assert (len(P17.classes), P17.order, P17.exponent) == (11, 2448, 1224)
    assert [t.label for t in P8.tables] == ["*", "2", "7"]
    assert [t.label for t in P17.tables] == ["*", "17"]
    assert P8.psl == (2, 3) and P17.psl == (17, 1)


@pytest.mark.parametrize("name", BUILTINS)
def test_builtins_are_clean(name):
    assert validate(load_builtin(name)) == []


def test_load_from_stream_bytes_and_path(tmp_path):
    text = builtin_text("psl_2_17")
    path = tmp_path / "g.json"
    path.write_text(text)
    for src in (io.StringIO(text), io.BytesIO(text.encode()), text.encode(), str(path), path):
        assert load_group(src) == P17


def test_brauer_table_may_not_cover_p_singular_class():
    data = raw()
    t2 = data["tables"][1]
    t2["classes"].insert(1, "2a")
    for row in t2["chars"]:
        row.insert(1, 0)
    with pytest.raises(DatasetError) as err:
        parse_group(data)
    assert any("2a" in p and "table p=2" in p for p in err.value.problems), err.value.problems


def test_wrong_row_length():
    data = raw()
    data["tables"][0]["chars"][3].pop()
    with pytest.raises(DatasetError) as err:
        parse_group(data)
    assert any("row 4" in p or "chi_4" in p for p in err.value.problems), err.value.problems


@pytest.mark.parametrize("mutate,needle", [
    (lambda d: d.update(exponent=125), "exponent"),
    (lambda d: d["classes"].append({"name": "5a", "order": 5}), "powermaps"),
    (lambda d: d["powermaps"].pop("7"), "7"),
    (lambda d: d["powermaps"]["2"].__setitem__(6, "3a"), "9a"),
    (lambda d: d["tables"].pop(0), "characteristic-0"),
    (lambda d: d["tables"][0]["chars"][1].__setitem__(0, -7), "degree"),
    (lambda d: d["tables"][0]["chars"][2].__setitem__(6, {"n": 7, "terms": [[1, 1]]}), "9a"),
])
def test_invariant_violations(mutate, needle):
    data = raw()
    mutate(data)
    with pytest.raises(DatasetError) as err:
        parse_group(data)
    assert any(needle in p for p in err.value.problems), err.value.problems


def test_not_json():
    with pytest.raises(DatasetError):
        load_group(b"{not json")


@pytest.mark.parametrize("cls,d,want", [("9a", 3, "3a"), ("2a", 2, "1a"), ("7a", 2, "7b"),
                                        ("7a", 7, "1a"), ("9a", 9, "1a"), ("3a", 4, "3a")])
def test_class_of_power(cls, d, want):
    assert class_of_power(P8, cls, d) == want


def test_class_of_power_17():
    assert class_of_power(P17, "8a", 2) == "4a"
    assert class_of_power(P17, "8a", 3) == "8b"
    assert class_of_power(P17, "4a", 2) == "2a"
    assert class_of_power(P17, "9a", 3) == "3a"


def exponents(g):
    """Positive integers built from primes that have power maps."""
    primes = [pm.prime for pm in g.powermaps]
    return st.lists(st.sampled_from(primes), max_size=5).map(lambda ps: math.prod(ps))


@given(st.sampled_from([P8, P17]).flatmap(
    lambda g: st.tuples(st.just(g), exponents(g), exponents(g),
                        st.sampled_from([x.name for x in g.classes]))))
def test_power_composition(args):
    g, d1, d2, c = args
    assert class_of_power(g, c, d1 * d2) == class_of_power(g, class_of_power(g, c, d1), d2)
    n = g.class_order(c)
    assert g.class_order(class_of_power(g, c, d1)) == n // math.gcd(n, d1)


def test_power_by_unmapped_prime():
    # 5 has no power map in PSL(2,8), but 7a^5 = 7a^12 and 2a^5 = 2a
    assert class_of_power(P8, "2a", 5) == "2a"
    assert class_of_power(P8, "7a", 5) == class_of_power(P8, "7a", 12)
    # residues 5 mod 8 are never of the form 3^a 17^b
    with pytest.raises(KeyError):
        class_of_power(P17, "8a", 5)


def test_character_values():
    assert P8.ordinary.value(1, "3a") == -2
    assert P17.table(17).value(1, "4a") == 1
    alpha = Cyclotomic.zeta(8)
    assert P17.ordinary.value(9, "8a") == -alpha + alpha ** 3
    assert P8.ordinary.value(2, "9a") == make(9, [(4, -1), (5, -1)])
    assert P8.table(7).degree(1) == 7
    with pytest.raises(KeyError):
        P17.table(17).value(1, "17a")


def test_round_trip():
    for g in (P8, P17):
        text = dumps_group(g)
        again = load_group(text.encode())
        assert again == g
        assert dumps_group(again) == text


def test_provenance_carried():
    assert "powermaps.9-classes" in P8.provenance


def test_consistency_warnings():
    # the ordinary PSL(2,8) table as printed disagrees with the Brauer tables on 9b/9c
    w8 = consistency_warnings(P8)
    assert w8 and all("9" in x for x in w8)
    assert consistency_warnings(P17) == []


def test_exponent_one_group():
    data = {"name": "trivial", "order": 1, "exponent": 1,
            "classes": [{"name": "1a", "order": 1}], "powermaps": {},
            "tables": [{"char": 0, "classes": ["1a"], "chars": [[1]]}]}
    g = parse_group(copy.deepcopy(data))
    assert g.order == 1 and validate(g) == []
