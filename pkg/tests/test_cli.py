import json
import re

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from helpcheck import report
from helpcheck.cli import main
from helpcheck.tables import builtin_text


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def c3_trivial_only(tmp_path):
    data = {
        "name": "C3", "order": 3, "exponent": 3,
        "classes": [{"name": "1a", "order": 1}, {"name": "3a", "order": 3},
                    {"name": "3b", "order": 3}],
        "powermaps": {"3": ["1a", "1a", "1a"]},
        "tables": [{"char": 0, "classes": ["1a", "3a", "3b"], "chars": [[1, 1, 1]]}],
    }
    path = tmp_path / "c3.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_check_exit_codes(capsys):
    assert run(capsys, "check", "--group", "psl_2_8")[0] == 0
    assert run(capsys, "check", "psl_2_17")[0] == 0


def test_check_without_rules(capsys):
    code, out, _ = run(capsys, "check", "--group", "psl_2_17", "--no-rules", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["rules"] == []
    assert all(c["method"] == "help" for c in rep["cases"])
    cases = {c["order"]: c for c in rep["cases"]}
    assert [tuple(v) for v in cases[17]["solutions"]] == [(0, 1), (1, 0)]


def test_only_rules_accepts_numbers(capsys):
    code, out, _ = run(capsys, "check", "psl_2_8", "--only-rules", "6.7", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["rules"] == ["p-regular"]
    assert {c["method"] for c in rep["cases"]} == {"help", "rule"}
    assert run(capsys, "check", "psl_2_8", "--only-rules", "bogus")[0] == 1


def test_inconclusive_exit(capsys, c3_trivial_only):
    code, out, _ = run(capsys, "check", "--group", c3_trivial_only, "--box", "2")
    assert code == 2
    assert "inconclusive" in out and "EXCEPTIONAL" in out


def test_unbounded_is_an_error(capsys, c3_trivial_only):
    code, _, err = run(capsys, "check", "--group", c3_trivial_only)
    assert code == 1 and "unbounded" in err


def test_malformed_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "check", "--group", str(bad))[0] == 1
    assert run(capsys, "check", "--group", str(tmp_path / "missing.json"))[0] == 1
    assert run(capsys, "check")[0] == 1
    assert run(capsys, "check", "psl_2_8", "--format", "xml")[0] == 1


def test_validate(capsys, tmp_path):
    assert run(capsys, "validate", "--group", "psl_2_8")[0] == 0
    code, out, _ = run(capsys, "validate", "--group", "psl_2_17")
    assert code == 0 and "clean" in out
    data = json.loads(builtin_text("psl_2_8"))
    data["tables"][0]["chars"][2].pop()
    path = tmp_path / "short.json"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "validate", "--group", str(path))
    assert code == 1 and "problem" in out
    # warnings are printed but do not fail validation
    code, out, _ = run(capsys, "validate", "psl_2_8", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["clean"] and rep["warnings"]


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", "--group", "psl_2_8", "--order", "9", "--format", "json")
    assert code == 0
    case = json.loads(out)["case"]
    assert len(case["solutions"]) == 3 and case["status"] == "trivial"
    code, out, _ = run(capsys, "solve", "--group", "psl_2_8", "--order", "14", "--format", "json")
    case = json.loads(out)["case"]
    assert len(case["branches"]) == 3
    assert all(b["solutions"] == [] for b in case["branches"])
    assert all(len(b["forms"]) == 14 * 9 for b in case["branches"])
    code, out, _ = run(capsys, "solve", "--group", "psl_2_8", "--order", "5")
    assert code == 0
    assert "must divide exp(G) = 126" in out


def test_mu_examples(capsys):
    code, out, _ = run(capsys, "mu", "--group", "psl_2_8", "--order", "6", "--table", "*",
                       "--char", "2", "--l", "1")
    assert code == 0
    assert "μ_1(u, χ_2, *) = (-ν_2a - 2ν_3a + 10)/6" in out
    code, out, _ = run(capsys, "mu", "--group", "psl_2_17", "--order", "9", "--table", "17",
                       "--char", "2", "--l", "2", "--format", "json")
    rep = json.loads(out)
    assert rep["grouped"] == "(3γ_1 + 3)/9"
    assert rep["gammas"] == {"γ_1": "2ν_9a - ν_9b - ν_9c"}
    code, _, err = run(capsys, "mu", "--group", "psl_2_8", "--order", "6", "--table", "2",
                       "--char", "2", "--l", "1")
    assert code == 1 and "2 divides 6" in err


def test_mu_assign_and_nu(capsys):
    base = ["mu", "--group", "psl_2_8", "--order", "14", "--table", "0", "--char", "2", "--l", "7"]
    code, _, err = run(capsys, *base)
    assert code == 1 and "--assign 7=CLASS" in err
    code, out, _ = run(capsys, *base, "--assign", "7=7b", "--nu", "2a=1")
    assert code == 0
    assert "(6ν_2a + 8)/14" in out
    assert "μ = 1 (admissible)" in out
    code, out, _ = run(capsys, *base, "--assign", "7=7b", "--nu", "2a=0,7a=1")
    assert "violates HeLP" in out
    assert run(capsys, *base, "--assign", "7=2a")[0] == 1
    assert run(capsys, *base, "--assign", "7=7b", "--nu", "2a=2")[0] == 1


def test_classes(capsys):
    code, out, _ = run(capsys, "classes", "psl_2_8")
    assert code == 0
    assert re.search(r"\| 7a \| 7 \| 7b \| 7c \| 1a \|", out)


COMMANDS = [
    ("check", "psl_2_8"),
    ("check", "psl_2_17", "--no-rules"),
    ("solve", "psl_2_17", "--order", "8"),
    ("solve", "psl_2_8", "--order", "5"),
    ("mu", "psl_2_8", "--order", "9", "--table", "7", "--char", "3", "--l", "4", "--nu", "9a=1"),
    ("classes", "psl_2_17"),
    ("validate", "psl_2_8"),
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_deterministic_and_round_trip(capsys, argv):
    _, md1, _ = run(capsys, *argv)
    _, md2, _ = run(capsys, *argv)
    assert md1 == md2
    _, js, _ = run(capsys, *argv, "--format", "json")
    rep = report.from_json(js)
    assert rep["schema"] == report.SCHEMA
    assert report.render(rep, "json") == js
    assert report.render(rep, "md") == md1


def test_stamp(capsys):
    _, out, _ = run(capsys, "classes", "psl_2_8", "--stamp", "--format", "json")
    assert re.fullmatch(r"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\d\+00:00", json.loads(out)["stamp"])
    _, out, _ = run(capsys, "classes", "psl_2_8", "--format", "json")
    assert "stamp" not in json.loads(out)


def test_unknown_schema():
    with pytest.raises(ValueError):
        report.from_json('{"schema": "other/9"}')


def _mutations():
    base = json.loads(builtin_text("psl_2_8"))
    paths = []
    for ti, t in enumerate(base["tables"]):
        for ri, row in enumerate(t["chars"]):
            for ci in range(len(row)):
                paths.append((ti, ri, ci))
    return base, paths


BASE, PATHS = _mutations()


@settings(max_examples=40, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.sampled_from(PATHS), st.sampled_from([0, 3, -9, "Z", None, 2.5, "drop"]))
def test_exit_codes_on_mutated_data(capsys, tmp_path, where, value):
    data = json.loads(json.dumps(BASE))
    ti, ri, ci = where
    row = data["tables"][ti]["chars"][ri]
    if value == "drop":
        row.pop(ci)
    else:
        row[ci] = value
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data))
    vcode, _, _ = run(capsys, "validate", str(path))
    ccode, _, _ = run(capsys, "check", str(path))
    assert vcode in (0, 1) and ccode in (0, 1, 2)
    if vcode == 1:
        assert ccode == 1
