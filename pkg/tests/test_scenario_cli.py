import json
import random

import pytest

from ivbchern.builtins import BUILTINS, builtin
from ivbchern.cech import twisting_equal
from ivbchern.cli import main
from ivbchern.cochains import mc_check
from ivbchern.corpus import random_simplex
from ivbchern.cover_chern import compare_term_sets, cover_terms
from ivbchern.scenario import (FORMAT, ScenarioError, dumps, load, loads, scenario_from_dict, simplex_to_dict,
                               twisting_to_dict)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# scenario files

@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtin_round_trip_is_byte_stable(name):
    a = builtin(name)
    text = dumps(twisting_to_dict(a))
    back = loads(text).twisting
    assert twisting_equal(back, a, 3)
    assert dumps(twisting_to_dict(back)) == text


@pytest.mark.parametrize("seed", range(3))
def test_simplex_round_trip(seed):
    g = random_simplex(2, seed).g
    text = dumps(simplex_to_dict(g, 3))
    back = loads(text).simplex
    assert dumps(simplex_to_dict(back, 3)) == text
    assert mc_check(back, 3)["ok"]


def test_syntax_error_location():
    with pytest.raises(ScenarioError) as info:
        loads('{"kind": "twisting",\n "builtin": "O(1)" "x": 1}')
    assert info.value.location == "line 2 column 20"


def test_structural_errors_carry_json_pointers():
    cases = [
        ({"kind": "cone"}, "/kind"),
        ({"kind": "twisting", "builtin": "O(9)"}, "/builtin"),
        ({"kind": "simplex", "rule": {"generator": "random-simplex", "n": 9}}, "/rule/n"),
        ({"kind": "twisting", "rule": {"generator": "nope"}}, "/rule/generator"),
        ({"format": "other/2", "kind": "twisting"}, "/format"),
    ]
    for doc, where in cases:
        with pytest.raises(ScenarioError) as info:
            scenario_from_dict(doc)
        assert info.value.location == where


def test_differential_must_square_to_zero():
    doc = {"kind": "simplex", "ring": {"coords": ["z"], "invertible": []},
           "labeling": [{"ranks": {"-1": 1, "0": 1, "1": 1}, "differential": {"-1": [["1/1"]], "0": [["1/1"]]}}]}
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(doc)
    assert info.value.location == "/labeling/0"
    assert "square to zero" in str(info.value)


def test_load_prefixes_path(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(ScenarioError) as info:
        load(p)
    assert str(p) in info.value.location
    with pytest.raises(ScenarioError):
        load(tmp_path / "missing.json")


def test_builtin_expectations_are_merged():
    scen = scenario_from_dict({"format": FORMAT, "kind": "twisting", "builtin": "O(2)", "expect": {"euler": 7}})
    assert scen.expect["class_coefficient"] == 2
    assert scen.expect["euler"] == 7


# term sets of the two Chern formulas

@pytest.mark.parametrize("name", list(BUILTINS))
def test_term_sets_agree_on_builtins(name):
    a = builtin(name)
    for length in (2, 3):
        for tau in a.cover.tuples(length):
            res = compare_term_sets(a, tau)
            assert res["ok"], res


def test_cover_term_count():
    # On an l-simplex with k = l factors: sum over lo <= hi of C(hi - lo + k - 1, k - 1) splittings.
    from math import comb

    for l in (1, 2, 3):
        expected = sum(comb(hi - lo + l - 1, l - 1) for lo in range(l + 1) for hi in range(lo, l + 1))
        assert len(cover_terms(tuple(range(l + 1)), l)) == expected


# command line

def test_chern_on_line_bundle(capsys):
    code, out, _ = run(capsys, "chern", "--builtin", "O(2)", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["class_coefficient"] == "2/1"
    assert doc["cocycle"]["0,1"] == "(2*z^-1*dz)*u^1"
    assert doc["ok"]


def test_failed_expectation_exits_one(capsys, tmp_path):
    p = tmp_path / "wrong.json"
    p.write_text(json.dumps({"kind": "twisting", "builtin": "O(1)", "expect": {"class_coefficient": 3}}))
    code, out, _ = run(capsys, "chern", "--scenario", str(p))
    assert code == 1
    assert "FAIL expected class_coefficient" in out
    assert out.rstrip().endswith("result: FAIL")


def test_input_errors_exit_two(capsys, tmp_path):
    code, _, err = run(capsys, "chern", "--builtin", "O(12)")
    assert code == 2 and err.startswith("error:")
    code, _, err = run(capsys, "homology")
    assert code == 2
    p = tmp_path / "broken.json"
    p.write_text("{")
    code, _, err = run(capsys, "validate", "--scenario", str(p))
    assert code == 2 and "line 1" in err
    code, _, _ = run(capsys, "mc-check", "--degree-bound", "-1")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ("validate", "--builtin", "interval"),
    ("mc-check", "--builtin", "tangent", "--degree-bound", "3"),
    ("trace-id", "--n", "2", "--count", "2", "--degree-bound", "3"),
    ("dk-check", "--count", "2"),
    ("tot-check", "--builtin", "O(1)", "--count", "5"),
    ("tot-check", "--k", "1", "--base", "interval", "--count", "5"),
    ("homology", "--builtin", "skyscraper"),
])
def test_commands_pass(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0, out
    assert out.rstrip().endswith("result: PASS")


def test_output_is_deterministic(capsys):
    first = run(capsys, "corpus", "--count", "4", "--degree-bound", "3", "--format", "json")[1]
    second = run(capsys, "corpus", "--count", "4", "--degree-bound", "3", "--format", "json")[1]
    assert first == second
    doc = json.loads(first)
    assert doc["dimensions"] == [1, 2, 3]
    assert "seconds" not in first


def test_timing_is_opt_in(capsys):
    out = run(capsys, "validate", "--builtin", "O(0)", "--timing", "--format", "json")[1]
    assert "seconds" in out


def test_simplex_scenario_file(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(dumps(simplex_to_dict(random_simplex(2, random.Random(4).randrange(100)).g, 3)))
    code, out, _ = run(capsys, "chern", "--scenario", str(p))
    assert code == 0
    code, out, _ = run(capsys, "trace-id", "--scenario", str(p), "--degree-bound", "3")
    assert code == 0
