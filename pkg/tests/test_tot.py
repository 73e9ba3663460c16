import random

import pytest

from ivbchern.builtins import builtin, p1_line_bundle
from ivbchern.cech import include_twisting, sheaf_chern
from ivbchern.simplicial import enum_grid_paths, is_supported
from ivbchern.tot import (TotError, TotSimplex, coherence_relation, inject_violation, maximal_paths, omega_level_dk,
                          omega_to_cocycle, omega_vertex, random_tot_simplex, reduce_path, tot_from_vertex,
                          validate_coherence, validate_ivb_simplex)


def grid(text):
    """``"012;111"`` -> ((0, 1), (1, 1), (2, 1)): top row columns, bottom row rows."""
    top, bottom = text.split(";")
    return tuple((int(a), int(b)) for a, b in zip(top, bottom))


@pytest.fixture(scope="module")
def two_simplex():
    # Seed 3 has nonzero components on the level-0 path [012;000] over both opens.
    return random_tot_simplex("p1", 2, 3, max_level=1)


def test_reduce_path():
    assert reduce_path(grid("012;111"), 0) == grid("012;000")
    with pytest.raises(TotError):
        reduce_path(grid("012;011"), 1)


def test_supported_paths_from_the_worked_example():
    nine = tuple(zip([0, 0, 1, 0, 0, 1, 0, 2, 1, 2], [0, 1, 3, 1, 2, 2, 1, 3, 3, 3]))
    assert is_supported(nine)
    assert not is_supported(grid("0101;0011"))


def test_k2_l1_cell_inventory():
    ones = {grid(s) for s in ["00;01", "01;00", "01;01", "02;00", "02;01", "01;11",
                              "02;11", "11;01", "12;00", "12;01", "12;11", "22;01"]}
    assert set(enum_grid_paths(2, 1, "monotone", 2)) == ones
    pictured = {grid(s) for s in ["012;000", "002;011", "122;001", "112;011",
                                  "001;011", "011;001", "012;111", "022;001"]}
    twos = set(enum_grid_paths(2, 1, "monotone", 3))
    assert pictured < twos
    assert twos - pictured == {grid("012;001"), grid("012;011")}
    assert set(maximal_paths(2, 1)) == {grid("0012;0111"), grid("0112;0011"), grid("0122;0001")}


def test_coherence_relation_between_levels(two_simplex):
    t = two_simplex
    checked = 0
    for tau in t.cover.tuples(2):
        assert coherence_relation(t, 1, grid("012;111"), tau, 0)
        lower = t.value(0, grid("012;000"), tau[1:])
        assert lower is not None and not lower.is_zero()
        expected = t.restrict(lower, tau[1:], tau)
        assert t.entries[(1, grid("012;111"), tau)].terms == expected.terms
        checked += 1
    assert checked == 4


def test_random_simplices_validate(two_simplex):
    assert validate_ivb_simplex(two_simplex)["ok"]
    for seed in range(3):
        t = random_tot_simplex("interval", 1, seed, max_level=1)
        res = validate_ivb_simplex(t)
        assert res["ok"], res


def test_vertex_restriction(two_simplex):
    for alpha in range(3):
        v = two_simplex.vertex(alpha)
        assert v.k == 0
        assert validate_ivb_simplex(v)["ok"]


@pytest.mark.parametrize("name", ["O(2)", "skyscraper", "interval"])
def test_vertex_from_twisting(name):
    t = tot_from_vertex(builtin(name), 2, full=True)
    assert validate_ivb_simplex(t)["ok"]


def test_injected_violations_are_detected(two_simplex):
    rng = random.Random(5)
    for _ in range(20):
        bad, key = inject_violation(two_simplex, rng)
        res = validate_coherence(bad, limit=1000)
        assert not res["ok"]
        assert any((v["level"], tuple(tuple(p) for p in v["path"]), tuple(v["tau"])) == key
                   for v in res["violations"])


def test_rejects_malformed_entries():
    cover = p1_line_bundle(0).cover
    e = p1_line_bundle(0).bundles[0]
    t = TotSimplex(cover, 0, "ivb", {(1, ((0, 0),), (0,)): e, (0, ((1, 0),), (0,)): e}, 1)
    res = validate_coherence(t)
    reasons = {v["reason"] for v in res["violations"]}
    assert "tuple length does not match the level" in reasons
    assert "path is not supported in the grid" in reasons
    with pytest.raises(TotError):
        TotSimplex(cover, 0, "other", {}, 0)


def test_omega_vertex_from_chern_cocycle():
    c = sheaf_chern(include_twisting(builtin("tangent")), 2)
    om = omega_vertex(c)
    assert validate_coherence(om)["ok"]
    assert omega_level_dk(om)["ok"]
    back = omega_to_cocycle(om)
    assert all(back[tau] == c[tau] for tau in c.values)


def test_omega_vertex_detects_injection():
    c = sheaf_chern(include_twisting(builtin("O(1)")), 2)
    om = omega_vertex(c)
    bad, _ = inject_violation(om, random.Random(1))
    assert not validate_coherence(bad)["ok"]
