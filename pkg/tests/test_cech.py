from itertools import product

import pytest

from ivbchern.builtins import (BUILTINS, builtin, interval_cover, p1_cover, p1_line_bundle, p1_skyscraper,
                               torus_cover)
from ivbchern.cech import (ChernCocycle, CoverError, CoverModel, TwistingCochain, build_nerve, cech_coboundary,
                           cocycle_check, euler_char, extract_twisting, include_twisting, p1_class_coefficient,
                           sheaf_chern, twisting_equal)
from ivbchern.cochains import mc_check
from ivbchern.corpus import random_interval_twisting, random_p1_twisting, random_torus_twisting
from ivbchern.dk import UPoly
from ivbchern.forms import ChartMap, HolForm, LaurentPoly, polynomial_ring
from ivbchern.perf import HomElement, PerfObject


def chern(a, level=2):
    return sheaf_chern(include_twisting(a), level)


def brute_tuples(opens, length, empty):
    return [t for t in product(range(opens), repeat=length) if not any(e <= set(t) for e in empty)]


@pytest.mark.parametrize("cover,opens,empty", [(p1_cover(), 2, []), (interval_cover(), 3, [{0, 2}]),
                                               (torus_cover(3), 3, [])])
def test_nerve_matches_brute_force(cover, opens, empty):
    nerve = build_nerve(cover, 3)
    for l, level in nerve.items():
        assert sorted(level["tuples"]) == brute_tuples(opens, l + 1, empty)
        assert sum(level["by_repeat_count"].values()) == len(level["tuples"])


def test_nerve_repeat_classes_on_p1():
    nerve = build_nerve(p1_cover(), 2)
    assert nerve[2]["by_repeat_count"] == {0: 2, 1: 4, 2: 2}


def test_cover_rejects_bad_data():
    ring = polynomial_ring("x")
    with pytest.raises(CoverError):
        CoverModel(["A"], {frozenset({0}): ring, frozenset({0, 3}): ring}, {})
    with pytest.raises(CoverError):
        CoverModel(["A", "B"], {frozenset({0}): ring}, {})
    with pytest.raises(CoverError):
        interval_cover().ring({0, 2})
    assert p1_cover().check_functoriality()["ok"]
    assert torus_cover(3).check_functoriality()["ok"]


def test_twisting_rejects_wrong_degree():
    cover = p1_cover()
    bundles = [PerfObject(cover.ring([i]), {0: 1}) for i in (0, 1)]
    e0, e1 = (cover.restrict_bundle(bundles[i], [i], {0, 1}) for i in (0, 1))
    bad = HomElement.from_blocks(e1, e0, 0, 0, {0: [[1]]})
    with pytest.raises(CoverError):
        TwistingCochain(cover, bundles, {(0, 1, 0): bad})
    with pytest.raises(CoverError):
        TwistingCochain(cover, bundles, {(0, 0): bad})


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtins_satisfy_the_twisting_equation_and_round_trip(name):
    a = builtin(name)
    assert a.check(4)["ok"]
    v = include_twisting(a)
    assert twisting_equal(extract_twisting(v, 4), a, 4)
    for tau in a.cover.tuples(3):
        assert mc_check(v.local_mc(tau), 4)["ok"]


@pytest.mark.parametrize("seed", range(4))
def test_random_twistings_round_trip(seed):
    for a in (random_p1_twisting(seed)[0].a, random_interval_twisting(seed).a, random_torus_twisting(seed).a):
        assert a.check(4)["ok"]
        assert twisting_equal(extract_twisting(include_twisting(a), 4), a, 4)


def test_broken_twisting_is_detected():
    a = p1_line_bundle(1)
    comps = dict(a.components)
    comps[(0, 1)] = comps[(0, 1)].scale(2)
    broken = TwistingCochain(a.cover, a.bundles, comps)
    res = broken.check(2)
    assert not res["ok"]


@pytest.mark.parametrize("n", range(-3, 4))
def test_line_bundle_chern_data(n):
    c = chern(p1_line_bundle(n))
    assert cocycle_check(c)["ok"]
    assert c[(0,)] == UPoly.constant(c.cover.ring([0]), 1)
    assert p1_class_coefficient(c) == n


@pytest.mark.parametrize("seed", range(8))
def test_class_coefficient_is_core_degree(seed):
    # The core transition has determinant of order -degree, so the coefficient must equal the degree.
    rt, degree = random_p1_twisting(seed)
    c = chern(rt.a)
    assert cocycle_check(c)["ok"]
    assert p1_class_coefficient(c) == degree


def test_skyscraper_is_difference_of_line_bundles():
    sky, o, om1 = chern(p1_skyscraper()), chern(p1_line_bundle(0)), chern(p1_line_bundle(-1))
    assert euler_char(p1_skyscraper()) == [0, 0]
    assert p1_class_coefficient(sky) == 1
    for tau in set(sky.values) | set(o.values) | set(om1.values):
        assert sky[tau] == o[tau] - om1[tau]


def test_connection_choice_changes_cocycle_not_class():
    cover = p1_cover()
    w, z = cover.ring([0]), cover.ring([1])
    conn = (HolForm.differential(w, "w").scale(3),
            HolForm.function(LaurentPoly.var(z, "z", 2)) * HolForm.differential(z, "z"))
    plain, twisted = chern(p1_line_bundle(2)), chern(p1_line_bundle(2, connections=conn))
    assert cocycle_check(twisted)["ok"]
    assert plain[(0, 1)] != twisted[(0, 1)]
    assert p1_class_coefficient(twisted) == 2


def test_cocycle_perturbation_is_detected_and_coboundary_is_harmless():
    c = chern(p1_line_bundle(1), 2)
    ring01 = c.cover.ring([0, 1])
    values = dict(c.values)
    values[(0, 1)] = c[(0, 1)] + UPoly(ring01, {1: HolForm.differential(ring01, "z")})
    assert not cocycle_check(ChernCocycle(c.cover, values, 2))["ok"]
    # Adding the coboundary of a level-0 cochain keeps the cocycle condition.
    w, z = c.cover.ring([0]), c.cover.ring([1])
    b = {(0,): UPoly(w, {1: HolForm.function(LaurentPoly.var(w, "w", 2)) * HolForm.differential(w, "w")}),
         (1,): UPoly(z, {1: HolForm.differential(z, "z").scale(5)})}
    db = cech_coboundary(c.cover, b, 0)
    shifted = c + ChernCocycle(c.cover, db, 2)
    assert cocycle_check(shifted)["ok"]
    assert p1_class_coefficient(shifted) == 1


def test_class_coefficient_only_on_p1():
    from ivbchern.builtins import interval_bundle

    with pytest.raises(CoverError):
        p1_class_coefficient(chern(interval_bundle(), 1))


def test_interval_and_torus_cocycles():
    from ivbchern.builtins import interval_bundle

    assert cocycle_check(chern(interval_bundle()))["ok"]
    assert cocycle_check(chern(random_torus_twisting(1).a, 2))["ok"]


def test_chart_restriction_composes():
    cover = p1_cover()
    phi = cover.restriction({0}, {0, 1})
    assert isinstance(phi, ChartMap)
    assert phi.pullback(HolForm.function(LaurentPoly.var(cover.ring([0]), "w"))) == HolForm.function(
        LaurentPoly.var(cover.ring([0, 1]), "z", -1))
