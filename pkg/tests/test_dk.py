import pytest

from ivbchern.cli import sample_chart
from ivbchern.cochains import chern_simplex
from ivbchern.corpus import random_simplex
from ivbchern.dk import DKDecoration, DKError, UPoly, dk_degeneracy, dk_face, dk_validate, naturality_check
from ivbchern.forms import HolForm, LaurentPoly, laurent_ring

RING = laurent_ring("z")


def dz():
    return HolForm.differential(RING, "z")


def z(power=1):
    return LaurentPoly.var(RING, "z", power)


def test_upoly_rejects_bad_input():
    with pytest.raises(DKError):
        UPoly(RING, {-1: HolForm.function(1, RING)})
    with pytest.raises(DKError):
        UPoly(RING, {0: HolForm.function(1, laurent_ring("w"))})
    assert UPoly.constant(RING, 0).is_zero()


def test_constant_vertex_decoration_is_valid():
    dec = DKDecoration(1, RING, {(0,): UPoly.constant(RING, 2), (1,): UPoly.constant(RING, 2)})
    assert dk_validate(dec)["ok"]


def test_unequal_vertices_need_an_edge_and_cannot_get_one():
    dec = DKDecoration(1, RING, {(0,): UPoly.constant(RING, 1), (1,): UPoly.constant(RING, 2)})
    res = dk_validate(dec)
    assert not res["ok"]
    assert any("face sum" in p for p in res["problems"])


def test_degree_and_parity_violations():
    # A 1-cell must carry total degree -1: (form 1, u^1).
    good = UPoly(RING, {1: dz()})
    bad_total = UPoly(RING, {0: dz()})
    assert dk_validate(DKDecoration(1, RING, {(0, 1): good}))["ok"]
    res = dk_validate(DKDecoration(1, RING, {(0, 1): bad_total}))
    assert any("total degree" in p for p in res["problems"])
    assert not any("parity" in p for p in res["problems"])
    res = dk_validate(DKDecoration(1, RING, {(0, 1): UPoly(RING, {0: HolForm.function(z())})}))
    assert any("parity" in p for p in res["problems"])


def test_rejects_non_increasing_cell():
    with pytest.raises(DKError):
        DKDecoration(2, RING, {(1, 0): UPoly.constant(RING, 1)})
    with pytest.raises(DKError):
        DKDecoration(1, RING, {(0, 2): UPoly.constant(RING, 1)})


def test_face_and_degeneracy_operators():
    edge = UPoly(RING, {1: HolForm.function(z(-1)) * dz()})
    dec = DKDecoration(2, RING, {(0,): UPoly.constant(RING, 1), (1,): UPoly.constant(RING, 1),
                                 (2,): UPoly.constant(RING, 1), (0, 2): edge})
    f1 = dk_face(dec, 1)
    assert f1[(0, 1)] == edge and f1[(0,)] == UPoly.constant(RING, 1)
    assert dk_face(dec, 0)[(0, 1)].is_zero()
    s0 = dk_degeneracy(dec, 0)
    assert s0.n == 3
    assert s0[(0, 3)] == edge and s0[(1, 3)] == edge
    assert s0[(0, 1)].is_zero()
    with pytest.raises(DKError):
        dk_face(dec, 3)
    with pytest.raises(DKError):
        dk_degeneracy(dec, 5)


def test_degeneracy_of_a_point():
    dec = DKDecoration(0, RING, {(0,): UPoly.constant(RING, 3)})
    s0 = dk_degeneracy(dec, 0)
    assert s0[(0,)] == s0[(1,)] == UPoly.constant(RING, 3)
    assert s0[(0, 1)].is_zero()
    assert dk_validate(s0)["ok"]


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_chern_decoration_is_a_natural_cycle(n, seed):
    g = random_simplex(n, seed).g
    assert dk_validate(chern_simplex(g))["ok"]
    ops = [("face", j) for j in range(n + 1)] + [("degeneracy", j) for j in range(n + 1)]
    ops.append(("chart", sample_chart(g.ring)))
    for op in ops:
        res = naturality_check(g, op)
        assert res["ok"], res


def test_unknown_operator():
    g = random_simplex(1, 0).g
    with pytest.raises(DKError):
        naturality_check(g, ("rotate", 0))
