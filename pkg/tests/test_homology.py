from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import invariant_factors as sympy_invariant_factors

from ivbchern.builtins import BUILTINS, builtin, builtin_expectations
from ivbchern.forms import LaurentPoly, laurent_ring, polynomial_ring
from ivbchern.homology import (homology, homology_sheaf, invariant_factors, is_quasi_isomorphism, mapping_cone,
                               rank_profile)
from ivbchern.perf import HomElement, PerfObject

Z = sympy.Symbol("z")


def to_sympy(dense):
    return sum((sympy.Rational(c.numerator, c.denominator) * Z ** i for i, c in enumerate(dense)), sympy.Integer(0))


def sympy_factors(matrix):
    m = sympy.Matrix([[to_sympy(e) for e in row] for row in matrix])
    facs = sympy_invariant_factors(m, domain=sympy.QQ[Z])
    out = []
    for f in facs:
        p = sympy.Poly(f, Z)
        if p.is_zero:
            continue
        out.append(p.monic().all_coeffs()[::-1])
    return out


dense_polys = st.lists(st.integers(-2, 2).map(Fraction), min_size=0, max_size=3)


@st.composite
def matrices(draw):
    rows, cols = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    return [[draw(dense_polys) for _ in range(cols)] for _ in range(rows)]


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_invariant_factors_match_sympy(matrix):
    ours = [[Fraction(c) for c in f] for f in invariant_factors(matrix)]
    theirs = [[Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in f] for f in sympy_factors(matrix)]
    assert ours == theirs


def test_invariant_factor_example():
    # [[z^2-1, z+1], [0, z-1]] has invariant factors 1 and (z-1)^2 (z+1).
    m = [[[-1, 0, 1], [1, 1]], [[], [-1, 1]]]
    assert invariant_factors(m) == [[1], [1, -1, -1, 1]]


def test_exact_and_torsion_examples():
    r = polynomial_ring("z")
    z = LaurentPoly.var(r, "z")
    iso = PerfObject(r, {-1: 1, 0: 1}, differential={-1: [[1]]})
    assert homology(iso) == {}
    mult_z = PerfObject(r, {-1: 1, 0: 1}, differential={-1: [[z]]})
    assert homology(mult_z) == {0: {"free_rank": 0, "torsion": ["1*z"]}}
    zero_d = PerfObject(r, {-1: 1, 0: 2})
    assert homology(zero_d) == {-1: {"free_rank": 1, "torsion": []}, 0: {"free_rank": 2, "torsion": []}}
    # Over Q[z, 1/z] multiplication by z is invertible.
    lr = laurent_ring("z")
    assert homology(PerfObject(lr, {-1: 1, 0: 1}, differential={-1: [[LaurentPoly.var(lr, "z")]]})) == {}


def test_rank_profile_several_variables():
    ring = laurent_ring("x", "y")
    x, y = LaurentPoly.var(ring, "x"), LaurentPoly.var(ring, "y")
    e = PerfObject(ring, {-1: 1, 0: 2}, differential={-1: [[x], [y]]})
    assert rank_profile(e) == {-1: 1, 0: 0}


def test_mapping_cone_and_quasi_isomorphism():
    r = polynomial_ring("z")
    z = LaurentPoly.var(r, "z")
    a = PerfObject(r, {0: 1})
    assert is_quasi_isomorphism(a.identity())
    assert not is_quasi_isomorphism(HomElement.from_blocks(a, a, 0, 0, {0: [[z]]}))
    cone = mapping_cone(a.identity())
    assert cone.ranks == {-1: 1, 0: 1}
    b = PerfObject(r, {-1: 1, 0: 1}, differential={-1: [[1]]})
    with pytest.raises(ValueError):
        mapping_cone(HomElement.from_blocks(b, b, 0, 0, {-1: [[1]]}))


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtin_classification(name):
    res = homology_sheaf(builtin(name))
    assert res["cohsh"] == builtin_expectations(name)["cohsh"]
    assert res["edges_ok"]


def test_skyscraper_homology_per_chart():
    res = homology_sheaf(builtin("skyscraper"))
    w_chart, z_chart = res["opens"]
    assert w_chart["homology"] == {}
    assert z_chart["homology"] == {"0": {"free_rank": 0, "torsion": ["1*z"]}}
