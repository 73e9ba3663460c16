import random
from itertools import combinations, product
from math import comb

import pytest

from ivbchern.simplicial import (SimplicialError, contracting_homotopy_check, cyclic_rotate, degeneracy,
                                 enum_cells, enum_grid_paths, enum_nondegenerate, face, increasing_cells,
                                 is_degenerate, nondegenerate_count)


def brute_nondegenerate(n, k):
    return [c for c in product(range(n + 1), repeat=k + 1) if all(a != b for a, b in zip(c, c[1:]))]


def leq(a, b):
    return a[0] <= b[0] and a[1] <= b[1]


def test_face_and_degeneracy_examples():
    assert face((0, 1, 0), 1) == (0, 0)
    assert degeneracy((0, 1), 0) == (0, 0, 1)
    with pytest.raises(SimplicialError):
        face((0,), 0)
    with pytest.raises(SimplicialError):
        face((0, 1), 2)


def test_simplicial_identities_on_random_cells():
    rng = random.Random(11)
    for _ in range(300):
        cell = tuple(rng.randrange(4) for _ in range(rng.randint(3, 7)))
        k = len(cell) - 1
        i, j = sorted(rng.sample(range(k + 1), 2))
        assert face(face(cell, j), i) == face(face(cell, i), j - 1)
        a, b = sorted((rng.randrange(k + 1), rng.randrange(k + 1)))
        assert degeneracy(degeneracy(cell, b), a) == degeneracy(degeneracy(cell, a), b + 1)
        j = rng.randrange(k + 1)
        assert face(degeneracy(cell, j), j) == cell
        assert face(degeneracy(cell, j), j + 1) == cell


def test_cyclic_rotation():
    assert cyclic_rotate((0, 1, 2)) == (2, 0, 1)
    rng = random.Random(3)
    for _ in range(100):
        cell = tuple(rng.randrange(5) for _ in range(rng.randint(1, 6)))
        x = cell
        for _ in range(len(cell)):
            x = cyclic_rotate(x)
        assert x == cell


def test_cyclic_face_relations():
    # d_i t = t d_{i-1} for 1 <= i <= k and d_0 t = d_k on k-cells.
    rng = random.Random(5)
    for _ in range(200):
        cell = tuple(rng.randrange(4) for _ in range(rng.randint(2, 6)))
        k = len(cell) - 1
        assert face(cyclic_rotate(cell), 0) == face(cell, k)
        for i in range(1, k + 1):
            assert face(cyclic_rotate(cell), i) == cyclic_rotate(face(cell, i - 1))


def test_enum_nondegenerate_examples():
    for k in range(6):
        cells = list(enum_nondegenerate(1, k))
        assert cells == sorted([tuple((s + t) % 2 for t in range(k + 1)) for s in (0, 1)])
    assert len(list(enum_nondegenerate(2, 2))) == 12
    assert len(list(enum_nondegenerate(3, 0))) == 4


@pytest.mark.parametrize("n", range(0, 5))
def test_enum_nondegenerate_matches_brute_force(n):
    for k in range(0, 6 if n <= 3 else 5):
        cells = list(enum_nondegenerate(n, k))
        assert cells == brute_nondegenerate(n, k)
        assert len(cells) == nondegenerate_count(n, k) == (n + 1) * n ** k
        assert all(not is_degenerate(c) for c in cells)
    assert len(list(enum_cells(2, 3))) == 3 ** 4


def test_increasing_cells():
    assert list(increasing_cells(3, 1)) == list(combinations(range(4), 2))


def test_grid_path_examples():
    assert len(list(enum_grid_paths(1, 1, "monotone", 3))) == 2
    assert len(list(enum_grid_paths(2, 1, "monotone", 4))) == 3
    long_path = tuple(zip([0, 1, 1, 1, 2, 3, 4, 4, 4, 4, 4, 4], [0, 0, 1, 2, 2, 2, 2, 3, 4, 5, 6, 7]))
    assert long_path in set(enum_grid_paths(4, 7, "monotone", 12))


def test_maximal_paths_binomial():
    for k in range(0, 6):
        for l in range(0, 6 - k + 1):
            assert len(list(enum_grid_paths(k, l, "monotone", k + l + 1))) == comb(k + l, k)


@pytest.mark.parametrize("k,l", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_supported_paths_match_brute_force(k, l):
    pts = [(a, b) for a in range(k + 1) for b in range(l + 1)]
    maximal = [set(p) for p in enum_grid_paths(k, l, "monotone", k + l + 1)]
    for length in range(1, 4):
        expected = {p for p in product(pts, repeat=length)
                    if all(a != b for a, b in zip(p, p[1:])) and any(set(p) <= m for m in maximal)}
        assert set(enum_grid_paths(k, l, "supported", length)) == expected


def test_monotone_paths_are_nondecreasing():
    for path in enum_grid_paths(2, 2):
        assert all(leq(a, b) and a != b for a, b in zip(path, path[1:]))


def test_contracting_homotopy():
    report = contracting_homotopy_check(1, 0)
    assert report["ok"]
    for n in (1, 2, 3):
        report = contracting_homotopy_check(n, 4)
        assert report["ok"], report["failure"]
        assert report["checked"][4] == (n + 1) * n ** 4


def test_cone_homotopy_on_a_vertex():
    from ivbchern.simplicial import _boundary, cone_homotopy

    assert cone_homotopy((1,)) == {(0, 1): 1}
    assert {c: v for c, v in _boundary((0, 1)).items() if v} == {(1,): 1, (0,): -1}
