"""Combinatorics of the simplicial sets used throughout: standard simplices, the
extended simplex whose k-cells are arbitrary (k+1)-sequences in {0..n}, and
lattice paths in product grids.

Cells are plain tuples of vertex labels.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Iterator, Sequence

Cell = tuple[int, ...]
GridPath = tuple[tuple[int, int], ...]


class SimplicialError(ValueError):
    pass


def face(cell: Sequence, j: int) -> tuple:
    """Drop the entry at position ``j``."""
    if not 0 <= j < len(cell) or len(cell) < 2:
        raise SimplicialError(f"face index {j} out of range for a cell of length {len(cell)}")
    return tuple(cell[:j]) + tuple(cell[j + 1:])


def degeneracy(cell: Sequence, j: int) -> tuple:
    """Repeat the entry at position ``j``."""
    if not 0 <= j < len(cell):
        raise SimplicialError(f"degeneracy index {j} out of range for a cell of length {len(cell)}")
    return tuple(cell[:j + 1]) + tuple(cell[j:])


def cyclic_rotate(cell: Sequence) -> tuple:
    """``(i0, ..., ik) -> (ik, i0, ..., i_{k-1})``."""
    if not cell:
        raise SimplicialError("cannot rotate an empty cell")
    return (cell[-1],) + tuple(cell[:-1])


def is_degenerate(cell: Sequence) -> bool:
    return any(a == b for a, b in zip(cell, cell[1:]))


def coface_map(j: int):
    """The order-preserving injection [n] -> [n+1] that skips ``j``."""
    return lambda i: i if i < j else i + 1


def codegeneracy_map(j: int):
    """The order-preserving surjection [n] -> [n-1] hitting ``j`` twice."""
    return lambda i: i if i <= j else i - 1


def apply_map(phi, cell: Sequence) -> tuple:
    if callable(phi):
        return tuple(phi(i) for i in cell)
    return tuple(phi[i] for i in cell)


def enum_nondegenerate(n: int, k: int) -> Iterator[Cell]:
    """Nondegenerate k-cells of the extended n-simplex, in lexicographic order."""
    if n < 0 or k < 0:
        raise SimplicialError("negative dimension")

    def rec(prefix):
        if len(prefix) == k + 1:
            yield tuple(prefix)
            return
        for v in range(n + 1):
            if prefix and prefix[-1] == v:
                continue
            prefix.append(v)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def enum_cells(n: int, k: int) -> Iterator[Cell]:
    """All k-cells (degenerate included) of the extended n-simplex."""
    return product(range(n + 1), repeat=k + 1)


def nondegenerate_count(n: int, k: int) -> int:
    return (n + 1) * n ** k


def increasing_cells(n: int, k: int) -> Iterator[Cell]:
    """Nondegenerate k-cells of the ordinary n-simplex."""
    return combinations(range(n + 1), k + 1)


# Lattice paths in the (k+1) x (l+1) grid.

def _leq(a, b) -> bool:
    return a[0] <= b[0] and a[1] <= b[1]


def is_chain(points) -> bool:
    """True when the points are pairwise comparable in the product order."""
    pts = sorted(set(points))
    return all(_leq(a, b) for a, b in zip(pts, pts[1:]))


def is_supported(path: GridPath) -> bool:
    """A path is supported when its vertex set lies on some maximal monotone path."""
    return is_chain(path)


def is_monotone(path: GridPath) -> bool:
    return all(_leq(a, b) and a != b for a, b in zip(path, path[1:]))


def _grid_points(k: int, l: int):
    return [(a, b) for a in range(k + 1) for b in range(l + 1)]


def enum_grid_paths(k: int, l: int, mode: str = "monotone", length: int | None = None) -> Iterator[GridPath]:
    """Nondegenerate paths in the (k+1) x (l+1) grid.

    ``monotone`` yields strictly increasing paths (all lengths, or only those with
    ``length`` vertices).  ``supported`` yields every sequence of ``length``
    vertices with no immediate repeats whose vertex set is a chain; ``length`` is
    required there because such sequences can be arbitrarily long.
    """
    if k < 0 or l < 0:
        raise SimplicialError("negative grid size")
    if mode == "monotone":
        yield from _monotone_paths(k, l, length)
    elif mode == "supported":
        if length is None or length < 1:
            raise SimplicialError("supported mode needs a positive path length")
        yield from _supported_paths(k, l, length)
    else:
        raise SimplicialError(f"unknown grid path mode {mode!r}")


def _monotone_paths(k, l, length):
    pts = _grid_points(k, l)

    def rec(path):
        if length is None or len(path) == length:
            yield tuple(path)
        if length is not None and len(path) >= length:
            return
        last = path[-1]
        for p in pts:
            if _leq(last, p) and p != last:
                path.append(p)
                yield from rec(path)
                path.pop()

    for p in pts:
        yield from rec([p])


def _supported_paths(k, l, length):
    pts = _grid_points(k, l)

    def rec(path):
        if len(path) == length:
            yield tuple(path)
            return
        for p in pts:
            if p == path[-1]:
                continue
            if all(_leq(p, q) or _leq(q, p) for q in path):
                path.append(p)
                yield from rec(path)
                path.pop()

    for p in pts:
        yield from rec([p])


def maximal_path_count(k: int, l: int) -> int:
    return comb(k + l, k)


def path_rows(path: GridPath) -> tuple[Cell, Cell]:
    """Split a path into its (alpha, beta) index rows."""
    return tuple(p[0] for p in path), tuple(p[1] for p in path)


def path_from_rows(alpha: Sequence[int], beta: Sequence[int]) -> GridPath:
    if len(alpha) != len(beta):
        raise SimplicialError("index rows differ in length")
    return tuple(zip(alpha, beta))


# Normalized chains of the extended simplex and the cone contraction.

def _boundary(cell: Cell) -> dict[Cell, int]:
    out: dict[Cell, int] = defaultdict(int)
    if len(cell) < 2:
        return {}
    for j in range(len(cell)):
        f = face(cell, j)
        if not is_degenerate(f):
            out[f] += -1 if j & 1 else 1
    return {c: v for c, v in out.items() if v}


def cone_homotopy(cell: Cell) -> dict[Cell, int]:
    """Prepend the basepoint 0; degenerate results vanish."""
    c = (0,) + tuple(cell)
    return {} if is_degenerate(c) else {c: 1}


def _apply(op, vec: dict) -> dict:
    out: dict = defaultdict(Fraction)
    for c, v in vec.items():
        for c2, w in op(c).items():
            out[c2] += v * w
    return {c: v for c, v in out.items() if v}


def contracting_homotopy_check(n: int, max_degree: int) -> dict:
    """Verify ``boundary*h + h*boundary = id - eps`` on normalized chains through ``max_degree``.

    ``eps`` sends every vertex to the basepoint ``(0,)`` and kills higher chains.
    Returns a report with the number of basis cells checked per degree and the
    first failing cell, if any.
    """
    report = {"n": n, "max_degree": max_degree, "checked": {}, "ok": True, "failure": None}
    for k in range(max_degree + 1):
        count = 0
        for cell in enum_nondegenerate(n, k):
            lhs = _apply(_boundary, cone_homotopy(cell))
            for c, v in _apply(cone_homotopy, _boundary(cell)).items():
                lhs[c] = lhs.get(c, 0) + v
            lhs = {c: v for c, v in lhs.items() if v}
            rhs: dict = {cell: Fraction(1)}
            if k == 0:
                rhs[(0,)] = rhs.get((0,), 0) - 1
            rhs = {c: v for c, v in rhs.items() if v}
            count += 1
            if lhs != rhs:
                report["ok"] = False
                report["failure"] = {"cell": list(cell), "lhs": {str(c): str(v) for c, v in lhs.items()}}
                report["checked"][k] = count
                return report
        report["checked"][k] = count
    return report
