"""Decorations of the ordinary simplex by u-graded holomorphic forms.

A decoration assigns to each increasing cell of the n-simplex a polynomial in
a formal variable ``u`` of degree 2 with form coefficients.  It describes a
simplicial map into the Dold-Kan image of ``Omega[u]`` with zero differential
exactly when every k-cell carries total degree ``-k`` (form degree minus twice
the u power), form degrees have the parity of k, and the alternating face sum
vanishes on every cell.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .forms import ChartMap, HolForm, Ring, _addto, _popcount
from .simplicial import codegeneracy_map, coface_map, increasing_cells


class DKError(ValueError):
    pass


class UPoly:
    """Finite sum ``sum_m form_m u^m`` keyed by the power of ``u``."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Mapping[int, HolForm] | None = None):
        self.ring = ring
        self.terms = {}
        for m, f in (terms or {}).items():
            if m < 0:
                raise DKError("negative power of u")
            if f.ring.coords != ring.coords:
                raise DKError(f"form over {f.ring.coords}, expected {ring.coords}")
            if f.terms:
                self.terms[int(m)] = f

    @classmethod
    def constant(cls, ring: Ring, c) -> UPoly:
        return cls(ring, {0: HolForm.function(c, ring)} if c else {})

    def bidegrees(self) -> set[tuple[int, int]]:
        """Set of ``(form degree, u power)`` pairs that occur."""
        out = set()
        for m, f in self.terms.items():
            for d in f.degrees():
                out.add((d, m))
        return out

    def total_degrees(self) -> set[int]:
        return {d - 2 * m for d, m in self.bidegrees()}

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, m: int) -> HolForm:
        return self.terms.get(m, HolForm.zero(self.ring))

    def __add__(self, other: UPoly) -> UPoly:
        out = dict(self.terms)
        for m, f in other.terms.items():
            out[m] = out[m] + f if m in out else f
        return UPoly(self.ring, out)

    def __neg__(self) -> UPoly:
        return UPoly(self.ring, {m: -f for m, f in self.terms.items()})

    def __sub__(self, other: UPoly) -> UPoly:
        return self + (-other)

    def scale(self, c) -> UPoly:
        return UPoly(self.ring, {m: f.scale(c) for m, f in self.terms.items()})

    def pullback(self, phi: ChartMap) -> UPoly:
        return UPoly(phi.target, {m: phi.pullback(f) for m, f in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, UPoly):
            return NotImplemented
        return self.ring.coords == other.ring.coords and self.terms == other.terms

    __hash__ = None

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({f})*u^{m}" if m else f"({f})" for m, f in sorted(self.terms.items()))

    __repr__ = __str__


class DKDecoration:
    """Values on the increasing cells of the n-simplex; absent cells are zero."""

    def __init__(self, n: int, ring: Ring, values: Mapping[tuple, UPoly]):
        self.n = n
        self.ring = ring
        self.values: dict[tuple, UPoly] = {}
        for cell, v in values.items():
            cell = tuple(cell)
            if list(cell) != sorted(set(cell)) or not cell or cell[0] < 0 or cell[-1] > n:
                raise DKError(f"{cell} is not an increasing cell of the {n}-simplex")
            if not v.is_zero():
                self.values[cell] = v

    def __getitem__(self, cell) -> UPoly:
        return self.values.get(tuple(cell), UPoly(self.ring))

    def cells(self):
        for k in range(self.n + 1):
            yield from increasing_cells(self.n, k)

    def pullback(self, phi: ChartMap) -> DKDecoration:
        return DKDecoration(self.n, phi.target, {c: v.pullback(phi) for c, v in self.values.items()})

    def __eq__(self, other):
        if not isinstance(other, DKDecoration):
            return NotImplemented
        return self.n == other.n and self.ring.coords == other.ring.coords and self.values == other.values

    __hash__ = None

    def to_plain(self) -> dict:
        return {",".join(map(str, c)): str(v) for c, v in sorted(self.values.items())}


def dk_validate(dec: DKDecoration) -> dict:
    """Degree, parity and face-sum checks; returns ``{"ok", "problems"}``."""
    problems = []
    for cell, v in dec.values.items():
        k = len(cell) - 1
        for d, m in sorted(v.bidegrees()):
            if d - 2 * m != -k:
                problems.append(f"cell {list(cell)}: term (form {d}, u^{m}) has total degree {d - 2 * m}, expected {-k}")
            if (d - k) & 1:
                problems.append(f"cell {list(cell)}: form degree {d} has the wrong parity")
    for k in range(1, dec.n + 1):
        for cell in increasing_cells(dec.n, k):
            acc = UPoly(dec.ring)
            for j in range(k + 1):
                face_val = dec[cell[:j] + cell[j + 1:]]
                acc = acc + (face_val if j % 2 == 0 else -face_val)
            if not acc.is_zero():
                problems.append(f"cell {list(cell)}: alternating face sum is {acc}")
    return {"ok": not problems, "problems": problems}


def dk_face(dec: DKDecoration, j: int) -> DKDecoration:
    """Restrict along the coface ``[n-1] -> [n]`` skipping ``j``."""
    if not 0 <= j <= dec.n or dec.n == 0:
        raise DKError(f"face index {j} out of range for n={dec.n}")
    f = coface_map(j)
    out = {}
    for k in range(dec.n):
        for cell in increasing_cells(dec.n - 1, k):
            out[cell] = dec[tuple(f(i) for i in cell)]
    return DKDecoration(dec.n - 1, dec.ring, out)


def dk_degeneracy(dec: DKDecoration, j: int) -> DKDecoration:
    """Pull back along the codegeneracy ``[n+1] -> [n]`` hitting ``j`` twice.

    Cells whose image repeats a vertex get zero; the rest copy the image value.
    """
    if not 0 <= j <= dec.n:
        raise DKError(f"degeneracy index {j} out of range for n={dec.n}")
    s = codegeneracy_map(j)
    out = {}
    for k in range(dec.n + 2):
        for cell in increasing_cells(dec.n + 1, k):
            image = tuple(s(i) for i in cell)
            if len(set(image)) == len(image):
                out[cell] = dec[image]
    return DKDecoration(dec.n + 1, dec.ring, out)


def naturality_check(g, op) -> dict:
    """Compare the Chern decoration of transformed MC data with the transformed decoration.

    ``op`` is ``("face", j)``, ``("degeneracy", j)`` or ``("chart", ChartMap)``.
    """
    from .cochains import chart_pullback, chern_simplex, simplicial_pullback

    n = g.n
    kind, arg = op
    base = chern_simplex(g, n)
    if kind == "face":
        f = coface_map(arg)
        moved = chern_simplex(simplicial_pullback(g, [f(i) for i in range(n)]), n - 1)
        expected = dk_face(base, arg)
    elif kind == "degeneracy":
        s = codegeneracy_map(arg)
        moved = chern_simplex(simplicial_pullback(g, [s(i) for i in range(n + 2)]), n + 1)
        expected = dk_degeneracy(base, arg)
    elif kind == "chart":
        moved = chern_simplex(chart_pullback(g, arg), n)
        expected = base.pullback(arg)
    else:
        raise DKError(f"unknown operator {kind!r}")
    mismatched = [list(c) for c in sorted(set(moved.values) | set(expected.values))
                  if moved[c] != expected[c]]
    return {"ok": not mismatched, "op": kind if kind == "chart" else f"{kind} {arg}",
            "mismatched_cells": mismatched}
