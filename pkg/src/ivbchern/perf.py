"""Local perfect complexes with connections and their graded Hom-valued forms.

A :class:`PerfObject` is a bounded complex of free modules of finite rank over a
coordinate ring, with a differential of degree +1 and a (not necessarily flat,
not necessarily compatible) connection on each graded piece.

A :class:`HomElement` is a homogeneous element of ``Omega^k(Hom^q(E, E'))``.
It is stored as a sparse map ``(row, col, mask, exps) -> coefficient`` in the
global bases of target and source, ordered by degree.  Composition carries the
Koszul sign ``(-1)^(q_f * k_g)`` so that the supertrace is graded cyclic and
the covariant derivative is a derivation for the total degree ``k + q``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .forms import (ChartMap, FormError, HolForm, LaurentPoly, Ring, _addto, _popcount,
                    wedge_sign)


class PerfError(ValueError):
    """Shape, degree or differential errors for complexes and Hom elements."""


def _as_form(x, ring: Ring) -> HolForm:
    if isinstance(x, HolForm):
        if x.ring.coords != ring.coords:
            raise PerfError(f"entry over {x.ring.coords}, expected {ring.coords}")
        return x
    if isinstance(x, LaurentPoly):
        if x.ring.coords != ring.coords:
            raise PerfError(f"entry over {x.ring.coords}, expected {ring.coords}")
        return HolForm.function(x)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return HolForm.function(x, ring)
    raise PerfError(f"cannot use {type(x).__name__} as a matrix entry")


class PerfObject:
    """Bounded complex of free modules with a connection.

    ``ranks`` maps degree to rank.  ``differential`` maps degree ``q`` to a
    ``rank(q+1) x rank(q)`` matrix; ``connection`` maps ``q`` to a
    ``rank(q) x rank(q)`` matrix of 1-forms.  Missing blocks are zero.
    """

    def __init__(self, ring: Ring, ranks: Mapping[int, int],
                 differential: Mapping[int, Sequence[Sequence]] | None = None,
                 connection: Mapping[int, Sequence[Sequence]] | None = None,
                 check: bool = True):
        self.ring = ring
        self.ranks = {int(q): int(r) for q, r in sorted(ranks.items()) if int(r)}
        if any(r < 0 for r in self.ranks.values()):
            raise PerfError("negative rank")
        degrees = []
        self.offsets: dict[int, int] = {}
        for q, r in self.ranks.items():
            self.offsets[q] = len(degrees)
            degrees.extend([q] * r)
        self.degrees: tuple[int, ...] = tuple(degrees)
        self.size = len(degrees)
        self._pullbacks: dict[int, tuple[ChartMap, PerfObject]] = {}
        self._identity: HomElement | None = None
        self.d = HomElement.from_blocks(self, self, 1, 0, differential or {})
        self.connection = HomElement.from_blocks(self, self, 0, 1, connection or {})
        if check:
            dd = self.d.compose(self.d)
            if not dd.is_zero():
                raise PerfError("differential does not square to zero")
            for t in self.d.terms:
                if not ring.admits(t[3]):
                    raise PerfError(f"differential entry leaves the ring {ring}")

    @classmethod
    def _assemble(cls, ring: Ring, ranks: Mapping[int, int], d: HomElement | None,
                  connection: HomElement | None) -> PerfObject:
        obj = cls(ring, ranks, check=False)
        if d is not None:
            obj.d = HomElement(obj, obj, 1, 0, d.terms)
        if connection is not None:
            obj.connection = HomElement(obj, obj, 0, 1, connection.terms)
        return obj

    def rank(self, q: int) -> int:
        return self.ranks.get(q, 0)

    def index(self, q: int, i: int) -> int:
        return self.offsets[q] + i

    def euler_char(self) -> int:
        return sum(r if q % 2 == 0 else -r for q, r in self.ranks.items())

    def identity(self) -> HomElement:
        if self._identity is None:
            z = self.ring.zero_exps()
            self._identity = HomElement(self, self, 0, 0, {(i, i, 0, z): 1 for i in range(self.size)})
        return self._identity

    def same_shape(self, other: PerfObject) -> bool:
        return self is other or (self.degrees == other.degrees and self.ring.coords == other.ring.coords)

    def with_connection(self, connection: HomElement | Mapping[int, Sequence[Sequence]]) -> PerfObject:
        if not isinstance(connection, HomElement):
            connection = HomElement.from_blocks(self, self, 0, 1, connection)
        return PerfObject._assemble(self.ring, self.ranks, self.d, connection)

    def pullback(self, phi: ChartMap) -> PerfObject:
        hit = self._pullbacks.get(id(phi))
        if hit is not None:
            return hit[1]
        if phi.source.coords != self.ring.coords:
            raise PerfError(f"chart map source {phi.source.coords} does not match {self.ring.coords}")
        obj = PerfObject(phi.target, self.ranks, check=False)
        obj.d = HomElement(obj, obj, 1, 0, _pull_terms(self.d.terms, phi))
        obj.connection = HomElement(obj, obj, 0, 1, _pull_terms(self.connection.terms, phi))
        self._pullbacks[id(phi)] = (phi, obj)
        return obj

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, PerfObject):
            return NotImplemented
        return (self.same_shape(other) and self.d.terms == other.d.terms
                and self.connection.terms == other.connection.terms)

    def __hash__(self):
        return hash((self.ring.coords, self.degrees))

    def __repr__(self):
        return f"PerfObject(ranks={self.ranks}, coords={self.ring.coords})"


def _pull_terms(terms: dict, phi: ChartMap) -> dict:
    entries: dict = {}
    for (i, j, m, e), c in terms.items():
        entries.setdefault((i, j), {})[(m, e)] = c
    out: dict = {}
    for (i, j), ft in entries.items():
        pulled = phi.pullback(HolForm._raw(phi.source, ft))
        for (m, e), c in pulled.terms.items():
            out[(i, j, m, e)] = c
    return out


class HomElement:
    """Homogeneous element of ``Omega^k(Hom^q(source, target))``."""

    __slots__ = ("source", "target", "q", "k", "terms")

    def __init__(self, source: PerfObject, target: PerfObject, q: int, k: int, terms: dict):
        self.source = source
        self.target = target
        self.q = q
        self.k = k
        self.terms = terms

    # construction

    @classmethod
    def zero(cls, source: PerfObject, target: PerfObject, q: int = 0, k: int = 0) -> HomElement:
        return cls(source, target, q, k, {})

    @classmethod
    def from_blocks(cls, source: PerfObject, target: PerfObject, q: int, k: int,
                    blocks: Mapping[int, Sequence[Sequence]]) -> HomElement:
        """Blocks are keyed by source degree ``p``; each is ``rank_target(p+q) x rank_source(p)``."""
        ring = source.ring
        if target.ring.coords != ring.coords:
            raise PerfError("source and target live over different rings")
        terms: dict = {}
        for p, mat in blocks.items():
            p = int(p)
            rows, cols = target.rank(p + q), source.rank(p)
            mat = [list(r) for r in mat]
            if rows == 0 or cols == 0:
                if any(any(not _as_form(x, ring).is_zero() for x in r) for r in mat):
                    raise PerfError(f"block at source degree {p} has no room (ranks {rows}x{cols})")
                continue
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise PerfError(f"block at source degree {p} must be {rows}x{cols}")
            r0, c0 = target.offsets[p + q], source.offsets[p]
            for a, row in enumerate(mat):
                for b, x in enumerate(row):
                    f = _as_form(x, ring)
                    for (m, e), c in f.terms.items():
                        if _popcount(m) != k:
                            raise PerfError(f"entry ({a},{b}) of block {p} is not a {k}-form")
                        _addto(terms, (r0 + a, c0 + b, m, e), c)
        return cls(source, target, q, k, terms)

    @classmethod
    def from_entries(cls, source: PerfObject, target: PerfObject, q: int, k: int,
                     entries: Mapping[tuple[int, int], object]) -> HomElement:
        """Build from global-index entries ``{(row, col): form}``."""
        ring = source.ring
        terms: dict = {}
        for (i, j), x in entries.items():
            f = _as_form(x, ring)
            if f.is_zero():
                continue
            if target.degrees[i] != source.degrees[j] + q:
                raise PerfError(f"entry ({i},{j}) is not in hom degree {q}")
            for (m, e), c in f.terms.items():
                if _popcount(m) != k:
                    raise PerfError(f"entry ({i},{j}) is not a {k}-form")
                _addto(terms, (i, j, m, e), c)
        return cls(source, target, q, k, terms)

    # inspection

    @property
    def ring(self) -> Ring:
        return self.source.ring

    @property
    def total_degree(self) -> int:
        return self.k + self.q

    def is_zero(self) -> bool:
        return not self.terms

    def entry(self, i: int, j: int) -> HolForm:
        return HolForm._raw(self.ring, {(m, e): c for (a, b, m, e), c in self.terms.items() if a == i and b == j})

    def entries(self) -> dict[tuple[int, int], HolForm]:
        out: dict = {}
        for (i, j, m, e), c in self.terms.items():
            out.setdefault((i, j), {})[(m, e)] = c
        return {ij: HolForm._raw(self.ring, t) for ij, t in out.items()}

    def block(self, p: int) -> list[list[HolForm]]:
        """Matrix from source degree ``p`` to target degree ``p + q``."""
        rows, cols = self.target.rank(p + self.q), self.source.rank(p)
        mat = [[HolForm.zero(self.ring) for _ in range(cols)] for _ in range(rows)]
        if rows and cols:
            r0, c0 = self.target.offsets[p + self.q], self.source.offsets[p]
            for (i, j), f in self.entries().items():
                if r0 <= i < r0 + rows and c0 <= j < c0 + cols:
                    mat[i - r0][j - c0] = f
        return mat

    def blocks(self) -> dict[int, list[list[HolForm]]]:
        return {p: self.block(p) for p in self.source.ranks if self.target.rank(p + self.q)}

    def validate(self) -> None:
        for (i, j, m, e) in self.terms:
            if self.target.degrees[i] != self.source.degrees[j] + self.q:
                raise PerfError(f"entry ({i},{j}) is not in hom degree {self.q}")
            if _popcount(m) != self.k:
                raise PerfError(f"entry ({i},{j}) is not a {self.k}-form")

    # arithmetic

    def _like(self, other: HomElement) -> None:
        if not (self.source.same_shape(other.source) and self.target.same_shape(other.target)):
            raise PerfError("Hom elements between different complexes")
        if (self.q, self.k) != (other.q, other.k) and self.terms and other.terms:
            raise PerfError(f"cannot add degrees (k={self.k}, q={self.q}) and (k={other.k}, q={other.q})")

    def __add__(self, other: HomElement) -> HomElement:
        if other is None:
            return self
        self._like(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for t, c in other.terms.items():
            _addto(out, t, c)
        return HomElement(self.source, self.target, self.q, self.k, out)

    __radd__ = __add__

    def __neg__(self) -> HomElement:
        return HomElement(self.source, self.target, self.q, self.k, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other: HomElement) -> HomElement:
        return self + (-other)

    def scale(self, c) -> HomElement:
        if c == 1:
            return self
        if not c:
            return HomElement(self.source, self.target, self.q, self.k, {})
        return HomElement(self.source, self.target, self.q, self.k, {t: v * c for t, v in self.terms.items()})

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def compose(self, other: HomElement) -> HomElement:
        """``self o other`` with the Koszul sign ``(-1)^(self.q * other.k)``."""
        if not self.source.same_shape(other.target):
            raise PerfError("shape mismatch in composition")
        sign = -1 if (self.q * other.k) & 1 else 1
        out = _matmul(self.terms, other.terms, sign)
        return HomElement(other.source, self.target, self.q + other.q, self.k + other.k, out)

    __matmul__ = compose

    def ext_d(self) -> HomElement:
        out: dict = {}
        for (i, j, m, e), c in self.terms.items():
            for n, k in enumerate(e):
                if not k or m >> n & 1:
                    continue
                v = c * k
                if _popcount(m & ((1 << n) - 1)) & 1:
                    v = -v
                _addto(out, (i, j, m | 1 << n, e[:n] + (k - 1,) + e[n + 1:]), v)
        return HomElement(self.source, self.target, self.q, self.k + 1, out)

    def internal_D(self) -> HomElement:
        """``f o d - (-1)^|f| d' o f``."""
        a = self.compose(self.source.d)
        b = self.target.d.compose(self)
        if self.total_degree & 1:
            return _plus(a, b, self.source, self.target, self.q + 1, self.k)
        return _plus(a, -b, self.source, self.target, self.q + 1, self.k)

    def nabla(self) -> HomElement:
        """Entrywise exterior derivative plus ``Gamma' o f - (-1)^|f| f o Gamma``."""
        a = self.ext_d()
        b = self.target.connection.compose(self)
        c = self.compose(self.source.connection)
        if not (self.total_degree & 1):
            c = -c
        out = dict(a.terms)
        for t, v in b.terms.items():
            _addto(out, t, v)
        for t, v in c.terms.items():
            _addto(out, t, v)
        return HomElement(self.source, self.target, self.q, self.k + 1, out)

    def supertrace(self) -> HolForm:
        """Alternating sum of block traces; zero unless the hom degree is zero."""
        ring = self.ring
        if self.q != 0:
            return HolForm.zero(ring)
        if not self.source.same_shape(self.target):
            raise PerfError("supertrace of a map between different complexes")
        degs = self.source.degrees
        out: dict = {}
        for (i, j, m, e), c in self.terms.items():
            if i == j:
                _addto(out, (m, e), -c if degs[i] & 1 else c)
        return HolForm._raw(ring, out)

    def pullback(self, phi: ChartMap, source: PerfObject | None = None,
                 target: PerfObject | None = None) -> HomElement:
        source = source or self.source.pullback(phi)
        target = target or self.target.pullback(phi)
        return HomElement(source, target, self.q, self.k, _pull_terms(self.terms, phi))

    def retarget(self, source: PerfObject, target: PerfObject) -> HomElement:
        """Same coefficients, reinterpreted between complexes of the same shape."""
        if not (source.same_shape(self.source) and target.same_shape(self.target)):
            raise PerfError("retarget needs complexes of the same shape")
        return HomElement(source, target, self.q, self.k, self.terms)

    def __eq__(self, other):
        if other is None:
            return not self.terms
        if not isinstance(other, HomElement):
            return NotImplemented
        if not self.terms and not other.terms:
            return True
        return ((self.q, self.k) == (other.q, other.k)
                and self.source.same_shape(other.source) and self.target.same_shape(other.target)
                and self.terms == other.terms)

    __hash__ = None

    def __repr__(self):
        ents = ", ".join(f"({i},{j}): {f}" for (i, j), f in sorted(self.entries().items()))
        return f"HomElement(k={self.k}, q={self.q}, {{{ents}}})"


def _plus(a: HomElement, b: HomElement, source, target, q, k) -> HomElement:
    out = dict(a.terms)
    for t, v in b.terms.items():
        _addto(out, t, v)
    return HomElement(source, target, q, k, out)


def _matmul(left: dict, right: dict, sign: int) -> dict:
    if not left or not right:
        return {}
    byrow: dict = {}
    for (m, j, mb, eb), cb in right.items():
        byrow.setdefault(m, []).append((j, mb, eb, cb))
    out: dict = {}
    for (i, m, ma, ea), ca in left.items():
        row = byrow.get(m)
        if row is None:
            continue
        for j, mb, eb, cb in row:
            if ma & mb:
                continue
            v = ca * cb
            if (wedge_sign(ma, mb) if mb and ma else 1) * sign < 0:
                v = -v
            key = (i, j, ma | mb, tuple(x + y for x, y in zip(ea, eb)))
            w = out.get(key, 0) + v
            if w:
                out[key] = w
            else:
                del out[key]
    return out


def hom_compose(f: HomElement, g: HomElement) -> HomElement:
    return f.compose(g)


def internal_D(f: HomElement) -> HomElement:
    return f.internal_D()


def hom_nabla(f: HomElement) -> HomElement:
    return f.nabla()


def supertrace(f: HomElement) -> HolForm:
    return f.supertrace()


def euler_char(e: PerfObject) -> int:
    return e.euler_char()


def quasi_iso_report(g01: HomElement, g10: HomElement, h010: HomElement, h101: HomElement) -> dict:
    """Check that ``g01, g10`` are chain maps and ``h010, h101`` witness both homotopies.

    ``g01: E1 -> E0`` and ``g10: E0 -> E1``.  The witnesses satisfy
    ``D(h010) = id - g01 o g10`` and ``D(h101) = id - g10 o g01``.
    """
    e0, e1 = g01.target, g01.source
    problems = []
    if not (g10.source.same_shape(e0) and g10.target.same_shape(e1)):
        problems.append("g10 does not go from E0 to E1")
    for name, h, e in (("h010", h010, e0), ("h101", h101, e1)):
        if not (h.source.same_shape(e) and h.target.same_shape(e)):
            problems.append(f"{name} is not an endomorphism of the right complex")
    if problems:
        return {"ok": False, "problems": problems}
    for name, g in (("g01", g01), ("g10", g10)):
        if g.k != 0 or (g.q != 0 and not g.is_zero()):
            problems.append(f"{name} is not a degree-0 function-valued map")
        elif not g.internal_D().is_zero():
            problems.append(f"{name} is not a chain map")
    for name, h, lhs in (("h010", h010, e0.identity() - g01.compose(g10)),
                         ("h101", h101, e1.identity() - g10.compose(g01))):
        if h.k != 0 or (h.q != -1 and not h.is_zero()):
            problems.append(f"{name} must have hom degree -1")
            continue
        dh = h.internal_D() if h.terms else HomElement.zero(h.source, h.target, 0, 0)
        if not _equal(dh, lhs):
            problems.append(f"D({name}) differs from id - composite")
    return {"ok": not problems, "problems": problems}


def _equal(a: HomElement, b: HomElement) -> bool:
    return a.terms == b.terms


def quasi_iso_check(g01: HomElement, g10: HomElement, h010: HomElement, h101: HomElement) -> bool:
    return quasi_iso_report(g01, g10, h010, h101)["ok"]


def matrix_of(f: HomElement) -> list[list[HolForm]]:
    """Full ``target.size x source.size`` matrix of entries."""
    ring = f.ring
    mat = [[HolForm.zero(ring) for _ in range(f.source.size)] for _ in range(f.target.size)]
    for (i, j), x in f.entries().items():
        mat[i][j] = x
    return mat


def direct_sum(objects: Iterable[PerfObject]) -> PerfObject:
    """Block-diagonal sum of complexes over a common ring."""
    objects = list(objects)
    ring = objects[0].ring
    ranks: dict[int, int] = {}
    for o in objects:
        for q, r in o.ranks.items():
            ranks[q] = ranks.get(q, 0) + r
    out = PerfObject(ring, ranks, check=False)
    fill = {q: 0 for q in ranks}
    index_maps = []
    for o in objects:
        imap = {}
        for q, r in o.ranks.items():
            for a in range(r):
                imap[o.offsets[q] + a] = out.offsets[q] + fill[q] + a
            fill[q] += r
        index_maps.append(imap)
    dterms, cterms = {}, {}
    for o, imap in zip(objects, index_maps):
        for (i, j, m, e), c in o.d.terms.items():
            dterms[(imap[i], imap[j], m, e)] = c
        for (i, j, m, e), c in o.connection.terms.items():
            cterms[(imap[i], imap[j], m, e)] = c
    out.d = HomElement(out, out, 1, 0, dterms)
    out.connection = HomElement(out, out, 0, 1, cterms)
    return out


__all__ = ["PerfObject", "HomElement", "PerfError", "hom_compose", "internal_D", "hom_nabla",
           "supertrace", "euler_char", "quasi_iso_check", "quasi_iso_report", "matrix_of",
           "direct_sum", "supertrace_of_compose", "FormError"]


def supertrace_of_compose(a: HomElement, b: HomElement) -> HolForm:
    """``supertrace(a o b)`` without forming the full product."""
    ring = a.ring
    if a.q + b.q != 0:
        return HolForm.zero(ring)
    if not a.source.same_shape(b.target):
        raise PerfError("shape mismatch in composition")
    degs = a.target.degrees
    sign = -1 if (a.q * b.k) & 1 else 1
    bycol: dict = {}
    for (m, i, mb, eb), cb in b.terms.items():
        bycol.setdefault((m, i), []).append((mb, eb, cb))
    out: dict = {}
    for (i, m, ma, ea), ca in a.terms.items():
        lst = bycol.get((m, i))
        if lst is None:
            continue
        s = sign if not degs[i] & 1 else -sign
        for mb, eb, cb in lst:
            if ma & mb:
                continue
            v = ca * cb
            if (wedge_sign(ma, mb) if ma and mb else 1) * s < 0:
                v = -v
            _addto(out, (ma | mb, tuple(x + y for x, y in zip(ea, eb))), v)
    return HolForm._raw(ring, out)
