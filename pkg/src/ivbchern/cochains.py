"""The triple-graded cochain algebra on the extended simplex, Maurer-Cartan
elements, the trace map to scalar Cech cochains, Atiyah cochains and Chern
decorations.

A cochain assigns to every cell ``alpha`` (a tuple of vertex labels) a
:class:`HomElement` from ``E[alpha[-1]]`` to ``E[alpha[0]]``, where ``E`` is the
vertex labeling.  Cochains are evaluated lazily and memoized per cell, so the
derived cochains below (sums, products, differentials) only ever touch the
cells that are actually needed.  ``None`` stands for a zero component.

Degrees: a component on a cell of length ``p + 1`` has Cech degree ``p``, form
degree ``k`` and hom degree ``q``; its total degree is ``k + p + q``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial
from typing import Callable, Iterable, Mapping, Sequence

from .forms import ChartMap, HolForm, _addto
from .perf import HomElement, PerfObject, supertrace_of_compose
from .simplicial import apply_map, enum_cells, enum_nondegenerate, increasing_cells, is_degenerate


class CochainError(ValueError):
    pass


class DegreeError(CochainError):
    pass


class TruncationError(CochainError):
    """A component beyond the stored degree bound was requested."""


def _same_labeling(a: Sequence[PerfObject], b: Sequence[PerfObject]) -> bool:
    return a is b or (len(a) == len(b) and all(x is y or x == y for x, y in zip(a, b)))


class Cochain:
    """Base class for lazily evaluated Hom-valued cochains."""

    def __init__(self, labeling: Sequence[PerfObject]):
        self.labeling = tuple(labeling)
        if not self.labeling:
            raise CochainError("empty vertex labeling")
        self._cache: dict[tuple, HomElement | None] = {}

    @property
    def n(self) -> int:
        return len(self.labeling) - 1

    @property
    def ring(self):
        return self.labeling[0].ring

    def __call__(self, cell) -> HomElement | None:
        cell = tuple(cell)
        try:
            return self._cache[cell]
        except KeyError:
            pass
        if not cell:
            raise CochainError("empty cell")
        n = self.n
        for v in cell:
            if not 0 <= v <= n:
                raise CochainError(f"vertex {v} outside 0..{n}")
        value = self._compute(cell)
        if value is not None and not value.terms:
            value = None
        self._cache[cell] = value
        return value

    def _compute(self, cell: tuple) -> HomElement | None:
        raise NotImplementedError

    def endpoints(self, cell) -> tuple[PerfObject, PerfObject]:
        """(source, target) of the component on ``cell``."""
        return self.labeling[cell[-1]], self.labeling[cell[0]]

    def _check(self, other: Cochain) -> None:
        if not _same_labeling(self.labeling, other.labeling):
            raise CochainError("cochains carry different vertex labelings")

    def __add__(self, other: Cochain) -> Cochain:
        return linear_combination([(1, self), (1, other)])

    def __sub__(self, other: Cochain) -> Cochain:
        return linear_combination([(1, self), (-1, other)])

    def __neg__(self) -> Cochain:
        return linear_combination([(-1, self)])

    def __mul__(self, other):
        if isinstance(other, Cochain):
            return cochain_product(self, other)
        if isinstance(other, (int, Fraction)):
            return linear_combination([(other, self)])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return linear_combination([(other, self)])
        return NotImplemented


class TableCochain(Cochain):
    """Finite table of components; missing cells are zero.

    With ``bound`` set, requesting a cell of Cech degree above the bound raises
    :class:`TruncationError` instead of silently returning zero.
    """

    def __init__(self, labeling, table: Mapping[tuple, HomElement], bound: int | None = None):
        super().__init__(labeling)
        self.bound = bound
        self.table = {}
        for cell, h in table.items():
            cell = tuple(cell)
            src, tgt = self.endpoints(cell)
            if not (h.source.same_shape(src) and h.target.same_shape(tgt)):
                raise CochainError(f"component on {cell} does not map E[{cell[-1]}] to E[{cell[0]}]")
            if bound is not None and len(cell) - 1 > bound:
                raise CochainError(f"component on {cell} exceeds the bound {bound}")
            self.table[cell] = h

    def _compute(self, cell):
        if self.bound is not None and len(cell) - 1 > self.bound:
            raise TruncationError(f"cell {cell} beyond the stored bound {self.bound}")
        return self.table.get(cell)


class RuleCochain(Cochain):
    """Components given by a function of the cell."""

    def __init__(self, labeling, rule: Callable[[tuple], HomElement | None]):
        super().__init__(labeling)
        self.rule = rule

    def _compute(self, cell):
        return self.rule(cell)


class UnitCochain(Cochain):
    """Identity on vertices, zero elsewhere; the unit of the product."""

    def _compute(self, cell):
        return self.labeling[cell[0]].identity() if len(cell) == 1 else None


class DifferentialCochain(Cochain):
    """The local differentials on vertices, zero elsewhere."""

    def _compute(self, cell):
        return self.labeling[cell[0]].d if len(cell) == 1 else None


class MCElement(Cochain):
    """Degree-one cochain with components in bidegrees ``(p, 1-p)`` for ``p >= 1``.

    ``rule`` gives the components on nondegenerate cells of length at least 2.
    Degenerate cells follow the fixed convention: identity on a repeated vertex
    ``(i, i)``, zero on longer degenerate cells.  There is no vertex component.
    """

    def __init__(self, labeling, rule: Callable[[tuple], HomElement | None], bound: int | None = None):
        super().__init__(labeling)
        self.rule = rule
        self.bound = bound

    @classmethod
    def from_table(cls, labeling, table: Mapping[tuple, HomElement], bound: int | None = None) -> MCElement:
        table = {tuple(c): h for c, h in table.items()}
        for c in table:
            if is_degenerate(c) or len(c) < 2:
                raise CochainError(f"table entry on {c}: only nondegenerate cells of length >= 2 are stored")
        return cls(labeling, table.get, bound)

    def _compute(self, cell):
        p = len(cell) - 1
        if p == 0:
            return None
        if is_degenerate(cell):
            return self.labeling[cell[0]].identity() if p == 1 else None
        if self.bound is not None and p > self.bound:
            raise TruncationError(f"MC element known only through Cech degree {self.bound}; asked for {cell}")
        h = self.rule(cell)
        if h is not None and h.terms and (h.k != 0 or h.q != 1 - p):
            raise DegreeError(f"component on {cell} has (k, q) = ({h.k}, {h.q}); expected (0, {1 - p})")
        return h


def linear_combination(pairs: Iterable[tuple]) -> Cochain:
    pairs = [(c, f) for c, f in pairs if c]
    if not pairs:
        raise CochainError("empty linear combination")
    base = pairs[0][1]
    for _, f in pairs[1:]:
        base._check(f)
    return _Combination(base.labeling, pairs)


class _Combination(Cochain):
    def __init__(self, labeling, pairs):
        super().__init__(labeling)
        self.pairs = pairs

    def _compute(self, cell):
        total = None
        for c, f in self.pairs:
            v = f(cell)
            if v is None:
                continue
            v = v.scale(c)
            total = v if total is None else total + v
        return total


class _HatDelta(Cochain):
    def __init__(self, f: Cochain):
        super().__init__(f.labeling)
        self.f = f

    def _compute(self, cell):
        total = None
        for i in range(1, len(cell) - 1):
            v = self.f(cell[:i] + cell[i + 1:])
            if v is None:
                continue
            if i & 1:
                v = -v
            total = v if total is None else total + v
        return total


def hat_delta(f: Cochain) -> Cochain:
    """Deleted Cech differential: alternating sum over the inner faces only."""
    return _HatDelta(f)


class _InternalD(Cochain):
    def __init__(self, f: Cochain):
        super().__init__(f.labeling)
        self.f = f

    def _compute(self, cell):
        v = self.f(cell)
        if v is None:
            return None
        p = len(cell) - 1
        dv = v.internal_D()
        # (-1)^p (d o f - (-1)^(k+q) f o d) = (-1)^(p+k+q+1) D(f)
        return -dv if (p + v.k + v.q + 1) & 1 else dv


def cochain_D(f: Cochain) -> Cochain:
    """Componentwise internal differential with the Cech-degree sign."""
    return _InternalD(f)


class _Product(Cochain):
    def __init__(self, f: Cochain, g: Cochain):
        super().__init__(f.labeling)
        f._check(g)
        self.f, self.g = f, g

    def _compute(self, cell):
        p = len(cell) - 1
        total = None
        for j in range(p + 1):
            a = self.f(cell[:j + 1])
            if a is None:
                continue
            b = self.g(cell[j:])
            if b is None:
                continue
            v = a.compose(b)
            if ((a.k + a.q) * (p - j)) & 1:
                v = -v
            total = v if total is None else total + v
        return total


def cochain_product(f: Cochain, g: Cochain) -> Cochain:
    """Cup-type product ``(f.g)_alpha = sum_j (-1)^((k+q) r) f_{alpha(0..j)} o g_{alpha(j..)}``."""
    return _Product(f, g)


class _Nabla(Cochain):
    def __init__(self, f: Cochain):
        super().__init__(f.labeling)
        self.f = f

    def _compute(self, cell):
        v = self.f(cell)
        if v is None:
            return None
        w = v.nabla()
        return -w if (len(cell) - 1) & 1 else w


def cochain_nabla(f: Cochain) -> Cochain:
    return _Nabla(f)


class _Bracket(Cochain):
    """Graded commutator ``[g, f] = g.f - (-1)^(|g||f|) f.g`` computed per component pair."""

    def __init__(self, g: Cochain, f: Cochain):
        super().__init__(g.labeling)
        g._check(f)
        self.g, self.f = g, f

    def _compute(self, cell):
        p = len(cell) - 1
        total = None
        for j in range(p + 1):
            for left, right, first in ((self.g, self.f, True), (self.f, self.g, False)):
                a = left(cell[:j + 1])
                if a is None:
                    continue
                b = right(cell[j:])
                if b is None:
                    continue
                v = a.compose(b)
                sign = ((a.k + a.q) * (p - j)) & 1
                if not first:
                    deg_g = b.k + b.q + (p - j)
                    deg_f = a.k + a.q + j
                    sign ^= 1 ^ ((deg_g * deg_f) & 1)
                if sign:
                    v = -v
                total = v if total is None else total + v
        return total


def bracket(g: Cochain, f: Cochain) -> Cochain:
    return _Bracket(g, f)


def mc_residual(g: Cochain) -> Cochain:
    """``hat_delta(g) + D(g) + g.g``; zero exactly when ``g`` is Maurer-Cartan."""
    return linear_combination([(1, hat_delta(g)), (1, cochain_D(g)), (1, cochain_product(g, g))])


def twisted_differential(g: Cochain, f: Cochain) -> Cochain:
    """``hat_delta(f) + D(f) + [g, f]``."""
    return linear_combination([(1, hat_delta(f)), (1, cochain_D(f)), (1, bracket(g, f))])


def _cells_up_to(n: int, bound: int, degenerate: bool):
    for p in range(bound + 1):
        yield from (enum_cells(n, p) if degenerate else enum_nondegenerate(n, p))


def mc_check(g: Cochain, bound: int, degenerate: bool = False, cells: Iterable[tuple] | None = None) -> dict:
    """Evaluate the MC residual on every cell through Cech degree ``bound``."""
    res = mc_residual(g)
    checked = 0
    for cell in (cells if cells is not None else _cells_up_to(g.n, bound, degenerate)):
        checked += 1
        v = res(cell)
        if v is not None:
            return {"ok": False, "checked": checked, "failure": list(cell)}
    return {"ok": True, "checked": checked, "failure": None}


# Scalar-valued cochains and the trace.

class ScalarCochain:
    """Lazily evaluated cochain with values in holomorphic forms."""

    def __init__(self, n: int, ring):
        self.n = n
        self.ring = ring
        self._cache: dict[tuple, HolForm] = {}

    def __call__(self, cell) -> HolForm:
        cell = tuple(cell)
        v = self._cache.get(cell)
        if v is None:
            for x in cell:
                if not 0 <= x <= self.n:
                    raise CochainError(f"vertex {x} outside 0..{self.n}")
            v = self._compute(cell)
            self._cache[cell] = v
        return v

    def _compute(self, cell) -> HolForm:
        raise NotImplementedError


class _Trace(ScalarCochain):
    def __init__(self, g: Cochain, f: Cochain):
        super().__init__(g.n, g.ring)
        g._check(f)
        self.g, self.f = g, f

    def _compute(self, alpha):
        s = len(alpha) - 1
        out: dict = {}
        for k in range(s + 1):
            for l in range(k, s + 1):
                fc = self.f(alpha[k:l + 1])
                if fc is None:
                    continue
                gc = self.g(alpha[l:] + alpha[:k + 1])
                if gc is None or gc.q + fc.q != 0:
                    continue
                t = supertrace_of_compose(gc, fc)
                neg = ((k + 1) * s + l - k) & 1
                for key, c in t.terms.items():
                    _addto(out, key, -c if neg else c)
        return HolForm._raw(self.ring, out)


def trace_map(g: Cochain, f: Cochain) -> ScalarCochain:
    """``Tr_g(f)_alpha = sum_{k<=l} (-1)^((k+1)s+l-k) str(g_{alpha(l..s,0..k)} o f_{alpha(k..l)})``."""
    return _Trace(g, f)


class _CechDelta(ScalarCochain):
    def __init__(self, c: ScalarCochain):
        super().__init__(c.n, c.ring)
        self.c = c

    def _compute(self, cell):
        out: dict = {}
        if len(cell) < 2:
            return HolForm._raw(self.ring, out)
        for j in range(len(cell)):
            v = self.c(cell[:j] + cell[j + 1:])
            for key, x in v.terms.items():
                _addto(out, key, -x if j & 1 else x)
        return HolForm._raw(self.ring, out)


def cech_delta(c: ScalarCochain) -> ScalarCochain:
    """Full alternating-face Cech differential on scalar cochains."""
    return _CechDelta(c)


class ScalarTable(ScalarCochain):
    def __init__(self, n, ring, table: Mapping[tuple, HolForm]):
        super().__init__(n, ring)
        self.table = {tuple(c): v for c, v in table.items()}

    def _compute(self, cell):
        return self.table.get(cell, HolForm.zero(self.ring))


def trace_identity_check(g: Cochain, f: Cochain, cells: Iterable[tuple]) -> dict:
    """Compare ``Tr_g(hat_delta f + D f + [g, f])`` with ``delta Tr_g(f)`` on the given cells."""
    lhs = trace_map(g, twisted_differential(g, f))
    rhs = cech_delta(trace_map(g, f))
    checked = 0
    nonzero = 0
    for cell in cells:
        a, b = lhs(cell), rhs(cell)
        checked += 1
        if a != b:
            return {"ok": False, "checked": checked, "nonzero": nonzero, "failure": list(cell),
                    "lhs": str(a), "rhs": str(b)}
        if a.terms:
            nonzero += 1
    return {"ok": True, "checked": checked, "nonzero": nonzero, "failure": None}


# Atiyah cochain and Chern data.

def atiyah(g: Cochain) -> Cochain:
    """``A = nabla(d + g)``; components of triple degree ``(1, p, 1-p)``."""
    return cochain_nabla(linear_combination([(1, DifferentialCochain(g.labeling)), (1, g)]))


class ChernEngine:
    """Shares the Atiyah cochain, its powers and their traces for one MC element."""

    def __init__(self, g: Cochain):
        self.g = g
        self.A = atiyah(g)
        self._powers: list[Cochain] = [UnitCochain(g.labeling), self.A]
        self._traces: dict[int, ScalarCochain] = {}

    def power(self, k: int) -> Cochain:
        while len(self._powers) <= k:
            self._powers.append(cochain_product(self.A, self._powers[-1]))
        return self._powers[k]

    def trace_power(self, k: int) -> ScalarCochain:
        t = self._traces.get(k)
        if t is None:
            t = self._traces[k] = trace_map(self.g, self.power(k))
        return t

    def chern_component(self, cell) -> dict[int, HolForm]:
        """``{u power: form}`` on an increasing cell of the ordinary simplex."""
        cell = tuple(cell)
        k = len(cell) - 1
        if k == 0:
            chi = self.g.labeling[cell[0]].euler_char()
            return {0: HolForm.function(chi, self.g.ring)} if chi else {}
        form = self.trace_power(k)(cell)
        if form.is_zero():
            return {}
        return {k: form.scale(Fraction(1, factorial(k)))}


def chern_simplex(g: Cochain, n: int | None = None, engine: ChernEngine | None = None):
    """Chern decoration on the ordinary n-simplex: Euler characteristics on vertices and
    ``Tr_g(A^k) u^k / k!`` on each increasing k-face."""
    from .dk import DKDecoration, UPoly

    n = g.n if n is None else n
    engine = engine or ChernEngine(g)
    values = {}
    for k in range(n + 1):
        for cell in increasing_cells(n, k):
            values[cell] = UPoly(g.ring, engine.chern_component(cell))
    return DKDecoration(n, g.ring, values)


# Naturality: pulling MC data back along simplicial operators and chart maps.

def simplicial_pullback(g: MCElement, phi: Sequence[int]) -> MCElement:
    """Precompose with the vertex map ``phi`` (a list of images)."""
    phi = tuple(phi)
    labeling = [g.labeling[i] for i in phi]
    bound = getattr(g, "bound", None)
    return MCElement(labeling, lambda cell: g(apply_map(phi, cell)), bound=bound)


def chart_pullback(g: MCElement, chart: ChartMap) -> MCElement:
    labeling = [e.pullback(chart) for e in g.labeling]

    def rule(cell):
        v = g(cell)
        if v is None:
            return None
        return v.pullback(chart, source=labeling[cell[-1]], target=labeling[cell[0]])

    return MCElement(labeling, rule, bound=getattr(g, "bound", None))


# Term-level expansion of Tr_g(A^k), for comparing against hand-written formulas.

def _splits(sub: tuple, k: int):
    """All ways to cut ``sub`` into ``k`` consecutive pieces sharing endpoints."""
    last = len(sub) - 1
    if k == 0:
        if last == 0:
            yield ()
        return
    for cuts in combinations_with_replacement(range(last + 1), k - 1):
        ends = (0,) + cuts + (last,)
        yield tuple(sub[ends[t]:ends[t + 1] + 1] for t in range(k))


def product_sign(pieces: Sequence[tuple]) -> int:
    """Sign produced by the product formula for ``A . A . ... . A`` split into ``pieces``."""
    degs = [len(p) - 1 for p in pieces]
    total = 0
    for t, p in enumerate(degs):
        total += p * sum(degs[t + 1:])
    return -1 if total & 1 else 1


def trace_power_terms(cell: Sequence, k: int) -> list[tuple[int, tuple, tuple, int]]:
    """Terms of ``Tr_g(A^k)`` on ``cell`` as ``(trace sign, wrapped g cell, A cells, product sign)``."""
    alpha = tuple(cell)
    s = len(alpha) - 1
    terms = []
    for a in range(s + 1):
        for b in range(a, s + 1):
            tsign = -1 if ((a + 1) * s + b - a) & 1 else 1
            wrap = alpha[b:] + alpha[:a + 1]
            for pieces in _splits(alpha[a:b + 1], k):
                terms.append((tsign, wrap, pieces, product_sign(pieces)))
    return terms


def evaluate_terms(engine: ChernEngine, terms, with_product_sign: bool = True) -> HolForm:
    """Sum ``sign * str(g_wrap o A_1 o ... o A_k)`` over expanded terms."""
    g, A = engine.g, engine.A
    out = HolForm.zero(g.ring)
    for tsign, wrap, pieces, psign in terms:
        gc = g(wrap)
        if gc is None:
            continue
        acc = None if pieces else g.labeling[wrap[-1]].identity()
        for piece in reversed(pieces):
            a = A(piece)
            if a is None:
                acc = None
                break
            acc = a if acc is None else a.compose(acc)
        if acc is None or acc.is_zero():
            continue
        sign = tsign * (psign if with_product_sign else 1)
        out = out + supertrace_of_compose(gc, acc).scale(sign)
    return out


def cells_of(n: int, bound: int, degenerate: bool = False):
    return list(_cells_up_to(n, bound, degenerate))
