"""Covers, twisting cochains, infinity-vector-bundle vertices over a cover and
their Chern cocycles.

Intersections are addressed by tuples of open indices; the ring of a tuple is
the ring of its underlying set, so ``(0, 0, 1)`` lives over ``U_01``.
Restrictions between intersections are chart maps, composed along chains of
face inclusions when not given directly.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from .cochains import ChernEngine, MCElement
from .dk import UPoly
from .forms import ChartMap, FormError, HolForm, Ring
from .perf import HomElement, PerfObject
from .simplicial import is_degenerate


class CoverError(ValueError):
    pass


def _key(opens: Iterable[int]) -> frozenset:
    return frozenset(opens)


class CoverModel:
    """Finite cover with a coordinate ring per nonempty intersection.

    ``rings`` is keyed by sets of open indices.  ``restrictions`` maps
    ``(S, T)`` with ``S`` a subset of ``T`` to the chart map pulling functions on
    ``U_S`` back to ``U_T``; only face inclusions (``|T| = |S| + 1``) are needed.
    """

    def __init__(self, opens: Sequence[str], rings: Mapping[frozenset, Ring],
                 restrictions: Mapping[tuple[frozenset, frozenset], ChartMap],
                 empty: Iterable[Iterable[int]] = (), name: str = "", tags: Iterable[str] = ()):
        self.opens = list(opens)
        self.name = name
        self.tags = frozenset(tags)
        self.rings = {_key(k): r for k, r in rings.items()}
        self.empty = {_key(e) for e in empty}
        for k in self.rings:
            if not k or max(k) >= len(self.opens) or min(k) < 0:
                raise CoverError(f"ring key {sorted(k)} does not name opens of this cover")
        for i in range(len(self.opens)):
            if _key([i]) not in self.rings:
                raise CoverError(f"open {self.opens[i]} has no ring")
        self._direct = {}
        for (s, t), phi in restrictions.items():
            s, t = _key(s), _key(t)
            if not s < t:
                raise CoverError(f"restriction {sorted(s)} -> {sorted(t)} is not a proper inclusion")
            for part in (s, t):
                if part not in self.rings:
                    raise CoverError(f"undefined intersection ring for {sorted(part)}")
            if phi.source.coords != self.rings[s].coords or phi.target.coords != self.rings[t].coords:
                raise CoverError(f"restriction {sorted(s)} -> {sorted(t)} has the wrong coordinates")
            self._direct[(s, t)] = phi
        self._cache: dict = {}
        self._bundle_cache: dict = {}

    def is_empty(self, opens: Iterable[int]) -> bool:
        k = _key(opens)
        return any(e <= k for e in self.empty)

    def ring(self, opens: Iterable[int]) -> Ring:
        k = _key(opens)
        try:
            return self.rings[k]
        except KeyError:
            if self.is_empty(k):
                raise CoverError(f"intersection {sorted(k)} is empty") from None
            raise CoverError(f"undefined intersection ring for {sorted(k)}") from None

    def restriction(self, s: Iterable[int], t: Iterable[int]) -> ChartMap:
        s, t = _key(s), _key(t)
        hit = self._cache.get((s, t))
        if hit is not None:
            return hit
        if not s <= t:
            raise CoverError(f"{sorted(s)} is not contained in {sorted(t)}")
        if s == t:
            phi = ChartMap.identity(self.ring(s))
        elif (s, t) in self._direct:
            phi = self._direct[(s, t)]
        else:
            nxt = s | {min(t - s)}
            phi = self.restriction(s, nxt).then(self.restriction(nxt, t))
        self._cache[(s, t)] = phi
        return phi

    def check_functoriality(self) -> dict:
        """Every route between two intersections through face inclusions agrees."""
        problems = []
        keys = sorted(self.rings, key=lambda k: (len(k), sorted(k)))
        for s in keys:
            for t in keys:
                if not s < t:
                    continue
                target = self.restriction(s, t)
                for mid in keys:
                    if s < mid < t:
                        via = self.restriction(s, mid).then(self.restriction(mid, t))
                        if via != target:
                            problems.append(f"{sorted(s)} -> {sorted(mid)} -> {sorted(t)}")
        return {"ok": not problems, "problems": problems}

    def restrict_bundle(self, e: PerfObject, home: Iterable[int], t: Iterable[int]) -> PerfObject:
        home, t = _key(home), _key(t)
        if home == t:
            return e
        return e.pullback(self.restriction(home, t))

    def tuples(self, length: int) -> list[tuple[int, ...]]:
        """Index tuples of the given length over nonempty intersections."""
        out = []
        for tup in product(range(len(self.opens)), repeat=length):
            if not self.is_empty(tup) and _key(tup) in self.rings:
                out.append(tup)
        return out


def build_nerve(cover: CoverModel, max_level: int) -> dict:
    """Index tuples per level, grouped by the positions where neighbours coincide."""
    levels = {}
    for l in range(max_level + 1):
        tuples = cover.tuples(l + 1)
        classes: dict = {}
        for tup in tuples:
            pattern = tuple(j for j in range(l) if tup[j] == tup[j + 1])
            classes.setdefault(pattern, []).append(tup)
        by_count = Counter(len(p) for p in classes for _ in classes[p])
        levels[l] = {"tuples": tuples, "classes": classes, "by_repeat_count": dict(sorted(by_count.items()))}
    return levels


class TwistingCochain:
    """Local complexes on each open plus components on index tuples.

    ``components`` holds ``a_{i0..iq}`` (hom degree ``1-q``) for nondegenerate
    tuples with ``q >= 1``, each over the ring of its own intersection and
    mapping ``E_{iq}`` to ``E_{i0}``.  Missing tuples are zero; degenerate tuples
    follow the identity/zero convention.
    """

    def __init__(self, cover: CoverModel, bundles: Sequence[PerfObject],
                 components: Mapping[tuple, HomElement]):
        self.cover = cover
        self.bundles = list(bundles)
        if len(self.bundles) != len(cover.opens):
            raise CoverError("one local complex per open is required")
        for i, e in enumerate(self.bundles):
            if e.ring.coords != cover.ring([i]).coords:
                raise CoverError(f"complex on {cover.opens[i]} is over the wrong ring")
        self.components = {}
        for tup, h in components.items():
            tup = tuple(tup)
            if len(tup) < 2 or is_degenerate(tup):
                raise CoverError(f"component on {tup}: only nondegenerate tuples of length >= 2 are stored")
            q = len(tup) - 1
            if h.k != 0 or (h.q != 1 - q and h.terms):
                raise CoverError(f"component on {tup} has hom degree {h.q}, expected {1 - q}")
            t = set(tup)
            if h.ring.coords != cover.ring(t).coords:
                raise CoverError(f"component on {tup} is over the wrong ring")
            src = self.bundle(tup[-1], t)
            tgt = self.bundle(tup[0], t)
            if not (h.source.same_shape(src) and h.target.same_shape(tgt)):
                raise CoverError(f"component on {tup} does not map E_{tup[-1]} to E_{tup[0]}")
            self.components[tup] = h.retarget(src, tgt)

    def bundle(self, i: int, over: Iterable[int]) -> PerfObject:
        return self.cover.restrict_bundle(self.bundles[i], [i], over)

    def component(self, tup: Sequence[int], over: Iterable[int] | None = None) -> HomElement | None:
        """``a_tup`` restricted to ``U_over`` (default: its own intersection)."""
        tup = tuple(tup)
        t = _key(over) if over is not None else _key(tup)
        if not _key(tup) <= t:
            raise CoverError(f"{tup} does not cover {sorted(t)}")
        if len(tup) == 1:
            return self.bundle(tup[0], t).d
        if is_degenerate(tup):
            return self.bundle(tup[0], t).identity() if len(tup) == 2 else None
        h = self.components.get(tup)
        if h is None:
            return None
        home = _key(tup)
        if home == t:
            return h
        phi = self.cover.restriction(home, t)
        return h.pullback(phi, source=self.bundle(tup[-1], t), target=self.bundle(tup[0], t))

    def check(self, bound: int) -> dict:
        """Twisting-cochain equation on every tuple through length ``bound + 1``."""
        checked = 0
        for length in range(2, bound + 2):
            q = length - 1
            for tup in self.cover.tuples(length):
                checked += 1
                t = _key(tup)
                total = None
                for j in range(1, q):
                    v = self.component(tup[:j] + tup[j + 1:], t)
                    if v is not None:
                        v = v if j % 2 == 0 else -v
                        total = v if total is None else total + v
                for j in range(q + 1):
                    left = self.component(tup[:j + 1], t)
                    right = self.component(tup[j:], t)
                    if left is None or right is None:
                        continue
                    v = left.compose(right)
                    if ((1 - j) * (q - j)) & 1:
                        v = -v
                    total = v if total is None else total + v
                if total is not None and not total.is_zero():
                    return {"ok": False, "checked": checked, "failure": list(tup)}
        return {"ok": True, "checked": checked, "failure": None}


class IVBVertex:
    """Vertex data over a cover: local complexes and components ``g_{beta; tau}``.

    ``tau`` is an index tuple ``(i0..il)`` and ``beta`` a nondegenerate cell of
    the extended l-simplex; the component maps ``E_{tau[beta[-1]]}`` to
    ``E_{tau[beta[0]]}`` over ``U_tau``.  Either ``rule(beta, tau)`` is given, or a
    table holding components whose ``beta`` uses every index ``0..l``; other
    components are restrictions of lower-level ones.
    """

    def __init__(self, cover: CoverModel, bundles: Sequence[PerfObject],
                 rule: Callable[[tuple, tuple], HomElement | None] | None = None,
                 table: Mapping[tuple[tuple, tuple], HomElement] | None = None,
                 bound: int | None = None):
        if (rule is None) == (table is None):
            raise CoverError("give exactly one of rule or table")
        self.cover = cover
        self.bundles = list(bundles)
        self.rule = rule
        self.table = {(tuple(b), tuple(t)): h for (b, t), h in (table or {}).items()}
        self.bound = bound
        self._local: dict = {}

    def bundle(self, i: int, over: Iterable[int]) -> PerfObject:
        return self.cover.restrict_bundle(self.bundles[i], [i], over)

    def component(self, beta: Sequence[int], tau: Sequence[int]) -> HomElement | None:
        beta, tau = tuple(beta), tuple(tau)
        l = len(tau) - 1
        t = _key(tau)
        if is_degenerate(beta):
            return self.bundle(tau[beta[0]], t).identity() if len(beta) == 2 else None
        if self.rule is not None:
            return self.rule(beta, tau)
        missing = [j for j in range(l + 1) if j not in beta]
        if not missing:
            h = self.table.get((beta, tau))
            if h is None:
                return None
            return h.retarget(self.bundle(tau[beta[-1]], t), self.bundle(tau[beta[0]], t))
        j = missing[0]
        lower_beta = tuple(b - (b > j) for b in beta)
        lower_tau = tau[:j] + tau[j + 1:]
        h = self.component(lower_beta, lower_tau)
        if h is None:
            return None
        low = _key(lower_tau)
        if low == t:
            return h
        phi = self.cover.restriction(low, t)
        return h.pullback(phi, source=self.bundle(tau[beta[-1]], t), target=self.bundle(tau[beta[0]], t))

    def local_mc(self, tau: Sequence[int]) -> MCElement:
        """The MC element on the extended l-simplex over ``U_tau``."""
        tau = tuple(tau)
        hit = self._local.get(tau)
        if hit is None:
            t = _key(tau)
            labeling = [self.bundle(i, t) for i in tau]
            hit = MCElement(labeling, lambda beta, tau=tau: self.component(beta, tau), bound=self.bound)
            self._local[tau] = hit
        return hit

    def beta_coverage_report(self) -> dict:
        """Table entries whose beta misses an index must equal the restricted lower component."""
        problems = []
        for (beta, tau), h in self.table.items():
            l = len(tau) - 1
            missing = [j for j in range(l + 1) if j not in beta]
            if not missing:
                continue
            saved = self.table.pop((beta, tau))
            try:
                expected = self.component(beta, tau)
            finally:
                self.table[(beta, tau)] = saved
            if not _hom_equal(expected, h):
                problems.append({"beta": list(beta), "tau": list(tau)})
        return {"ok": not problems, "problems": problems}


def _hom_equal(a: HomElement | None, b: HomElement | None) -> bool:
    ta = a.terms if a is not None else {}
    tb = b.terms if b is not None else {}
    return ta == tb


def include_twisting(a: TwistingCochain, bound: int | None = None) -> IVBVertex:
    """``g_{beta; tau} = a_{tau[beta0], ..., tau[betaq]}`` restricted to ``U_tau``."""

    def rule(beta, tau):
        return a.component(tuple(tau[b] for b in beta), tau)

    return IVBVertex(a.cover, a.bundles, rule=rule, bound=bound)


def extract_twisting(v: IVBVertex, bound: int) -> TwistingCochain:
    """``a_{i0..ij} = g_{(0, 1, ..., j); (i0..ij)}`` on nondegenerate tuples."""
    comps = {}
    for length in range(2, bound + 2):
        for tup in v.cover.tuples(length):
            if is_degenerate(tup):
                continue
            h = v.component(tuple(range(length)), tup)
            if h is not None and not h.is_zero():
                comps[tup] = h
    return TwistingCochain(v.cover, v.bundles, comps)


def twisting_equal(a: TwistingCochain, b: TwistingCochain, bound: int) -> bool:
    if any(x != y for x, y in zip(a.bundles, b.bundles)):
        return False
    for length in range(2, bound + 2):
        for tup in a.cover.tuples(length):
            if not _hom_equal(a.component(tup), b.component(tup)):
                return False
    return True


class ChernCocycle:
    """Values ``c_tau`` in ``Omega[u]`` over each intersection tuple, levels ``0..max_level``."""

    def __init__(self, cover: CoverModel, values: Mapping[tuple, UPoly], max_level: int):
        self.cover = cover
        self.values = {tuple(t): v for t, v in values.items()}
        self.max_level = max_level

    def __getitem__(self, tau) -> UPoly:
        tau = tuple(tau)
        v = self.values.get(tau)
        return v if v is not None else UPoly(self.cover.ring(tau))

    def restricted(self, tau: Sequence[int], over: Iterable[int]) -> UPoly:
        v = self[tau]
        home, t = _key(tau), _key(over)
        if home == t:
            return v
        return v.pullback(self.cover.restriction(home, t))

    def __add__(self, other: ChernCocycle) -> ChernCocycle:
        keys = set(self.values) | set(other.values)
        return ChernCocycle(self.cover, {k: self[k] + other[k] for k in keys},
                            min(self.max_level, other.max_level))

    def to_plain(self) -> dict:
        return {",".join(map(str, t)): str(v) for t, v in sorted(self.values.items()) if not v.is_zero()}


def sheaf_chern(v: IVBVertex, max_level: int) -> ChernCocycle:
    """Euler characteristics on single opens and ``Tr(A^l) u^l / l!`` on l-fold intersections."""
    values = {}
    for l in range(max_level + 1):
        for tau in v.cover.tuples(l + 1):
            if l == 0:
                values[tau] = UPoly.constant(v.cover.ring(tau), v.bundles[tau[0]].euler_char())
                continue
            engine = ChernEngine(v.local_mc(tau))
            comp = engine.chern_component(tuple(range(l + 1)))
            values[tau] = UPoly(v.cover.ring(tau), comp)
    return ChernCocycle(v.cover, values, max_level)


def cocycle_check(c: ChernCocycle) -> dict:
    """Alternating sums of restrictions vanish on every tuple through ``max_level``."""
    problems = []
    checked = 0
    for length in range(2, c.max_level + 2):
        for tau in c.cover.tuples(length):
            checked += 1
            acc = UPoly(c.cover.ring(tau))
            for j in range(length):
                face = tau[:j] + tau[j + 1:]
                term = c.restricted(face, tau)
                acc = acc + (term if j % 2 == 0 else -term)
            if not acc.is_zero():
                problems.append({"tuple": list(tau), "sum": str(acc)})
    return {"ok": not problems, "checked": checked, "problems": problems}


def cech_coboundary(cover: CoverModel, cochain: Mapping[tuple, UPoly], level: int) -> dict[tuple, UPoly]:
    """Full Cech coboundary of a cochain given on tuples of length ``level + 1``."""
    out = {}
    for tau in cover.tuples(level + 2):
        acc = UPoly(cover.ring(tau))
        for j in range(level + 2):
            face = tau[:j] + tau[j + 1:]
            v = cochain.get(face)
            if v is None:
                continue
            home = _key(face)
            if home != _key(tau):
                v = v.pullback(cover.restriction(home, tau))
            acc = acc + (v if j % 2 == 0 else -v)
        out[tau] = acc
    return out


def euler_char(v: IVBVertex | TwistingCochain) -> list[int]:
    return [e.euler_char() for e in v.bundles]


def p1_class_coefficient(c: ChernCocycle) -> Fraction:
    """Coefficient of ``z^-1 dz u`` on ``U_01`` of the two-chart projective line."""
    if "p1" not in c.cover.tags:
        raise CoverError("class coefficient is defined only on the built-in projective line model")
    form = c[(0, 1)].coefficient(1)
    try:
        return Fraction(form.coefficient(["z"], (-1,)))
    except FormError as exc:
        raise CoverError(str(exc)) from exc


__all__ = ["CoverModel", "CoverError", "TwistingCochain", "IVBVertex", "ChernCocycle",
           "build_nerve", "include_twisting", "extract_twisting", "twisting_equal", "sheaf_chern",
           "cocycle_check", "cech_coboundary", "euler_char", "p1_class_coefficient", "HolForm"]
