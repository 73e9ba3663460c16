"""Simplices of the totalization over a cover and their coherence checks.

A k-simplex assigns to each level ``l``, each intersection tuple ``tau`` of
length ``l + 1`` and each supported path in the ``(k+1) x (l+1)`` grid a
payload over ``U_tau``: a complex for one-vertex paths and a map for longer
ones (IVB flavor), or a u-polynomial of forms (omega flavor).

Coherence says that a payload whose path avoids row ``j`` of the level
equals the restriction of the level ``l - 1`` payload on the path with row
``j`` removed, taken over ``tau`` with entry ``j`` removed.  Entries may be
stored redundantly; missing entries are derived by that rule through the
smallest missing row.
"""

from __future__ import annotations

import random
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .cech import CoverModel, IVBVertex, TwistingCochain, _key
from .cochains import MCElement, mc_check
from .dk import DKDecoration, UPoly, dk_validate
from .forms import ChartMap, HolForm, LaurentPoly
from .perf import HomElement, PerfObject, quasi_iso_report
from .simplicial import enum_grid_paths, is_supported

GridPath = tuple  # ((alpha, beta), ...)


class TotError(ValueError):
    pass


def path_betas(path: GridPath) -> set[int]:
    return {b for _, b in path}


def reduce_path(path: GridPath, j: int) -> GridPath:
    """Remove grid row ``j`` from a path that avoids it."""
    if j in path_betas(path):
        raise TotError(f"path {path} uses row {j}")
    return tuple((a, b - (b > j)) for a, b in path)


def raise_path(path: GridPath, j: int) -> GridPath:
    """Apply the coface ``delta_j`` to the row indices."""
    return tuple((a, b + (b >= j)) for a, b in path)


def _is_degenerate(path: GridPath) -> bool:
    return any(path[t] == path[t + 1] for t in range(len(path) - 1))


def _payload_equal(a, b) -> bool:
    if a is None or b is None:
        other = b if a is None else a
        if other is None:
            return True
        if isinstance(other, HomElement):
            return other.is_zero()
        if isinstance(other, UPoly):
            return other.is_zero()
        return False
    if isinstance(a, HomElement) and isinstance(b, HomElement):
        return a.terms == b.terms
    return a == b


class TotSimplex:
    """Sparse k-simplex data keyed by ``(level, path, tau)``."""

    def __init__(self, cover: CoverModel, k: int, flavor: str,
                 entries: Mapping[tuple, object], max_level: int, max_len: int | None = None):
        if flavor not in ("ivb", "omega"):
            raise TotError(f"unknown flavor {flavor!r}")
        self.cover = cover
        self.k = k
        self.flavor = flavor
        self.max_level = max_level
        self.max_len = max_len
        self.entries = {}
        for (l, path, tau), payload in entries.items():
            key = (int(l), tuple(tuple(p) for p in path), tuple(tau))
            self.entries[key] = payload

    def restrict(self, payload, home: Iterable[int], tau: Iterable[int]):
        if payload is None:
            return None
        home, t = _key(home), _key(tau)
        if home == t:
            return payload
        phi = self.cover.restriction(home, t)
        if isinstance(payload, HomElement):
            return payload.pullback(phi, source=payload.source.pullback(phi), target=payload.target.pullback(phi))
        return payload.pullback(phi)

    def value(self, l: int, path: GridPath, tau: Sequence[int]):
        path, tau = tuple(tuple(p) for p in path), tuple(tau)
        key = (l, path, tau)
        if key in self.entries:
            return self.entries[key]
        if self.flavor == "ivb" and len(path) > 1 and _is_degenerate(path):
            if len(path) == 2:
                e = self.value(l, path[:1], tau)
                return e.identity() if e is not None else None
            return None
        missing = [j for j in range(l + 1) if j not in path_betas(path)]
        if not missing or l == 0:
            return None
        j = missing[0]
        lower_tau = tau[:j] + tau[j + 1:]
        return self.restrict(self.value(l - 1, reduce_path(path, j), lower_tau), lower_tau, tau)

    def vertex(self, alpha: int) -> TotSimplex:
        """Restriction to vertex ``alpha`` of the k-simplex: paths that stay in grid column ``alpha``."""
        entries = {(l, tuple((0, b) for _, b in path), tau): v for (l, path, tau), v in self.entries.items()
                   if all(a == alpha for a, _ in path)}
        return TotSimplex(self.cover, 0, self.flavor, entries, self.max_level, self.max_len)


def validate_coherence(t: TotSimplex, limit: int = 20) -> dict:
    """Check every stored entry against the restriction of the lower level, for every avoided row."""
    violations = []
    checked = 0
    for (l, path, tau) in sorted(t.entries):
        payload = t.entries[(l, path, tau)]
        if len(tau) != l + 1:
            violations.append({"level": l, "row": None, "path": [list(p) for p in path], "tau": list(tau),
                               "reason": "tuple length does not match the level"})
            continue
        if any(not (0 <= a <= t.k and 0 <= b <= l) for a, b in path) or not is_supported(path):
            violations.append({"level": l, "row": None, "path": [list(p) for p in path], "tau": list(tau),
                               "reason": "path is not supported in the grid"})
            continue
        for j in range(l + 1):
            if j in path_betas(path):
                continue
            checked += 1
            lower_tau = tau[:j] + tau[j + 1:]
            expected = t.restrict(t.value(l - 1, reduce_path(path, j), lower_tau), lower_tau, tau)
            if not _payload_equal(expected, payload):
                violations.append({"level": l, "row": j, "path": [list(p) for p in path], "tau": list(tau),
                                   "reason": "differs from the restricted lower-level entry"})
    return {"ok": not violations, "checked": checked, "violations": violations[:limit],
            "violation_count": len(violations), "first": violations[0] if violations else None}


def coherence_relation(t: TotSimplex, l: int, path: GridPath, tau: Sequence[int], j: int) -> bool:
    """One instance of the coherence relation: entry at ``(l, path, tau)`` versus row ``j`` removed."""
    tau = tuple(tau)
    lower_tau = tau[:j] + tau[j + 1:]
    lhs = t.value(l, path, tau)
    rhs = t.restrict(t.value(l - 1, reduce_path(path, j), lower_tau), lower_tau, tau)
    return _payload_equal(lhs, rhs)


def maximal_paths(k: int, l: int) -> list[GridPath]:
    return list(enum_grid_paths(k, l, "monotone", k + l + 1))


def local_mc(t: TotSimplex, l: int, tau: Sequence[int], path: GridPath, bound: int | None = None) -> MCElement:
    """MC element on the extended simplex spanned by a maximal path over ``U_tau``."""
    tau = tuple(tau)
    labeling = [t.value(l, (p,), tau) for p in path]
    if any(e is None for e in labeling):
        raise TotError(f"missing complex on a vertex of {path} over {tau}")

    def rule(cell):
        return t.value(l, tuple(path[c] for c in cell), tau)

    return MCElement(labeling, rule, bound=bound)


def validate_ivb_simplex(t: TotSimplex, bound: int = 3, levels: int | None = None) -> dict:
    """Coherence, MC equation on every maximal path and intersection, and edge homotopy witnesses."""
    if t.flavor != "ivb":
        raise TotError("IVB validation needs IVB-flavored data")
    levels = t.max_level if levels is None else levels
    if t.max_len is not None:
        bound = min(bound, t.max_len - 1)
    report = {"coherence": validate_coherence(t), "mc_failures": [], "edge_failures": [],
              "mc_bound": bound, "mc_checked": 0, "edges_checked": 0}
    for l in range(levels + 1):
        for tau in t.cover.tuples(l + 1):
            for path in maximal_paths(t.k, l):
                res = mc_check(local_mc(t, l, tau, path), bound)
                report["mc_checked"] += res["checked"]
                if not res["ok"]:
                    report["mc_failures"].append({"level": l, "tau": list(tau), "path": [list(p) for p in path],
                                                  "cell": res["failure"]})
            points = [(a, b) for a in range(t.k + 1) for b in range(l + 1)]
            for u, v in combinations(points, 2):
                if not (u[0] <= v[0] and u[1] <= v[1]):
                    continue
                report["edges_checked"] += 1
                g_uv, g_vu = t.value(l, (u, v), tau), t.value(l, (v, u), tau)
                h_uvu, h_vuv = t.value(l, (u, v, u), tau), t.value(l, (v, u, v), tau)
                eu, ev = t.value(l, (u,), tau), t.value(l, (v,), tau)
                g_uv = g_uv if g_uv is not None else HomElement.zero(ev, eu)
                g_vu = g_vu if g_vu is not None else HomElement.zero(eu, ev)
                h_uvu = h_uvu if h_uvu is not None else HomElement.zero(eu, eu, -1)
                h_vuv = h_vuv if h_vuv is not None else HomElement.zero(ev, ev, -1)
                res = quasi_iso_report(g_uv.retarget(ev, eu), g_vu.retarget(eu, ev),
                                       h_uvu.retarget(eu, eu), h_vuv.retarget(ev, ev))
                if not res["ok"]:
                    report["edge_failures"].append({"level": l, "tau": list(tau), "edge": [list(u), list(v)],
                                                    "problems": res["problems"]})
    report["ok"] = report["coherence"]["ok"] and not report["mc_failures"] and not report["edge_failures"]
    return report


# Builders.

def tot_from_rule(cover: CoverModel, k: int, flavor: str, rule: Callable[[int, GridPath, tuple], object],
                  max_level: int, max_len: int, full: bool = False) -> TotSimplex:
    """Evaluate ``rule`` on supported paths; ``full`` also stores the entries determined by lower levels."""
    entries = {}
    for l in range(max_level + 1):
        for tau in cover.tuples(l + 1):
            for length in range(1, max_len + 1):
                for path in enum_grid_paths(k, l, "supported", length):
                    if not full and path_betas(path) != set(range(l + 1)):
                        continue
                    entries[(l, path, tau)] = rule(l, path, tau)
    return TotSimplex(cover, k, flavor, entries, max_level, max_len)


def tot_from_vertex(v: IVBVertex | TwistingCochain, max_level: int, max_len: int = 3,
                    full: bool = False) -> TotSimplex:
    """k = 0 data of a vertex: paths are ``[0 .. 0; beta]``."""
    if isinstance(v, TwistingCochain):
        from .cech import include_twisting
        v = include_twisting(v)

    def rule(l, path, tau):
        beta = tuple(b for _, b in path)
        if len(beta) == 1:
            return v.bundle(tau[beta[0]], tau)
        return v.component(beta, tau)

    return tot_from_rule(v.cover, 0, "ivb", rule, max_level, max_len, full)


def doubled_cover(cover: CoverModel, k: int) -> CoverModel:
    """Cover with opens ``(alpha, i)`` for ``alpha = 0..k``, each a copy of ``U_i``; index ``alpha * N + i``."""
    n = len(cover.opens)
    total = (k + 1) * n
    rings, empty = {}, []
    for size in range(1, total + 1):
        for s in combinations(range(total), size):
            proj = frozenset(x % n for x in s)
            if cover.is_empty(proj):
                continue
            if proj in cover.rings:
                rings[frozenset(s)] = cover.rings[proj]
    for e in cover.empty:
        for lift in _lifts(sorted(e), k, n):
            empty.append(lift)
    restrictions = {}
    for t in rings:
        for x in t:
            s = t - {x}
            if s and s in rings:
                ps, pt = frozenset(y % n for y in s), frozenset(y % n for y in t)
                phi = cover.restriction(ps, pt) if ps != pt else ChartMap.identity(rings[s])
                restrictions[(s, t)] = phi
    names = [f"{cover.opens[i]}@{a}" for a in range(k + 1) for i in range(n)]
    return CoverModel(names, rings, restrictions, empty=empty, name=f"{cover.name}x{k + 1}", tags=())


def _lifts(opens: list[int], k: int, n: int):
    if not opens:
        yield frozenset()
        return
    for rest in _lifts(opens[1:], k, n):
        for a in range(k + 1):
            yield rest | {a * n + opens[0]}


def doubled_transitions(cover: CoverModel, core_rank: int, transitions: Mapping[tuple, list], k: int) -> dict:
    """Core transitions on the doubled cover: ``t_ij`` between different opens, identity on copies."""
    n = len(cover.opens)
    out = {}
    ident = [[1 if r == c else 0 for c in range(core_rank)] for r in range(core_rank)]
    for x in range(n * (k + 1)):
        for y in range(n * (k + 1)):
            if x == y or cover.is_empty({x % n, y % n}):
                continue
            i, j = x % n, y % n
            out[(x, y)] = ident if i == j else transitions[(i, j)]
    return out


def tot_from_doubled(cover: CoverModel, k: int, big: TwistingCochain, max_level: int, max_len: int = 3,
                     full: bool = False) -> TotSimplex:
    """Read a k-simplex off a twisting cochain on the doubled cover."""
    n = len(cover.opens)

    def rule(l, path, tau):
        labels = tuple(a * n + tau[b] for a, b in path)
        home = frozenset(tau[b] for _, b in path)
        if len(labels) == 1:
            e = big.bundles[labels[0]]
            return _restrict_any(cover, e, home, tau)
        h = big.component(labels)
        if h is None:
            return None
        return _restrict_any(cover, h, home, tau)

    return tot_from_rule(cover, k, "ivb", rule, max_level, max_len, full)


def _restrict_any(cover: CoverModel, payload, home, tau):
    home, t = _key(home), _key(tau)
    if home == t:
        return payload
    phi = cover.restriction(home, t)
    if isinstance(payload, HomElement):
        return payload.pullback(phi, source=payload.source.pullback(phi), target=payload.target.pullback(phi))
    return payload.pullback(phi)


def random_tot_simplex(base: str, k: int, seed, max_level: int = 1, max_len: int = 3, full: bool = True,
                       bound: int = 3) -> TotSimplex:
    """Random k-simplex over the projective line (``"p1"``) or the interval cover (``"interval"``)."""
    from .corpus import RandomTwisting, interval_core, p1_core

    cover, rank, trans, _ = (p1_core if base == "p1" else interval_core)(seed)
    big_cover = doubled_cover(cover, k)
    big = RandomTwisting(big_cover, rank, doubled_transitions(cover, rank, trans, k), f"tot:{seed}",
                         bound=bound).a
    return tot_from_doubled(cover, k, big, max_level, max_len, full)


# Omega flavor.

def omega_vertex(c, max_level: int | None = None) -> TotSimplex:
    """Vertex of the totalization of forms determined by a Chern cocycle: faces carry restrictions."""
    max_level = c.max_level if max_level is None else max_level
    entries = {}
    for l in range(max_level + 1):
        for tau in c.cover.tuples(l + 1):
            for size in range(1, l + 2):
                for beta in combinations(range(l + 1), size):
                    path = tuple((0, b) for b in beta)
                    sub = tuple(tau[b] for b in beta)
                    entries[(l, path, tau)] = c.restricted(sub, tau)
    return TotSimplex(c.cover, 0, "omega", entries, max_level)


def omega_level_dk(t: TotSimplex) -> dict:
    """Per level and intersection, the decoration of the l-simplex is a valid Dold-Kan decoration."""
    problems = []
    for l in range(t.max_level + 1):
        for tau in t.cover.tuples(l + 1):
            ring = t.cover.ring(tau)
            values = {}
            for size in range(1, l + 2):
                for beta in combinations(range(l + 1), size):
                    v = t.value(l, tuple((0, b) for b in beta), tau)
                    if v is not None:
                        values[beta] = v
            res = dk_validate(DKDecoration(l, ring, values))
            if not res["ok"]:
                problems.append({"level": l, "tau": list(tau), "problems": res["problems"][:3]})
    return {"ok": not problems, "problems": problems}


def omega_to_cocycle(t: TotSimplex):
    """Top-cell values as a Chern cocycle."""
    from .cech import ChernCocycle

    values = {}
    for l in range(t.max_level + 1):
        for tau in t.cover.tuples(l + 1):
            v = t.value(l, tuple((0, b) for b in range(l + 1)), tau)
            if v is not None:
                values[tau] = v
    return ChernCocycle(t.cover, values, t.max_level)


# Violation injection.

def _perturbation(rng: random.Random, payload, cover: CoverModel, tau):
    ring = cover.ring(tau)
    bump = LaurentPoly.monomial(ring, ring.zero_exps(), rng.choice((1, -1, 2, 3)))
    if isinstance(payload, PerfObject):
        gens = list(range(ring.nvars))
        form = HolForm.from_parts(bump, [ring.coords[rng.choice(gens)]])
        i = rng.randrange(payload.size)
        extra = HomElement.from_entries(payload, payload, 0, 1, {(i, i): form})
        return payload.with_connection(payload.connection + extra.retarget(payload, payload))
    if isinstance(payload, HomElement):
        cands = [(i, j) for i in range(payload.target.size) for j in range(payload.source.size)
                 if payload.target.degrees[i] == payload.source.degrees[j] + payload.q]
        if not cands:
            return None
        i, j = rng.choice(cands)
        extra = HomElement.from_entries(payload.source, payload.target, payload.q, payload.k,
                                        {(i, j): HolForm.function(bump)} if payload.k == 0 else {})
        return payload + extra
    if isinstance(payload, UPoly):
        return payload + UPoly(ring, {0: HolForm.function(bump)})
    return None


def inject_violation(t: TotSimplex, rng: random.Random) -> tuple[TotSimplex, tuple] | None:
    """Copy of ``t`` with one redundant entry (a path avoiding some row) perturbed."""
    keys = [key for key in sorted(t.entries)
            if key[0] >= 1 and path_betas(key[1]) != set(range(key[0] + 1))]
    rng.shuffle(keys)
    for key in keys:
        payload = t.value(*key)
        if payload is None:
            if t.flavor != "ivb" or len(key[1]) == 1:
                continue
            a, b = key[1][0], key[1][-1]
            src, tgt = t.value(key[0], (b,), key[2]), t.value(key[0], (a,), key[2])
            payload = HomElement.zero(src, tgt, 2 - len(key[1]), 0)
        bad = _perturbation(rng, payload, t.cover, key[2])
        if bad is None:
            continue
        entries = dict(t.entries)
        entries[key] = bad
        return TotSimplex(t.cover, t.k, t.flavor, entries, t.max_level, t.max_len), key
    return None
