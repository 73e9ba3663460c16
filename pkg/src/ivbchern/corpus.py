"""Seeded random Maurer-Cartan elements on the extended n-simplex.

Every vertex complex is a conjugated copy ``E_i = phi_i (F + C_i) phi_i^-1`` of
a common core ``F`` (free, concentrated in degree 0, zero differential) plus a
contractible part ``C_i`` made of cones on the identity.  This gives explicit
maps ``a_i: E_i -> F``, ``b_i: F -> E_i`` with ``a_i b_i = id`` and a homotopy
``H_i`` with ``D(H_i) = id - b_i a_i`` and ``a_i H_i = H_i b_i = 0``.

Edges are ``b_i a_j`` plus a random exact perturbation.  Each higher component
``g_alpha`` is then solved from the lower ones: the required value ``y`` of
``D(g_alpha)`` is closed and is killed by ``a(.)b``, so
``x = (-1)^|y| H y + P y H`` solves ``D(x) = y`` exactly.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field

from .cochains import MCElement, RuleCochain
from .forms import HolForm, LaurentPoly, Ring, laurent_ring
from .perf import HomElement, PerfObject


@dataclass(frozen=True)
class SimplexParams:
    """Everything needed to rebuild one random MC element deterministically."""

    n: int
    seed: int
    coords: tuple[str, ...] = ("x", "y", "z")
    max_core_rank: int = 2
    max_cones: int = 2
    perturb: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coords"] = list(self.coords)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SimplexParams:
        d = dict(d)
        if "coords" in d:
            d["coords"] = tuple(d["coords"])
        return cls(**d)


def random_poly(rng: random.Random, ring: Ring, max_terms: int = 2, low: int = -1, high: int = 1,
                coeffs=(-2, -1, 1, 2, 3)) -> LaurentPoly:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        e = tuple(rng.randint(low, high) if rng.random() < 0.6 else 0 for _ in ring.coords)
        if not ring.admits(e):
            e = tuple(max(x, 0) for x in e)
        terms[e] = terms.get(e, 0) + rng.choice(coeffs)
    return LaurentPoly(ring, terms)


def random_form(rng: random.Random, ring: Ring, k: int, max_terms: int = 2) -> HolForm:
    n = ring.nvars
    if k > n:
        return HolForm.zero(ring)
    out = HolForm.zero(ring)
    for _ in range(rng.randint(1, max_terms)):
        gens = sorted(rng.sample(range(n), k))
        mask = sum(1 << g for g in gens)
        p = random_poly(rng, ring, max_terms=1)
        out = out + HolForm._raw(ring, {(mask, e): c for e, c in p.terms.items()})
    return out


def random_hom(rng: random.Random, source: PerfObject, target: PerfObject, q: int, k: int,
               density: float = 0.5, max_terms: int = 2) -> HomElement:
    entries = {}
    for i, di in enumerate(target.degrees):
        for j, dj in enumerate(source.degrees):
            if di == dj + q and rng.random() < density:
                f = random_form(rng, source.ring, k, max_terms)
                if f.terms:
                    entries[(i, j)] = f
    return HomElement.from_entries(source, target, q, k, entries)


@dataclass
class VertexModel:
    """One vertex complex with its retraction data onto the core."""

    E: PerfObject
    a: HomElement  # E -> F
    b: HomElement  # F -> E
    H: HomElement  # E -> E, hom degree -1
    P: HomElement = field(init=False)

    def __post_init__(self):
        self.P = self.b.compose(self.a)


def _unipotent_inverse(u: HomElement) -> HomElement:
    ident = u.source.identity()
    nil = u - ident
    out = ident
    power = ident
    for _ in range(u.source.size):
        power = (-nil).compose(power)
        if power.is_zero():
            break
        out = out + power
    return out


def random_vertex(rng: random.Random, ring: Ring, core: PerfObject, max_cones: int,
                  connection_density: float = 0.4) -> VertexModel:
    core_rank = core.rank(0)
    cones = [rng.choice((-1, 0, 0, 1, 1, 2)) for _ in range(rng.randint(0 if core_rank else 1, max_cones))]
    ranks = {0: core_rank}
    for top in cones:
        ranks[top] = ranks.get(top, 0) + 1
        ranks[top - 1] = ranks.get(top - 1, 0) + 1
    std = PerfObject(ring, ranks, check=False)
    fill = {q: 0 for q in ranks}
    core_idx = []
    for a in range(core_rank):
        core_idx.append(std.offsets[0] + fill[0])
        fill[0] += 1
    d_ent, h_ent = {}, {}
    for top in cones:
        lo = std.offsets[top - 1] + fill[top - 1]
        hi = std.offsets[top] + fill[top]
        fill[top - 1] += 1
        fill[top] += 1
        d_ent[(hi, lo)] = 1
        h_ent[(lo, hi)] = 1
    std.d = HomElement.from_entries(std, std, 1, 0, d_ent)
    h_std = HomElement.from_entries(std, std, -1, 0, h_ent)
    phi_ent = {(i, i): 1 for i in range(std.size)}
    for i in range(std.size):
        for j in range(i + 1, std.size):
            if std.degrees[i] == std.degrees[j] and rng.random() < 0.6:
                phi_ent[(i, j)] = random_poly(rng, ring, max_terms=1)
    phi = HomElement.from_entries(std, std, 0, 0, phi_ent)
    phi_inv = _unipotent_inverse(phi)
    E = PerfObject(ring, ranks, check=False)
    E.d = phi.compose(std.d).compose(phi_inv).retarget(E, E)
    conn = random_hom(rng, E, E, 0, 1, density=connection_density, max_terms=1)
    E.connection = conn.retarget(E, E)
    if not E.d.compose(E.d).is_zero():
        raise AssertionError("conjugated differential does not square to zero")
    incl = HomElement.from_entries(core, std, 0, 0, {(r, c): 1 for c, r in enumerate(core_idx)})
    proj = HomElement.from_entries(std, core, 0, 0, {(c, r): 1 for c, r in enumerate(core_idx)})
    a = proj.compose(phi_inv).retarget(E, core)
    b = phi.compose(incl).retarget(core, E)
    H = phi.compose(h_std).compose(phi_inv).retarget(E, E)
    return VertexModel(E, a, b, H)


class RandomSimplex:
    """A random MC element on the extended n-simplex, built lazily cell by cell."""

    def __init__(self, params: SimplexParams):
        self.params = params
        rng = random.Random(f"simplex:{params.seed}:{params.n}")
        self.ring = laurent_ring(*params.coords)
        core_rank = rng.choice([r for r in range(params.max_core_rank + 1)] + [1])
        self.core = PerfObject(self.ring, {0: core_rank}, check=False)
        self.vertices = [random_vertex(rng, self.ring, self.core, params.max_cones)
                         for _ in range(params.n + 1)]
        self.labeling = [v.E for v in self.vertices]
        self._seed = params.seed
        self.g = MCElement(self.labeling, self._rule)

    def _cell_rng(self, cell) -> random.Random:
        return random.Random(f"cell:{self._seed}:{self.params.n}:{cell}")

    def _perturbation(self, cell) -> HomElement | None:
        if not self.params.perturb or len(cell) > 3:
            return None
        rng = self._cell_rng(cell)
        if rng.random() < 0.4:
            return None
        src, tgt = self.labeling[cell[-1]], self.labeling[cell[0]]
        z = random_hom(rng, src, tgt, -(len(cell) - 1), 0, density=0.4, max_terms=1)
        return z.internal_D()

    def _rule(self, cell):
        p = len(cell) - 1
        va, vb = self.vertices[cell[0]], self.vertices[cell[-1]]
        if p == 1:
            x = va.b.compose(vb.a)
        else:
            y = self.required_differential(cell)
            if y is None:
                x = None
            else:
                hy = va.H.compose(y)
                if y.q & 1:
                    hy = -hy
                x = hy + va.P.compose(y).compose(vb.H)
        z = self._perturbation(cell)
        if z is not None:
            x = z if x is None else x + z
        return x

    def required_differential(self, cell) -> HomElement | None:
        """Right-hand side of ``D(g_alpha)`` forced by the lower components."""
        g = self.g
        p = len(cell) - 1
        total = None
        for j in range(1, p):
            v = g(cell[:j] + cell[j + 1:])
            if v is not None:
                v = v if (j - 1) % 2 == 0 else -v
                total = v if total is None else total + v
        for j in range(1, p):
            left, right = g(cell[:j + 1]), g(cell[j:])
            if left is None or right is None:
                continue
            v = left.compose(right)
            if (p * (j - 1) + 1) & 1:
                v = -v
            total = v if total is None else total + v
        return total


def random_simplex(n: int, seed: int, **kw) -> RandomSimplex:
    return RandomSimplex(SimplexParams(n=n, seed=seed, **kw))


def random_cochain(labeling, total: int, form_degree: int, seed, density: float = 0.5,
                   max_len: int | None = None) -> RuleCochain:
    """Random cochain of fixed total and form degree, defined on every cell (degenerate too)."""

    def rule(cell):
        p = len(cell) - 1
        if max_len is not None and len(cell) > max_len:
            return None
        q = total - form_degree - p
        rng = random.Random(f"cochain:{seed}:{cell}")
        return random_hom(rng, labeling[cell[-1]], labeling[cell[0]], q, form_degree, density, max_terms=1)

    return RuleCochain(labeling, rule)


def generate_corpus(seed: int, size: int, max_n: int = 3) -> list[SimplexParams]:
    """Deterministic list of generator parameters; rebuild each with :class:`RandomSimplex`.

    Simplex dimensions cycle through ``1..max_n`` so every dimension appears once ``size >= max_n``.
    """
    rng = random.Random(f"corpus:{seed}")
    return [SimplexParams(n=1 + i % max_n, seed=rng.randrange(2 ** 31)) for i in range(size)]


class RandomTwisting:
    """A random twisting cochain over a cover, quasi-isomorphic to a given core bundle.

    ``core_rank`` and ``transitions`` describe the core: a free module of that
    rank in degree 0 on every open with exactly multiplicative transition
    matrices ``transitions[(i, j)]`` (``F_j -> F_i`` over ``U_ij``).  Each open
    gets a random vertex model around the core; edges are ``b_i t_ij a_j`` plus
    an exact perturbation, and higher components are solved as for simplices.
    """

    def __init__(self, cover, core_rank: int, transitions: dict, seed, bound: int = 5,
                 max_cones: int = 2, perturb: bool = True):
        from .cech import TwistingCochain

        self.cover = cover
        self.seed = seed
        self.bound = bound
        rng = random.Random(f"twisting:{seed}")
        self.cores = [PerfObject(cover.ring([i]), {0: core_rank}, check=False) for i in range(len(cover.opens))]
        self.vertices = [random_vertex(rng, cover.ring([i]), self.cores[i], max_cones)
                         for i in range(len(cover.opens))]
        self.perturb = perturb
        bundles = [v.E for v in self.vertices]
        partial = TwistingCochain(cover, bundles, {})
        for length in range(2, bound + 2):
            for tup in cover.tuples(length):
                if any(tup[t] == tup[t + 1] for t in range(length - 1)):
                    continue
                x = self._solve(partial, tup, transitions)
                if x is not None and not x.is_zero():
                    partial.components[tup] = x
        self.a = TwistingCochain(cover, bundles, partial.components)

    def _restricted(self, i: int, h: HomElement, over) -> HomElement:
        home = frozenset([i])
        if home == frozenset(over):
            return h
        phi = self.cover.restriction(home, over)
        return h.pullback(phi, source=h.source.pullback(phi), target=h.target.pullback(phi))

    def _solve(self, partial, tup, transitions) -> HomElement | None:
        over = frozenset(tup)
        q = len(tup) - 1
        first, last = tup[0], tup[-1]
        src, tgt = partial.bundle(last, over), partial.bundle(first, over)
        va, vb = self.vertices[first], self.vertices[last]
        if q == 1:
            a_j = self._restricted(last, vb.a, over)
            b_i = self._restricted(first, va.b, over)
            core_t = HomElement.from_blocks(a_j.target, b_i.source, 0, 0, {0: transitions[tup]})
            x = b_i.compose(core_t).compose(a_j).retarget(src, tgt)
        else:
            total = None
            for j in range(1, q):
                v = partial.component(tup[:j] + tup[j + 1:], over)
                if v is not None:
                    v = v if j % 2 == 0 else -v
                    total = v if total is None else total + v
            for j in range(1, q):
                left, right = partial.component(tup[:j + 1], over), partial.component(tup[j:], over)
                if left is None or right is None:
                    continue
                v = left.compose(right)
                if ((1 - j) * (q - j)) & 1:
                    v = -v
                total = v if total is None else total + v
            if total is None:
                x = None
            else:
                y = -total
                h_first = self._restricted(first, va.H, over).retarget(tgt, tgt)
                p_first = self._restricted(first, va.P, over).retarget(tgt, tgt)
                h_last = self._restricted(last, vb.H, over).retarget(src, src)
                hy = h_first.compose(y)
                if y.q & 1:
                    hy = -hy
                x = hy + p_first.compose(y).compose(h_last)
        if self.perturb and q <= 2:
            rng = random.Random(f"twisting-cell:{self.seed}:{tup}")
            if rng.random() < 0.6:
                z = random_hom(rng, src, tgt, -q, 0, density=0.4, max_terms=1).internal_D()
                x = z if x is None else x + z
        return x


def p1_core(seed):
    """Random core on the projective line: ``(cover, rank, transitions, degree)``.

    The transition is upper triangular with monomial diagonal ``z^-n_k``, so
    its determinant has order ``-sum n_k`` and the core is an extension of
    the ``O(n_k)``.
    """
    from .builtins import p1_cover

    cover = p1_cover()
    ring = cover.ring([0, 1])
    rng = random.Random(f"p1-core:{seed}")
    rank = rng.choice((1, 1, 2))
    degs = [rng.randint(-2, 2) for _ in range(rank)]
    z = lambda k: LaurentPoly.var(ring, "z", k)
    if rank == 1:
        t01 = [[z(-degs[0])]]
        t10 = [[z(degs[0])]]
    else:
        c = rng.choice((-2, -1, 1, 3))
        m = rng.randint(-2, 2)
        t01 = [[z(-degs[0]), z(m) * c], [0, z(-degs[1])]]
        t10 = [[z(degs[0]), z(m + degs[0] + degs[1]) * -c], [0, z(degs[1])]]
    return cover, rank, {(0, 1): t01, (1, 0): t10}, sum(degs)


def interval_core(seed):
    """Random rank-2 unipotent core on the interval cover: ``(cover, rank, transitions, 0)``."""
    from .builtins import interval_cover

    cover = interval_cover()
    ring = cover.ring([0])
    rng = random.Random(f"interval-core:{seed}")
    x = LaurentPoly.var(ring, "x")
    trans = {}
    for i, j in ((0, 1), (1, 2)):
        c = rng.choice((-1, 1, 2))
        p = x ** rng.randint(0, 2) * c
        trans[(i, j)] = [[1, p], [0, 1]]
        trans[(j, i)] = [[1, -p], [0, 1]]
    return cover, 2, trans, 0


def random_p1_twisting(seed, bound: int = 4) -> tuple[RandomTwisting, int]:
    """Random twisting cochain on the projective line and the degree of its core."""
    cover, rank, trans, degree = p1_core(seed)
    return RandomTwisting(cover, rank, trans, seed, bound), degree


def random_interval_twisting(seed, bound: int = 4) -> RandomTwisting:
    cover, rank, trans, _ = interval_core(seed)
    return RandomTwisting(cover, rank, trans, seed, bound)


def random_torus_twisting(seed, opens: int = 3, bound: int = 4) -> RandomTwisting:
    """Random twisting cochain on the torus cover with core ``t_ij = s_i s_j^-1``.

    Each ``s_i`` is a 2x2 upper triangular matrix with monomial diagonal, so
    the core transitions are exactly multiplicative.
    """
    from .builtins import torus_cover

    cover = torus_cover(opens)
    ring = cover.ring(range(opens))
    rng = random.Random(f"torus-core:{seed}")
    frames = []
    for _ in range(opens):
        d1 = LaurentPoly.monomial(ring, [rng.randint(-1, 1) for _ in ring.coords], rng.choice((-1, 1, 2)))
        d2 = LaurentPoly.monomial(ring, [rng.randint(-1, 1) for _ in ring.coords], rng.choice((-1, 1, 2)))
        off = random_poly(rng, ring, max_terms=1)
        inv1, inv2 = d1.unit_inverse(), d2.unit_inverse()
        s = [[d1, off], [0, d2]]
        s_inv = [[inv1, -(inv1 * off * inv2)], [0, inv2]]
        frames.append((s, s_inv))

    def mul(m, n):
        return [[sum((m[i][k] * n[k][j] for k in range(2)), LaurentPoly(ring)) for j in range(2)] for i in range(2)]

    trans = {(i, j): mul(frames[i][0], frames[j][1]) for i in range(opens) for j in range(opens) if i != j}
    return RandomTwisting(cover, 2, trans, seed, bound)
