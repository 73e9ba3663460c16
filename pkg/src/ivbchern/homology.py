"""Homology of local complexes over one-variable coordinate rings.

Over ``Q[z]`` or ``Q[z, 1/z]`` every matrix diagonalizes by row and column
operations (the ring is Euclidean), so homology is read off from invariant
factors: ``H^q`` has free rank ``rank E^q - rank d^q - rank d^(q-1)`` and
torsion ``R/(e)`` for each non-unit invariant factor ``e`` of ``d^(q-1)``.

For rings in several variables only the rank profile over the fraction field
is reported.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .cech import TwistingCochain
from .forms import LaurentPoly, Ring
from .perf import HomElement, PerfObject

Dense = list  # coefficients, lowest degree first, no trailing zeros


def _trim(p: Dense) -> Dense:
    while p and not p[-1]:
        p.pop()
    return p


def _sub_scaled(a: Dense, b: Dense, c: Fraction, shift: int) -> Dense:
    """``a - c * x^shift * b``."""
    out = list(a) + [Fraction(0)] * max(0, len(b) + shift - len(a))
    for i, v in enumerate(b):
        out[i + shift] -= c * v
    return _trim(out)


def poly_divmod(a: Dense, b: Dense) -> tuple[Dense, Dense]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    lead = Fraction(b[-1])
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] / lead
        q[shift] = c
        r = _sub_scaled(r, b, c, shift)
    return _trim(q), r


def poly_mul(a: Dense, b: Dense) -> Dense:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _sub(a: Dense, b: Dense) -> Dense:
    return _sub_scaled(a, b, Fraction(1), 0)


def monic(p: Dense) -> Dense:
    if not p:
        return p
    lead = p[-1]
    return [Fraction(v) / lead for v in p]


def invariant_factors(matrix: Sequence[Sequence[Dense]]) -> list[Dense]:
    """Monic nonzero invariant factors of a matrix over ``Q[z]``."""
    a = [[_trim([Fraction(v) for v in e]) for e in row] for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    factors = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] and (best is None or len(a[i][j]) < len(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            changed = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q, r = poly_divmod(a[i][t], a[t][t])
                    for j in range(t, cols):
                        a[i][j] = _sub(a[i][j], poly_mul(q, a[t][j]))
                    if r:
                        a[t], a[i] = a[i], a[t]
                        changed = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q, r = poly_divmod(a[t][j], a[t][t])
                    for i in range(t, rows):
                        a[i][j] = _sub(a[i][j], poly_mul(q, a[i][t]))
                    if r:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        changed = True
            if changed:
                continue
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] and poly_divmod(a[i][j], a[t][t])[1]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            for j in range(t, cols):
                a[t][j] = _sub(a[t][j], [-v for v in a[bad][j]]) if a[bad][j] else a[t][j]
        factors.append(monic(a[t][t]))
        t += 1
    return factors


def _to_dense_rows(entries: list[list[LaurentPoly]], ring: Ring) -> list[list[Dense]]:
    """Clear negative powers row by row (multiplying by units) and densify."""
    out = []
    invertible = ring.coords[0] in ring.invertible
    for row in entries:
        low = min((e[0] for p in row for e in p.terms), default=0)
        shift = -low if low < 0 else 0
        if shift and not invertible:
            raise ValueError("negative powers in a polynomial ring")
        dense_row = []
        for p in row:
            if not p.terms:
                dense_row.append([])
                continue
            top = max(e[0] for e in p.terms) + shift
            d = [Fraction(0)] * (top + 1)
            for (k,), c in p.terms.items():
                d[k + shift] += c
            dense_row.append(_trim(d))
        out.append(dense_row)
    return out


def _strip_unit_powers(p: Dense) -> Dense:
    k = 0
    while k < len(p) and not p[k]:
        k += 1
    return p[k:]


def _is_unit(p: Dense) -> bool:
    return len(p) == 1


def format_dense(p: Dense, ring: Ring) -> str:
    return str(LaurentPoly(ring, {(k,): c for k, c in enumerate(p) if c}))


def _block(f: HomElement, p: int) -> list[list[LaurentPoly]]:
    ring = f.ring
    rows, cols = f.target.rank(p + f.q), f.source.rank(p)
    mat = [[LaurentPoly(ring) for _ in range(cols)] for _ in range(rows)]
    if rows and cols:
        r0, c0 = f.target.offsets[p + f.q], f.source.offsets[p]
        for (i, j, m, e), c in f.terms.items():
            if m == 0 and r0 <= i < r0 + rows and c0 <= j < c0 + cols:
                mat[i - r0][j - c0] = mat[i - r0][j - c0] + LaurentPoly.monomial(ring, e, c)
    return mat


def differential_factors(e: PerfObject, q: int) -> list[Dense]:
    """Invariant factors of ``d: E^q -> E^(q+1)``, with unit powers of ``z`` removed."""
    ring = e.ring
    if ring.nvars != 1:
        raise ValueError("invariant factors need a one-variable ring")
    mat = _block(e.d, q)
    if not mat or not mat[0]:
        return []
    dense = _to_dense_rows(mat, ring)
    factors = invariant_factors(dense)
    if ring.coords[0] in ring.invertible:
        factors = [monic(_strip_unit_powers(f)) for f in factors]
    return factors


def homology(e: PerfObject) -> dict[int, dict]:
    """``{q: {"free_rank", "torsion"}}`` for each degree with nonzero homology."""
    ring = e.ring
    degrees = sorted(set(e.ranks) | {q + 1 for q in e.ranks})
    facs = {q: differential_factors(e, q) for q in degrees}
    out = {}
    for q in degrees:
        rank_out = len(facs.get(q, []))
        incoming = facs.get(q - 1, [])
        free = e.rank(q) - rank_out - len(incoming)
        torsion = [format_dense(f, ring) for f in incoming if not _is_unit(f)]
        if free or torsion:
            out[q] = {"free_rank": free, "torsion": torsion}
    return out


def rank_profile(e: PerfObject) -> dict[int, int]:
    """Ranks of the differentials over the fraction field (any number of variables)."""
    import sympy
    from sympy.polys.matrices import DomainMatrix

    ring = e.ring
    syms = sympy.symbols(list(ring.coords)) if ring.nvars > 1 else [sympy.Symbol(ring.coords[0])]
    dom = sympy.QQ.frac_field(*syms)
    out = {}
    for q in e.ranks:
        mat = _block(e.d, q)
        if not mat or not mat[0]:
            out[q] = 0
            continue
        rows = []
        for row in mat:
            r = []
            for p in row:
                expr = sum((sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.Integer(c))
                           * sympy.Mul(*[s ** k for s, k in zip(syms, ex)]) for ex, c in p.terms.items())
                r.append(dom.from_sympy(sympy.sympify(expr)))
            rows.append(r)
        out[q] = DomainMatrix(rows, (len(rows), len(rows[0])), dom).rank()
    return out


def mapping_cone(f: HomElement) -> PerfObject:
    """Cone of a degree-0 chain map ``f: A -> B``: ``C^q = A^(q+1) + B^q``."""
    a, b = f.source, f.target
    ranks: dict[int, int] = {}
    for q, r in a.ranks.items():
        ranks[q - 1] = ranks.get(q - 1, 0) + r
    for q, r in b.ranks.items():
        ranks[q] = ranks.get(q, 0) + r
    cone = PerfObject(a.ring, ranks, check=False)
    fill = {q: 0 for q in ranks}
    amap, bmap = {}, {}
    for q, r in a.ranks.items():
        for i in range(r):
            amap[a.offsets[q] + i] = cone.offsets[q - 1] + fill[q - 1] + i
        fill[q - 1] += r
    for q, r in b.ranks.items():
        for i in range(r):
            bmap[b.offsets[q] + i] = cone.offsets[q] + fill[q] + i
        fill[q] += r
    terms = {}
    for (i, j, m, e), c in a.d.terms.items():
        terms[(amap[i], amap[j], m, e)] = -c
    for (i, j, m, e), c in b.d.terms.items():
        terms[(bmap[i], bmap[j], m, e)] = c
    for (i, j, m, e), c in f.terms.items():
        terms[(bmap[i], amap[j], m, e)] = c
    cone.d = HomElement(cone, cone, 1, 0, terms)
    if not cone.d.compose(cone.d).is_zero():
        raise ValueError("map is not a chain map; its cone is not a complex")
    return cone


def is_quasi_isomorphism(f: HomElement) -> bool:
    return not homology(mapping_cone(f))


def homology_sheaf(v) -> dict:
    """Per-open homology, degree-zero concentration and edge-map isomorphism checks.

    ``v`` is a :class:`TwistingCochain` or an :class:`IVBVertex`.
    """
    cover = v.cover
    report = {"opens": [], "edges": [], "cohsh": True, "edges_ok": True, "exact": True}
    for i, e in enumerate(v.bundles):
        entry = {"open": cover.opens[i], "ranks": {str(q): r for q, r in e.ranks.items()}}
        if e.ring.nvars == 1:
            h = homology(e)
            entry["homology"] = {str(q): h[q] for q in sorted(h)}
            concentrated = all(q == 0 for q in h)
        else:
            report["exact"] = False
            prof = rank_profile(e)
            entry["rank_profile"] = {str(q): r for q, r in sorted(prof.items())}
            gen = {q: e.rank(q) - prof.get(q, 0) - prof.get(q - 1, 0) for q in e.ranks}
            concentrated = all(r == 0 for q, r in gen.items() if q != 0)
            entry["note"] = "several variables: generic ranks only"
        entry["degree_zero"] = concentrated
        report["cohsh"] &= concentrated
        report["opens"].append(entry)
    for tup in cover.tuples(2):
        if tup[0] == tup[1]:
            continue
        f = v.component(tup) if isinstance(v, TwistingCochain) else v.component((0, 1), tup)
        if f is None:
            ok = False
        elif f.ring.nvars != 1:
            ok = None
        else:
            ok = is_quasi_isomorphism(f)
        report["edges"].append({"tuple": list(tup), "quasi_iso": ok})
        if ok is False:
            report["edges_ok"] = False
    return report
