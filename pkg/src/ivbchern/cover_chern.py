"""Chern character evaluated directly from a twisting cochain.

Terms of ``tau_a((nabla a)^k)`` are enumerated on the index tuple of an
intersection, using only the twisting cochain components, with no detour
through vertices or MC elements.  Comparing these terms with the expansion of
``Tr_g(A^k)`` for the included vertex checks that both formulas consist of the
same trace terms.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from math import factorial
from typing import Sequence

from .cech import TwistingCochain, include_twisting
from .cochains import ChernEngine, evaluate_terms, trace_power_terms
from .forms import HolForm
from .perf import HomElement, supertrace_of_compose


def _compositions(last: int, pieces: int, start: int = 0):
    """Nondecreasing cut points ``start = c0 <= c1 <= ... <= c_pieces = last``."""
    if pieces == 1:
        yield (start, last)
        return
    for cut in range(start, last + 1):
        for rest in _compositions(last, pieces - 1, cut):
            yield (start,) + rest


def cover_terms(tau: Sequence[int], k: int) -> list[tuple[int, tuple, tuple]]:
    """``(sign, wrapped a tuple, nabla-a tuples)`` for ``tau_a((nabla a)^k)`` on ``tau``."""
    tau = tuple(tau)
    s = len(tau) - 1
    out = []
    for lo in range(s + 1):
        for hi in range(lo, s + 1):
            trace_sign = (lo + 1) * s + hi - lo
            wrap = tau[hi:] + tau[:lo + 1]
            if k == 0:
                if lo == hi:
                    out.append((-1 if trace_sign & 1 else 1, wrap, ()))
                continue
            for cuts in _compositions(hi - lo, k):
                pieces = tuple(tau[lo + cuts[t]:lo + cuts[t + 1] + 1] for t in range(k))
                cech = [len(p) - 1 for p in pieces]
                pair = sum(cech[x] * cech[y] for x in range(k) for y in range(x + 1, k))
                out.append((-1 if (trace_sign + pair) & 1 else 1, wrap, pieces))
    return out


def _degenerate(labels: tuple) -> bool:
    return any(labels[t] == labels[t + 1] for t in range(len(labels) - 1))


def _a(a: TwistingCochain, labels: tuple, over) -> HomElement | None:
    return a.component(labels, over)


def _nabla_a(a: TwistingCochain, labels: tuple, over) -> HomElement | None:
    if len(labels) > 1 and _degenerate(labels):
        return None
    v = a.component(labels, over)
    if v is None:
        return None
    w = v.nabla()
    return -w if (len(labels) - 1) & 1 else w


def cover_term_value(a: TwistingCochain, tau: Sequence[int], term) -> HolForm:
    sign, wrap, pieces = term
    over = frozenset(tau)
    ring = a.cover.ring(over)
    head = _a(a, wrap, over)
    if head is None:
        return HolForm.zero(ring)
    acc = None if pieces else a.bundle(wrap[-1], over).identity()
    for piece in reversed(pieces):
        v = _nabla_a(a, piece, over)
        if v is None:
            return HolForm.zero(ring)
        acc = v if acc is None else v.compose(acc)
    return supertrace_of_compose(head, acc).scale(sign)


def cover_chern(a: TwistingCochain, tau: Sequence[int]) -> HolForm:
    """``(1/l!) tau_a((nabla a)^l)`` on an intersection tuple of length ``l + 1``."""
    tau = tuple(tau)
    l = len(tau) - 1
    ring = a.cover.ring(frozenset(tau))
    total = HolForm.zero(ring)
    for term in cover_terms(tau, l):
        total = total + cover_term_value(a, tau, term)
    return total.scale(Fraction(1, factorial(l)))


def compare_term_sets(a: TwistingCochain, tau: Sequence[int], bound: int = 8) -> dict:
    """Match the two expansions term by term on one intersection tuple.

    Both sides are keyed by ``(sign, wrapped labels, piece labels)``; the
    vertex side maps cells of the extended simplex to labels through ``tau``.
    """
    tau = tuple(tau)
    l = len(tau) - 1
    engine = ChernEngine(include_twisting(a, bound=bound).local_mc(tau))
    ours = Counter()
    ours_values = Counter()
    for tsign, wrap, pieces, psign in trace_power_terms(tuple(range(l + 1)), l):
        key = (tsign * psign, tuple(tau[i] for i in wrap), tuple(tuple(tau[i] for i in p) for p in pieces))
        ours[key] += 1
        value = evaluate_terms(engine, [(tsign, wrap, pieces, psign)])
        if not value.is_zero():
            ours_values[(key, str(value))] += 1
    theirs = Counter()
    theirs_values = Counter()
    for term in cover_terms(tau, l):
        theirs[term] += 1
        value = cover_term_value(a, tau, term)
        if not value.is_zero():
            theirs_values[(term, str(value))] += 1
    total_ours = engine.trace_power(l)(tuple(range(l + 1))).scale(Fraction(1, factorial(l))) if l else None
    total_theirs = cover_chern(a, tau) if l else None
    return {
        "tuple": list(tau),
        "terms": sum(ours.values()),
        "nonzero_terms": sum(ours_values.values()),
        "term_sets_equal": ours == theirs,
        "values_equal": ours_values == theirs_values,
        "totals_equal": total_ours == total_theirs,
        "ok": ours == theirs and ours_values == theirs_values and total_ours == total_theirs,
    }
