"""Acceptance suite: one test and one PASS/FAIL line per criterion."""

import random
import time
from math import comb

from ivbchern.builtins import BUILTINS, builtin, builtin_expectations, p1_line_bundle, p1_skyscraper
from ivbchern.cech import (cocycle_check, euler_char, extract_twisting, include_twisting, p1_class_coefficient,
                           sheaf_chern, twisting_equal)
from ivbchern.cli import sample_chart
from ivbchern.cochains import (ChernEngine, cech_delta, cells_of, chern_simplex, trace_identity_check,
                               trace_power_terms)
from ivbchern.corpus import RandomSimplex, SimplexParams, generate_corpus, random_cochain
from ivbchern.dk import UPoly, dk_validate, naturality_check
from ivbchern.homology import homology_sheaf
from ivbchern.cover_chern import compare_term_sets
from ivbchern.scenario import dumps, loads, scenario_from_dict, twisting_to_dict
from ivbchern.simplicial import contracting_homotopy_check, enum_grid_paths, enum_nondegenerate, nondegenerate_count
from ivbchern.tot import (coherence_relation, inject_violation, random_tot_simplex, validate_coherence,
                          validate_ivb_simplex)

CORPUS_SEED = 0
CORPUS_SIZE = 200
CORPUS_BOUND = 5
COCHAIN_DEGREES = ((0, 0), (1, 0), (1, 1), (2, 1))


def corpus():
    return [RandomSimplex(p) for p in generate_corpus(CORPUS_SEED, CORPUS_SIZE)]


def test_trace_chain_identity(record):
    start = time.perf_counter()
    cells = {n: cells_of(n, CORPUS_BOUND, degenerate=True) for n in (1, 2, 3)}
    checked = nonzero = 0
    failures = []
    instances = corpus()
    for i, sim in enumerate(instances):
        g = sim.g
        total, forms = COCHAIN_DEGREES[i % len(COCHAIN_DEGREES)]
        f = random_cochain(g.labeling, total, forms, f"acceptance:{i}")
        res = trace_identity_check(g, f, cells[g.n])
        checked += res["checked"]
        nonzero += res["nonzero"]
        if not res["ok"]:
            failures.append((sim.params.seed, res["failure"]))
    seconds = time.perf_counter() - start
    dims = sorted({sim.params.n for sim in instances})
    ok = not failures and len(instances) >= 200 and dims == [1, 2, 3] and seconds < 60 and nonzero > 0
    record(1, "trace chain identity", ok, instances=len(instances), cells=checked, nonzero=nonzero,
           dimensions=dims, seconds=round(seconds, 1), failures=failures[:3])
    assert ok


def test_trace_powers_are_closed(record):
    failures = []
    nonzero = [0, 0, 0, 0]
    for sim in corpus():
        g = sim.g
        engine = ChernEngine(g)
        for k in range(4):
            tr = engine.trace_power(k)
            d = cech_delta(tr)
            for cell in cells_of(g.n, CORPUS_BOUND, degenerate=True):
                if not d(cell).is_zero():
                    failures.append((sim.params.seed, k, cell))
                    break
                if not tr(cell).is_zero():
                    nonzero[k] += 1
    ok = not failures and all(nonzero)
    record(2, "delta Tr(A^k) = 0 for k = 0..3", ok, nonzero_traces=nonzero, failures=failures[:3])
    assert ok


def test_chern_naturality(record):
    checked = 0
    failures = []
    for n in range(0, 4):
        for seed in range(3):
            g = RandomSimplex(SimplexParams(n=n, seed=seed)).g
            ops = [("face", j) for j in range(n + 1) if n > 0] + [("degeneracy", j) for j in range(n + 1)]
            ops.append(("chart", sample_chart(g.ring)))
            if not dk_validate(chern_simplex(g))["ok"]:
                failures.append((n, seed, "not a DK cycle"))
            for op in ops:
                res = naturality_check(g, op)
                checked += 1
                if not res["ok"]:
                    failures.append((n, seed, res["op"]))
    ok = not failures
    record(3, "Chern naturality under faces, degeneracies and chart maps", ok, checks=checked,
           failures=failures[:3])
    assert ok


def _parse_expansion(terms):
    """Hand-expanded terms ``(sign, "wrap", ["piece", ...])`` as label tuples."""
    return {(sign, tuple(int(c) for c in wrap), tuple(tuple(int(c) for c in p) for p in pieces))
            for sign, wrap, pieces in terms}


# Hand expansions on the 1- and 2-simplex; "g_a nabla g_b nabla g_c" becomes (sign, a, [b, c]).
EXPANSION_N1 = [(+1, "101", ["1"]), (-1, "010", ["0"]), (+1, "10", ["01"])]
EXPANSION_N2 = [
    (+1, "20", ["0", "012"]), (+1, "20", ["01", "12"]), (+1, "20", ["012", "2"]),
    (-1, "201", ["1", "12"]), (-1, "201", ["12", "2"]),
    (-1, "120", ["0", "01"]), (-1, "120", ["01", "1"]),
    (+1, "2012", ["2", "2"]), (+1, "1201", ["1", "1"]), (+1, "0120", ["0", "0"]),
]


def test_low_dimensional_expansions(record):
    results = {}
    for n, expansion in ((1, EXPANSION_N1), (2, EXPANSION_N2)):
        ours = [(tsign, wrap, pieces) for tsign, wrap, pieces, _ in trace_power_terms(tuple(range(n + 1)), n)]
        results[n] = len(ours) == len(set(ours)) and set(ours) == _parse_expansion(expansion)
    ok = all(results.values())
    record(4, "n=1 and n=2 trace expansions match term for term", ok,
           n1_terms=len(EXPANSION_N1), n2_terms=len(EXPANSION_N2), matches=results)
    assert ok


def test_p1_line_bundles(record):
    rows = []
    ok = True
    for n in range(-3, 4):
        start = time.perf_counter()
        c = sheaf_chern(include_twisting(p1_line_bundle(n)), 2)
        coeff = p1_class_coefficient(c)
        ch0 = all(c[(i,)] == UPoly.constant(c.cover.ring([i]), 1) for i in (0, 1))
        closed = cocycle_check(c)["ok"]
        seconds = time.perf_counter() - start
        good = ch0 and closed and coeff == n and seconds < 5
        ok &= good
        rows.append(f"O({n}):{coeff}")
    record(5, "P1 line bundles: ch0 = 1 and class coefficient n", ok, coefficients=" ".join(rows))
    assert ok


def test_skyscraper(record):
    a = p1_skyscraper()
    sky = sheaf_chern(include_twisting(a), 2)
    o = sheaf_chern(include_twisting(p1_line_bundle(0)), 2)
    om1 = sheaf_chern(include_twisting(p1_line_bundle(-1)), 2)
    chis = euler_char(a)
    coeff = p1_class_coefficient(sky)
    keys = set(sky.values) | set(o.values) | set(om1.values)
    additive = all(sky[t] == o[t] - om1[t] for t in keys)
    ok = chis == [0, 0] and coeff == 1 and additive and cocycle_check(sky)["ok"]
    record(6, "skyscraper: chi = 0, coefficient 1, ch(O) - ch(O(-1))", ok, euler=chis, coefficient=coeff,
           additive=additive)
    assert ok


def test_round_trip_and_term_sets(record):
    generators = ("random-p1", "random-interval", "random-torus")
    cases = [(name, builtin(name)) for name in BUILTINS]
    for i in range(50):
        rule = {"generator": generators[i % 3], "seed": i}
        cases.append((f"{rule['generator']}:{i}", scenario_from_dict({"kind": "twisting", "rule": rule}).twisting))
    failures = []
    compared = nonzero = 0
    for label, a in cases:
        if not twisting_equal(extract_twisting(include_twisting(a), 4), a, 4):
            failures.append((label, "round trip"))
        if not twisting_equal(loads(dumps(twisting_to_dict(a))).twisting, a, 4):
            failures.append((label, "file round trip"))
        for length in (2, 3):
            for tau in a.cover.tuples(length):
                res = compare_term_sets(a, tau)
                compared += 1
                nonzero += res["nonzero_terms"]
                if not res["ok"]:
                    failures.append((label, tuple(tau)))
    ok = not failures and len(cases) == len(BUILTINS) + 50 and nonzero > 0
    record(7, "round trip and cover-side term sets", ok, cochains=len(cases), tuples=compared,
           nonzero_terms=nonzero, failures=failures[:3])
    assert ok


def test_combinatorial_counts(record):
    bad = []
    for n in range(0, 5):
        for k in range(0, 7):
            count = sum(1 for _ in enum_nondegenerate(n, k))
            if count != (n + 1) * n ** k or nondegenerate_count(n, k) != count:
                bad.append(("nondegenerate", n, k, count))
    for k in range(0, 7):
        if len(list(enum_nondegenerate(1, k))) != 2:
            bad.append(("interval", k))
    for total in range(0, 11):
        for k in range(total + 1):
            l = total - k
            count = sum(1 for _ in enum_grid_paths(k, l, "monotone", total + 1))
            if count != comb(total, k):
                bad.append(("maximal", k, l, count))
    ok = not bad
    record(8, "cell counts", ok, mismatches=bad[:3])
    assert ok


def test_contracting_homotopy(record):
    reports = {n: contracting_homotopy_check(n, 4) for n in (1, 2, 3)}
    ok = all(r["ok"] for r in reports.values())
    record(9, "contracting homotopy through degree 4", ok,
           cells={n: sum(r["checked"].values()) for n, r in reports.items()})
    assert ok


def grid(text):
    top, bottom = text.split(";")
    return tuple((int(a), int(b)) for a, b in zip(top, bottom))


def test_tot_coherence(record):
    t = random_tot_simplex("p1", 2, 3, max_level=1)
    upper, lower = grid("012;111"), grid("012;000")
    relation = all(coherence_relation(t, 1, upper, tau, 0) for tau in t.cover.tuples(2))
    cover_form = True
    for i0, i1 in t.cover.tuples(2):
        lhs = t.entries[(1, upper, (i0, i1))]
        rhs = t.restrict(t.value(0, lower, (i1,)), (i1,), (i0, i1))
        cover_form &= rhs is not None and lhs.terms == rhs.terms
    valid = validate_ivb_simplex(t)["ok"]
    rng = random.Random("acceptance-injection")
    detected = attempted = 0
    for _ in range(100):
        hit = inject_violation(t, rng)
        if hit is None:
            break
        attempted += 1
        detected += not validate_coherence(hit[0])["ok"]
    ok = relation and cover_form and valid and attempted == 100 and detected == 100
    record(10, "Tot coherence relation and injected violations", ok, relation=relation, cover_form=cover_form,
           simplex_valid=valid, injected=attempted, detected=detected)
    assert ok


def test_homology_sheaf(record):
    wrong = []
    for name in BUILTINS:
        res = homology_sheaf(builtin(name))
        expected = builtin_expectations(name)["cohsh"]
        if res["cohsh"] != expected:
            wrong.append((name, "classification"))
        if expected and not res["edges_ok"]:
            wrong.append((name, "edges"))
    cohsh = [n for n in BUILTINS if builtin_expectations(n)["cohsh"]]
    ok = not wrong
    record(11, "homology sheaf classification and edge isomorphisms", ok, cohsh=cohsh, wrong=wrong)
    assert ok
