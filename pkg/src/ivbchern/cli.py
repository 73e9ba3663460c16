"""Command-line harness: every subcommand prints a report and exits 0 iff all checks pass.

Exit status 1 means some check failed; 2 means the input could not be used.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import replace
from fractions import Fraction
from typing import Callable

from .builtins import BUILTINS
from .cech import (CoverError, cocycle_check, euler_char, include_twisting, p1_class_coefficient, sheaf_chern,
                   twisting_equal, extract_twisting)
from .cochains import chern_simplex, mc_check, trace_identity_check, cells_of
from .corpus import RandomSimplex, SimplexParams, generate_corpus, random_cochain
from .dk import dk_validate, naturality_check
from .forms import ChartMap, LaurentPoly, Ring, format_scalar
from .homology import homology_sheaf
from .scenario import Scenario, ScenarioError, dumps, load, scenario_from_dict
from .tot import (inject_violation, omega_level_dk, omega_vertex, random_tot_simplex, tot_from_vertex,
                  validate_coherence, validate_ivb_simplex)

DEFAULT_BOUND = 6
TRACE_DEGREES = ((0, 0), (1, 0), (1, 1), (2, 1))


class InputError(Exception):
    pass


class Report:
    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.timing = args.timing
        self.data: dict = {"command": command}
        self.checks: list[dict] = []

    def check(self, name: str, ok: bool, **detail) -> bool:
        self.checks.append({"name": name, "ok": bool(ok), **detail})
        return bool(ok)

    def timed(self, name: str, fn: Callable[[], dict], summary: Callable[[dict], dict] | None = None) -> dict:
        start = time.perf_counter()
        res = fn()
        detail = summary(res) if summary else {}
        if self.timing:
            detail["seconds"] = round(time.perf_counter() - start, 3)
        self.check(name, res["ok"], **detail)
        return res

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def render(self, fmt: str) -> str:
        doc = {**self.data, "checks": self.checks, "ok": self.ok}
        if fmt == "json":
            return dumps(doc)
        lines = [f"{self.command}"]
        for key in sorted(self.data):
            if key != "command":
                lines.extend(_text_block(key, self.data[key], 1))
        for c in self.checks:
            extra = ", ".join(f"{k}={_short(v)}" for k, v in c.items() if k not in ("name", "ok"))
            lines.append(f"  {'PASS' if c['ok'] else 'FAIL'} {c['name']}" + (f" ({extra})" if extra else ""))
        lines.append(f"result: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _short(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_short(x)}" for k, x in sorted(v.items())) + "}"
    return str(v)


def _text_block(key: str, value, depth: int) -> list[str]:
    pad = "  " * depth
    if isinstance(value, dict) and value:
        out = [f"{pad}{key}:"]
        for k in sorted(value):
            out.extend(_text_block(str(k), value[k], depth + 1))
        return out
    return [f"{pad}{key}: {_short(value)}"]


# inputs

def _scenario(args) -> Scenario | None:
    if args.scenario and args.builtin:
        raise InputError("give --scenario or --builtin, not both")
    if args.builtin:
        if args.builtin not in BUILTINS:
            raise InputError(f"unknown builtin {args.builtin!r}; choose from {', '.join(BUILTINS)}")
        return scenario_from_dict({"kind": "twisting", "builtin": args.builtin})
    if args.scenario:
        return load(args.scenario)
    return None


def _bound(args, scen: Scenario | None) -> int:
    if args.degree_bound is not None:
        return args.degree_bound
    if scen is not None and scen.degree_bound is not None:
        return scen.degree_bound
    return DEFAULT_BOUND


def _describe(rep: Report, scen: Scenario | None, args) -> None:
    if scen is None:
        rep.data["input"] = {"corpus_seed": args.seed}
    else:
        rep.data["input"] = {"kind": scen.kind, **scen.source}


def _simplex_inputs(args, scen: Scenario | None) -> list[tuple[str, object]]:
    """MC elements to examine: the scenario's, or a seeded corpus."""
    if scen is not None:
        if scen.kind != "simplex":
            raise InputError("this command needs a simplex scenario or a corpus seed")
        return [("scenario", scen.simplex)]
    params = generate_corpus(args.seed, args.count)
    if args.n is not None:
        params = [replace(p, n=args.n) for p in params]
    return [(f"n={p.n} seed={p.seed}", RandomSimplex(p).g) for p in params]


def _need_twisting(scen: Scenario | None):
    if scen is None or scen.kind != "twisting":
        raise InputError("this command needs --builtin or a twisting scenario")
    return scen.twisting


def sample_chart(ring: Ring) -> ChartMap:
    """A fixed non-identity ring endomorphism: monomial rescaling on units, translation otherwise."""
    images = {}
    coords = ring.coords
    for i, c in enumerate(coords):
        if c in ring.invertible:
            other = coords[(i + 1) % len(coords)]
            img = LaurentPoly.var(ring, c) * 2
            if other != c and other in ring.invertible:
                img = img * LaurentPoly.var(ring, other)
            images[c] = img
        else:
            images[c] = LaurentPoly.var(ring, c) + 1
    return ChartMap(ring, ring, images)


# commands

def cmd_validate(args, rep: Report) -> None:
    scen = _scenario(args)
    bound = _bound(args, scen)
    rep.data["degree_bound"] = bound
    _describe(rep, scen, args)
    if scen is not None and scen.kind == "twisting":
        a = scen.twisting
        rep.check("cover restrictions compose", a.cover.check_functoriality()["ok"])
        rep.timed("twisting equation", lambda: a.check(min(bound, 4)),
                  lambda r: {"tuples": r["checked"], "failure": r["failure"]})
        rep.check("round trip through vertex data", twisting_equal(extract_twisting(include_twisting(a), 4), a, 4))
        edges = homology_sheaf(a)
        rep.check("edge maps are quasi-isomorphisms", edges["edges_ok"])
        return
    for label, g in _simplex_inputs(args, scen):
        rep.timed(f"MC equation [{label}]", lambda g=g: mc_check(g, bound),
                  lambda r: {"cells": r["checked"], "failure": r["failure"]})


def cmd_mc_check(args, rep: Report) -> None:
    scen = _scenario(args)
    bound = _bound(args, scen)
    rep.data["degree_bound"] = bound
    _describe(rep, scen, args)
    if scen is not None and scen.kind == "twisting":
        v = include_twisting(scen.twisting)
        local_bound = min(bound, 4)
        for l in range(min(bound, 2) + 1):
            for tau in v.cover.tuples(l + 1):
                rep.timed(f"local MC on {list(tau)}", lambda tau=tau: mc_check(v.local_mc(tau), local_bound),
                          lambda r: {"cells": r["checked"], "failure": r["failure"]})
        return
    for label, g in _simplex_inputs(args, scen):
        rep.timed(f"MC equation [{label}]", lambda g=g: mc_check(g, bound),
                  lambda r: {"cells": r["checked"], "failure": r["failure"]})


def _plain(v):
    """JSON-safe form of a report value; integral fractions become ints."""
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else format_scalar(v)
    return v


def _expect_check(rep: Report, expect: dict, key: str, actual) -> None:
    actual = _plain(actual)
    if key in expect:
        want = expect[key]
        rep.check(f"expected {key}", str(actual) == str(want), expected=want, actual=actual)


def cmd_chern(args, rep: Report) -> None:
    scen = _scenario(args)
    bound = _bound(args, scen)
    _describe(rep, scen, args)
    if scen is not None and scen.kind == "twisting":
        a = scen.twisting
        level = min(bound, 2)
        rep.data["max_level"] = level
        c = sheaf_chern(include_twisting(a), level)
        rep.data["cocycle"] = c.to_plain()
        rep.timed("cocycle condition", lambda: cocycle_check(c),
                  lambda r: {"tuples": r["checked"], "problems": r["problems"][:3]})
        chis = euler_char(a)
        rep.data["euler"] = chis
        rep.check("Euler characteristic agrees on all opens", len(set(chis)) == 1)
        _expect_check(rep, scen.expect, "euler", chis[0])
        if "p1" in a.cover.tags:
            coeff = p1_class_coefficient(c)
            rep.data["class_coefficient"] = format_scalar(coeff)
            rep.check("class coefficient is an integer", Fraction(coeff).denominator == 1)
            _expect_check(rep, scen.expect, "class_coefficient", Fraction(coeff))
        return
    for label, g in _simplex_inputs(args, scen):
        dec = chern_simplex(g)
        if scen is not None:
            rep.data["decoration"] = dec.to_plain()
        rep.timed(f"Chern decoration is a DK cycle [{label}]", lambda dec=dec: dk_validate(dec),
                  lambda r: {"problems": r["problems"][:3]})


def cmd_trace_id(args, rep: Report) -> None:
    scen = _scenario(args)
    bound = _bound(args, scen)
    rep.data["degree_bound"] = bound
    rep.data["cochain_degrees"] = [f"total {t}, forms {k}" for t, k in TRACE_DEGREES]
    _describe(rep, scen, args)
    for label, g in _simplex_inputs(args, scen):
        cells = cells_of(g.n, bound, degenerate=True)
        checked = nonzero = 0
        failure = None
        for total, forms in TRACE_DEGREES:
            f = random_cochain(g.labeling, total, forms, f"{args.seed}:{label}:{total}:{forms}")
            res = trace_identity_check(g, f, cells)
            checked += res["checked"]
            nonzero += res["nonzero"]
            if not res["ok"]:
                failure = {"cochain": [total, forms], "cell": res["failure"]}
                break
        rep.check(f"trace identity [{label}]", failure is None, cells=checked, nonzero=nonzero, failure=failure)


def cmd_dk_check(args, rep: Report) -> None:
    scen = _scenario(args)
    _describe(rep, scen, args)
    if scen is not None and scen.kind == "twisting":
        v = include_twisting(scen.twisting)
        level = min(_bound(args, scen), 2)
        for l in range(1, level + 1):
            for tau in v.cover.tuples(l + 1):
                dec = chern_simplex(v.local_mc(tau))
                res = dk_validate(dec)
                rep.check(f"local Chern decoration on {list(tau)}", res["ok"], problems=res["problems"][:3])
        return
    for label, g in _simplex_inputs(args, scen):
        res = dk_validate(chern_simplex(g))
        rep.check(f"DK cycle [{label}]", res["ok"], problems=res["problems"][:3])
        ops = [("face", j) for j in range(g.n + 1) if g.n > 0] + [("degeneracy", j) for j in range(g.n + 1)]
        ops.append(("chart", sample_chart(g.ring)))
        for op in ops:
            res = naturality_check(g, op)
            rep.check(f"naturality under {res['op']} [{label}]", res["ok"], mismatched=res["mismatched_cells"][:3])


def _injection_check(rep: Report, t, count: int, seed) -> None:
    rng = random.Random(f"inject:{seed}")
    detected = attempted = 0
    for _ in range(count):
        hit = inject_violation(t, rng)
        if hit is None:
            break
        attempted += 1
        if not validate_coherence(hit[0])["ok"]:
            detected += 1
    rep.check("injected coherence violations are detected", attempted > 0 and detected == attempted,
              injected=attempted, detected=detected)


def cmd_tot_check(args, rep: Report) -> None:
    scen = _scenario(args)
    _describe(rep, scen, args)
    level = min(_bound(args, scen), 2)
    rep.data["max_level"] = level
    if scen is not None:
        a = _need_twisting(scen)
        t = tot_from_vertex(a, level, full=True)
        c = sheaf_chern(include_twisting(a), level)
        om = omega_vertex(c, level)
        rep.timed("Omega-side vertex levels are DK cycles", lambda: omega_level_dk(om))
        rep.check("Omega-side vertex coherence", validate_coherence(om)["ok"])
    else:
        rep.data["k"] = args.k
        rep.data["base"] = args.base
        t = random_tot_simplex(args.base, args.k, args.seed, max_level=min(level, 1))
    res = validate_ivb_simplex(t)
    rep.check("coherence", res["coherence"]["ok"], checked=res["coherence"]["checked"])
    rep.check("MC on every maximal path", not res["mc_failures"], cells=res["mc_checked"],
              failures=res["mc_failures"][:2])
    rep.check("edge homotopy witnesses", not res["edge_failures"], edges=res["edges_checked"],
              failures=res["edge_failures"][:2])
    _injection_check(rep, t, args.count, args.seed)


def cmd_homology(args, rep: Report) -> None:
    scen = _scenario(args)
    _describe(rep, scen, args)
    a = _need_twisting(scen)
    res = homology_sheaf(a)
    rep.data["opens"] = {o["open"]: {k: v for k, v in o.items() if k != "open"} for o in res["opens"]}
    rep.data["cohsh"] = res["cohsh"]
    rep.data["exact"] = res["exact"]
    rep.check("edge maps are homology isomorphisms", res["edges_ok"],
              edges={",".join(map(str, e["tuple"])): e["quasi_iso"] for e in res["edges"]})
    _expect_check(rep, scen.expect, "cohsh", res["cohsh"])


def cmd_corpus(args, rep: Report) -> None:
    params = generate_corpus(args.seed, args.count)
    if args.n is not None:
        params = [replace(p, n=args.n) for p in params]
    bound = args.degree_bound if args.degree_bound is not None else DEFAULT_BOUND
    rep.data["seed"] = args.seed
    rep.data["degree_bound"] = bound
    rep.data["instances"] = [p.to_dict() for p in params]
    dims = sorted({p.n for p in params})
    rep.data["dimensions"] = dims
    if args.n is None:
        rep.check("every dimension 1..3 present", set(dims) >= {1, 2, 3}, dimensions=dims)
    for p in params:
        g = RandomSimplex(p).g
        res = mc_check(g, bound)
        rep.check(f"MC equation [n={p.n} seed={p.seed}]", res["ok"], cells=res["checked"], failure=res["failure"])


COMMANDS = {
    "validate": (cmd_validate, "load the input and check its structural equations"),
    "mc-check": (cmd_mc_check, "check the Maurer-Cartan equation through the degree bound"),
    "chern": (cmd_chern, "compute Chern data and check the cocycle condition"),
    "trace-id": (cmd_trace_id, "check the trace identity on a seeded corpus or a simplex scenario"),
    "dk-check": (cmd_dk_check, "check the Chern decoration is a natural DK cycle"),
    "tot-check": (cmd_tot_check, "check a totalization simplex and violation detection"),
    "homology": (cmd_homology, "homology sheaves per open and edge isomorphisms"),
    "corpus": (cmd_corpus, "print a seeded corpus and check every instance"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ivbchern", description="Chern character checks for twisted complexes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--scenario", help="JSON scenario file")
        p.add_argument("--builtin", help=f"built-in twisting cochain: {', '.join(BUILTINS)}")
        p.add_argument("--degree-bound", type=int, default=None,
                       help=f"highest Cech degree checked (default {DEFAULT_BOUND})")
        p.add_argument("--seed", type=int, default=0, help="seed for generated inputs (default 0)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--n", type=int, default=None, help="force the simplex dimension of corpus instances")
        p.add_argument("--count", type=int, default=10, help="corpus size or number of injections (default 10)")
        p.add_argument("--k", type=int, default=1, help="simplex dimension for generated tot data (default 1)")
        p.add_argument("--base", choices=("p1", "interval"), default="p1", help="cover for generated tot data")
        p.add_argument("--timing", action="store_true", help="include wall-clock seconds (not deterministic)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.degree_bound is not None and args.degree_bound < 0:
        print("error: --degree-bound must be non-negative", file=sys.stderr)
        return 2
    if args.n is not None and not 0 <= args.n <= 6:
        print("error: --n must lie in 0..6", file=sys.stderr)
        return 2
    rep = Report(args.command, args)
    try:
        COMMANDS[args.command][0](args, rep)
    except (ScenarioError, InputError, CoverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(rep.render(args.format))
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
