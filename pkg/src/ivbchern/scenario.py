"""JSON scenario files: covers, local complexes and twisting or MC data.

Rationals are written as ``"p/q"`` strings.  A matrix entry is either such a
string (a constant function) or a list of monomial records
``{"coef": "p/q", "exp": [...], "gens": [...]}`` where ``gens`` lists the
indices of the coordinate differentials (omitted for functions).

Two kinds of scenario exist:

* ``"twisting"``: a cover with a twisting cochain, given by a table of
  components, a built-in name, or a generator rule.
* ``"simplex"``: an MC element on the extended simplex over one ring, given
  by a table of components or a generator rule.

Loading validates shapes and rejects local differentials with ``d o d != 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .builtins import BUILTINS, builtin, builtin_expectations
from .cech import CoverError, CoverModel, TwistingCochain
from .cochains import CochainError, MCElement
from .forms import (ChartMap, FormError, HolForm, LaurentPoly, Ring, form_from_records, form_to_records,
                    format_scalar, parse_scalar, poly_from_records, poly_to_records)
from .perf import HomElement, PerfError, PerfObject

FORMAT = "ivbchern-scenario/1"


class ScenarioError(ValueError):
    """Malformed scenario; ``location`` is ``line:column`` or a JSON pointer."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass
class Scenario:
    kind: str
    twisting: TwistingCochain | None = None
    simplex: MCElement | None = None
    source: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)
    degree_bound: int | None = None


def dumps(obj: Any) -> str:
    """The one canonical printer: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# reading helpers

def _at(path: str, key) -> str:
    return f"{path}/{key}"


def _need(obj: Any, key: str, path: str, kind=None):
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", path)
    if key not in obj:
        raise ScenarioError(f"missing key {key!r}", path)
    v = obj[key]
    if kind is not None and (not isinstance(v, kind) or isinstance(v, bool)):
        raise ScenarioError(f"expected {getattr(kind, '__name__', kind)}", _at(path, key))
    return v


def _int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ScenarioError("expected an integer", path)
    try:
        return int(v)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {v!r}", path) from None


def _index_list(v, path: str) -> list[int]:
    if not isinstance(v, list):
        raise ScenarioError("expected a list of integers", path)
    return [_int(x, _at(path, i)) for i, x in enumerate(v)]


def _entry(v, ring: Ring, path: str) -> HolForm:
    try:
        if isinstance(v, (str, int)) and not isinstance(v, bool):
            return HolForm.function(parse_scalar(v), ring)
        if isinstance(v, list):
            for i, r in enumerate(v):
                if not isinstance(r, dict) or "coef" not in r or "exp" not in r:
                    raise ScenarioError("monomial record needs 'coef' and 'exp'", _at(path, i))
            return form_from_records(ring, v)
    except FormError as exc:
        raise ScenarioError(str(exc), path) from None
    raise ScenarioError("matrix entry must be a rational string or a list of records", path)


def _matrix(v, ring: Ring, path: str) -> list[list[HolForm]]:
    if not isinstance(v, list) or any(not isinstance(r, list) for r in v):
        raise ScenarioError("expected a matrix (list of rows)", path)
    return [[_entry(x, ring, _at(_at(path, i), j)) for j, x in enumerate(row)] for i, row in enumerate(v)]


def _blocks(v, ring: Ring, path: str) -> dict[int, list]:
    if not isinstance(v, dict):
        raise ScenarioError("expected an object keyed by degree", path)
    return {_int(q, _at(path, q)): _matrix(m, ring, _at(path, q)) for q, m in v.items()}


def _ring(v, path: str) -> Ring:
    coords = _need(v, "coords", path, list)
    inv = v.get("invertible", [])
    if not isinstance(inv, list):
        raise ScenarioError("expected a list of coordinate names", _at(path, "invertible"))
    try:
        return Ring(tuple(str(c) for c in coords), frozenset(str(c) for c in inv))
    except FormError as exc:
        raise ScenarioError(str(exc), path) from None


def _bundle(v, ring: Ring, path: str) -> PerfObject:
    ranks = _need(v, "ranks", path, dict)
    ranks = {_int(q, _at(_at(path, "ranks"), q)): _int(r, _at(_at(path, "ranks"), q)) for q, r in ranks.items()}
    diff = _blocks(v.get("differential", {}), ring, _at(path, "differential"))
    conn = _blocks(v.get("connection", {}), ring, _at(path, "connection"))
    try:
        return PerfObject(ring, ranks, differential=diff, connection=conn)
    except (PerfError, FormError) as exc:
        raise ScenarioError(str(exc), path) from None


def _cover(v, path: str) -> CoverModel:
    opens = _need(v, "opens", path, list)
    rings = {}
    for i, r in enumerate(_need(v, "rings", path, list)):
        p = _at(_at(path, "rings"), i)
        rings[frozenset(_index_list(_need(r, "opens", p), _at(p, "opens")))] = _ring(r, p)
    restrictions = {}
    for i, r in enumerate(v.get("restrictions", [])):
        p = _at(_at(path, "restrictions"), i)
        s = frozenset(_index_list(_need(r, "from", p), _at(p, "from")))
        t = frozenset(_index_list(_need(r, "to", p), _at(p, "to")))
        if s not in rings or t not in rings:
            raise ScenarioError("restriction between undefined intersections", p)
        images = _need(r, "images", p, dict)
        try:
            assignment = {name: poly_from_records(rings[t], recs) for name, recs in images.items()}
            restrictions[(s, t)] = ChartMap(rings[s], rings[t], assignment)
        except (FormError, KeyError, TypeError) as exc:
            raise ScenarioError(str(exc), _at(p, "images")) from None
    empty = [_index_list(e, _at(_at(path, "empty"), i)) for i, e in enumerate(v.get("empty", []))]
    try:
        cover = CoverModel([str(o) for o in opens], rings, restrictions, empty=empty,
                           name=str(v.get("name", "")), tags=v.get("tags", []))
    except CoverError as exc:
        raise ScenarioError(str(exc), path) from None
    report = cover.check_functoriality()
    if not report["ok"]:
        raise ScenarioError(f"restrictions do not compose: {report}", _at(path, "restrictions"))
    return cover


def _twisting_table(doc: dict) -> TwistingCochain:
    cover = _cover(_need(doc, "cover", ""), "/cover")
    raw = _need(doc, "bundles", "", list)
    if len(raw) != len(cover.opens):
        raise ScenarioError(f"expected {len(cover.opens)} bundles, one per open", "/bundles")
    bundles = [_bundle(b, cover.ring([i]), f"/bundles/{i}") for i, b in enumerate(raw)]
    comps = {}
    for i, c in enumerate(doc.get("components", [])):
        p = f"/components/{i}"
        tup = tuple(_index_list(_need(c, "tuple", p), _at(p, "tuple")))
        if len(tup) < 2 or any(not 0 <= x < len(cover.opens) for x in tup):
            raise ScenarioError("tuple must name at least two opens of the cover", _at(p, "tuple"))
        if cover.is_empty(tup):
            raise ScenarioError("tuple names an empty intersection", _at(p, "tuple"))
        over = set(tup)
        ring = cover.ring(over)
        src, tgt = (cover.restrict_bundle(bundles[x], [x], over) for x in (tup[-1], tup[0]))
        try:
            comps[tup] = HomElement.from_blocks(src, tgt, 2 - len(tup), 0,
                                                _blocks(_need(c, "blocks", p), ring, _at(p, "blocks")))
        except (PerfError, FormError) as exc:
            raise ScenarioError(str(exc), p) from None
    try:
        return TwistingCochain(cover, bundles, comps)
    except CoverError as exc:
        raise ScenarioError(str(exc), "/components") from None


def _simplex_table(doc: dict) -> MCElement:
    ring = _ring(_need(doc, "ring", ""), "/ring")
    raw = _need(doc, "labeling", "", list)
    if not raw:
        raise ScenarioError("labeling must list at least one complex", "/labeling")
    labeling = [_bundle(b, ring, f"/labeling/{i}") for i, b in enumerate(raw)]
    table = {}
    for i, c in enumerate(doc.get("components", [])):
        p = f"/components/{i}"
        cell = tuple(_index_list(_need(c, "cell", p), _at(p, "cell")))
        if len(cell) < 2 or any(not 0 <= x < len(labeling) for x in cell):
            raise ScenarioError("cell must have length >= 2 with vertices in the labeling", _at(p, "cell"))
        try:
            table[cell] = HomElement.from_blocks(labeling[cell[-1]], labeling[cell[0]], 2 - len(cell), 0,
                                                 _blocks(_need(c, "blocks", p), ring, _at(p, "blocks")))
        except (PerfError, FormError) as exc:
            raise ScenarioError(str(exc), p) from None
    try:
        return MCElement.from_table(labeling, table)
    except CochainError as exc:
        raise ScenarioError(str(exc), "/components") from None


def _from_rule(kind: str, rule: dict) -> tuple[TwistingCochain | MCElement, dict]:
    from .corpus import random_interval_twisting, random_p1_twisting, random_simplex, random_torus_twisting

    gen = _need(rule, "generator", "/rule", str)
    seed = _int(rule.get("seed", 0), "/rule/seed")
    if kind == "simplex":
        if gen != "random-simplex":
            raise ScenarioError(f"unknown simplex generator {gen!r}", "/rule/generator")
        n = _int(_need(rule, "n", "/rule"), "/rule/n")
        if not 0 <= n <= 6:
            raise ScenarioError("n must lie in 0..6", "/rule/n")
        return random_simplex(n, seed).g, {}
    if gen == "random-p1":
        rt, degree = random_p1_twisting(seed)
        return rt.a, {"class_coefficient": degree}
    if gen == "random-interval":
        return random_interval_twisting(seed).a, {}
    if gen == "random-torus":
        return random_torus_twisting(seed).a, {}
    raise ScenarioError(f"unknown twisting generator {gen!r}", "/rule/generator")


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object", "")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise ScenarioError(f"unsupported format {fmt!r}", "/format")
    kind = _need(doc, "kind", "", str)
    if kind not in ("twisting", "simplex"):
        raise ScenarioError(f"kind must be 'twisting' or 'simplex', not {kind!r}", "/kind")
    expect = doc.get("expect", {})
    if not isinstance(expect, dict):
        raise ScenarioError("expected an object", "/expect")
    bound = doc.get("degree_bound")
    bound = None if bound is None else _int(bound, "/degree_bound")
    if kind == "simplex" and "builtin" in doc:
        raise ScenarioError("built-ins are twisting cochains", "/builtin")
    if "builtin" in doc and "rule" in doc:
        raise ScenarioError("give either a builtin or a rule, not both", "")
    if "builtin" in doc:
        name = _need(doc, "builtin", "", str)
        if name not in BUILTINS:
            raise ScenarioError(f"unknown builtin {name!r}", "/builtin")
        merged = {**builtin_expectations(name), **expect}
        return Scenario("twisting", twisting=builtin(name), source={"builtin": name}, expect=merged,
                        degree_bound=bound)
    if "rule" in doc:
        obj, implied = _from_rule(kind, _need(doc, "rule", "", dict))
        merged = {**implied, **expect}
        src = {"rule": doc["rule"]}
        if kind == "simplex":
            return Scenario(kind, simplex=obj, source=src, expect=merged, degree_bound=bound)
        return Scenario(kind, twisting=obj, source=src, expect=merged, degree_bound=bound)
    if kind == "twisting":
        return Scenario(kind, twisting=_twisting_table(doc), source={"table": True}, expect=expect,
                        degree_bound=bound)
    return Scenario(kind, simplex=_simplex_table(doc), source={"table": True}, expect=expect, degree_bound=bound)


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return scenario_from_dict(doc)


def load(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        return loads(text)
    except ScenarioError as exc:
        loc = f"{path}: {exc.location}" if exc.location else str(path)
        raise ScenarioError(str(exc).split(": ", 1)[-1] if exc.location else str(exc), loc) from None


# writing

def _entry_out(f: HolForm):
    if f.is_zero():
        return "0/1"
    terms = f.sorted_terms()
    if len(terms) == 1:
        (m, e), c = terms[0]
        if m == 0 and not any(e):
            return format_scalar(c)
    return form_to_records(f)


def _blocks_out(h: HomElement) -> dict:
    out = {}
    for p, mat in sorted(h.blocks().items()):
        if any(not f.is_zero() for row in mat for f in row):
            out[str(p)] = [[_entry_out(f) for f in row] for row in mat]
    return out


def _ring_out(r: Ring) -> dict:
    return {"coords": list(r.coords), "invertible": [c for c in r.coords if c in r.invertible]}


def _bundle_out(e: PerfObject) -> dict:
    out = {"ranks": {str(q): r for q, r in e.ranks.items()}}
    d, c = _blocks_out(e.d), _blocks_out(e.connection)
    if d:
        out["differential"] = d
    if c:
        out["connection"] = c
    return out


def _cover_out(cover: CoverModel) -> dict:
    rings = [{"opens": sorted(k), **_ring_out(r)} for k, r in sorted(cover.rings.items(),
                                                                     key=lambda kv: (len(kv[0]), sorted(kv[0])))]
    restrictions = []
    for (s, t), phi in sorted(cover._direct.items(), key=lambda kv: (sorted(kv[0][0]), sorted(kv[0][1]))):
        restrictions.append({"from": sorted(s), "to": sorted(t),
                             "images": {c: poly_to_records(p) for c, p in zip(phi.source.coords, phi.images)}})
    out = {"opens": list(cover.opens), "rings": rings, "restrictions": restrictions,
           "empty": sorted(sorted(e) for e in cover.empty)}
    if cover.name:
        out["name"] = cover.name
    if cover.tags:
        out["tags"] = sorted(cover.tags)
    return out


def twisting_to_dict(a: TwistingCochain, expect: dict | None = None) -> dict:
    comps = [{"tuple": list(t), "blocks": _blocks_out(h)} for t, h in sorted(a.components.items())
             if not h.is_zero()]
    doc = {"format": FORMAT, "kind": "twisting", "cover": _cover_out(a.cover),
           "bundles": [_bundle_out(e) for e in a.bundles], "components": comps}
    if expect:
        doc["expect"] = expect
    return doc


def simplex_to_dict(g: MCElement, bound: int) -> dict:
    from .simplicial import enum_nondegenerate

    comps = []
    for p in range(1, bound + 1):
        for cell in enum_nondegenerate(g.n, p):
            h = g(cell)
            if h is not None:
                comps.append({"cell": list(cell), "blocks": _blocks_out(h)})
    return {"format": FORMAT, "kind": "simplex", "ring": _ring_out(g.ring),
            "labeling": [_bundle_out(e) for e in g.labeling], "components": comps}
