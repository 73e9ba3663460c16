"""Built-in geometries and twisting cochains.

The projective line uses two charts: open 0 with coordinate ``w`` and open 1
with coordinate ``z``, glued on ``U_01 = Spec Q[z, 1/z]`` by ``w = 1/z``.  A
line bundle ``O(n)`` has frames with ``s_w = z^-n s_z``, so its transition
``E_1 -> E_0`` on ``U_01`` is multiplication by ``z^-n``.

The interval cover has three opens on a line, each with coordinate ``x``,
where the two outer opens do not meet.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable

from .cech import CoverModel, TwistingCochain
from .forms import ChartMap, HolForm, LaurentPoly, Ring, laurent_ring, polynomial_ring
from .perf import HomElement, PerfObject


def p1_cover() -> CoverModel:
    ring_w = polynomial_ring("w")
    ring_z = polynomial_ring("z")
    ring_wz = Ring(("z",), frozenset({"z"}))
    return CoverModel(
        opens=["U_w", "U_z"],
        rings={frozenset({0}): ring_w, frozenset({1}): ring_z, frozenset({0, 1}): ring_wz},
        restrictions={
            (frozenset({0}), frozenset({0, 1})): ChartMap(ring_w, ring_wz, {"w": LaurentPoly.var(ring_wz, "z", -1)}),
            (frozenset({1}), frozenset({0, 1})): ChartMap.identity(ring_z, ring_wz),
        },
        name="P1",
        tags=["p1"],
    )


def interval_cover() -> CoverModel:
    ring = polynomial_ring("x")
    keys = [frozenset(s) for s in ({0}, {1}, {2}, {0, 1}, {1, 2})]
    restrictions = {}
    for s in keys:
        for t in keys:
            if s < t:
                restrictions[(s, t)] = ChartMap.identity(ring)
    return CoverModel(
        opens=["I0", "I1", "I2"],
        rings={k: ring for k in keys},
        restrictions=restrictions,
        empty=[{0, 2}],
        name="interval",
    )


def torus_cover(opens: int = 3) -> CoverModel:
    """``opens`` copies of the torus ``Spec Q[x, y, z]`` with all coordinates inverted, glued by the identity."""
    ring = laurent_ring("x", "y", "z")
    keys = [frozenset(s) for r in range(1, opens + 1) for s in combinations(range(opens), r)]
    restrictions = {(s, t): ChartMap.identity(ring) for s in keys for t in keys if s < t and len(t) == len(s) + 1}
    return CoverModel(opens=[f"T{i}" for i in range(opens)], rings={k: ring for k in keys},
                      restrictions=restrictions, name="torus")


def _scalar_map(source: PerfObject, target: PerfObject, degree_values: dict[int, object]) -> HomElement:
    return HomElement.from_blocks(source, target, 0, 0, {q: [[v]] for q, v in degree_values.items()})


def _two_chart(cover: CoverModel, bundles: list[PerfObject],
               forward: Callable[[PerfObject, PerfObject, Ring], HomElement],
               backward: Callable[[PerfObject, PerfObject, Ring], HomElement]) -> TwistingCochain:
    over = {0, 1}
    ring = cover.ring(over)
    e0, e1 = (cover.restrict_bundle(bundles[i], [i], over) for i in (0, 1))
    return TwistingCochain(cover, bundles, {(0, 1): forward(e1, e0, ring), (1, 0): backward(e0, e1, ring)})


def _connection(e: PerfObject, forms: dict[int, HolForm] | None) -> PerfObject:
    if not forms:
        return e
    return e.with_connection({q: [[f]] for q, f in forms.items()})


def p1_line_bundle(n: int, shift: int = 0, connections: tuple | None = None) -> TwistingCochain:
    """``O(n)`` placed in degree ``-shift``; ``connections`` optionally gives a 1-form per chart."""
    cover = p1_cover()
    q = -shift
    conn = connections or (None, None)
    bundles = []
    for i in (0, 1):
        e = PerfObject(cover.ring([i]), {q: 1})
        bundles.append(_connection(e, {q: conn[i]} if conn[i] is not None else None))
    return _two_chart(
        cover, bundles,
        lambda s, t, r: _scalar_map(s, t, {q: LaurentPoly.var(r, "z", -n)}),
        lambda s, t, r: _scalar_map(s, t, {q: LaurentPoly.var(r, "z", n)}),
    )


def p1_tangent() -> TwistingCochain:
    """Tangent bundle: ``d/dz = -z^-2 d/dw`` gives the transition ``-z^-2``."""
    cover = p1_cover()
    bundles = [PerfObject(cover.ring([i]), {0: 1}) for i in (0, 1)]
    return _two_chart(
        cover, bundles,
        lambda s, t, r: _scalar_map(s, t, {0: LaurentPoly.var(r, "z", -2) * -1}),
        lambda s, t, r: _scalar_map(s, t, {0: LaurentPoly.var(r, "z", 2) * -1}),
    )


def p1_skyscraper() -> TwistingCochain:
    """Resolution ``O(-1) -> O`` of the skyscraper at ``z = 0``, in degrees -1 and 0.

    On the ``w`` chart the section ``z`` of ``O(1)`` is the unit ``1``; on the
    ``z`` chart it is ``z``.
    """
    cover = p1_cover()
    e0 = PerfObject(cover.ring([0]), {-1: 1, 0: 1}, differential={-1: [[1]]})
    ring_z = cover.ring([1])
    e1 = PerfObject(ring_z, {-1: 1, 0: 1}, differential={-1: [[LaurentPoly.var(ring_z, "z")]]})
    return _two_chart(
        cover, [e0, e1],
        lambda s, t, r: _scalar_map(s, t, {-1: LaurentPoly.var(r, "z"), 0: 1}),
        lambda s, t, r: _scalar_map(s, t, {-1: LaurentPoly.var(r, "z", -1), 0: 1}),
    )


def p1_split_pair(n: int = 0) -> TwistingCochain:
    """``O(n) + O(n)[1]`` with zero differential: homology in degrees -1 and 0."""
    cover = p1_cover()
    bundles = [PerfObject(cover.ring([i]), {-1: 1, 0: 1}) for i in (0, 1)]
    return _two_chart(
        cover, bundles,
        lambda s, t, r: _scalar_map(s, t, {-1: LaurentPoly.var(r, "z", -n), 0: LaurentPoly.var(r, "z", -n)}),
        lambda s, t, r: _scalar_map(s, t, {-1: LaurentPoly.var(r, "z", n), 0: LaurentPoly.var(r, "z", n)}),
    )


def interval_bundle() -> TwistingCochain:
    """Rank-2 bundle on the interval cover glued by unipotent polynomial matrices."""
    cover = interval_cover()
    ring = cover.ring([0])
    x = LaurentPoly.var(ring, "x")
    bundles = [PerfObject(ring, {0: 2}) for _ in range(3)]
    mats = {(0, 1): [[1, x], [0, 1]], (1, 0): [[1, -x], [0, 1]],
            (1, 2): [[1, 0], [x * x, 1]], (2, 1): [[1, 0], [-(x * x), 1]]}
    comps = {}
    for (i, j), m in mats.items():
        s, t = cover.restrict_bundle(bundles[j], [j], {i, j}), cover.restrict_bundle(bundles[i], [i], {i, j})
        comps[(i, j)] = HomElement.from_blocks(s, t, 0, 0, {0: m})
    return TwistingCochain(cover, bundles, comps)


BUILTINS: dict[str, tuple[str, Callable[[], TwistingCochain], dict]] = {}


def _register(name: str, description: str, build: Callable[[], TwistingCochain], **expected) -> None:
    BUILTINS[name] = (description, build, expected)


for _n in range(-3, 4):
    _register(f"O({_n})", f"line bundle O({_n}) on the projective line",
              lambda _n=_n: p1_line_bundle(_n), cohsh=True, class_coefficient=_n, euler=1)
_register("tangent", "tangent bundle of the projective line", p1_tangent,
          cohsh=True, class_coefficient=2, euler=1)
_register("skyscraper", "resolution O(-1) -> O of the skyscraper at z = 0", p1_skyscraper,
          cohsh=True, class_coefficient=1, euler=0)
_register("O(1)[1]", "line bundle O(1) shifted into degree -1", lambda: p1_line_bundle(1, shift=1),
          cohsh=False, class_coefficient=-1, euler=-1)
_register("split-pair", "O + O[1] with zero differential", p1_split_pair,
          cohsh=False, class_coefficient=0, euler=0)
_register("interval", "rank-2 bundle on the three-open interval cover", interval_bundle,
          cohsh=True, euler=2)


def builtin(name: str) -> TwistingCochain:
    try:
        return BUILTINS[name][1]()
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}") from None


def builtin_expectations(name: str) -> dict:
    return dict(BUILTINS[name][2])
