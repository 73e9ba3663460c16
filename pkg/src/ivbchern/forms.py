"""Exact Laurent polynomials and holomorphic differential forms over named coordinates.

Coefficients are rationals (``int`` or :class:`fractions.Fraction`).  A form is a
sparse map from ``(generator mask, exponent vector)`` to a coefficient, where bit
``i`` of the mask stands for ``d(coords[i])``.  Zero coefficients are never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping

Scalar = int | Fraction


class FormError(ValueError):
    """Raised for coordinate mismatches, malformed terms and non-invertible pullbacks."""


def parse_scalar(text: str | int | Fraction) -> Scalar:
    """Parse ``"p/q"`` or ``"p"`` into an exact rational."""
    if isinstance(text, bool):
        raise FormError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return normalize_scalar(text)
    try:
        return normalize_scalar(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise FormError(f"not a rational: {text!r}") from exc


def normalize_scalar(c: Rational) -> Scalar:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    if isinstance(c, (int, Fraction)):
        return c
    return Fraction(c)


def format_scalar(c: Scalar) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class Ring:
    """Coordinate ring: Laurent in the ``invertible`` coordinates, polynomial in the rest.

    ``invertible=None`` makes every coordinate invertible.
    """

    coords: tuple[str, ...]
    invertible: frozenset[str] | None = field(default=None)

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(set(coords)) != len(coords):
            raise FormError(f"repeated coordinate names in {coords}")
        object.__setattr__(self, "coords", coords)
        inv = frozenset(coords) if self.invertible is None else frozenset(self.invertible)
        if not inv <= set(coords):
            raise FormError(f"invertible coordinates {sorted(inv - set(coords))} not in {coords}")
        object.__setattr__(self, "invertible", inv)

    @property
    def nvars(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise FormError(f"unknown coordinate {name!r} in {self.coords}") from None

    def admits(self, exps: tuple[int, ...]) -> bool:
        """True when the monomial with these exponents lies in the ring."""
        return all(e >= 0 or name in self.invertible for e, name in zip(exps, self.coords))

    def zero_exps(self) -> tuple[int, ...]:
        return (0,) * len(self.coords)


def polynomial_ring(*coords: str) -> Ring:
    return Ring(tuple(coords), frozenset())


def laurent_ring(*coords: str) -> Ring:
    return Ring(tuple(coords))


@lru_cache(maxsize=None)
def wedge_sign(a: int, b: int) -> int:
    """Sign of sorting the generators of ``a`` followed by those of ``b`` (disjoint masks)."""
    swaps = 0
    y = 0
    bb = b
    while bb:
        if bb & 1:
            swaps += bin(a >> (y + 1)).count("1")
        bb >>= 1
        y += 1
    return -1 if swaps & 1 else 1


def _popcount(m: int) -> int:
    return bin(m).count("1")


def mask_to_gens(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def gens_to_mask(gens: Iterable[int]) -> int:
    m = 0
    for g in gens:
        if m >> g & 1:
            raise FormError(f"repeated generator {g}")
        m |= 1 << g
    return m


def _exp_key(e: tuple[int, ...]):
    return (sum(e), e)


def _addto(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class LaurentPoly:
    """Sparse Laurent polynomial: ``terms`` maps exponent tuples to nonzero rationals."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, ...], Scalar] | None = None):
        self.ring = ring
        self.terms = {}
        if terms:
            n = ring.nvars
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != n:
                    raise FormError(f"exponent {e} has wrong length for {ring.coords}")
                if c:
                    _addto(self.terms, e, c)

    @classmethod
    def _raw(cls, ring: Ring, terms: dict) -> LaurentPoly:
        p = cls.__new__(cls)
        p.ring = ring
        p.terms = terms
        return p

    @classmethod
    def const(cls, ring: Ring, c: Scalar) -> LaurentPoly:
        return cls._raw(ring, {ring.zero_exps(): c} if c else {})

    @classmethod
    def var(cls, ring: Ring, name: str, power: int = 1) -> LaurentPoly:
        e = [0] * ring.nvars
        e[ring.index(name)] = power
        return cls._raw(ring, {tuple(e): 1})

    @classmethod
    def monomial(cls, ring: Ring, exps: Iterable[int], c: Scalar = 1) -> LaurentPoly:
        return cls(ring, {tuple(exps): c})

    def _check(self, other: LaurentPoly) -> None:
        if other.ring.coords != self.ring.coords:
            raise FormError(f"coordinate mismatch: {self.ring.coords} vs {other.ring.coords}")

    def _coerce(self, other) -> LaurentPoly:
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(self.ring, other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            _addto(out, e, c)
        return LaurentPoly._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return LaurentPoly._raw(self.ring, {})
            return LaurentPoly._raw(self.ring, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                _addto(out, tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
        return LaurentPoly._raw(self.ring, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.const(self.ring, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.ring.coords == other.ring.coords and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring.coords, frozenset(self.terms.items())))

    def unit_inverse(self) -> LaurentPoly:
        """Inverse of a unit ``c * monomial``; raises if the element is not such a unit."""
        if len(self.terms) != 1:
            raise FormError(f"{self} is not a unit (scalar times monomial)")
        (e, c), = self.terms.items()
        inv = tuple(-x for x in e)
        if not self.ring.admits(inv):
            raise FormError(f"{self} is not invertible in {self.ring}")
        return LaurentPoly._raw(self.ring, {inv: normalize_scalar(1 / Fraction(c))})

    def __pow__(self, k: int):
        if k < 0:
            return self.unit_inverse() ** (-k)
        out = LaurentPoly.const(self.ring, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def derivative(self, i: int) -> LaurentPoly:
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = c * e[i]
        return LaurentPoly._raw(self.ring, out)

    def in_ring(self) -> bool:
        return all(self.ring.admits(e) for e in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _exp_key(t[0]))

    def __str__(self):
        return _poly_str(self.ring, self.terms)

    def __repr__(self):
        return f"LaurentPoly({self})"


def _mono_str(ring: Ring, e: tuple[int, ...]) -> str:
    parts = []
    for name, k in zip(ring.coords, e):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def _poly_str(ring: Ring, terms: dict) -> str:
    if not terms:
        return "0"
    out = []
    for e, c in sorted(terms.items(), key=lambda t: _exp_key(t[0])):
        m = _mono_str(ring, e)
        out.append(f"{c}*{m}" if m else f"{c}")
    return " + ".join(out)


class HolForm:
    """Holomorphic differential form with Laurent coefficients.

    ``terms`` maps ``(mask, exps)`` to a nonzero rational; ``mask`` selects the
    wedge of coordinate differentials in increasing order.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, tuple[int, ...]], Scalar] | None = None):
        self.ring = ring
        self.terms = {}
        if terms:
            n = ring.nvars
            for (mask, e), c in terms.items():
                e = tuple(e)
                if len(e) != n or mask < 0 or mask >> n:
                    raise FormError(f"malformed form term {(mask, e)} for {ring.coords}")
                if c:
                    _addto(self.terms, (mask, e), c)

    @classmethod
    def _raw(cls, ring: Ring, terms: dict) -> HolForm:
        f = cls.__new__(cls)
        f.ring = ring
        f.terms = terms
        return f

    @classmethod
    def zero(cls, ring: Ring) -> HolForm:
        return cls._raw(ring, {})

    @classmethod
    def function(cls, p: LaurentPoly | Scalar, ring: Ring | None = None) -> HolForm:
        if isinstance(p, LaurentPoly):
            return cls._raw(p.ring, {(0, e): c for e, c in p.terms.items()})
        if ring is None:
            raise FormError("a ring is needed to embed a scalar")
        return cls._raw(ring, {(0, ring.zero_exps()): p} if p else {})

    @classmethod
    def differential(cls, ring: Ring, name: str) -> HolForm:
        """The 1-form ``d(name)``."""
        return cls._raw(ring, {(1 << ring.index(name), ring.zero_exps()): 1})

    @classmethod
    def from_parts(cls, coeff: LaurentPoly, gens: Iterable[str]) -> HolForm:
        """``coeff * d(g1) ^ d(g2) ^ ...`` with the sign from sorting the generators."""
        ring = coeff.ring
        out = cls.function(coeff)
        for g in gens:
            out = out.wedge(cls.differential(ring, g))
        return out

    def _check(self, other: HolForm) -> None:
        if other.ring.coords != self.ring.coords:
            raise FormError(f"coordinate mismatch: {self.ring.coords} vs {other.ring.coords}")

    def _coerce(self, other):
        if isinstance(other, HolForm):
            self._check(other)
            return other
        if isinstance(other, LaurentPoly):
            self._check_poly(other)
            return HolForm.function(other)
        if isinstance(other, (int, Fraction)):
            return HolForm.function(other, self.ring)
        return NotImplemented

    def _check_poly(self, p: LaurentPoly) -> None:
        if p.ring.coords != self.ring.coords:
            raise FormError(f"coordinate mismatch: {self.ring.coords} vs {p.ring.coords}")

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def degrees(self) -> set[int]:
        return {_popcount(m) for m, _ in self.terms}

    def degree(self) -> int | None:
        """Form degree if homogeneous; ``None`` for the zero form; raises if mixed."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise FormError(f"form is not homogeneous (degrees {sorted(ds)})")
        return next(iter(ds))

    def component(self, k: int) -> HolForm:
        return HolForm._raw(self.ring, {t: c for t, c in self.terms.items() if _popcount(t[0]) == k})

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for t, c in other.terms.items():
            _addto(out, t, c)
        return HolForm._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return HolForm._raw(self.ring, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> HolForm:
        if not c:
            return HolForm._raw(self.ring, {})
        return HolForm._raw(self.ring, {t: v * c for t, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return self.wedge(other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def wedge(self, other) -> HolForm:
        other = self._coerce(other)
        if other is NotImplemented:
            raise TypeError(f"cannot wedge with {type(other).__name__}")
        out: dict = {}
        for (m1, e1), c1 in self.terms.items():
            for (m2, e2), c2 in other.terms.items():
                if m1 & m2:
                    continue
                c = c1 * c2
                if wedge_sign(m1, m2) < 0:
                    c = -c
                _addto(out, (m1 | m2, tuple(a + b for a, b in zip(e1, e2))), c)
        return HolForm._raw(self.ring, out)

    def ext_d(self) -> HolForm:
        out: dict = {}
        for (m, e), c in self.terms.items():
            for i, k in enumerate(e):
                if not k or m >> i & 1:
                    continue
                below = _popcount(m & ((1 << i) - 1))
                v = c * k
                if below & 1:
                    v = -v
                _addto(out, (m | 1 << i, e[:i] + (k - 1,) + e[i + 1:]), v)
        return HolForm._raw(self.ring, out)

    def coefficient(self, gens: Iterable[str], exps: Iterable[int]) -> Scalar:
        mask = gens_to_mask(self.ring.index(g) for g in gens)
        return self.terms.get((mask, tuple(exps)), 0)

    def in_ring(self) -> bool:
        return all(self.ring.admits(e) for _, e in self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, LaurentPoly)):
            other = self._coerce(other)
        if not isinstance(other, HolForm):
            return NotImplemented
        return self.ring.coords == other.ring.coords and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring.coords, frozenset(self.terms.items())))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (_popcount(t[0][0]), mask_to_gens(t[0][0]), _exp_key(t[0][1])))

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for (m, e), c in self.sorted_terms():
            parts = [str(c)]
            mono = _mono_str(self.ring, e)
            if mono:
                parts.append(mono)
            if m:
                parts.append("^".join(f"d{self.ring.coords[g]}" for g in mask_to_gens(m)))
            out.append("*".join(parts))
        return " + ".join(out)

    def __repr__(self):
        return f"HolForm({self})"


def wedge(a: HolForm, b: HolForm) -> HolForm:
    return a.wedge(b)


def ext_d(a: HolForm) -> HolForm:
    return a.ext_d()


class ChartMap:
    """Ring map sending each source coordinate to a Laurent polynomial in target coordinates.

    Pulling back along it moves functions and forms from the source ring to the
    target ring.
    """

    def __init__(self, source: Ring, target: Ring, assignment: Mapping[str, LaurentPoly]):
        if set(assignment) != set(source.coords):
            raise FormError(f"assignment keys {sorted(assignment)} must equal source coordinates {source.coords}")
        self.source = source
        self.target = target
        self.images: tuple[LaurentPoly, ...] = tuple(_as_poly(assignment[c], target) for c in source.coords)
        for name, img in zip(source.coords, self.images):
            if not img.in_ring():
                raise FormError(f"image of {name} is not in the target ring {target}")
        self._dimages = tuple(HolForm.function(p).ext_d() for p in self.images)
        self._pow_cache: dict[tuple[int, int], LaurentPoly] = {}
        self._mono_cache: dict[tuple[int, ...], LaurentPoly] = {}
        self._mask_cache: dict[int, HolForm] = {}

    @classmethod
    def identity(cls, ring: Ring, target: Ring | None = None) -> ChartMap:
        target = target or ring
        return cls(ring, target, {c: LaurentPoly.var(target, c) for c in ring.coords})

    def _power(self, i: int, k: int) -> LaurentPoly:
        key = (i, k)
        p = self._pow_cache.get(key)
        if p is None:
            img = self.images[i]
            if k < 0:
                try:
                    p = img.unit_inverse() ** (-k)
                except FormError:
                    raise FormError(
                        f"cannot pull back {self.source.coords[i]}^{k}: image {img} is not a unit"
                    ) from None
            else:
                p = img ** k
            self._pow_cache[key] = p
        return p

    def _monomial(self, e: tuple[int, ...]) -> LaurentPoly:
        p = self._mono_cache.get(e)
        if p is None:
            p = LaurentPoly.const(self.target, 1)
            for i, k in enumerate(e):
                if k:
                    p = p * self._power(i, k)
            self._mono_cache[e] = p
        return p

    def _gens(self, mask: int) -> HolForm:
        f = self._mask_cache.get(mask)
        if f is None:
            f = HolForm.function(1, self.target)
            for g in mask_to_gens(mask):
                f = f.wedge(self._dimages[g])
            self._mask_cache[mask] = f
        return f

    def pullback_poly(self, p: LaurentPoly) -> LaurentPoly:
        if p.ring.coords != self.source.coords:
            raise FormError(f"pullback source mismatch: {p.ring.coords} vs {self.source.coords}")
        out: dict = {}
        for e, c in p.terms.items():
            for e2, c2 in self._monomial(e).terms.items():
                _addto(out, e2, c * c2)
        return LaurentPoly._raw(self.target, out)

    def pullback(self, a: HolForm | LaurentPoly) -> HolForm | LaurentPoly:
        if isinstance(a, LaurentPoly):
            return self.pullback_poly(a)
        if a.ring.coords != self.source.coords:
            raise FormError(f"pullback source mismatch: {a.ring.coords} vs {self.source.coords}")
        out: dict = {}
        for (m, e), c in a.terms.items():
            mono = self._monomial(e)
            if m == 0:
                for e2, c2 in mono.terms.items():
                    _addto(out, (0, e2), c * c2)
                continue
            piece = HolForm.function(mono).wedge(self._gens(m))
            for t, c2 in piece.terms.items():
                _addto(out, t, c * c2)
        return HolForm._raw(self.target, out)

    def then(self, other: ChartMap) -> ChartMap:
        """Map whose pullback is ``other.pullback(self.pullback(.))``."""
        if other.source.coords != self.target.coords:
            raise FormError(f"cannot compose: {self.target.coords} vs {other.source.coords}")
        return ChartMap(self.source, other.target,
                        {c: other.pullback_poly(img) for c, img in zip(self.source.coords, self.images)})

    def __eq__(self, other):
        if not isinstance(other, ChartMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.images == other.images)

    def __hash__(self):
        return hash((self.source, self.target, self.images))

    def __repr__(self):
        body = ", ".join(f"{c} -> {img}" for c, img in zip(self.source.coords, self.images))
        return f"ChartMap({body})"


def compose(phi: ChartMap, psi: ChartMap) -> ChartMap:
    """Chart map with ``pullback(compose(phi, psi), a) == pullback(psi, pullback(phi, a))``."""
    return phi.then(psi)


def pullback(phi: ChartMap, a):
    return phi.pullback(a)


def _as_poly(x, ring: Ring) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        if x.ring.coords != ring.coords:
            raise FormError(f"coordinate mismatch: {x.ring.coords} vs {ring.coords}")
        return LaurentPoly._raw(ring, dict(x.terms))
    if isinstance(x, (int, Fraction)):
        return LaurentPoly.const(ring, x)
    raise FormError(f"expected a Laurent polynomial, got {type(x).__name__}")


# Serialization: lists of {"exp": [...], "gens": [...], "coef": "p/q"} records.

def poly_to_records(p: LaurentPoly) -> list[dict]:
    return [{"exp": list(e), "coef": format_scalar(c)} for e, c in p.sorted_terms()]


def poly_from_records(ring: Ring, records: list) -> LaurentPoly:
    terms: dict = {}
    for r in records:
        e = tuple(int(x) for x in r["exp"])
        if len(e) != ring.nvars:
            raise FormError(f"exponent {list(e)} has wrong length for {ring.coords}")
        _addto(terms, e, parse_scalar(r["coef"]))
    return LaurentPoly._raw(ring, terms)


def form_to_records(f: HolForm) -> list[dict]:
    return [{"exp": list(e), "gens": list(mask_to_gens(m)), "coef": format_scalar(c)}
            for (m, e), c in f.sorted_terms()]


def form_from_records(ring: Ring, records: list) -> HolForm:
    terms: dict = {}
    for r in records:
        e = tuple(int(x) for x in r["exp"])
        gens = [int(g) for g in r.get("gens", [])]
        if len(e) != ring.nvars or any(g < 0 or g >= ring.nvars for g in gens):
            raise FormError(f"malformed form record {r} for {ring.coords}")
        if gens != sorted(gens):
            raise FormError(f"generator subset {gens} is not sorted")
        _addto(terms, (gens_to_mask(gens), e), parse_scalar(r["coef"]))
    return HolForm._raw(ring, terms)
