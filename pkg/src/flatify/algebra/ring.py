"""Polynomial rings over QQ, optionally modulo an ideal, and their elements."""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from gmpy2 import mpq

from . import groebner as gb
from .orders import DEGREVLEX, Exp, TermOrder

Scalar = Union[int, Fraction, "mpq"]


def to_mpq(c) -> mpq:
    if isinstance(c, Fraction):
        return mpq(c.numerator, c.denominator)
    return mpq(c)


class RingMismatch(ValueError):
    pass


class PolyRing:
    """``QQ[variables] / quotient`` with a fixed term order.

    The quotient is stored through its reduced Groebner basis in the
    ambient polynomial ring; elements are kept in normal form.
    """

    def __init__(self, variables: Sequence[str], order: TermOrder = DEGREVLEX,
                 quotient: Iterable = ()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        self.variables = variables
        self.order = order
        self.nvars = len(variables)
        self.key = order.key_function(self.nvars)
        if order.name == "block" and order.split > self.nvars:
            raise ValueError("block order does not partition the variables")
        raw = [_raw_of(q, self) for q in quotient]
        self.quotient_gb: Tuple[Dict[Exp, mpq], ...] = tuple(
            gb.buchberger([r for r in raw if r], self.key, order.name != "degrevlex"))
        self._divisors = gb.divisors_of(self.quotient_gb, self.key)
        self._index = {v: i for i, v in enumerate(variables)}

    # identity -----------------------------------------------------------
    @cached_property
    def _ident(self):
        q = tuple(tuple(sorted(g.items())) for g in self.quotient_gb)
        return (self.variables, self.order, q)

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self._ident == other._ident

    def __hash__(self):
        return hash(self._ident)

    def __repr__(self):
        s = f"QQ[{','.join(self.variables)}]"
        if self.quotient_gb:
            s += "/(" + ", ".join(str(g) for g in self.quotient_polys) + ")"
        return s

    # construction helpers ------------------------------------------------
    @property
    def is_quotient(self) -> bool:
        return bool(self.quotient_gb)

    @cached_property
    def ambient(self) -> "PolyRing":
        if not self.quotient_gb:
            return self
        return PolyRing(self.variables, self.order)

    @property
    def quotient_polys(self) -> List["Poly"]:
        return [Poly(self.ambient, g, _normal=True) for g in self.quotient_gb]

    def with_quotient(self, polys: Iterable) -> "PolyRing":
        extra = [_raw_of(p, self.ambient) for p in polys]
        return PolyRing(self.variables, self.order, list(self.quotient_gb) + extra)

    def with_order(self, order: TermOrder) -> "PolyRing":
        return PolyRing(self.variables, order, self.quotient_gb)

    def extend_front(self, names: Sequence[str], first: TermOrder = DEGREVLEX
                     ) -> "PolyRing":
        """Prepend variables in an elimination block order."""
        k = len(names)
        pad = (0,) * k
        q = [{pad + e: c for e, c in g.items()} for g in self.quotient_gb]
        return PolyRing(tuple(names) + self.variables,
                        TermOrder.block(k, first, self.order), q)

    def extend_back(self, names: Sequence[str]) -> "PolyRing":
        """Append variables; used for flat base change by adjunction."""
        k = len(names)
        pad = (0,) * k
        q = [{e + pad: c for e, c in g.items()} for g in self.quotient_gb]
        if self.order.name == "degrevlex":
            order = DEGREVLEX
        else:
            order = TermOrder.block(self.nvars, self.order, DEGREVLEX)
        return PolyRing(self.variables + tuple(names), order, q)

    def fresh_names(self, count: int, stem: str = "t") -> List[str]:
        out, i = [], 0
        taken = set(self.variables)
        while len(out) < count:
            name = stem if i == 0 else f"{stem}{i}"
            if name not in taken:
                out.append(name)
                taken.add(name)
            i += 1
        return out

    # elements -------------------------------------------------------------
    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r} in {self}") from None

    def var(self, name: str) -> "Poly":
        e = [0] * self.nvars
        e[self.index(name)] = 1
        return Poly(self, {tuple(e): mpq(1)})

    @property
    def gens(self) -> List["Poly"]:
        return [self.var(v) for v in self.variables]

    def const(self, c: Scalar) -> "Poly":
        c = to_mpq(c)
        return Poly(self, {(0,) * self.nvars: c} if c else {})

    @property
    def zero(self) -> "Poly":
        return Poly(self, {}, _normal=True)

    @property
    def one(self) -> "Poly":
        return self.const(1)

    def __call__(self, x) -> "Poly":
        if isinstance(x, Poly):
            if x.ring == self:
                return x
            return self.convert(x)
        if isinstance(x, str):
            from ..dsl import parse_poly
            return parse_poly(x, self)
        return self.const(x)

    def convert(self, p: "Poly") -> "Poly":
        """Move ``p`` into this ring by variable names."""
        idx = [self._index.get(v) for v in p.ring.variables]
        terms: Dict[Exp, mpq] = {}
        for e, c in p.terms.items():
            t = [0] * self.nvars
            for j, (i, x) in enumerate(zip(idx, e)):
                if x:
                    if i is None:
                        raise RingMismatch(f"variable {p.ring.variables[j]!r} not in {self}")
                    t[i] += x
            terms[tuple(t)] = c
        if self.quotient_gb or p.ring.variables != self.variables:
            return Poly(self, terms)
        return Poly(self, terms, _normal=True)

    def reduce_raw(self, raw: Dict[Exp, mpq]) -> Dict[Exp, mpq]:
        if not self._divisors:
            return raw
        return gb.reduce(raw, self._divisors, self.key)


def _raw_of(p, ring: PolyRing) -> Dict[Exp, mpq]:
    if isinstance(p, Poly):
        if p.ring.variables != ring.variables:
            p = PolyRing(ring.variables, ring.order).convert(p)
        return dict(p.terms)
    if isinstance(p, str):
        return dict(PolyRing(ring.variables, ring.order)(p).terms)
    return {e: to_mpq(c) for e, c in dict(p).items() if c}


class Poly:
    """Immutable sparse polynomial; ``terms`` maps exponents to ``mpq``."""

    __slots__ = ("ring", "terms", "__dict__")

    def __init__(self, ring: PolyRing, terms: Mapping[Exp, Scalar], _normal=False):
        self.ring = ring
        if not _normal:
            terms = {e: to_mpq(c) for e, c in terms.items() if c}
            terms = ring.reduce_raw(terms)
        self.terms = terms

    # basic queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> mpq:
        return self.terms.get((0,) * self.ring.nvars, mpq(0))

    @cached_property
    def sorted_terms(self) -> List[Tuple[Exp, mpq]]:
        return sorted(self.terms.items(), key=lambda t: self.ring.key(t[0]), reverse=True)

    @property
    def lead_exp(self) -> Exp:
        return self.sorted_terms[0][0]

    @property
    def lead_coeff(self) -> mpq:
        return self.sorted_terms[0][1]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, names: Iterable[str]) -> Tuple[int, int]:
        """(min, max) total degree restricted to the given variables."""
        idx = [self.ring.index(v) for v in names]
        degs = [sum(e[i] for i in idx) for e in self.terms]
        return (min(degs, default=-1), max(degs, default=-1))

    def is_homogeneous_in(self, names: Iterable[str]) -> bool:
        lo, hi = self.degree_in(names)
        return lo == hi

    def support_vars(self) -> List[str]:
        used = set()
        for e in self.terms:
            used.update(i for i, x in enumerate(e) if x)
        return [self.ring.variables[i] for i in sorted(used)]

    # arithmetic -----------------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)) or type(other).__name__ == "mpq":
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            w = out.get(e, 0) + c
            if w:
                out[e] = w
            else:
                out.pop(e, None)
        return Poly(self.ring, out, _normal=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()}, _normal=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_constant():
            c = other.constant_value()
            if not c:
                return self.ring.zero
            return Poly(self.ring, {e: v * c for e, v in self.terms.items()}, _normal=True)
        out: Dict[Exp, mpq] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                w = out.get(e, 0) + c1 * c2
                if w:
                    out[e] = w
                else:
                    out.pop(e, None)
        return Poly(self.ring, out, _normal=not self.ring.is_quotient)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = self.ring.one, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: Scalar) -> "Poly":
        return self * self.ring.const(c)

    def monic(self) -> "Poly":
        return self.scale(1 / self.lead_coeff) if self.terms else self

    def primitive(self) -> "Poly":
        """Integer associate with coprime coefficients, positive leading term."""
        if not self.terms:
            return self
        from math import gcd, lcm as ilcm
        den = 1
        for c in self.terms.values():
            den = ilcm(den, int(c.denominator))
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, n)
        f = mpq(den, g)
        if self.lead_coeff < 0:
            f = -f
        return self.scale(f)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == self.ring.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # evaluation / substitution ---------------------------------------------------
    def evaluate(self, point: Union[Mapping[str, Scalar], Sequence[Scalar]]) -> mpq:
        if isinstance(point, Mapping):
            vals = [to_mpq(point[v]) for v in self.ring.variables]
        else:
            vals = [to_mpq(v) for v in point]
        total = mpq(0)
        for e, c in self.terms.items():
            t = c
            for v, x in zip(vals, e):
                if x:
                    t *= v ** x
            total += t
        return total

    def partial_evaluate(self, values: Mapping[str, Scalar], target: PolyRing) -> "Poly":
        """Substitute numbers for some variables, landing in ``target``."""
        images = []
        for v in self.ring.variables:
            images.append(target.const(values[v]) if v in values else target.var(v))
        return self.substitute(images)

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Ring map sending the i-th variable to ``images[i]``."""
        if len(images) != self.ring.nvars:
            raise ValueError("need one image per variable")
        target = images[0].ring if images else self.ring
        cache: Dict[Tuple[int, int], Poly] = {}

        def power(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = images[i] ** k
            return cache[(i, k)]

        total: Dict[Exp, mpq] = {}
        for e, c in self.terms.items():
            t = target.const(c)
            for i, k in enumerate(e):
                if k:
                    t = t * power(i, k)
            for ee, cc in t.terms.items():
                w = total.get(ee, 0) + cc
                if w:
                    total[ee] = w
                else:
                    total.pop(ee, None)
        return Poly(target, total, _normal=True)

    # rendering -------------------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms:
            mono = "*".join(
                v if x == 1 else f"{v}^{x}"
                for v, x in zip(self.ring.variables, e) if x)
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = _fmt(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt(a)}*{mono}"
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append((" - " if neg else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def _fmt(c: mpq) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"
