"""Ideals of (quotient) polynomial rings and the Groebner-based operations on them.

An ideal of ``A = P/Q`` is handled through its lift ``I + Q`` in the ambient
polynomial ring ``P``; every computation below works with lifts.
"""

from __future__ import annotations

import itertools
import threading
from functools import reduce as _fold
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import groebner as gb
from .orders import DEGREVLEX, LEX, TermOrder
from .ring import Poly, PolyRing, RingMismatch


class RadicalBudgetExceeded(RuntimeError):
    """The general radical algorithm ran past its work budget."""


class Ideal:
    def __init__(self, ring: PolyRing, generators: Iterable = ()):
        self.ring = ring
        gens = []
        for g in generators:
            g = ring(g)
            if g.ring != ring:
                raise RingMismatch(f"generator {g} not in {ring}")
            if g:
                gens.append(g)
        self.generators: Tuple[Poly, ...] = tuple(gens)
        self._gb: Optional[List[dict]] = None
        self._lock = threading.Lock()

    # Groebner data ---------------------------------------------------------------
    @property
    def gb_raw(self) -> List[dict]:
        """Reduced Groebner basis of the lift ``I + Q`` (raw dicts)."""
        if self._gb is None:
            with self._lock:
                if self._gb is None:
                    raw = [dict(g.terms) for g in self.generators]
                    raw += [dict(q) for q in self.ring.quotient_gb]
                    self._gb = gb.buchberger(raw, self.ring.key, self.ring.order.name != "degrevlex")
        return self._gb

    def groebner_basis(self) -> List[Poly]:
        """Reduced Groebner basis, as ring elements (quotient relations dropped)."""
        out = []
        for g in self.gb_raw:
            p = Poly(self.ring, g)
            if p:
                out.append(p)
        return out

    def lift_basis(self) -> List[Poly]:
        amb = self.ring.ambient
        return [Poly(amb, g, _normal=True) for g in self.gb_raw]

    def simplified(self) -> "Ideal":
        """Same ideal, generated by its reduced Groebner basis."""
        out = Ideal(self.ring, self.groebner_basis())
        out._gb = self.gb_raw
        return out

    def _check(self, other: "Ideal"):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    # predicates ----------------------------------------------------------------------
    def normal_form(self, f) -> Poly:
        f = self.ring(f)
        if f.ring != self.ring:
            raise RingMismatch(f"{f.ring} vs {self.ring}")
        r = gb.normal_form(dict(f.terms), self.gb_raw, self.ring.key)
        return Poly(self.ring, r, _normal=True)

    def contains(self, f) -> bool:
        return self.normal_form(f).is_zero()

    __contains__ = contains

    def contains_ideal(self, other: "Ideal") -> bool:
        self._check(other)
        return all(self.contains(g) for g in other.generators)

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        return self.ring == other.ring and _same_basis(self.gb_raw, other.gb_raw)

    def __hash__(self):
        return hash((self.ring, tuple(tuple(sorted(g.items())) for g in self.gb_raw)))

    def is_unit(self) -> bool:
        b = self.gb_raw
        return len(b) == 1 and len(b[0]) == 1 and not any(next(iter(b[0])))

    def is_zero(self) -> bool:
        return not self.generators

    def is_idempotent(self) -> bool:
        return (self * self) == self

    def radical_member(self, f) -> bool:
        f = self.ring(f)
        if not f:
            return True
        if self.contains(f):
            return True
        t = self.ring.fresh_names(1, "rab")
        big = self.ring.ambient.extend_front(t)
        lifted = [big.convert(p) for p in self.lift_basis()]
        tv = big.var(t[0])
        lifted.append(big.one - tv * big.convert(f.ring.ambient.convert(f)))
        return Ideal(big, lifted).is_unit()

    def is_principal(self) -> bool:
        return len(self.groebner_basis()) <= 1

    # combinators ---------------------------------------------------------------------------
    def __add__(self, other: "Ideal") -> "Ideal":
        self._check(other)
        return Ideal(self.ring, self.generators + other.generators)

    def __mul__(self, other: "Ideal") -> "Ideal":
        self._check(other)
        a = self.generators if len(self.generators) <= len(self.groebner_basis()) \
            else self.groebner_basis()
        b = other.generators if len(other.generators) <= len(other.groebner_basis()) \
            else other.groebner_basis()
        return Ideal(self.ring, [f * g for f in a for g in b])

    def __pow__(self, n: int) -> "Ideal":
        out = unit_ideal(self.ring)
        for _ in range(n):
            out = (out * self).simplified()
        return out

    def intersect(self, other: "Ideal") -> "Ideal":
        self._check(other)
        if self.is_unit():
            return other
        if other.is_unit():
            return self
        t = self.ring.fresh_names(1, "tint")
        big = self.ring.ambient.extend_front(t)
        tv = big.var(t[0])
        gens = [tv * big.convert(p) for p in self.lift_basis()]
        gens += [(big.one - tv) * big.convert(p) for p in other.lift_basis()]
        kept = _drop_front(Ideal(big, gens).gb_raw, 1)
        return Ideal(self.ring, [Poly(self.ring, g) for g in kept])

    def quotient_by(self, g) -> "Ideal":
        """``(I : g)`` for a single element."""
        g = self.ring(g)
        if not g:
            return unit_ideal(self.ring)
        if self.contains(g):
            return unit_ideal(self.ring)
        amb = self.ring.ambient
        gl = amb.convert(g) if g.ring.is_quotient else g
        inter = Ideal(amb, self.lift_basis()).intersect(Ideal(amb, [gl]))
        quots = [divide_exact(h, gl) for h in inter.lift_basis()]
        return Ideal(self.ring, [self.ring.convert(q) for q in quots])

    def quotient(self, other: "Ideal") -> "Ideal":
        self._check(other)
        parts = [self.quotient_by(g) for g in other.generators]
        if not parts:
            return unit_ideal(self.ring)
        return _fold(lambda a, b: a.intersect(b), parts)

    def saturate(self, other) -> "Ideal":
        """``(I : J^oo)``; ``other`` may be an Ideal or a single element."""
        if not isinstance(other, Ideal):
            other = Ideal(self.ring, [other])
        self._check(other)
        cur = self
        while True:
            nxt = cur.quotient(other)
            if nxt == cur:
                return cur.simplified()
            cur = nxt

    def eliminate(self, names: Sequence[str]) -> "Ideal":
        """Elimination ideal ``I ∩ QQ[remaining vars]`` in the subring."""
        ring = self.ring
        unknown = [v for v in names if v not in ring.variables]
        if unknown:
            raise ValueError(f"cannot eliminate unknown variables {unknown}")
        elim = [v for v in ring.variables if v in set(names)]
        rest = [v for v in ring.variables if v not in set(names)]
        keep = tuple(ring.index(v) for v in rest)
        inner = ring.order.restrict(keep, ring.nvars)
        big = PolyRing(elim + rest, TermOrder.block(len(elim), DEGREVLEX, inner))
        lifted = Ideal(big, [big.convert(p) for p in self.lift_basis()])
        kept = _drop_front(lifted.gb_raw, len(elim))
        qkept = []
        if ring.is_quotient:
            qi = Ideal(big, [big.convert(p) for p in ring.quotient_polys])
            qkept = _drop_front(qi.gb_raw, len(elim))
        sub = PolyRing(rest, inner, qkept)
        return Ideal(sub, [Poly(sub, g) for g in kept])

    def extend_to(self, target: PolyRing) -> "Ideal":
        """Extension along the inclusion of rings sharing variable names."""
        return Ideal(target, [target.convert(g) for g in self.generators])

    def map(self, images: Sequence[Poly]) -> "Ideal":
        """Extension along the ring map ``var_i -> images[i]``."""
        target = images[0].ring
        return Ideal(target, [g.substitute(images) for g in self.generators])

    # dimension / Hilbert function --------------------------------------------------------------
    def leading_exponents(self) -> List[tuple]:
        return [gb.lead(g, self.ring.key) for g in self.gb_raw]

    def dimension(self) -> int:
        if self.is_unit():
            return -1
        ring = self.ring
        if ring.order.name != "degrevlex":
            work = Ideal(ring.with_order(DEGREVLEX), [ring.with_order(DEGREVLEX).convert(p) for p in self.lift_basis()])
        else:
            work = self
        leads = [frozenset(i for i, x in enumerate(e) if x) for e in work.leading_exponents()]
        n = ring.nvars
        for size in range(n, -1, -1):
            for u in itertools.combinations(range(n), size):
                us = set(u)
                if not any(s <= us for s in leads):
                    return size
        return 0

    def hilbert_function(self, d: int, graded: Optional[Sequence[str]] = None) -> int:
        graded = list(graded) if graded is not None else list(self.ring.variables)
        if set(graded) != set(self.ring.variables):
            raise ValueError("hilbert_function expects every variable graded")
        for g in self.generators + tuple(self.ring.quotient_polys):
            if not g.is_homogeneous_in(graded):
                raise ValueError(f"non-homogeneous generator {g}")
        if d < 0:
            return 0
        leads = self.leading_exponents() if self._degree_compatible() else \
            Ideal(self.ring.with_order(DEGREVLEX),
                  [self.ring.with_order(DEGREVLEX).convert(p) for p in self.lift_basis()]
                  ).leading_exponents()
        count = 0
        for e in monomials_of_degree(self.ring.nvars, d):
            if not any(gb.divides(l, e) for l in leads):
                count += 1
        return count

    def _degree_compatible(self) -> bool:
        return self.ring.order.name == "degrevlex"

    # radical ------------------------------------------------------------------------------------------
    def radical(self, budget: int = 200) -> "Ideal":
        return radical(self, budget)

    def __repr__(self):
        return f"Ideal({', '.join(str(g) for g in self.generators) or '0'}) in {self.ring}"


def unit_ideal(ring: PolyRing) -> Ideal:
    out = Ideal(ring, [ring.one])
    return out


def zero_ideal(ring: PolyRing) -> Ideal:
    return Ideal(ring, [])


def _same_basis(a: List[dict], b: List[dict]) -> bool:
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


def _drop_front(basis: List[dict], k: int) -> List[dict]:
    out = []
    for g in basis:
        if all(not any(e[:k]) for e in g):
            out.append({e[k:]: c for e, c in g.items()})
    return out


def monomials_of_degree(n: int, d: int):
    if n == 0:
        if d == 0:
            yield ()
        return
    for first in range(d, -1, -1):
        for rest in monomials_of_degree(n - 1, d - first):
            yield (first,) + rest


def divide_exact(f: Poly, g: Poly) -> Poly:
    """Exact quotient ``f / g`` in a polynomial ring (no quotient)."""
    ring = f.ring
    key = ring.key
    lg = g.lead_exp
    cg = g.lead_coeff
    rem = dict(f.terms)
    quo: Dict[tuple, mpq] = {}
    while rem:
        e = gb.lead(rem, key)
        if not gb.divides(lg, e):
            raise ArithmeticError(f"{g} does not divide {f}")
        s = tuple(a - b for a, b in zip(e, lg))
        c = rem[e] / cg
        quo[s] = c
        rem = gb.add_scaled(rem, g.terms, -c, s)
    return Poly(ring, quo, _normal=True)


# --- radicals -------------------------------------------------------------------------------------


class _Budget:
    def __init__(self, n):
        self.left = n

    def spend(self, what=""):
        self.left -= 1
        if self.left < 0:
            raise RadicalBudgetExceeded(f"radical budget exhausted ({what})")


def radical(I: Ideal, budget: int = 200) -> Ideal:
    """Radical of ``I`` (in ``A = P/Q``, i.e. the radical of ``I + Q`` mod ``Q``)."""
    amb = I.ring.ambient
    lift = Ideal(amb, I.lift_basis())
    rad = _radical_poly(lift, _Budget(budget))
    return Ideal(I.ring, [I.ring.convert(g) for g in rad.generators]).simplified()


def _is_monomial_ideal(basis: List[dict]) -> bool:
    return all(len(g) == 1 for g in basis)


def squarefree_part(f: Poly) -> Poly:
    """Squarefree part of a polynomial over QQ (characteristic zero)."""
    ring = f.ring
    if f.is_constant():
        return ring.one if f else ring.zero
    g = f
    for v in f.support_vars():
        d = derivative(f, v)
        if d:
            g = poly_gcd(g, d)
        if g.is_constant():
            return f.monic()
    return divide_exact(f, g).monic()


def derivative(f: Poly, v: str) -> Poly:
    i = f.ring.index(v)
    out = {}
    for e, c in f.terms.items():
        if e[i]:
            t = list(e)
            t[i] -= 1
            out[tuple(t)] = c * e[i]
    return Poly(f.ring, out, _normal=True)


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Multivariate gcd via ``lcm = generator of (f) ∩ (g)``."""
    ring = f.ring
    if not f:
        return g.monic()
    if not g:
        return f.monic()
    if f.is_constant() or g.is_constant():
        return ring.one
    inter = Ideal(ring, [f]).intersect(Ideal(ring, [g])).groebner_basis()
    assert len(inter) == 1
    return divide_exact(f * g, inter[0]).monic()


def _radical_poly(I: Ideal, budget: _Budget) -> Ideal:
    ring = I.ring
    budget.spend("entry")
    basis = I.gb_raw
    if I.is_unit():
        return I
    if not basis:
        return I
    if _is_monomial_ideal(basis):
        gens = []
        for g in basis:
            (e,) = g
            gens.append({tuple(1 if x else 0 for x in e): mpq(1)})
        return Ideal(ring, [Poly(ring, g) for g in gens])
    if len(basis) == 1:
        f = Poly(ring, basis[0], _normal=True)
        return Ideal(ring, [squarefree_part(f)])
    return _radical_general(I, budget)


def _independent_set(I: Ideal) -> Tuple[int, ...]:
    ring = I.ring
    work = I if ring.order.name == "degrevlex" else Ideal(
        ring.with_order(DEGREVLEX), [ring.with_order(DEGREVLEX).convert(p) for p in I.lift_basis()])
    leads = [frozenset(i for i, x in enumerate(e) if x) for e in work.leading_exponents()]
    n = ring.nvars
    for size in range(n, -1, -1):
        for u in itertools.combinations(range(n), size):
            if not any(s <= set(u) for s in leads):
                return u
    return ()


def _radical_general(I: Ideal, budget: _Budget) -> Ideal:
    """Zero-dimensional reduction over ``QQ(u)`` plus recursion on ``I + (h)``."""
    ring = I.ring
    u_idx = _independent_set(I)
    u = [ring.variables[i] for i in u_idx]
    v = [x for x in ring.variables if x not in u]
    # Seidenberg: adjoin squarefree parts of the eliminants in each v_i
    extra = []
    for vi in v:
        budget.spend("eliminant")
        others = [x for x in v if x != vi]
        order = TermOrder.block(len(others), DEGREVLEX,
                                TermOrder.block(1, LEX, DEGREVLEX))
        er = PolyRing(others + [vi] + u, order)
        E = Ideal(er, [er.convert(p) for p in I.generators])
        k = len(others)
        elim = _drop_front(E.gb_raw, k)
        if not elim:
            continue
        sub = PolyRing([vi] + u, order.second)
        best = min((Poly(sub, g) for g in elim), key=lambda p: p.degree_in([vi])[1])
        if best.degree_in([vi])[1] <= 0:
            continue
        d = derivative(best, vi)
        g = poly_gcd(best, d)
        sq = divide_exact(best, g)
        extra.append(ring.convert(sq))
    J = Ideal(ring, list(I.generators) + extra)
    h = _lead_coefficient_product(I, v, u, budget) * _lead_coefficient_product(J, v, u, budget)
    contracted = J.saturate(h)
    if not u or h.is_constant():
        return contracted
    rest = _radical_poly(Ideal(ring, list(I.generators) + [h]), budget)
    return contracted.intersect(rest)


def _lead_coefficient_product(I: Ideal, v, u, budget: _Budget) -> Poly:
    ring = I.ring
    budget.spend("leadcoeff")
    if not u:
        return ring.one
    br = PolyRing(v + u, TermOrder.block(len(v), DEGREVLEX, DEGREVLEX))
    B = Ideal(br, [br.convert(p) for p in I.generators])
    ur = PolyRing(u)
    k = len(v)
    h = ur.one
    for g in B.gb_raw:
        top = max((e[:k] for e in g), key=lambda e: br.order.first.key_function(k)(e))
        coeff = {e[k:]: c for e, c in g.items() if e[:k] == top}
        c = Poly(ur, coeff)
        if not c.is_constant():
            h = h * c.monic()
    hs = squarefree_part(h) if not h.is_constant() else h
    return ring.convert(hs)


class OpenLocus:
    """The open set ``D(locus_ideal) = Spec A minus V(locus_ideal)``."""

    def __init__(self, ideal: Ideal):
        self.ring = ideal.ring
        self.locus_ideal = ideal

    def is_empty(self) -> bool:
        return all(zero_ideal(self.ring).radical_member(g)
                   for g in self.locus_ideal.generators)

    def is_whole(self) -> bool:
        return self.locus_ideal.is_unit()

    def contains_point(self, point) -> bool:
        return any(g.evaluate(point) != 0 for g in self.locus_ideal.generators)

    def union(self, other: "OpenLocus") -> "OpenLocus":
        return OpenLocus(self.locus_ideal + other.locus_ideal)

    def intersection(self, other: "OpenLocus") -> "OpenLocus":
        return OpenLocus((self.locus_ideal * other.locus_ideal).simplified())

    def same_set(self, other: "OpenLocus") -> bool:
        """Equality as point sets: equal radicals of the locus ideals."""
        a, b = self.locus_ideal, other.locus_ideal
        return (all(b.radical_member(g) for g in a.generators)
                and all(a.radical_member(g) for g in b.generators))

    def __repr__(self):
        return f"D({', '.join(str(g) for g in self.locus_ideal.generators) or '0'})"
