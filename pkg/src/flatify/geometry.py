"""Affine charts, blow-ups via the Rees algebra, strict transforms, rational points."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

from .algebra import DEGREVLEX, LEX, Ideal, OpenLocus, Poly, PolyRing, zero_ideal
from .algebra.ideal import _drop_front, monomials_of_degree
from .modules import (PointError, PresentedModule, annihilator, base_change_module,
                      check_point, torsion_quotient)

log = logging.getLogger(__name__)


class FamilyError(ValueError):
    pass


class BlowupError(ValueError):
    """Raised for a zero center: the blow-up is empty."""


class BaseChangeError(ValueError):
    pass


@dataclass(frozen=True)
class Provenance:
    step: int
    chart: int
    substitution: Tuple[Tuple[str, str], ...]


@dataclass
class AffineChart:
    """One affine piece of a blow-up tree.

    ``parent_images[i]`` is the image in ``ring`` of the i-th variable of the
    parent ring; ``root_images`` does the same for the root ring.
    """

    ring: PolyRing
    base_vars: Tuple[str, ...]
    provenance: Tuple[Provenance, ...] = ()
    exceptional: Optional[Ideal] = None
    parent_images: Optional[List[Poly]] = None
    root_images: Optional[List[Poly]] = None
    ratios: Optional[List[Poly]] = None

    @classmethod
    def root(cls, ring: PolyRing) -> "AffineChart":
        ids = ring.gens
        return cls(ring, tuple(ring.variables), (), None, ids, ids)

    @property
    def path(self) -> str:
        return "/".join(f"{p.step}.{p.chart}" for p in self.provenance) or "root"

    def to_parent(self, point) -> Dict[str, mpq]:
        vals = _as_values(self.ring, point)
        names = self._parent_names
        return {n: img.evaluate(vals) for n, img in zip(names, self.parent_images)}

    def to_root(self, point) -> Dict[str, mpq]:
        vals = _as_values(self.ring, point)
        return {n: img.evaluate(vals) for n, img in zip(self.base_vars, self.root_images)}

    _parent_names: Tuple[str, ...] = ()


def _as_values(ring: PolyRing, point) -> Dict[str, mpq]:
    if isinstance(point, dict):
        return {v: mpq(point[v]) if not isinstance(point[v], Fraction)
                else mpq(point[v].numerator, point[v].denominator) for v in ring.variables}
    return dict(zip(ring.variables, point))


# --- projective families ------------------------------------------------------------------------------


class ProjectiveFamily:
    """A closed subscheme of ``P^n`` over ``Spec(base)`` cut out by ``ideal``."""

    def __init__(self, base: PolyRing, fiber_vars: Sequence[str], generators: Sequence):
        self.base = base
        self.fiber_vars = tuple(fiber_vars)
        self.ring = self.ring_for(base, self.fiber_vars)
        gens = [self.ring(g) for g in generators]
        for g in gens:
            if g and not g.is_homogeneous_in(self.fiber_vars):
                raise FamilyError(f"generator {g} is not homogeneous in {self.fiber_vars}")
        self.ideal = Ideal(self.ring, gens)

    @staticmethod
    @lru_cache(maxsize=None)
    def _ring_cached(base: PolyRing, fiber_vars: Tuple[str, ...]) -> PolyRing:
        return base.extend_back(fiber_vars)

    @classmethod
    def ring_for(cls, base: PolyRing, fiber_vars) -> PolyRing:
        return cls._ring_cached(base, tuple(fiber_vars))

    def generators(self) -> List[Poly]:
        return list(self.ideal.generators)

    def max_fiber_degree(self) -> int:
        return max((g.degree_in(self.fiber_vars)[1] for g in self.ideal.generators), default=0)

    def total_degree(self) -> int:
        return max((g.total_degree() for g in self.ideal.generators), default=0)

    def base_change(self, images: Sequence[Poly]) -> "ProjectiveFamily":
        """Pull back along a base ring map ``base var_i -> images[i]``."""
        target = images[0].ring
        fr = self.ring_for(target, self.fiber_vars)
        full = [fr.convert(i) for i in images] + [fr.var(v) for v in self.fiber_vars]
        amb = self.ring.ambient
        gens = [amb.convert(g).substitute(full) if self.ring.is_quotient else g.substitute(full)
                for g in self.ideal.generators]
        return ProjectiveFamily(target, self.fiber_vars, gens)

    def saturate(self, J: Ideal) -> "ProjectiveFamily":
        Jx = Ideal(self.ring, [self.ring.convert(g) for g in J.generators])
        sat = self.ideal.saturate(Jx)
        return ProjectiveFamily(self.base, self.fiber_vars, sat.groebner_basis())

    def restrict(self, closed: Ideal) -> "ProjectiveFamily":
        """Restriction to ``V(closed)`` of the base."""
        base = self.base.with_quotient([self.base.ambient.convert(g) if g.ring.is_quotient else g
                                        for g in closed.generators])
        fr = self.ring_for(base, self.fiber_vars)
        return ProjectiveFamily(base, self.fiber_vars,
                                [fr.convert(g) for g in self.ideal.generators])

    def fiber_ideal(self, point) -> Ideal:
        check_point(self.base, point)
        vals = _as_values(self.base, point)
        fib = PolyRing(self.fiber_vars)
        gens = []
        for g in self.ideal.generators:
            gens.append(g.partial_evaluate(vals, _fiber_target(self.ring, fib)))
        return Ideal(fib, [fib.convert(g) for g in gens])

    def __repr__(self):
        return (f"ProjectiveFamily(over {self.base} in P({','.join(self.fiber_vars)}): "
                f"{', '.join(str(g) for g in self.ideal.generators)})")


def _fiber_target(fr: PolyRing, fib: PolyRing) -> PolyRing:
    # the substitution target must contain every variable that stays symbolic
    return PolyRing(fr.variables)


# --- closures and base change -------------------------------------------------------------------------


def schematic_closure(chart_ring: PolyRing, U: OpenLocus) -> Ideal:
    """Ideal of the closure of ``U``: ``(0 : locus^oo)``."""
    return zero_ideal(chart_ring).saturate(U.locus_ideal)


@dataclass
class BaseChange:
    source: PolyRing
    target: PolyRing
    images: List[Poly]
    kind: str

    def extend(self, I: Ideal) -> Ideal:
        return Ideal(self.target, [_map_poly(g, self.images) for g in I.generators])

    def module(self, M: PresentedModule) -> PresentedModule:
        return base_change_module(M, self.images)

    def point(self, point) -> Dict[str, mpq]:
        vals = _as_values(self.target, point)
        return {v: img.evaluate(vals) for v, img in zip(self.source.variables, self.images)}


def _map_poly(g: Poly, images: Sequence[Poly]) -> Poly:
    if g.ring.is_quotient:
        g = g.ring.ambient.convert(g)
    return g.substitute(images)


def flat_base_change(ring: PolyRing, kind: str, names: Sequence[str] = (), h=None,
                     allow_zerodivisor: bool = False) -> BaseChange:
    """``kind`` is ``"adjoin"`` (polynomial variables) or ``"localize"`` (at ``h``)."""
    if kind == "adjoin":
        if not names:
            raise BaseChangeError("nothing to adjoin")
        target = ring.extend_back(names)
    elif kind == "localize":
        h = ring(h)
        if not allow_zerodivisor and not annihilator(Ideal(ring, [h])).is_zero():
            raise BaseChangeError(f"{h} is a zero divisor")
        u = list(names) or ring.fresh_names(1, "u")
        ext = ring.extend_back(u)
        target = ext.with_quotient([ext.var(u[0]) * ext.convert(h) - 1])
    else:
        raise BaseChangeError(f"unknown base change {kind!r}")
    return BaseChange(ring, target, [target.var(v) for v in ring.variables], kind)


# --- blow-ups ------------------------------------------------------------------------------------


@dataclass
class BlowupStep:
    parent: AffineChart
    center: Ideal
    center_generators: List[Poly]
    children: List[AffineChart]
    kind: str = "general"           # "general", "identity", "unit_center"
    dropped: List[int] = field(default_factory=list)
    index: int = 0


def blow_up(chart: AffineChart, center: Ideal, step_index: int = 0) -> BlowupStep:
    ring = chart.ring
    if center.ring != ring:
        raise ValueError("center is not an ideal of the chart ring")
    gens = [g.primitive() for g in center.groebner_basis()]
    if not gens:
        raise BlowupError("zero center: its blow-up is empty")
    if center.is_unit():
        return BlowupStep(chart, center, gens, [_child(chart, ring, ring.gens, step_index, 0,
                                                      None, None, ())], "unit_center")
    if len(gens) == 1 and annihilator(center).is_zero():
        child = _child(chart, ring, ring.gens, step_index, 0, Ideal(ring, gens), [ring.one], ())
        return BlowupStep(chart, center, gens, [child], "identity")

    m = len(gens)
    amb = ring.ambient
    ynames = amb.fresh_names(m, "y_")
    sname = amb.fresh_names(1, "s_")
    big = PolyRing(tuple(sname) + tuple(ynames) + amb.variables,
                   _block_front(1, len(ynames) + amb.nvars))
    s = big.var(sname[0])
    lift = lambda p: big.convert(amb.convert(p) if p.ring.is_quotient else p)
    rel = [big.var(y) - s * lift(g) for y, g in zip(ynames, gens)]
    rel += [big.convert(q) for q in ring.quotient_polys]
    rees_raw = _drop_front(Ideal(big, rel).gb_raw, 1)
    rees_ring = PolyRing(tuple(ynames) + amb.variables)
    rees = [Poly(rees_ring, g) for g in rees_raw]

    children, dropped = [], []
    for i, gi in enumerate(gens):
        built = _chart_from_rees(chart, ring, rees, rees_ring, ynames, gens, i, step_index,
                                 len(children))
        if built is None:
            dropped.append(i)
        else:
            children.append(built)
    return BlowupStep(chart, center, gens, children, "general", dropped, step_index)


def _block_front(k: int, rest: int):
    from .algebra.orders import TermOrder
    return TermOrder.block(k, DEGREVLEX, DEGREVLEX)


def _chart_from_rees(chart, ring, rees, rees_ring, ynames, gens, i, step_index, slot):
    amb = ring.ambient
    others = [y for j, y in enumerate(ynames) if j != i]
    new_names = amb.fresh_names(len(others), "t")
    cr = PolyRing(amb.variables + tuple(new_names))
    sub = {ynames[i]: cr.one}
    for y, n in zip(others, new_names):
        sub[y] = cr.var(n)
    images = [sub[v] if v in sub else cr.var(v) for v in rees_ring.variables]
    rel = [p.substitute(images) for p in rees]
    gi = cr.convert(amb.convert(gens[i]) if gens[i].ring.is_quotient else gens[i])
    C = Ideal(cr, rel).saturate(gi)
    if C.is_unit():
        return None
    relations = C.groebner_basis()
    # coordinates on the chart before simplification
    var_images = {v: cr.var(v) for v in cr.variables}
    ratio_exprs = []
    for j in range(len(gens)):
        ratio_exprs.append(cr.one if j == i else cr.var(new_names[others.index(ynames[j])]))
    eliminable = list(amb.variables) + list(new_names)
    relations, var_images, kept = _simplify(cr, relations, var_images, eliminable)
    child_ring = PolyRing(kept, DEGREVLEX, [])
    child_rel = [child_ring.convert(r) for r in relations]
    child_ring = PolyRing(kept, DEGREVLEX, child_rel)
    imgs = {v: child_ring.convert(var_images[v]) for v in cr.variables}
    parent_images = [imgs[v] for v in amb.variables]
    ratios = [r.substitute([imgs[v] for v in cr.variables]) for r in ratio_exprs]
    exc = Ideal(child_ring, [_map_poly(gens[i], parent_images)])
    subst = tuple((v, str(imgs[v])) for v in amb.variables) + \
        tuple((n, str(imgs[n])) for n in new_names)
    return _child(chart, child_ring, parent_images, step_index, slot, exc, ratios, subst)


def _simplify(cr: PolyRing, relations: List[Poly], var_images: Dict[str, Poly],
              eliminable: List[str]):
    """Use relations ``c*v + r`` (``v`` absent from ``r``) to eliminate ``v``."""
    kept = list(cr.variables)
    relations = list(relations)
    while True:
        found = None
        for v in eliminable:
            if v not in kept:
                continue
            idx = cr.index(v)
            for r in relations:
                lin = [(e, c) for e, c in r.terms.items() if e[idx]]
                if len(lin) == 1 and sum(lin[0][0]) == 1:
                    found = (v, r, lin[0][1])
                    break
            if found:
                break
        if not found:
            return relations, var_images, kept
        v, r, c = found
        expr = (cr.var(v) * c - r).scale(1 / c)
        imgs = [expr if w == v else cr.var(w) for w in cr.variables]
        relations = [q.substitute(imgs) for q in relations if q is not r]
        relations = [q for q in relations if q]
        relations = Ideal(cr, relations).groebner_basis()
        var_images = {w: p.substitute(imgs) for w, p in var_images.items()}
        kept.remove(v)


def _child(parent: AffineChart, ring: PolyRing, parent_images, step_index, slot, exc, ratios,
           subst) -> AffineChart:
    root_imgs = [img.substitute(parent_images) for img in parent.root_images] \
        if parent.root_images is not None else parent_images
    child = AffineChart(ring, parent.base_vars,
                        parent.provenance + (Provenance(step_index, slot, tuple(subst)),),
                        exc, list(parent_images), root_imgs, ratios)
    child._parent_names = tuple(parent.ring.variables)
    return child


def strict_transform(obj, step: BlowupStep, index: int):
    """Pull back to child chart ``index`` and remove exceptional torsion."""
    if not 0 <= index < len(step.children):
        raise IndexError(f"chart index {index} out of range")
    child = step.children[index]
    images = child.parent_images
    if isinstance(obj, Ideal):
        pulled = Ideal(child.ring, [_map_poly(g, images) for g in obj.generators])
        if child.exceptional is None:
            return pulled
        return pulled.saturate(child.exceptional)
    if isinstance(obj, PresentedModule):
        pulled = base_change_module(obj, images)
        if child.exceptional is None:
            return pulled
        return torsion_quotient(pulled, child.exceptional)
    if isinstance(obj, ProjectiveFamily):
        pulled = obj.base_change(images)
        if child.exceptional is None:
            return pulled
        return pulled.saturate(child.exceptional)
    raise TypeError(f"cannot take the strict transform of {type(obj).__name__}")


def pullback(obj, chart: AffineChart):
    """Total transform of a parent object on a child chart (no saturation)."""
    images = chart.parent_images
    if isinstance(obj, Ideal):
        return Ideal(chart.ring, [_map_poly(g, images) for g in obj.generators])
    if isinstance(obj, PresentedModule):
        return base_change_module(obj, images)
    return obj.base_change(images)


# --- fibers ---------------------------------------------------------------------------------------


def fiber_eval(obj: Union[PresentedModule, ProjectiveFamily], point, d: Optional[int] = None) -> int:
    if isinstance(obj, PresentedModule):
        return obj.fiber_rank(point)
    if d is None:
        raise ValueError("a degree is needed to evaluate a family fiber")
    return obj.fiber_ideal(point).hilbert_function(d)


# --- rational points --------------------------------------------------------------------------------

_POOL = [Fraction(0)] * 4 + [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2),
                             Fraction(1, 2), Fraction(-1, 2), Fraction(3), Fraction(-3),
                             Fraction(1, 3), Fraction(2, 3), Fraction(-2, 3), Fraction(3, 2),
                             Fraction(5), Fraction(-5, 2), Fraction(4), Fraction(-4)]


def sample_points(ring: PolyRing, n: int, seed: int = 0, on: Optional[Ideal] = None,
                  avoid: Optional[Poly] = None, tries: int = 60) -> List[Dict[str, Fraction]]:
    """Deterministic small-height rational points of ``Spec(ring)`` (optionally of ``V(on)``).

    Variables are fixed from the last to the first along a lex Groebner basis,
    so only relations that are univariate after substitution need solving.
    """
    rng = random.Random(seed)
    amb = ring.ambient
    rels = [amb.convert(q) for q in ring.quotient_polys]
    if on is not None:
        rels += [amb.convert(g) if g.ring.is_quotient else amb.convert(g) for g in on.generators]
    lexring = PolyRing(amb.variables, LEX)
    lexgb = Ideal(lexring, [lexring.convert(r) for r in rels]).groebner_basis() if rels else []
    if len(lexgb) == 1 and lexgb[0].is_constant():
        return []
    names = list(amb.variables)
    by_var: Dict[int, List[Poly]] = {i: [] for i in range(len(names))}
    for g in lexgb:
        used = [lexring.index(v) for v in g.support_vars()]
        by_var[min(used)].append(g)
    out, seen = [], set()
    for _ in range(n * tries):
        if len(out) >= n:
            break
        vals: Dict[str, Fraction] = {}
        ok = True
        for i in range(len(names) - 1, -1, -1):
            cons = by_var[i]
            if not cons:
                vals[names[i]] = rng.choice(_POOL)
                continue
            uni = [_univariate(g, names[i], vals) for g in cons]
            uni = [u for u in uni if any(u)]
            if not uni:
                vals[names[i]] = rng.choice(_POOL)
                continue
            roots = None
            for u in uni:
                rs = set(_rational_roots(u))
                roots = rs if roots is None else roots & rs
            if not roots:
                ok = False
                break
            vals[names[i]] = rng.choice(sorted(roots))
        if not ok:
            continue
        pt = {v: vals[v] for v in names}
        if avoid is not None and avoid.evaluate(pt) == 0:
            continue
        keyp = tuple(pt[v] for v in names)
        if keyp in seen:
            continue
        seen.add(keyp)
        out.append(pt)
    return out


def _univariate(g: Poly, v: str, vals: Dict[str, Fraction]) -> List[Fraction]:
    """Coefficient list (ascending) of ``g`` after substituting ``vals``."""
    idx = g.ring.index(v)
    coeffs: Dict[int, Fraction] = {}
    for e, c in g.terms.items():
        t = Fraction(int(c.numerator), int(c.denominator))
        for j, x in enumerate(e):
            if j != idx and x:
                t *= vals[g.ring.variables[j]] ** x
        coeffs[e[idx]] = coeffs.get(e[idx], 0) + t
    deg = max(coeffs, default=0)
    return [coeffs.get(k, Fraction(0)) for k in range(deg + 1)]


def _rational_roots(coeffs: List[Fraction]) -> List[Fraction]:
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if len(coeffs) <= 1:
        return []
    roots = []
    k = 0
    while coeffs[k] == 0:
        k += 1
    if k:
        roots.append(Fraction(0))
    coeffs = coeffs[k:]
    if len(coeffs) == 1:
        return roots
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    a0, an = abs(ints[0]), abs(ints[-1])
    if a0 > 10 ** 6 or an > 10 ** 6:
        return roots
    for p in _divisors(a0):
        for q in _divisors(an):
            for sgn in (1, -1):
                r = Fraction(sgn * p, q)
                if r not in roots and sum(c * r ** i for i, c in enumerate(ints)) == 0:
                    roots.append(r)
    return roots


def _divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def transition_consistent(step: BlowupStep, a: int, b: int, points: Sequence[dict]) -> bool:
    """Check the gluing of children ``a`` and ``b`` at sample points of ``a``."""
    ca, cb = step.children[a], step.children[b]
    ia = cb_index = None
    gi_b = _generator_index(step, b)
    for pt in points:
        vals = _as_values(ca.ring, pt)
        ra = [r.evaluate(vals) for r in ca.ratios]
        if ra[gi_b] == 0:
            continue
        parent_pt = ca.to_parent(vals)
        rb = [x / ra[gi_b] for x in ra]
        target = {}
        for v in cb.ring.variables:
            if v in parent_pt and v in ca._parent_names:
                target[v] = parent_pt[v]
        # new coordinates of chart b are the ratios y_j / y_b
        for j, r in enumerate(cb.ratios):
            names = r.support_vars()
            if len(names) == 1 and r == cb.ring.var(names[0]) and names[0] not in target:
                target[names[0]] = rb[j]
        if set(target) != set(cb.ring.variables):
            continue
        for q in cb.ring.quotient_polys:
            if q.evaluate(target) != 0:
                return False
        back = cb.to_parent(target)
        if any(back[v] != parent_pt[v] for v in back):
            return False
        if any(r.evaluate(target) != x for r, x in zip(cb.ratios, rb)):
            return False
    return True


def _generator_index(step: BlowupStep, child: int) -> int:
    c = step.children[child]
    for j, r in enumerate(c.ratios):
        if r.is_constant() and r.constant_value() == 1:
            return j
    raise ValueError("chart has no unit ratio")
