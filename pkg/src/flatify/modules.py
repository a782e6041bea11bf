"""Finitely presented modules: Fitting ideals, rank loci, torsion, graded pieces."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import Ideal, OpenLocus, Poly, PolyRing, TermOrder, unit_ideal, zero_ideal
from .algebra.ideal import monomials_of_degree
from .algebra.orders import DEGREVLEX


class ModuleError(ValueError):
    pass


class PresentedModule:
    """``coker(A^m -> A^q)``; ``columns[j]`` is the j-th relation vector."""

    def __init__(self, ring: PolyRing, ngens: int, columns: Sequence[Sequence] = (),
                 grading: Optional[Sequence] = None):
        self.ring = ring
        self.ngens = ngens
        cols = []
        for col in columns:
            col = tuple(ring(c) for c in col)
            if len(col) != ngens:
                raise ModuleError(f"relation of length {len(col)} for {ngens} generators")
            if any(col):
                cols.append(col)
        self.columns: Tuple[Tuple[Poly, ...], ...] = tuple(cols)
        self.grading = tuple(grading) if grading is not None else None

    @classmethod
    def free(cls, ring: PolyRing, rank: int) -> "PresentedModule":
        return cls(ring, rank, [])

    @classmethod
    def cyclic(cls, ideal: Ideal) -> "PresentedModule":
        """``A / I``."""
        return cls(ideal.ring, 1, [[g] for g in ideal.generators])

    @classmethod
    def from_ideal(cls, ideal: Ideal) -> "PresentedModule":
        """The ideal ``I`` itself as a module, presented by its syzygies."""
        gens = ideal.groebner_basis()
        if not gens:
            return cls(ideal.ring, 0, [])
        return cls(ideal.ring, len(gens), syzygies(ideal.ring, gens))

    def __repr__(self):
        return f"PresentedModule(q={self.ngens}, relations={len(self.columns)}, ring={self.ring})"

    # presentations ----------------------------------------------------------------------
    @cached_property
    def pruned(self) -> "PresentedModule":
        """Isomorphic presentation with every constant pivot eliminated."""
        rows = self.ngens
        cols = [list(c) for c in self.columns]
        alive = list(range(rows))
        while True:
            pivot = None
            best = None
            for j, col in enumerate(cols):
                for i in alive:
                    c = col[i]
                    if c and c.is_constant():
                        weight = sum(1 for k in alive if col[k])
                        if best is None or weight < best:
                            pivot, best = (i, j), weight
                        break
            if pivot is None:
                break
            i, j = pivot
            pcol = cols[j]
            inv = 1 / pcol[i].constant_value()
            new_cols = []
            for l, col in enumerate(cols):
                if l == j:
                    continue
                a = col[i]
                if a:
                    f = a * inv
                    col = [col[k] - f * pcol[k] if k in alive and pcol[k] else col[k]
                           for k in range(rows)]
                new_cols.append(col)
            alive.remove(i)
            cols = new_cols
        seen = set()
        out = []
        for col in cols:
            v = tuple(col[k] for k in alive)
            if not any(v):
                continue
            norm = _normalize_column(v)
            if norm in seen:
                continue
            seen.add(norm)
            out.append(v)
        return PresentedModule(self.ring, len(alive), out)

    @cached_property
    def trimmed(self) -> "PresentedModule":
        """Pruned presentation keeping only columns needed to span the relations."""
        p = self.pruned
        if len(p.columns) <= max(p.ngens, 1):
            return p
        E = p._e_ring
        full = p.relation_ideal().gb_raw
        order = sorted(range(len(p.columns)), key=lambda j: _column_weight(p.columns[j]))
        vecs = p.relation_ideal().generators
        kept: List[int] = []
        span = Ideal(E, [])
        for j in order:
            if kept and span.contains(vecs[j]):
                continue
            kept.append(j)
            span = Ideal(E, [vecs[i] for i in kept])
            if span.gb_raw == full:
                break
        out = PresentedModule(self.ring, p.ngens, [p.columns[j] for j in sorted(kept)])
        out.__dict__["pruned"] = out
        return out

    def direct_sum(self, other: "PresentedModule") -> "PresentedModule":
        q1, q2 = self.ngens, other.ngens
        z = self.ring.zero
        cols = [tuple(c) + (z,) * q2 for c in self.columns]
        cols += [(z,) * q1 + tuple(c) for c in other.columns]
        return PresentedModule(self.ring, q1 + q2, cols)

    # Fitting ideals ----------------------------------------------------------------------
    def fitting_ideal(self, n: int) -> Ideal:
        if n < 0:
            return zero_ideal(self.ring)
        return self._fitting(n)

    def _fitting(self, n: int) -> Ideal:
        cache = self.__dict__.setdefault("_fit_cache", {})
        if n not in cache:
            p = self.pruned
            q = p.ngens
            if n >= q:
                cache[n] = unit_ideal(self.ring)
            else:
                cols = p.columns
                if math.comb(len(cols), q - n) > 64:
                    cols = self.trimmed.columns
                cache[n] = Ideal(self.ring, _minors(cols, q, q - n)).simplified()
        return cache[n]

    def fitting_ideals(self) -> List[Ideal]:
        """``[F_0, ..., F_q]`` of the pruned presentation (each later one is (1))."""
        q = self.pruned.ngens
        return [self.fitting_ideal(n) for n in range(q + 1)]

    # points -------------------------------------------------------------------------------------
    def fiber_rank(self, point) -> int:
        """``dim_QQ(M ⊗ κ(p))`` at a rational point of the ring."""
        check_point(self.ring, point)
        mat = [[Fraction(int(e.numerator), int(e.denominator))
                for e in (c.evaluate(point) for c in col)] for col in self.columns]
        return self.ngens - matrix_rank(mat)

    # relation module as an ideal of A[e_1..e_q]/(e)^2 ------------------------------------------
    @cached_property
    def _e_ring(self) -> PolyRing:
        q = self.ngens
        names = self.ring.fresh_names(q, "e_")
        amb = self.ring.ambient.extend_front(names)
        quot = [amb.convert(g) for g in self.ring.quotient_polys]
        ev = [amb.var(n) for n in names]
        quot += [ev[i] * ev[j] for i in range(q) for j in range(i, q)]
        return PolyRing(amb.variables, amb.order, quot)

    def relation_ideal(self) -> Ideal:
        E = self._e_ring
        ev = [E.var(n) for n in E.variables[:self.ngens]]
        gens = []
        for col in self.columns:
            s = E.zero
            for e, a in zip(ev, col):
                if a:
                    s = s + e * E.convert(a.ring.ambient.convert(a) if a.ring.is_quotient else a)
            gens.append(s)
        return Ideal(E, gens)

    def same_relations(self, other: "PresentedModule") -> bool:
        """Equal relation submodules of ``A^q`` (same generator basis)."""
        if self.ngens != other.ngens or self.ring != other.ring:
            return False
        return self.relation_ideal() == other._with_e_ring(self._e_ring).relation_ideal()

    def _with_e_ring(self, E: PolyRing) -> "PresentedModule":
        m = PresentedModule(self.ring, self.ngens, self.columns)
        m.__dict__["_e_ring"] = E
        return m

    def __eq__(self, other):
        if not isinstance(other, PresentedModule):
            return NotImplemented
        return self.same_relations(other)

    __hash__ = object.__hash__

    def is_zero_module(self) -> bool:
        return self.fitting_ideal(0).is_unit()


def _column_weight(col):
    return (sum(1 for a in col if a), sum(a.total_degree() for a in col if a),
            sum(len(a.terms) for a in col))


def _normalize_column(v):
    for c in v:
        if c:
            inv = 1 / c.lead_coeff
            return tuple(x * inv if x else x for x in v)
    return v


def _minors(columns, q: int, k: int) -> List[Poly]:
    """All k x k minors of the q x m matrix with the given columns."""
    m = len(columns)
    if k > m:
        return []
    memo: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Poly] = {}

    def det(rows: Tuple[int, ...], cols: Tuple[int, ...]) -> Poly:
        if len(rows) == 1:
            return columns[cols[0]][rows[0]]
        key = (rows, cols)
        if key in memo:
            return memo[key]
        total = None
        r0, rest = rows[0], rows[1:]
        for idx, c in enumerate(cols):
            a = columns[c][r0]
            if not a:
                continue
            sub = det(rest, cols[:idx] + cols[idx + 1:])
            if not sub:
                continue
            term = a * sub
            if idx % 2:
                term = -term
            total = term if total is None else total + term
        if total is None:
            total = columns[cols[0]][r0].ring.zero
        memo[key] = total
        return total

    out = {}
    for rows in itertools.combinations(range(q), k):
        for cols in itertools.combinations(range(m), k):
            d = det(rows, cols)
            if d:
                out.setdefault(d.monic(), None)
    return list(out)


def matrix_rank(cols: List[List[Fraction]]) -> int:
    rows = [list(r) for r in cols]
    rank = 0
    if not rows:
        return 0
    width = len(rows[0])
    for c in range(width):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / p[c]
                rows[r] = [a - f * b for a, b in zip(rows[r], p)]
        rank += 1
    return rank


class PointError(ValueError):
    pass


def check_point(ring: PolyRing, point) -> None:
    for q in ring.quotient_polys:
        if q.evaluate(point) != 0:
            raise PointError(f"point {dict(point) if hasattr(point, 'items') else point} "
                             f"violates relation {q}")


def syzygies(ring: PolyRing, gens: Sequence[Poly]) -> List[List[Poly]]:
    """Generators of ``{a : sum a_i g_i = 0 in A}``."""
    k = len(gens)
    names = ring.fresh_names(k + 1, "z_")
    amb = ring.ambient
    big_amb = PolyRing(tuple(names) + amb.variables,
                       TermOrder.block(1, DEGREVLEX, TermOrder.block(k, DEGREVLEX, amb.order)))
    e0 = big_amb.var(names[0])
    ev = [big_amb.var(n) for n in names[1:]]
    allv = [e0] + ev
    quot = [allv[i] * allv[j] for i in range(k + 1) for j in range(i, k + 1)]
    E = PolyRing(big_amb.variables, big_amb.order, quot)
    e0 = E.var(names[0])
    ev = [E.var(n) for n in names[1:]]
    lift = lambda p: E.convert(amb.convert(p) if p.ring.is_quotient else p)
    rel = [e0 * lift(g) + e for g, e in zip(gens, ev)]
    rel += [e0 * E.convert(qq) for qq in ring.quotient_polys]
    I = Ideal(E, rel)
    cols = []
    for g in I.gb_raw:
        if any(e[0] for e in g):
            continue
        degs = {sum(e[1:k + 1]) for e in g}
        if degs != {1}:
            continue
        col = []
        for i in range(k):
            part = {}
            for e, c in g.items():
                if e[1 + i] == 1:
                    part[e[k + 1:]] = c
            col.append(Poly(ring, part))
        if any(col):
            cols.append(col)
    return cols


def extract_columns(ring: PolyRing, ideal: Ideal, q: int) -> List[List[Poly]]:
    """Degree-one part (in the first ``q`` variables) of an e-graded ideal."""
    cols = []
    for g in ideal.gb_raw:
        degs = {sum(e[:q]) for e in g}
        if degs == {1}:
            col = []
            for i in range(q):
                part = {e[q:]: c for e, c in g.items() if e[i] == 1}
                col.append(Poly(ring, part))
            if any(col):
                cols.append(col)
        elif degs == {0}:
            p = Poly(ring, {e[q:]: c for e, c in g.items()})
            if p:
                for i in range(q):
                    col = [ring.zero] * q
                    col[i] = p
                    cols.append(col)
    return cols


# --- rank loci ----------------------------------------------------------------------------------------


def annihilator(I: Ideal) -> Ideal:
    return zero_ideal(I.ring).quotient(I)


def free_rank_locus(M: PresentedModule, delta: int) -> OpenLocus:
    if delta < 0:
        raise ModuleError("rank must be non-negative")
    f = M.fitting_ideal(delta)
    if delta == 0:
        return OpenLocus(f)
    ann = annihilator(M.fitting_ideal(delta - 1))
    return OpenLocus((f * ann).simplified())


@dataclass
class RankProfile:
    loci: Dict[int, OpenLocus]
    ranks: List[int] = field(default_factory=list)

    def rank_at(self, point) -> Optional[int]:
        hits = [d for d, u in self.loci.items() if u.contains_point(point)]
        return hits[0] if len(hits) == 1 else None


def rank_profile(M: PresentedModule) -> RankProfile:
    loci = {}
    for d in range(M.pruned.ngens + 1):
        u = free_rank_locus(M, d)
        if not u.is_empty():
            loci[d] = u
    return RankProfile(loci, sorted(loci))


@dataclass
class LocalFreeness:
    verdict: bool
    profile: RankProfile
    idempotent: List[bool]


def locally_free_test(M: PresentedModule, ranks: Optional[Sequence[int]] = None
                      ) -> LocalFreeness:
    idem = [F.is_idempotent() for F in M.fitting_ideals()]
    profile = rank_profile(M)
    verdict = all(idem)
    if ranks is not None and verdict:
        verdict = all(d in set(ranks) for d in profile.ranks)
    return LocalFreeness(verdict, profile, idem)


# --- base change, torsion ------------------------------------------------------------------------


def ring_map_ok(source: PolyRing, images: Sequence[Poly]) -> bool:
    return all(not q.substitute(images) for q in source.quotient_polys)


def base_change_module(M: PresentedModule, images: Sequence[Poly]) -> PresentedModule:
    """Pull the presentation along ``var_i -> images[i]``."""
    if len(images) != M.ring.nvars:
        raise ModuleError("need one image per source variable")
    if not ring_map_ok(M.ring, images):
        raise ModuleError("ring map does not respect the source relations")
    target = images[0].ring if images else M.ring
    amb = M.ring.ambient
    cols = [[amb.convert(a).substitute(images) if M.ring.is_quotient else a.substitute(images)
             for a in col] for col in M.columns]
    return PresentedModule(target, M.ngens, cols)


def torsion_quotient(M: PresentedModule, J: Ideal) -> PresentedModule:
    """``M`` modulo its ``J``-torsion, same generators."""
    if J.is_zero() or all(not g for g in J.generators):
        raise ModuleError("torsion with respect to the zero ideal")
    if J.ring != M.ring:
        raise ModuleError("ideal and module over different rings")
    q = M.ngens
    if q == 0:
        return M
    N = M.relation_ideal()
    E = N.ring
    amb = M.ring.ambient
    Je = Ideal(E, [E.convert(amb.convert(g) if g.ring.is_quotient else g) for g in J.generators])
    sat = N.saturate(Je)
    return PresentedModule(M.ring, q, extract_columns(M.ring, sat, q))


# --- graded pieces ------------------------------------------------------------------------------------


def graded_piece(family, d: int) -> PresentedModule:
    """Degree-``d`` part of ``B[x]/I`` as a ``B``-module on the monomial basis."""
    if d < 0:
        raise ModuleError("degree must be non-negative")
    base: PolyRing = family.base
    fr: PolyRing = family.ring
    fib = list(family.fiber_vars)
    nb = base.nvars
    fidx = [fr.index(v) for v in fib]
    bidx = [fr.index(v) for v in base.variables]
    basis = list(monomials_of_degree(len(fib), d))
    pos = {m: i for i, m in enumerate(basis)}
    cols = []
    for g in family.ideal.generators:
        k = g.degree_in(fib)[1]
        if k > d:
            continue
        for m in monomials_of_degree(len(fib), d - k):
            col: List[Dict] = [dict() for _ in basis]
            for e, c in g.terms.items():
                fe = tuple(e[i] + mm for i, mm in zip(fidx, m))
                be = tuple(e[i] for i in bidx)
                slot = col[pos[fe]]
                slot[be] = slot.get(be, 0) + c
            cols.append([Poly(base, s) for s in col])
    return PresentedModule(base, len(basis), cols,
                           grading=[tuple(m) for m in basis])
