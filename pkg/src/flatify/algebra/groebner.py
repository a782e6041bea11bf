"""Buchberger's algorithm on raw sparse polynomials.

A raw polynomial is a ``dict`` mapping exponent tuples to nonzero ``mpq``
coefficients.  Everything here is order-agnostic: callers pass the key
function of their term order (see :mod:`flatify.algebra.orders`).
"""

from __future__ import annotations

import heapq
from typing import Dict, Iterable, List, Sequence, Tuple

from gmpy2 import mpq

from .orders import Exp, KeyFn

Raw = Dict[Exp, mpq]


def lead(p: Raw, key: KeyFn) -> Exp:
    return max(p, key=key)


def divides(a: Exp, b: Exp) -> bool:
    return all(x <= y for x, y in zip(a, b))


def lcm(a: Exp, b: Exp) -> Exp:
    return tuple(x if x > y else y for x, y in zip(a, b))


def coprime(a: Exp, b: Exp) -> bool:
    return all(x == 0 or y == 0 for x, y in zip(a, b))


def monic(p: Raw, key: KeyFn) -> Raw:
    if not p:
        return p
    c = p[lead(p, key)]
    if c == 1:
        return p
    inv = 1 / c
    return {e: v * inv for e, v in p.items()}


def add_scaled(p: Raw, q: Raw, c, shift: Exp | None = None) -> Raw:
    """Return ``p + c * x^shift * q`` as a new dict."""
    out = dict(p)
    for e, v in q.items():
        if shift is not None:
            e = tuple(x + y for x, y in zip(e, shift))
        w = out.get(e, 0) + c * v
        if w:
            out[e] = w
        else:
            out.pop(e, None)
    return out


class _Divisor:
    __slots__ = ("lead", "tail")

    def __init__(self, poly: Raw, key: KeyFn):
        self.lead = lead(poly, key)
        inv = 1 / poly[self.lead]
        self.tail = [(e, v * inv) for e, v in poly.items() if e != self.lead]


def _neg(k: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(-x for x in k)


def reduce(f: Raw, divisors: Sequence[_Divisor], key: KeyFn) -> Raw:
    """Full multivariate division remainder of ``f``."""
    if not f or not divisors:
        return dict(f)
    p = dict(f)
    heap = [(_neg(key(e)), e) for e in p]
    heapq.heapify(heap)
    rem: Raw = {}
    while heap:
        _, e = heapq.heappop(heap)
        c = p.pop(e, None)
        if c is None:
            continue
        for d in divisors:
            if divides(d.lead, e):
                shift = tuple(x - y for x, y in zip(e, d.lead))
                for m, v in d.tail:
                    t = tuple(x + y for x, y in zip(m, shift))
                    old = p.get(t)
                    if old is None:
                        p[t] = -c * v
                        heapq.heappush(heap, (_neg(key(t)), t))
                    else:
                        w = old - c * v
                        if w:
                            p[t] = w
                        else:
                            del p[t]
                break
        else:
            rem[e] = c
    return rem


def divisors_of(basis: Iterable[Raw], key: KeyFn) -> List[_Divisor]:
    return [_Divisor(g, key) for g in basis if g]


def spoly(f: _Divisor, g: _Divisor) -> Raw:
    m = lcm(f.lead, g.lead)
    sf = tuple(x - y for x, y in zip(m, f.lead))
    sg = tuple(x - y for x, y in zip(m, g.lead))
    out: Raw = {}
    for e, v in f.tail:
        out[tuple(x + y for x, y in zip(e, sf))] = v
    for e, v in g.tail:
        t = tuple(x + y for x, y in zip(e, sg))
        w = out.get(t, 0) - v
        if w:
            out[t] = w
        else:
            out.pop(t, None)
    return out


def buchberger(polys: Iterable[Raw], key: KeyFn, sugar: bool = False) -> List[Raw]:
    """Reduced Groebner basis, sorted by decreasing leading monomial.

    Pairs are taken by smallest lcm (normal strategy), or by smallest sugar
    degree first when ``sugar`` is set, which tames elimination orders.
    """
    work = [monic(dict(p), key) for p in polys if p]
    if not work:
        return []
    nvars = len(next(iter(work[0])))
    one = (0,) * nvars
    if any(len(p) == 1 and one in p for p in work):
        return [{one: mpq(1)}]

    G: List[_Divisor] = []       # every element ever added
    S: List[int] = []            # sugar degree of each element of G
    alive: List[int] = []        # indices of G not made redundant
    pairs: Dict[Tuple[int, int], Exp] = {}

    def update(h: int):
        nonlocal alive, pairs
        lh = G[h].lead
        cand = [(g, lcm(lh, G[g].lead)) for g in alive]
        kept = []
        for i, (g, m) in enumerate(cand):
            if coprime(lh, G[g].lead):
                kept.append((g, m))
                continue
            others = [m2 for _, m2 in cand[i + 1:]] + [m2 for _, m2 in kept]
            if not any(divides(m2, m) for m2 in others):
                kept.append((g, m))
        new_pairs = {(g, h): m for g, m in kept if not coprime(lh, G[g].lead)}
        old = {}
        for (a, b), m in pairs.items():
            if (divides(lh, m) and lcm(G[a].lead, lh) != m
                    and lcm(G[b].lead, lh) != m):
                continue
            old[(a, b)] = m
        old.update(new_pairs)
        pairs = old
        alive = [g for g in alive if not divides(lh, G[g].lead)] + [h]

    # inter-reduce the input a little so redundant generators die early
    work.sort(key=lambda p: key(lead(p, key)))
    for p in work:
        r = reduce(p, [G[i] for i in alive], key)
        if r:
            G.append(_Divisor(monic(r, key), key))
            S.append(max(sum(e) for e in p))
            update(len(G) - 1)
            if G[-1].lead == one:
                return [{one: mpq(1)}]

    def pair_sugar(ab):
        a, b = ab
        d = sum(pairs[ab])
        return max(S[a] + d - sum(G[a].lead), S[b] + d - sum(G[b].lead))

    def choose(ab):
        if sugar:
            return (pair_sugar(ab), key(pairs[ab]), ab)
        return (key(pairs[ab]), ab)

    while pairs:
        (a, b) = min(pairs, key=choose)
        ps = pair_sugar((a, b))
        del pairs[(a, b)]
        s = spoly(G[a], G[b])
        r = reduce(s, [G[i] for i in alive], key)
        if not r:
            continue
        r = monic(r, key)
        G.append(_Divisor(r, key))
        S.append(ps)
        if G[-1].lead == one:
            return [{one: mpq(1)}]
        update(len(G) - 1)

    return _reduce_basis([_to_raw(G[i]) for i in alive], key)


def _to_raw(d: _Divisor) -> Raw:
    out = {d.lead: mpq(1)}
    out.update(d.tail)
    return out


def _reduce_basis(basis: List[Raw], key: KeyFn) -> List[Raw]:
    leads = [lead(g, key) for g in basis]
    minimal = []
    for i, (g, lg) in enumerate(zip(basis, leads)):
        if any(j != i and divides(leads[j], lg) and (leads[j] != lg or j < i)
               for j in range(len(basis))):
            continue
        minimal.append(g)
    out = []
    for i, g in enumerate(minimal):
        others = divisors_of(minimal[:i] + minimal[i + 1:], key)
        lg = lead(g, key)
        tail = {e: v for e, v in g.items() if e != lg}
        r = reduce(tail, others, key)
        r[lg] = g[lg]
        out.append(monic(r, key))
    out.sort(key=lambda p: key(lead(p, key)), reverse=True)
    return out


def normal_form(f: Raw, gb: Sequence[Raw], key: KeyFn) -> Raw:
    return reduce(f, divisors_of(gb, key), key)
