"""Input language.

::

    ring S = QQ[x,y,z] mod (x*y);        # optional quotient
    ideal I = (x^2, x*y);                # in the most recent ring
    ideal J in S = (y - 1/2*x);
    module M = coker S [[x, 0], [y, x]]; # columns are relation vectors
    family F over S in P(w0,w1) = (x*w0 - y*w1);
    locus U = D(I);

``#`` starts a comment.  Polynomials use ``+ - * ^``, parentheses, integer
and rational literals (``3/4``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import Ideal, OpenLocus, Poly, PolyRing
from .algebra.orders import DEGREVLEX, LEX
from .modules import ModuleError, PresentedModule


class DSLError(ValueError):
    def __init__(self, code: str, message: str, line: int = 0, col: int = 0):
        self.code = code
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if line else ""
        super().__init__(f"{message}{where}")


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>\[\[|\]\]|[\[\](),;=+\-*/^:])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError("syntax", f"unexpected character {text[pos]!r}",
                           line, pos - start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if tok == "[[":
                out.append(Token("op", "[", line, pos - start + 1))
                out.append(Token("op", "[", line, pos - start + 2))
            elif tok == "]]":
                out.append(Token("op", "]", line, pos - start + 1))
                out.append(Token("op", "]", line, pos - start + 2))
            else:
                out.append(Token(kind, tok, line, pos - start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            start = pos + tok.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, code="syntax", tok=None):
        tok = tok or self.cur
        raise DSLError(code, msg, tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.cur.text == text and self.cur.kind in ("op", "name"):
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        tok = self.cur
        if not self.accept(text):
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return tok

    def name(self) -> Token:
        tok = self.cur
        if tok.kind != "name":
            self.error(f"expected a name, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    # polynomials ---------------------------------------------------------------------------
    def poly(self, ring: PolyRing) -> Poly:
        neg = False
        if self.accept("-"):
            neg = True
        else:
            self.accept("+")
        total = self.term(ring)
        if neg:
            total = -total
        while self.cur.text in ("+", "-") and self.cur.kind == "op":
            op = self.cur.text
            self.i += 1
            t = self.term(ring)
            total = total + t if op == "+" else total - t
        return total

    def term(self, ring):
        val = self.factor(ring)
        while self.cur.kind == "op" and self.cur.text in ("*", "/"):
            op = self.cur.text
            tok = self.cur
            self.i += 1
            rhs = self.factor(ring)
            if op == "*":
                val = val * rhs
            else:
                if not rhs.is_constant() or not rhs:
                    self.error("division only by nonzero numbers", tok=tok)
                val = val * ring.const(1 / rhs.constant_value())
        return val

    def factor(self, ring):
        base = self.atom(ring)
        if self.accept("^"):
            tok = self.cur
            if tok.kind != "num":
                self.error("exponent must be a non-negative integer")
            self.i += 1
            base = base ** int(tok.text)
        return base

    def atom(self, ring):
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            return ring.const(int(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text not in ring.variables:
                self.error(f"unknown variable {tok.text!r}", "unknown_variable", tok)
            return ring.var(tok.text)
        if self.accept("("):
            p = self.poly(ring)
            self.expect(")")
            return p
        if self.accept("-"):
            return -self.factor(ring)
        self.error(f"unexpected {tok.text or 'end of input'!r} in polynomial")

    def poly_list(self, ring, open_="(", close=")") -> List[Poly]:
        self.expect(open_)
        out = []
        if self.accept(close):
            return out
        while True:
            out.append(self.poly(ring))
            if self.accept(close):
                return out
            self.expect(",")


def parse_poly(text: str, ring: PolyRing) -> Poly:
    p = _Parser(tokenize(text))
    out = p.poly(ring)
    if p.cur.kind != "eof":
        p.error(f"trailing input {p.cur.text!r}")
    return out


@dataclass
class Binding:
    kind: str
    value: object
    line: int
    col: int


@dataclass
class Session:
    rings: Dict[str, PolyRing] = field(default_factory=dict)
    ideals: Dict[str, Ideal] = field(default_factory=dict)
    modules: Dict[str, PresentedModule] = field(default_factory=dict)
    families: Dict[str, object] = field(default_factory=dict)
    loci: Dict[str, OpenLocus] = field(default_factory=dict)
    positions: Dict[Tuple[str, str], Tuple[int, int]] = field(default_factory=dict)

    def table(self, kind: str) -> dict:
        return {"ring": self.rings, "ideal": self.ideals, "module": self.modules,
                "family": self.families, "locus": self.loci}[kind]


def parse_input(text: str) -> Session:
    from .geometry import FamilyError, ProjectiveFamily

    p = _Parser(tokenize(text))
    s = Session()
    last_ring: Optional[str] = None

    def bind(kind, tok, value):
        table = s.table(kind)
        if tok.text in table:
            raise DSLError("duplicate_name", f"duplicate {kind} name {tok.text!r}",
                           tok.line, tok.col)
        table[tok.text] = value
        s.positions[(kind, tok.text)] = (tok.line, tok.col)

    def ring_ref(tok=None) -> PolyRing:
        tok = tok or p.name()
        if tok.text not in s.rings:
            raise DSLError("unknown_name", f"unknown ring {tok.text!r}", tok.line, tok.col)
        return s.rings[tok.text]

    while p.cur.kind != "eof":
        kw = p.name()
        if kw.text == "ring":
            nm = p.name()
            p.expect("=")
            q = p.name()
            if q.text != "QQ":
                p.error("only QQ coefficients are supported", tok=q)
            p.expect("[")
            names = [p.name()]
            while p.accept(","):
                names.append(p.name())
            p.expect("]")
            order = DEGREVLEX
            if p.accept("order"):
                o = p.name()
                if o.text not in ("lex", "degrevlex"):
                    p.error(f"unknown order {o.text!r}", tok=o)
                order = LEX if o.text == "lex" else DEGREVLEX
            vnames = [t.text for t in names]
            if len(set(vnames)) != len(vnames):
                p.error("duplicate variable", "duplicate_name", names[0])
            ring = PolyRing(vnames, order)
            if p.accept("mod"):
                rel = p.poly_list(ring)
                ring = ring.with_quotient(rel)
            bind("ring", nm, ring)
            last_ring = nm.text
        elif kw.text == "ideal":
            nm = p.name()
            ring = _current(p, s, last_ring, ring_ref)
            p.expect("=")
            bind("ideal", nm, Ideal(ring, p.poly_list(ring)))
        elif kw.text == "module":
            nm = p.name()
            p.expect("=")
            p.expect("coker")
            ring = ring_ref()
            start = p.cur
            p.expect("[")
            cols = []
            if not p.accept("]"):
                while True:
                    cols.append(p.poly_list(ring, "[", "]"))
                    if p.accept("]"):
                        break
                    p.expect(",")
            q = len(cols[0]) if cols else 0
            if p.accept("gens"):
                tok = p.cur
                if tok.kind != "num":
                    p.error("expected generator count")
                p.i += 1
                q = int(tok.text)
            try:
                mod = PresentedModule(ring, q, cols)
            except ModuleError as exc:
                raise DSLError("shape", str(exc), start.line, start.col) from None
            bind("module", nm, mod)
        elif kw.text == "family":
            nm = p.name()
            p.expect("over")
            base = ring_ref()
            p.expect("in")
            pr = p.name()
            if pr.text != "P":
                p.error("expected P(...)", tok=pr)
            p.expect("(")
            fib = [p.name().text]
            while p.accept(","):
                fib.append(p.name().text)
            p.expect(")")
            clash = set(fib) & set(base.variables)
            if clash:
                p.error(f"fiber variables clash with base: {sorted(clash)}", "duplicate_name")
            fam_ring = ProjectiveFamily.ring_for(base, fib)
            p.expect("=")
            start = p.cur
            gens = p.poly_list(fam_ring)
            try:
                fam = ProjectiveFamily(base, fib, gens)
            except FamilyError as exc:
                raise DSLError("non_homogeneous", str(exc), start.line, start.col) from None
            bind("family", nm, fam)
        elif kw.text == "locus":
            nm = p.name()
            p.expect("=")
            p.expect("D")
            p.expect("(")
            ref = p.name()
            if ref.text not in s.ideals:
                raise DSLError("unknown_name", f"unknown ideal {ref.text!r}", ref.line, ref.col)
            p.expect(")")
            bind("locus", nm, OpenLocus(s.ideals[ref.text]))
        else:
            p.error(f"unknown statement {kw.text!r}", tok=kw)
        p.expect(";")
    return s


def _current(p: _Parser, s: Session, last_ring, ring_ref) -> PolyRing:
    if p.accept("in"):
        return ring_ref()
    if last_ring is None:
        p.error("no ring declared yet", "unknown_name")
    return s.rings[last_ring]
