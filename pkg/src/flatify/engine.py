"""Flat loci, flattening filtrations, the Fitting-ideal center, and the blow-up loops."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce as _fold
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .algebra import Ideal, OpenLocus, Poly, PolyRing, RadicalBudgetExceeded, unit_ideal, zero_ideal
from .algebra.ideal import radical
from .geometry import (AffineChart, BlowupStep, ProjectiveFamily, blow_up, fiber_eval, pullback,
                       sample_points, schematic_closure, strict_transform)
from .modules import (PresentedModule, base_change_module, free_rank_locus, graded_piece,
                      locally_free_test)

log = logging.getLogger(__name__)


class EmptyFlatLocus(RuntimeError):
    """Flatification would empty the space."""


class EngineError(RuntimeError):
    """A certificate the theory guarantees came out negative."""


# --- flat loci ------------------------------------------------------------------------------------


def flat_locus(M: Union[PresentedModule, Sequence[PresentedModule]]) -> OpenLocus:
    """Largest open set where ``M`` (every module of a list) is locally free."""
    if isinstance(M, PresentedModule):
        mods = [M]
    else:
        mods = list(M)
    out = None
    for m in mods:
        parts = [free_rank_locus(m, d).locus_ideal for d in range(m.pruned.ngens + 1)]
        locus = _fold(lambda a, b: a + b, parts).simplified()
        out = locus if out is None else (out * locus).simplified()
    return OpenLocus(out)


@dataclass
class Filtration:
    loci: List[OpenLocus]
    complete: bool = True
    reason: str = ""


def restrict_module(M: PresentedModule, ring: PolyRing) -> PresentedModule:
    """Same presentation over a quotient ``ring`` of ``M.ring`` (same variables)."""
    return base_change_module(M, ring.gens)


def flattening_filtration(M, radical_budget: int = 200) -> Filtration:
    mods = [M] if isinstance(M, PresentedModule) else list(M)
    ring = mods[0].ring
    U = flat_locus(mods)
    loci = [U]
    while not U.is_whole():
        try:
            Z = radical(U.locus_ideal, radical_budget)
        except RadicalBudgetExceeded as exc:
            return Filtration(loci, False, str(exc))
        zring = ring.with_quotient(Z.generators)
        V = flat_locus([restrict_module(m, zring) for m in mods])
        lifted = [ring.convert(g) for g in V.locus_ideal.generators]
        nxt = OpenLocus((U.locus_ideal + Ideal(ring, lifted)).simplified())
        if nxt.same_set(U):
            raise EngineError("flattening filtration failed to grow")
        U = nxt
        loci.append(U)
    return Filtration(loci)


# --- the Fitting-ideal center -----------------------------------------------------------------------


@dataclass
class CenterData:
    ideal: Ideal
    rank_loci: Dict[int, OpenLocus]
    closures: Dict[int, Ideal]
    intersection_factor: Ideal
    flat_witnesses: List[Poly]
    admissible: bool = True
    support_matches: Optional[bool] = None


def flatify_center(M: PresentedModule, ranks: Sequence[int], allow_empty: bool = False,
                   check_support: bool = True) -> CenterData:
    ranks = sorted(set(ranks))
    if not ranks:
        raise ValueError("rank set must be nonempty")
    ring = M.ring
    loci = {d: free_rank_locus(M, d) for d in ranks}
    if not allow_empty and all(u.is_empty() for u in loci.values()):
        raise EmptyFlatLocus("flatification would empty the space")
    closures = {d: schematic_closure(ring, u) for d, u in loci.items()}
    inter = _fold(lambda a, b: a.intersect(b), closures.values())
    factor = PresentedModule.from_ideal(inter).fitting_ideal(0)
    center = factor
    for d in ranks:
        center = (center * (M.fitting_ideal(d) + closures[d]).simplified()).simplified()
    witnesses = [g for u in loci.values() for g in u.locus_ideal.generators]
    admissible = all(center.radical_member(h) for h in witnesses)
    data = CenterData(center, loci, closures, factor, witnesses, admissible)
    if check_support:
        U_ideal = Ideal(ring, witnesses)
        data.support_matches = (all(U_ideal.radical_member(g) for g in center.generators)
                                and admissible)
    return data


# --- reports ----------------------------------------------------------------------------------------


@dataclass
class StepRecord:
    index: int
    chart_path: str
    center: Ideal
    center_generators: List[Poly]
    kind: str
    children: List[str]
    admissible: bool
    improvement: bool
    strict_transforms: List[object] = field(default_factory=list)
    step: Optional[BlowupStep] = None


@dataclass
class FinalChart:
    path: str
    chart: AffineChart
    obj: object
    certificate: Dict[str, object]


@dataclass
class FlatteningReport:
    mode: str
    steps: List[StepRecord]
    final_charts: List[FinalChart]
    status: str
    seed: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == "success"


# --- module mode --------------------------------------------------------------------------------------


def flatify_module(M: PresentedModule, ranks: Sequence[int], verify: bool = True,
                   allow_empty: bool = False, seed: int = 0, check_points: int = 8
                   ) -> FlatteningReport:
    root = AffineChart.root(M.ring)
    test = locally_free_test(M, ranks)
    if test.verdict:
        cert = _module_certificate(test)
        return FlatteningReport("module", [], [FinalChart(root.path, root, M, cert)],
                                "success", seed)
    try:
        data = flatify_center(M, ranks, allow_empty=allow_empty)
    except EmptyFlatLocus:
        raise
    if all(u.is_empty() for u in data.rank_loci.values()):
        return FlatteningReport("module", [], [], "vacuous", seed,
                                ["flat locus empty: blow-up result is empty"])
    step = blow_up(root, data.ideal, 0)
    finals, names = [], []
    improved = True
    for i, child in enumerate(step.children):
        st = strict_transform(M, step, i)
        res = locally_free_test(st, ranks)
        if verify and not res.verdict:
            raise EngineError(f"strict transform on chart {child.path} is not locally free")
        before = pullback(M, child)
        pts = _center_points(child, check_points, seed + i, data.ideal)
        improved &= improvement_check(before, st, pts)
        finals.append(FinalChart(child.path, child, st, _module_certificate(res)))
        names.append(child.path)
    rec = StepRecord(0, root.path, data.ideal, step.center_generators, step.kind, names,
                     data.admissible, improved, [f.obj for f in finals], step)
    status = "success" if all(f.certificate["locally_free"] for f in finals) else "failed"
    return FlatteningReport("module", [rec], finals, status, seed)


def _module_certificate(test) -> Dict[str, object]:
    return {"locally_free": test.verdict, "ranks": list(test.profile.ranks),
            "fitting_idempotent": list(test.idempotent)}


def _center_points(chart: AffineChart, n: int, seed: int, center: Optional[Ideal] = None):
    """Rational points of the exceptional locus of ``chart``.

    With ``center`` given, points of the center are sampled on the parent and
    lifted fiberwise, which keeps each lex basis small.
    """
    if chart.exceptional is None:
        return []
    if center is None:
        return sample_points(chart.ring, n, seed=seed, on=chart.exceptional)
    R = chart.ring
    out = []
    for p in sample_points(center.ring, n, seed=seed, on=center):
        eqs = [img - R.const(p[v]) for v, img in zip(chart._parent_names, chart.parent_images)]
        for q in sample_points(R, 2, seed=seed, on=Ideal(R, eqs)):
            if q not in out:
                out.append(q)
    return out[:n]


def resolve_closed_immersion(I: Ideal, verify: bool = True, seed: int = 0) -> FlatteningReport:
    """Blow up until the pulled-back ideal is locally free of rank 0 or 1."""
    if I.is_unit():
        raise ValueError("closed immersion ideal must be proper")
    M = PresentedModule.from_ideal(I)
    report = flatify_module(M, [0, 1], verify=verify, seed=seed)
    for fc in report.final_charts:
        back = pullback(I, fc.chart) if report.steps else I
        test = locally_free_test(PresentedModule.from_ideal(back), [0, 1])
        fc.certificate["pullback_locally_free"] = test.verdict
        fc.certificate["pullback_principal"] = back.is_principal()
        fc.certificate["pullback"] = [str(g) for g in back.groebner_basis()]
        if verify and not test.verdict:
            raise EngineError(f"pulled back ideal on {fc.path} is not locally free")
    report.mode = "closed-immersion"
    return report


# --- Hilbert strata ------------------------------------------------------------------------------------


@dataclass
class Stratum:
    ranks: Tuple[int, ...]
    closure: Ideal
    nonempty: bool
    hilbert_polynomial: Optional[List[Fraction]]


@dataclass
class StrataReport:
    window: Tuple[int, int]
    strata: List[Stratum]
    flags: List[str] = field(default_factory=list)
    pieces: Dict[int, PresentedModule] = field(default_factory=dict)

    @property
    def maximal(self) -> Stratum:
        return self.strata[0]


def rank_order_key(ranks: Sequence[int]) -> Tuple[int, ...]:
    """Total order on rank vectors: top degree first, then descending degrees."""
    return tuple(reversed(tuple(ranks)))


def interpolate(points: Sequence[Tuple[int, int]]) -> Optional[List[Fraction]]:
    """Minimal-degree interpolant (ascending coefficients) if the window pins it down."""
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    deg = max((i for i, c in enumerate(coef) if c != 0), default=0)
    if deg > n - 2:
        return None
    poly = [Fraction(0)] * n
    basis = [Fraction(1)]
    for i in range(deg + 1):
        for k, b in enumerate(basis):
            poly[k] += coef[i] * b
        nb = [Fraction(0)] * (len(basis) + 1)
        for k, b in enumerate(basis):
            nb[k + 1] += b
            nb[k] -= xs[i] * b
        basis = nb
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def _rank_candidates(M: PresentedModule) -> List[int]:
    fits = M.fitting_ideals()
    out = []
    prev = zero_ideal(M.ring)
    for r, F in enumerate(fits):
        if any(not prev.radical_member(g) for g in F.generators):
            out.append(r)
        prev = F
    return out


class _RadicalCache:
    def __init__(self, budget: int):
        self.budget = budget
        self.cache: Dict[Ideal, Optional[Ideal]] = {}

    def outside(self, closed: Ideal, gens: Sequence[Poly]) -> bool:
        """True if some element of ``gens`` is not in the radical of ``closed``."""
        if closed not in self.cache:
            try:
                self.cache[closed] = radical(closed, self.budget)
            except RadicalBudgetExceeded:
                self.cache[closed] = None
        rad = self.cache[closed]
        if rad is None:
            return any(not closed.radical_member(g) for g in gens)
        return any(not rad.contains(g) for g in gens)


def hilbert_stratification(F: ProjectiveFamily, window: Tuple[int, int],
                           radical_budget: int = 200) -> StrataReport:
    lo, hi = window
    if hi < lo:
        raise ValueError("empty degree window")
    degrees = list(range(lo, hi + 1))
    pieces = {d: graded_piece(F, d).pruned for d in degrees}
    cands = {d: _rank_candidates(pieces[d]) for d in degrees}
    ring = F.base
    rc = _RadicalCache(radical_budget)
    found: List[Tuple[Tuple[int, ...], Ideal]] = []

    def walk(i: int, ranks: Tuple[int, ...], closed: Ideal, opened: Ideal):
        if i == len(degrees):
            found.append((ranks, closed))
            return
        d = degrees[i]
        for r in cands[d]:
            c = (closed + pieces[d].fitting_ideal(r - 1)).simplified()
            if c.is_unit():
                continue
            o = (opened * pieces[d].fitting_ideal(r)).simplified()
            if not rc.outside(c, o.generators):
                continue
            walk(i + 1, ranks + (r,), c, o)

    walk(0, (), zero_ideal(ring), unit_ideal(ring))
    found.sort(key=lambda t: rank_order_key(t[0]), reverse=True)
    strata, flags = [], []
    for ranks, closed in found:
        hp = interpolate(list(zip(degrees, ranks)))
        if hp is None:
            flags.append(f"window too short to interpolate {ranks}")
        strata.append(Stratum(ranks, closed, True, hp))
    return StrataReport((lo, hi), strata, flags, pieces)


def default_window(F: ProjectiveFamily) -> Tuple[int, int]:
    return (1, max(F.total_degree(), len(F.fiber_vars)) + 2)


# --- progress --------------------------------------------------------------------------------------------


def improvement_check(before, after, points: Sequence[dict], degrees: Sequence[int] = (),
                      after_flat: Optional[OpenLocus] = None) -> bool:
    """At each point the fiber strictly shrinks, or the point is now in the flat locus."""
    if not points:
        log.warning("improvement check ran on an empty sample")
        return True
    for pt in points:
        if isinstance(before, PresentedModule):
            dropped = fiber_eval(after, pt) < fiber_eval(before, pt)
        else:
            dropped = any(fiber_eval(after, pt, d) < fiber_eval(before, pt, d) for d in degrees)
        if dropped:
            continue
        if after_flat is None:
            if isinstance(after, PresentedModule):
                after_flat = flat_locus(after)
            else:
                after_flat = flat_locus([graded_piece(after, d).pruned for d in degrees])
        if not after_flat.contains_point(pt):
            return False
    return True


# --- projective mode --------------------------------------------------------------------------------------


def family_flat(F: ProjectiveFamily, degrees: Sequence[int]) -> Tuple[bool, List[bool]]:
    res = [locally_free_test(graded_piece(F, d).pruned).verdict for d in degrees]
    return all(res), res


def projective_flatify(F: ProjectiveFamily, window: Optional[Tuple[int, int]] = None,
                       max_steps: int = 32, verify: bool = True, seed: int = 0,
                       radical_budget: int = 200, check_points: int = 6) -> FlatteningReport:
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    window = window or default_window(F)
    lo, hi = window
    degrees = list(range(lo, hi + 1))
    warnings = []
    if hi - lo + 1 < F.ring.nvars - F.base.nvars:
        warnings.append("degree window shorter than the fiber dimension bound")
    root = AffineChart.root(F.base)
    work: List[Tuple[AffineChart, ProjectiveFamily]] = [(root, F)]
    steps: List[StepRecord] = []
    finals: List[FinalChart] = []
    status = "success"
    while work:
        chart, fam = work.pop(0)
        strata = hilbert_stratification(fam, window, radical_budget)
        top = strata.maximal
        if len(strata.strata) == 1:
            pieces_ok = all(locally_free_test(strata.pieces[d]).verdict for d in degrees)
            if pieces_ok:
                cert = {"strata": 1, "ranks": list(top.ranks),
                        "hilbert_polynomial": top.hilbert_polynomial, "window_flat": True}
                if verify:
                    ext_ok, ext = family_flat(fam, [hi + 1, hi + 2])
                    cert["extension_flat"] = ext_ok
                    if not ext_ok:
                        status = "failed"
                finals.append(FinalChart(chart.path, chart, fam, cert))
                continue
            # one stratum without flatness only happens over a non-reduced chart
            warnings.append(f"chart {chart.path}: single stratum but graded pieces not flat")
            finals.append(FinalChart(chart.path, chart, fam, {"strata": 1, "window_flat": False}))
            status = "failed"
            continue
        if len(steps) >= max_steps:
            status = "budget"
            finals.append(FinalChart(chart.path, chart, fam, {"strata": len(strata.strata),
                                                               "window_flat": False}))
            continue
        center = top.closure
        flat = flat_locus(list(strata.pieces.values()))
        admissible = all(center.radical_member(h) for h in flat.locus_ideal.generators)
        step = blow_up(chart, center, len(steps))
        names, transforms = [], []
        improved = True
        children = []
        for i, child in enumerate(step.children):
            st = strict_transform(fam, step, i)
            before = pullback(fam, child)
            pts = _center_points(child, check_points, seed + 97 * len(steps) + i, center)
            improved &= improvement_check(before, st, pts, degrees)
            names.append(child.path)
            transforms.append(st)
            children.append((child, st))
        steps.append(StepRecord(len(steps), chart.path, center, step.center_generators, step.kind,
                                names, admissible, improved, transforms, step))
        work = children + work
    if status == "success" and verify and not all(f.certificate.get("window_flat") for f in finals):
        status = "failed"
    return FlatteningReport("projective", steps, finals, status, seed, warnings)
