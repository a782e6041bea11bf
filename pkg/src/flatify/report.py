"""Canonical JSON rendering of engine results."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List

from .algebra import Ideal, OpenLocus, Poly, PolyRing
from .engine import CenterData, Filtration, FlatteningReport, StrataReport
from .geometry import AffineChart, BlowupStep, ProjectiveFamily
from .modules import PresentedModule

SCHEMA_VERSION = "1.0"


def poly(p: Poly) -> str:
    return str(p)


def ideal(I: Ideal) -> List[str]:
    """Reduced basis with integer-normalized generators."""
    return [str(g.primitive()) for g in I.groebner_basis()]


def ring(R: PolyRing) -> Dict[str, Any]:
    return {"variables": list(R.variables), "order": R.order.name,
            "quotient": [str(g.primitive()) for g in R.quotient_polys]}


def module(M: PresentedModule) -> Dict[str, Any]:
    return {"ring": ring(M.ring), "generators": M.ngens,
            "relations": [[poly(a) for a in col] for col in M.columns]}


def family(F: ProjectiveFamily) -> Dict[str, Any]:
    return {"base": ring(F.base), "fiber_variables": list(F.fiber_vars),
            "ideal": ideal(F.ideal)}


def locus(U: OpenLocus) -> Dict[str, Any]:
    return {"locus_ideal": ideal(U.locus_ideal), "whole": U.is_whole(), "empty": U.is_empty()}


def chart(C: AffineChart) -> Dict[str, Any]:
    out = {"path": C.path, "ring": ring(C.ring)}
    if C.root_images is not None:
        out["root_substitution"] = {v: poly(g) for v, g in zip(C.base_vars, C.root_images)}
    out["exceptional"] = ideal(C.exceptional) if C.exceptional is not None else None
    return out


def blowup(step: BlowupStep) -> Dict[str, Any]:
    return {"kind": step.kind, "center_generators": [poly(g) for g in step.center_generators],
            "dropped_charts": list(step.dropped), "children": [chart(c) for c in step.children]}


def _obj(o) -> Any:
    if isinstance(o, PresentedModule):
        return {"module": module(o)}
    if isinstance(o, ProjectiveFamily):
        return {"family": family(o)}
    if isinstance(o, Ideal):
        return {"ideal": ideal(o)}
    return None


def _plain(v) -> Any:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def flattening(rep: FlatteningReport) -> Dict[str, Any]:
    steps = []
    for s in rep.steps:
        steps.append({
            "index": s.index, "chart_path": s.chart_path, "kind": s.kind,
            "center": ideal(s.center),
            "center_generators": [poly(g) for g in s.center_generators],
            "children": list(s.children),
            "certificates": {"admissible": s.admissible, "improvement": s.improvement},
            "strict_transforms": [_obj(o) for o in s.strict_transforms],
        })
    finals = [{"chart": chart(f.chart), "object": _obj(f.obj), "certificate": _plain(f.certificate)}
              for f in rep.final_charts]
    return {"mode": rep.mode, "status": rep.status, "step_count": len(rep.steps),
            "steps": steps, "final_charts": finals, "warnings": list(rep.warnings)}


def strata(rep: StrataReport) -> Dict[str, Any]:
    return {"window": list(rep.window),
            "strata": [{"ranks": list(s.ranks), "closure": ideal(s.closure),
                        "nonempty": s.nonempty,
                        "hilbert_polynomial": _plain(s.hilbert_polynomial)}
                       for s in rep.strata],
            "flags": list(rep.flags)}


def center(data: CenterData) -> Dict[str, Any]:
    return {"center": ideal(data.ideal),
            "rank_loci": {str(d): ideal(u.locus_ideal) for d, u in sorted(data.rank_loci.items())},
            "closures": {str(d): ideal(J) for d, J in sorted(data.closures.items())},
            "intersection_factor": ideal(data.intersection_factor),
            "certificates": {"admissible": data.admissible,
                             "support_matches": data.support_matches}}


def filtration(f: Filtration) -> Dict[str, Any]:
    return {"loci": [ideal(u.locus_ideal) for u in f.loci], "complete": f.complete,
            "reason": f.reason}


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
