"""Acceptance criteria 1-8.  Each test records one PASS/FAIL line with its runtime."""

import logging
import sys
import time
from pathlib import Path

import pytest

from flatify.algebra import Ideal, PolyRing, radical
from flatify.dsl import parse_input
from flatify.engine import (flatify_center, flatify_module, hilbert_stratification,
                            projective_flatify, resolve_closed_immersion)
from flatify.geometry import fiber_eval, flat_base_change, sample_points, strict_transform
from flatify.modules import PresentedModule, locally_free_test

sys.path.insert(0, str(Path(__file__).parent))
from corpus import PLANE, corpus  # noqa: E402

INPUTS = Path(__file__).resolve().parent.parent / "inputs"
SEGRE_WINDOW = (1, 4)
MAX_STEPS = 32


def load(name):
    return parse_input((INPUTS / name).read_text())


def ideal(ring, *gens):
    return Ideal(ring, [ring(g) for g in gens])


def ranks_of(M):
    return list(range(M.ngens + 1))


class EmptySamples(logging.Handler):
    """Counts improvement checks that ran on no sample points."""

    def __init__(self):
        super().__init__()
        self.count = 0

    def emit(self, record):
        if "empty sample" in record.getMessage():
            self.count += 1


def timed_run(fn):
    handler = EmptySamples()
    logger = logging.getLogger("flatify.engine")
    logger.addHandler(handler)
    start = time.perf_counter()
    try:
        out = fn()
    finally:
        logger.removeHandler(handler)
    return out, time.perf_counter() - start, handler.count


# --- shared runs ----------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def segre():
    F = load("segre_family.fl").families["F"]
    rep, secs, vacuous = timed_run(lambda: projective_flatify(
        F, window=SEGRE_WINDOW, max_steps=MAX_STEPS, verify=True))
    return F, rep, secs, vacuous


@pytest.fixture(scope="module")
def corpus_runs():
    mods = corpus()

    def run():
        return [flatify_module(M, ranks_of(M), verify=True, seed=i, check_points=8)
                for i, M in enumerate(mods)]
    reps, secs, vacuous = timed_run(run)
    return mods, reps, secs, vacuous


@pytest.fixture(scope="module")
def fixture_runs():
    def run():
        out = {}
        for name, mod in [("two_lines.fl", "M"), ("embedded_point.fl", "M"), ("plane.fl", "M")]:
            out[f"{name}:{mod}"] = flatify_module(load(name).modules[mod], [0, 1])
        plane = load("plane.fl")
        for nm in ("origin", "line", "tangent"):
            out[f"resolve-ci:{nm}"] = resolve_closed_immersion(plane.ideals[nm])
        out["pencil.fl:F"] = projective_flatify(load("pencil.fl").families["F"], window=(1, 3),
                                                max_steps=MAX_STEPS)
        return out
    reps, secs, vacuous = timed_run(run)
    return reps, secs, vacuous


# --- criteria -------------------------------------------------------------------------------------


def test_criterion_1_fitting_values(verdict):
    start = time.perf_counter()
    R = PolyRing(["x", "y"])
    M = PresentedModule.cyclic(ideal(R, "x"))
    ok = M.fitting_ideal(0) == ideal(R, "x") and M.fitting_ideal(1) == ideal(R, "1")
    secs = time.perf_counter() - start
    ok = ok and secs < 1
    assert verdict("criterion 1 (Fitting ideals of O/(x))", ok,
                   f"F_0 = (x), F_1 = (1) exact; {secs:.3f} s (limit 1 s)")


def test_criterion_2_center_formula(verdict):
    start = time.perf_counter()
    emb = load("embedded_point.fl").modules["M"]
    lines = load("two_lines.fl").modules["M"]
    c_emb = flatify_center(emb, [0, 1]).ideal == ideal(emb.ring, "x", "y")
    c_lines = flatify_center(lines, [0, 1]).ideal == ideal(lines.ring, "x", "y")
    rep = flatify_module(lines, [0, 1], verify=True)
    chart_ranks = sorted(tuple(fc.certificate["ranks"]) for fc in rep.final_charts)
    certified = rep.success and chart_ranks == [(0,), (1,)]
    secs = time.perf_counter() - start
    ok = c_emb and c_lines and certified and secs < 5
    assert verdict("criterion 2 (center formula)", ok,
                   f"embedded point center (x,y) {c_emb}, two lines center (x,y) {c_lines}, "
                   f"chart ranks {chart_ranks}; {secs:.2f} s (limit 5 s)")


def test_criterion_3_segre_two_steps(verdict, segre):
    F, rep, secs, _ = segre
    S = F.base
    n_steps = len(rep.steps)
    first = second = False
    if n_steps >= 1:
        first = radical(rep.steps[0].center) == ideal(S, "y", "z")
    if n_steps >= 2:
        s0, s1 = rep.steps[0], rep.steps[1]
        idx = s0.children.index(s1.chart_path)
        c2 = strict_transform(ideal(S, "x", "z"), s0.step, idx)
        second = radical(s1.center) == radical(c2)
    verified = rep.status == "success" and all(
        fc.certificate.get("window_flat") and fc.certificate.get("extension_flat")
        for fc in rep.final_charts)
    ok = n_steps == 2 and first and second and verified and secs <= 300
    assert verdict("criterion 3 (two-step loop on the Segre family)", ok,
                   f"{n_steps} steps, first center sqrt = (y,z) {first}, second = strict "
                   f"transform of (x,z) {second}, final verify {verified}; "
                   f"{secs:.1f} s (limit 300 s)")


def test_criterion_4_branch_asymmetry(verdict):
    start = time.perf_counter()
    F = load("segre_family.fl").families["F"]
    S = F.base
    on_c1 = hilbert_stratification(F.restrict(ideal(S, "y", "z")), SEGRE_WINDOW)
    on_c2 = hilbert_stratification(F.restrict(ideal(S, "x", "z")), SEGRE_WINDOW)
    c1_flat = len(on_c1.strata) == 1
    c2_two = len(on_c2.strata) == 2
    at_p = False
    if c2_two:
        closed = on_c2.maximal.closure
        lifted = Ideal(S, [S.convert(g) for g in closed.generators]) + ideal(S, "x", "z")
        at_p = radical(lifted) == ideal(S, "x", "y", "z")
    secs = time.perf_counter() - start
    ok = c1_flat and c2_two and at_p and secs <= 120
    assert verdict("criterion 4 (branch asymmetry)", ok,
                   f"C1 strata {[s.ranks for s in on_c1.strata]}, C2 strata "
                   f"{[s.ranks for s in on_c2.strata]}, closed stratum at P {at_p}; "
                   f"{secs:.1f} s (limit 120 s)")


def test_criterion_5_functoriality(verdict):
    start = time.perf_counter()
    mods = corpus()
    adjoin = flat_base_change(PLANE, "adjoin", ["z"])
    local = flat_base_change(PLANE, "localize", h="y")
    bad = 0
    for M in mods:
        Z = flatify_center(M, ranks_of(M)).ideal
        for bc in (adjoin, local):
            Zb = flatify_center(bc.module(M), ranks_of(M)).ideal
            if Zb != bc.extend(Z):
                bad += 1
    secs = time.perf_counter() - start
    ok = len(mods) >= 100 and bad == 0 and secs <= 60
    assert verdict("criterion 5 (center commutes with flat base change)", ok,
                   f"{len(mods)} modules x 2 base changes, {bad} mismatches; "
                   f"{secs:.1f} s (limit 60 s)")


def test_criterion_6_oracle_equivalence(verdict, corpus_runs):
    mods, reps, secs, _ = corpus_runs
    charts = points = bad = 0
    for i, (M, rep) in enumerate(zip(mods, reps)):
        if not rep.success:
            bad += 1
            continue
        for j, fc in enumerate(rep.final_charts):
            charts += 1
            test = locally_free_test(fc.obj, ranks_of(M))
            if not test.verdict or list(test.profile.ranks) != fc.certificate["ranks"]:
                bad += 1
                continue
            for pt in sample_points(fc.chart.ring, 20, seed=1000 * i + j):
                points += 1
                if fiber_eval(fc.obj, pt) != test.profile.rank_at(pt):
                    bad += 1
    ok = bad == 0
    assert verdict("criterion 6 (oracle equivalence)", ok,
                   f"{len(mods)} modules, {charts} final charts, {points} points, "
                   f"{bad} discrepancies; flatify run {secs:.1f} s")


def test_criterion_7_improvement(verdict, segre, corpus_runs, fixture_runs):
    _, seg, _, seg_vac = segre
    _, reps, _, corpus_vac = corpus_runs
    fx, _, fx_vac = fixture_runs
    all_reps = [seg] + list(fx.values()) + list(reps)
    steps = [s for r in all_reps for s in r.steps]
    failed = [s for s in steps if not s.improvement]
    ok = bool(steps) and not failed
    assert verdict("criterion 7 (improvement after every blow-up)", ok,
                   f"{len(steps)} steps over {len(all_reps)} runs, {len(failed)} failed, "
                   f"{seg_vac + corpus_vac + fx_vac} checks on an empty sample")


def test_criterion_8_idempotence(verdict, segre, corpus_runs, fixture_runs):
    start = time.perf_counter()
    F, seg, _, _ = segre
    mods, reps, _, _ = corpus_runs
    fx, _, _ = fixture_runs
    problems = []
    # flat inputs
    flat_mods = [(load("two_lines.fl").modules["Mfree"], [1]),
                 (PresentedModule.free(PLANE, 2), [2])]
    for M, d in flat_mods:
        if flatify_module(M, d).steps:
            problems.append("flat module took steps")
    G = load("pencil.fl").families["G"]
    if projective_flatify(G, window=(1, 3)).steps:
        problems.append("flat family took steps")
    on_c1 = F.restrict(ideal(F.base, "y", "z"))
    if projective_flatify(on_c1, window=SEGRE_WINDOW).steps:
        problems.append("flat Segre restriction took steps")
    # re-running successful outputs
    reruns = 0
    for M, rep in zip(mods, reps):
        for fc in rep.final_charts:
            reruns += 1
            if flatify_module(fc.obj, ranks_of(M)).steps:
                problems.append(f"corpus chart {fc.path} took steps")
    for key, rep in fx.items():
        for fc in rep.final_charts:
            reruns += 1
            if key.startswith("pencil"):
                again = projective_flatify(fc.obj, window=(1, 3))
            elif key.startswith("resolve-ci"):
                again = flatify_module(PresentedModule.from_ideal(
                    Ideal(fc.chart.ring, [fc.chart.ring(g) for g in fc.certificate["pullback"]])),
                    [0, 1])
            else:
                again = flatify_module(fc.obj, [0, 1])
            if again.steps:
                problems.append(f"{key} chart {fc.path} took steps")
    for fc in seg.final_charts:
        reruns += 1
        if projective_flatify(fc.obj, window=SEGRE_WINDOW).steps:
            problems.append(f"Segre chart {fc.path} took steps")
    budget = [r for r in [seg] + list(fx.values()) + list(reps) if r.status == "budget"]
    if budget:
        problems.append(f"{len(budget)} runs exhausted max_steps={MAX_STEPS}")
    secs = time.perf_counter() - start
    ok = not problems
    assert verdict("criterion 8 (idempotence and termination)", ok,
                   f"{reruns} re-runs of final charts, {len(problems)} problems "
                   f"{problems[:3]}; {secs:.1f} s")
