import random
import sys
from pathlib import Path

import pytest

from flatify.algebra import Ideal, PolyRing, unit_ideal, zero_ideal
from flatify.geometry import ProjectiveFamily, fiber_eval, flat_base_change, sample_points
from flatify.modules import (ModuleError, PresentedModule, base_change_module, free_rank_locus,
                             graded_piece, locally_free_test, torsion_quotient)

sys.path.insert(0, str(Path(__file__).parent))
from corpus import corpus  # noqa: E402

R = PolyRing(["x", "y"])


def ideal(ring, *gens):
    return Ideal(ring, [ring(g) for g in gens])


def cyclic(ring, *gens):
    return PresentedModule.cyclic(ideal(ring, *gens))


# --- Fitting ideals -------------------------------------------------------------------------------


def test_fitting_of_cyclic_quotient():
    M = cyclic(R, "x")
    assert M.fitting_ideal(0) == ideal(R, "x")
    assert M.fitting_ideal(1).is_unit()


def test_fitting_of_free_module():
    M = PresentedModule.free(R, 1)
    assert M.fitting_ideal(0).is_zero()
    assert M.fitting_ideal(1).is_unit()


def test_fitting_of_ideal_with_embedded_point():
    A = R.with_quotient(["x^2", "x*y"])
    M = PresentedModule.from_ideal(ideal(A, "x"))
    assert M.ngens == 1
    assert M.fitting_ideal(0) == ideal(A, "x", "y")


def test_fitting_conventions():
    Z = PresentedModule(R, 0, [])
    assert all(Z.fitting_ideal(n).is_unit() for n in range(3))
    assert cyclic(R, "x").fitting_ideal(-1).is_zero()
    assert cyclic(R, "x").fitting_ideal(5).is_unit()


def test_fitting_in_quotient_ring_is_reduced():
    A = R.with_quotient(["x*y"])
    M = PresentedModule(A, 1, [[A("x + x*y")]])
    assert M.fitting_ideal(0) == ideal(A, "x")


@pytest.mark.parametrize("M", corpus(25, seed=7))
def test_fitting_presentation_independence(M):
    # a redundant generator g' = sum c_i g_i with its defining relation
    rng = random.Random(len(M.columns))
    c = [R.const(rng.randint(-2, 2)) for _ in range(M.ngens)]
    cols = [list(col) + [R.zero] for col in M.columns]
    cols.append(list(c) + [R.const(-1)])
    N = PresentedModule(R, M.ngens + 1, cols)
    for n in range(M.ngens + 2):
        assert N.fitting_ideal(n) == M.fitting_ideal(n)


@pytest.mark.parametrize("M", corpus(25, seed=8))
def test_fitting_chain(M):
    fits = M.fitting_ideals()
    for a, b in zip(fits, fits[1:]):
        assert b.contains_ideal(a)


def test_trimmed_presentation_keeps_fitting_ideals():
    cols = [[R(a), R(b)] for a, b in
            [("x", "y"), ("x^2", "x*y"), ("y", "0"), ("x*y", "y^2"), ("0", "x"), ("x + y", "y")]]
    M = PresentedModule(R, 2, cols)
    T = M.trimmed
    assert len(T.columns) < len(M.pruned.columns)
    for n in range(2):
        assert Ideal(R, _all_minors(T, 2 - n)) == Ideal(R, _all_minors(M.pruned, 2 - n))


def _all_minors(M, k):
    from flatify.modules import _minors
    return _minors(M.columns, M.ngens, k)


# --- local freeness -------------------------------------------------------------------------------


def test_locally_free_test_free():
    res = locally_free_test(PresentedModule.free(R, 2))
    assert res.verdict and res.profile.ranks == [2]


def test_locally_free_test_quotient_not_free():
    assert not locally_free_test(cyclic(R, "x")).verdict


def test_locally_free_test_over_line():
    A = R.with_quotient(["x"])
    res = locally_free_test(cyclic(A, "x"))
    assert res.verdict and res.profile.ranks == [1]


def test_locally_free_respects_rank_set():
    assert not locally_free_test(PresentedModule.free(R, 2), [0, 1]).verdict


# --- rank loci -----------------------------------------------------------------------------------


def test_free_rank_locus():
    M = cyclic(R, "x")
    assert free_rank_locus(M, 0).locus_ideal == ideal(R, "x")
    assert free_rank_locus(PresentedModule.free(R, 2), 2).is_whole()
    A = R.with_quotient(["x*y"])
    U = free_rank_locus(cyclic(A, "x"), 1)
    assert U.locus_ideal == ideal(A, "y")
    assert fiber_eval(cyclic(A, "x"), {"x": 0, "y": 1}) == 1


def test_rank_loci_are_disjoint():
    A = R.with_quotient(["x*y"])
    M = cyclic(A, "x")
    loci = {d: free_rank_locus(M, d) for d in range(2)}
    both = loci[0].intersection(loci[1])
    assert both.is_empty()
    for p in sample_points(A, 20, seed=3):
        hits = [d for d, u in loci.items() if u.contains_point(p)]
        assert len(hits) <= 1
        if hits:
            assert hits[0] == fiber_eval(M, p)


def test_negative_rank_rejected():
    with pytest.raises(ModuleError):
        free_rank_locus(cyclic(R, "x"), -1)


# --- torsion --------------------------------------------------------------------------------------


def test_torsion_kills_cyclic():
    assert torsion_quotient(cyclic(R, "x"), ideal(R, "x")).is_zero_module()


def test_torsion_free_unchanged():
    F = PresentedModule.free(R, 2)
    assert torsion_quotient(F, ideal(R, "x", "y")) == F


def test_torsion_over_product():
    A = R.with_quotient(["x*y"])
    M = PresentedModule.free(A, 1)
    T = torsion_quotient(M, ideal(A, "x"))
    assert T == cyclic(A, "y")


def test_torsion_zero_ideal_rejected():
    with pytest.raises(ModuleError):
        torsion_quotient(cyclic(R, "x"), zero_ideal(R))


@pytest.mark.parametrize("M", corpus(15, seed=9))
def test_torsion_idempotent_and_rank_nonincreasing(M):
    J = ideal(R, "x")
    T = torsion_quotient(M, J)
    assert torsion_quotient(T, J) == T
    for p in sample_points(R, 8, seed=1):
        assert fiber_eval(T, p) <= fiber_eval(M, p)


# --- graded pieces --------------------------------------------------------------------------------


def test_graded_piece_of_node():
    F = ProjectiveFamily(PolyRing([]), ["x0", "x1"], ["x0*x1"])
    M = graded_piece(F, 2)
    assert M.ngens == 3 and len(M.columns) == 1
    assert M.fiber_rank({}) == 2


def test_graded_piece_of_free_family():
    F = ProjectiveFamily(PolyRing(["s"]), ["x0", "x1", "x2"], [])
    M = graded_piece(F, 2)
    assert M.ngens == 6 and locally_free_test(M).profile.ranks == [6]


def test_graded_piece_of_moving_point():
    S = PolyRing(["s"])
    F = ProjectiveFamily(S, ["x0", "x1"], ["x0 - s*x1"])
    M = graded_piece(F, 1)
    assert M.ngens == 2 and len(M.columns) == 1
    res = locally_free_test(M)
    assert res.verdict and res.profile.ranks == [1]


def test_graded_piece_negative_degree():
    F = ProjectiveFamily(PolyRing(["s"]), ["x0", "x1"], ["x0"])
    with pytest.raises(ModuleError):
        graded_piece(F, -1)


# --- base change ----------------------------------------------------------------------------------


def test_base_change_identity():
    M = cyclic(R, "x")
    assert base_change_module(M, R.gens) == M


def test_base_change_adjoin():
    M = cyclic(R, "x")
    bc = flat_base_change(R, "adjoin", ["z"])
    N = bc.module(M)
    assert N.fitting_ideal(0) == bc.extend(M.fitting_ideal(0))


def test_base_change_localize():
    M = PresentedModule(R, 2, [[R("x"), R("y")], [R("y^2"), R("x")]])
    bc = flat_base_change(R, "localize", h="y")
    N = bc.module(M)
    for n in range(3):
        assert N.fitting_ideal(n) == bc.extend(M.fitting_ideal(n)).simplified()


def test_base_change_ill_defined():
    A = R.with_quotient(["x*y"])
    with pytest.raises(ModuleError):
        base_change_module(cyclic(A, "x"), [R("x"), R("x")])
