from fractions import Fraction
from pathlib import Path

import pytest

from flatify.algebra import Ideal, PolyRing, radical
from flatify.dsl import parse_input
from flatify.engine import (EmptyFlatLocus, flat_locus, flatify_center, flatify_module,
                            flattening_filtration, hilbert_stratification, improvement_check,
                            interpolate, projective_flatify, rank_order_key,
                            resolve_closed_immersion)
from flatify.modules import PresentedModule, locally_free_test

INPUTS = Path(__file__).resolve().parent.parent / "inputs"
R = PolyRing(["x", "y"])


def load(name):
    return parse_input((INPUTS / name).read_text())


def ideal(ring, *gens):
    return Ideal(ring, [ring(g) for g in gens])


def cyclic(ring, *gens):
    return PresentedModule.cyclic(ideal(ring, *gens))


# --- flat locus and filtration --------------------------------------------------------------------


def test_flat_locus_of_cyclic_quotient():
    assert flat_locus(cyclic(R, "x")).locus_ideal == ideal(R, "x")


def test_flat_locus_of_free_module_is_whole():
    assert flat_locus(PresentedModule.free(R, 2)).is_whole()


def test_flat_locus_of_several_modules_intersects():
    U = flat_locus([cyclic(R, "x"), cyclic(R, "y")])
    assert U.locus_ideal == ideal(R, "x*y")


def test_filtration_of_cyclic_quotient():
    f = flattening_filtration(cyclic(R, "x"))
    assert f.complete
    assert [u.locus_ideal for u in f.loci] == [ideal(R, "x"), ideal(R, "1")]


def test_filtration_of_two_lines():
    M = load("two_lines.fl").modules["M"]
    f = flattening_filtration(M)
    # flat away from the crossing point, and free of rank 1 on it
    assert radical(f.loci[0].locus_ideal) == ideal(M.ring, "x", "y")
    assert len(f.loci) == 2 and f.loci[-1].is_whole()


# --- the center -----------------------------------------------------------------------------------


def test_center_embedded_point():
    M = load("embedded_point.fl").modules["M"]
    data = flatify_center(M, [0, 1])
    assert data.ideal == ideal(M.ring, "x", "y")
    assert data.admissible and data.support_matches


def test_center_two_lines():
    M = load("two_lines.fl").modules["M"]
    assert flatify_center(M, [0, 1]).ideal == ideal(M.ring, "x", "y")


def test_center_of_free_module_is_unit():
    assert flatify_center(PresentedModule.free(R, 1), [1]).ideal.is_unit()


def test_empty_flat_locus():
    N = PolyRing(["x"]).with_quotient(["x^2"])
    with pytest.raises(EmptyFlatLocus):
        flatify_center(cyclic(N, "x"), [0, 1])
    assert flatify_center(cyclic(N, "x"), [0, 1], allow_empty=True).ideal is not None


def test_empty_rank_set_rejected():
    with pytest.raises(ValueError):
        flatify_center(cyclic(R, "x"), [])


# --- module mode ----------------------------------------------------------------------------------


def test_flatify_two_lines():
    rep = flatify_module(load("two_lines.fl").modules["M"], [0, 1])
    assert rep.success and len(rep.steps) == 1
    ranks = sorted(fc.certificate["ranks"][0] for fc in rep.final_charts)
    assert ranks == [0, 1]
    assert rep.steps[0].admissible and rep.steps[0].improvement


def test_flatify_embedded_point():
    rep = flatify_module(load("embedded_point.fl").modules["M"], [0, 1])
    assert rep.success and len(rep.steps) == 1
    for fc in rep.final_charts:
        assert locally_free_test(fc.obj, [0, 1]).verdict


def test_flatify_free_is_zero_steps():
    rep = flatify_module(load("two_lines.fl").modules["Mfree"], [1])
    assert rep.success and rep.steps == []


def test_flatify_vacuous():
    N = PolyRing(["x"]).with_quotient(["x^2"])
    rep = flatify_module(cyclic(N, "x"), [0, 1], allow_empty=True)
    assert rep.status == "vacuous"


def test_resolve_closed_immersion():
    s = load("plane.fl")
    for name in ("origin", "tangent"):
        rep = resolve_closed_immersion(s.ideals[name])
        assert rep.success and rep.mode == "closed-immersion"
        assert all(fc.certificate["pullback_principal"] for fc in rep.final_charts)


def test_resolve_rejects_unit():
    with pytest.raises(ValueError):
        resolve_closed_immersion(ideal(R, "1"))


# --- strata ---------------------------------------------------------------------------------------


def test_rank_order_key_puts_top_degree_first():
    assert sorted([(1, 1, 1), (2, 3, 4), (1, 2, 5)], key=rank_order_key, reverse=True)[0] == (1, 2, 5)


def test_interpolate():
    assert interpolate([(1, 2), (2, 3), (3, 4)]) == [Fraction(1), Fraction(1)]
    assert interpolate([(1, 1), (2, 1), (3, 1)]) == [Fraction(1)]
    assert interpolate([(1, 1), (2, 4), (3, 9)]) is None


def test_pencil_strata():
    F = load("pencil.fl").families["F"]
    rep = hilbert_stratification(F, (1, 3))
    assert [s.ranks for s in rep.strata] == [(2, 3, 4), (1, 1, 1)]
    assert rep.maximal.closure == ideal(F.base, "s")
    assert rep.maximal.hilbert_polynomial == [1, 1]


def test_flat_family_single_stratum():
    G = load("pencil.fl").families["G"]
    rep = hilbert_stratification(G, (1, 3))
    assert [s.ranks for s in rep.strata] == [(1, 1, 1)]


# --- projective mode ------------------------------------------------------------------------------


def test_projective_pencil_one_step():
    rep = projective_flatify(load("pencil.fl").families["F"], window=(1, 3))
    assert rep.success and len(rep.steps) == 1
    assert rep.steps[0].kind == "identity"
    assert rep.steps[0].improvement


def test_projective_flat_family_zero_steps():
    rep = projective_flatify(load("pencil.fl").families["G"], window=(1, 3))
    assert rep.success and rep.steps == []


def test_projective_rejects_zero_budget():
    with pytest.raises(ValueError):
        projective_flatify(load("pencil.fl").families["G"], max_steps=0)


# --- improvement check ----------------------------------------------------------------------------


def test_improvement_empty_sample_is_vacuous(caplog):
    M = cyclic(R, "x")
    assert improvement_check(M, M, [])
    assert "empty sample" in caplog.text


def test_improvement_detects_no_progress():
    M = cyclic(R, "x")
    assert not improvement_check(M, M, [{"x": 0, "y": 1}])
    assert improvement_check(M, M, [{"x": 1, "y": 1}])
