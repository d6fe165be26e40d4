import random
from fractions import Fraction
from math import isqrt

import pytest
from sympy import primerange

from app.errors import SingularCurveError
from app.models.arith import jacobi_symbol
from app.models.curvedb import bundled_records
from app.models.ellcurve import CurveFp, CurveQ, tate_conductor, twist_is_isomorphic


def test_discriminant_and_j_invariant():
    assert CurveQ(0, 0, 0, 0, -1).discriminant == -432
    assert CurveQ(0, 0, 0, -1, 0).j_invariant == 1728


def test_frey_curve_discriminant():
    frey = CurveQ(1, 11, 0, 32, 0)
    assert frey.discriminant == -(2 ** 10) * 23


def test_singular_curve_is_rejected():
    with pytest.raises(SingularCurveError):
        CurveQ(0, 0, 0, 0, 0)
    with pytest.raises(SingularCurveError):
        CurveFp.short(0, 0, 0, 7).trace_of_frobenius()


@pytest.mark.parametrize("label", sorted(bundled_records()))
def test_bundled_curves_have_their_label_conductor(label):
    record = bundled_records()[label]
    assert tate_conductor(record.curve).conductor == record.conductor


def test_frey_curve_conductor_is_46():
    data = tate_conductor(CurveQ(1, 11, 0, 32, 0))
    assert data.conductor == 46
    assert data.local_at(23).conductor_exponent == 1


def test_minimal_model_of_a_scaled_curve():
    E = bundled_records()["14a1"].curve
    scaled = E.scaled(Fraction(1, 6))
    assert tate_conductor(scaled).conductor == 14
    assert twist_is_isomorphic(scaled, E)


@pytest.mark.parametrize("d", [-1, 5, -3, 13, 12])
def test_quadratic_twist_keeps_j(d):
    E = bundled_records()["46a1"].curve
    twisted = E.quadratic_twist(d)
    assert twisted.j_invariant == E.j_invariant
    assert twist_is_isomorphic(twisted.quadratic_twist(d), E)


def test_trace_examples():
    assert CurveFp.short(0, 1, 0, 5).trace_of_frobenius() == 2
    assert bundled_records()["14a1"].curve.a_ell(3) == -2


def test_hasse_bound_and_counting_methods_agree():
    rng = random.Random(3)
    ell = 10007
    for _ in range(10):
        curve = CurveFp.short(rng.randrange(ell), rng.randrange(ell), rng.randrange(ell), ell)
        if curve.is_singular():
            continue
        a = curve.trace_of_frobenius(method="charsum")
        assert a * a < 4 * ell
        assert curve.trace_of_frobenius(method="bsgs", rng=random.Random(1)) == a


def test_twist_by_non_residue_negates_trace():
    rng = random.Random(11)
    ell = 101
    d = next(d for d in range(2, ell) if jacobi_symbol(d, ell) == -1)
    for _ in range(50):
        curve = CurveFp.short(rng.randrange(ell), rng.randrange(ell), rng.randrange(ell), ell)
        if curve.is_singular():
            continue
        assert curve.quadratic_twist(d).trace_of_frobenius() == -curve.trace_of_frobenius()


def test_full_two_torsion_examples():
    assert CurveFp.short(3, 2, 0, 7).has_full_two_torsion()
    assert not CurveFp.short(1, 1, 0, 5).has_full_two_torsion()


def test_full_two_torsion_matches_root_count():
    for ell in primerange(3, 50):
        for A2 in range(ell):
            for A4 in range(ell):
                curve = CurveFp.short(A2, A4, 0, ell)
                if curve.is_singular():
                    continue
                assert curve.has_full_two_torsion() == (len(curve.two_torsion_roots()) == 3), (ell, A2, A4)


def test_full_two_torsion_forces_even_trace():
    for A2, A4 in [(3, 2), (5, 4), (1, 6)]:
        curve = CurveFp.short(A2, A4, 0, 11)
        if not curve.is_singular() and curve.has_full_two_torsion():
            assert curve.trace_of_frobenius() % 2 == 0


def test_group_order_of_random_points():
    ell = 1009
    curve = CurveFp.short(2, 3, 5, ell)
    order = curve.group_order(random.Random(5))
    assert abs(ell + 1 - order) <= isqrt(4 * ell)
    assert order == ell + 1 - curve.trace_of_frobenius(method="charsum")
    rng = random.Random(6)
    assert curve.annihilated_by(order, rng, tries=3)
