import pytest
from sympy import primerange

from app.errors import InvalidInputError
from app.models.curvedb import bundled_records
from app.models.ellcurve import CurveQ, tate_conductor
from app.models.frey import (
    bound_B_ell,
    bound_p,
    discriminant_trick_bound,
    frey_curve,
    inertia_check,
    level,
    local_frey,
    small_exponent_curve,
    small_exponent_point,
    trace,
    twist_check,
    twist_divisors,
    two_power_targets,
)
from app.models.instance import Instance


@pytest.mark.parametrize(
    "C1, q, p_divides_alpha, N",
    [(1, 23, False, 46), (13, 3, False, 1014), (5, 3, True, 50), (1, 7, False, 14)],
)
def test_level(C1, q, p_divides_alpha, N):
    assert level(C1, q, p_divides_alpha).N == N


def test_frey_curve_of_1_23():
    frey = frey_curve(1, 23, 45, 2, 1, 11)
    assert [int(a) for a in frey.curve.ainvs] == [1, 11, 0, 32, 0]
    assert frey.curve.discriminant == frey.expected_discriminant == -(2 ** 10) * 23
    assert tate_conductor(frey.curve).conductor == frey.level().N == 46


def test_frey_curve_normalises_the_sign_of_x():
    frey = frey_curve(5, 3, 19, 2, 5, 11)
    assert frey.x == -19
    assert frey.curve.discriminant == frey.expected_discriminant
    assert tate_conductor(frey.curve).conductor == 150


def test_frey_curve_rejects_non_solutions():
    with pytest.raises(InvalidInputError):
        frey_curve(1, 23, 44, 2, 1, 11)


def test_frey_curve_matches_46a1():
    frey = frey_curve(1, 23, 45, 2, 1, 11).curve
    target = bundled_records()["46a1"].curve
    for ell in primerange(3, 80):
        if ell == 23:
            continue
        assert trace(frey, ell) == trace(target, ell)


def test_trace_at_bad_prime_is_rejected():
    with pytest.raises(InvalidInputError):
        trace(bundled_records()["46a1"].curve, 23)


def test_local_frey_reduces_the_global_curve():
    frey = frey_curve(1, 23, 45, 2, 1, 11).curve
    for ell in primerange(3, 60):
        if ell == 23:
            continue
        assert local_frey(45, 1, 1, 23, ell).trace_of_frobenius() == trace(frey, ell)


def test_local_frey_rejects_bad_ell():
    with pytest.raises(InvalidInputError):
        local_frey(1, 1, 1, 23, 23)


def test_inertia_check():
    frey = frey_curve(1, 23, 45, 2, 1, 11).curve
    failed = inertia_check(frey, 23)
    assert not failed.passed
    assert failed.primes == (23,)
    assert failed.bound == 23
    assert inertia_check(frey, 23, p=23).passed
    assert inertia_check(frey, 3).passed


def test_twist_divisors():
    assert twist_divisors(15) == [-3, 5, -15]
    assert twist_divisors(1) == []
    assert twist_divisors(13) == [13]


def test_bound_p_keeps_p_11_open_for_1_23():
    instance = Instance(1, 23, "odd")
    summary = bound_p(instance, {"46a1": bundled_records()["46a1"].curve}, ell_max=60)
    assert summary.N == 46
    assert summary.counts["curves"] == 1
    assert summary.reference["level"] == 46
    (result,) = summary.curves
    # a genuine solution at p = 11 lives on this curve
    assert result.stage is None or 11 in result.possible_p


def test_two_power_targets_of_1_23():
    targets = two_power_targets(Instance(1, 23, "odd"), t_max=20)
    found = {(t.x, t.a, t.t) for t in targets}
    assert (45, 1, 11) in found
    assert all(t.conductor == 46 for t in targets)


def test_small_exponent_points():
    X, Y = small_exponent_point(1, 7, 1, 2, 1, 3)
    curve = small_exponent_curve(1, 7, 3, 1)
    assert Y * Y == X ** 3 + curve.a6

    X, Y = small_exponent_point(1, 7, 3, 2, 1, 4)
    curve = small_exponent_curve(1, 7, 4, 1)
    assert Y * Y == X ** 3 + curve.a4 * X
    with pytest.raises(InvalidInputError):
        small_exponent_curve(1, 7, 5, 1)


def test_bound_b_ell_for_odd_trace():
    # 37a1 has a_3 = -3
    E = CurveQ(0, 0, 1, -1, 0)
    N = level(1, 23)
    assert bound_B_ell(E, N, 3) == 7 * 1 * 3 * 5
    assert discriminant_trick_bound(E, Instance(1, 23, "odd"), N, 3) == 7 * 3
    assert discriminant_trick_bound(E, Instance(1, 23, "odd"), N, 5) is None
    with pytest.raises(InvalidInputError):
        bound_B_ell(E, N, 23)


def test_bound_b_ell_vanishes_for_even_traces():
    E = bundled_records()["46a1"].curve
    N = level(1, 23)
    assert all(bound_B_ell(E, N, ell) == 0 for ell in (3, 5, 7, 11))


def test_twist_check():
    E = bundled_records()["46a1"].curve
    N = level(1, 23)
    assert not twist_check(E, 1, N).eliminated
    verdict = twist_check(E, -3, N, {"46a1": E})
    assert verdict.eliminated
    assert verdict.conductor == 414
    assert verdict.mismatches["46a1"] is not None
