import mpmath
import pytest

from app.errors import InvalidInputError, NotABadPairError
from app.models.instance import Instance
from app.models.lfl import (
    REGIME_P,
    audit,
    bound_params,
    delta2_bound,
    delta2_constants,
    derived_delta2_bound,
    j_bound,
    k_upper_bound,
    n0_lookup,
    y_lower_bound,
    ypbig_check,
)


def test_y_lower_bound():
    assert float(y_lower_bound(11)) == pytest.approx(27.24, abs=0.01)
    with pytest.raises(InvalidInputError):
        y_lower_bound(7)


@pytest.mark.parametrize("p", [11, 1009, REGIME_P])
def test_y_lower_bound_is_rounded_down_at_full_precision(p):
    y = y_lower_bound(p)
    assert isinstance(y, mpmath.mpf)
    with mpmath.workdps(60):
        exact = 4 * p - 4 * mpmath.sqrt(2 * p) + 2
        assert y <= exact
        assert (exact - y) / exact < mpmath.mpf(10) ** -24


@pytest.mark.parametrize("C1, q, s, f, D", [(1, 7, 1, 1, 2), (1, 23, 3, 1, 2)])
def test_bound_params(C1, q, s, f, D):
    params = bound_params(Instance(C1, q, "odd"))
    assert (params.s, params.f, params.D) == (s, f, D)


def test_log_a2_takes_the_larger_term():
    params = bound_params(Instance(1, 23, "odd"))
    assert float(params.log_A2.b) == pytest.approx(3 * 0.6931471805599453)


def test_delta2_constants_and_n0():
    instance = Instance(1, 7, "odd")
    constants = delta2_constants(instance)
    assert (constants.slope, constants.coefficient, constants.constant) == ("-0.49", "385.38", "1.79")
    assert n0_lookup(Instance(13, 11, "odd")) == 349919600
    with pytest.raises(NotABadPairError):
        delta2_constants(Instance(5, 19, "odd"))
    with pytest.raises(NotABadPairError):
        n0_lookup(Instance(5, 19, "odd"))


def test_delta2_bound_is_negative_for_large_p():
    instance = Instance(1, 7, "odd")
    p = REGIME_P + 1
    y = y_lower_bound(p)
    assert delta2_bound(instance, p, y) < 0
    assert derived_delta2_bound(bound_params(instance), p, y) < delta2_bound(instance, p, y)


def test_k_bound_grows_with_y():
    params = bound_params(Instance(1, 7, "odd"))
    p = REGIME_P + 1
    assert k_upper_bound(params, p, 10**6) < k_upper_bound(params, p, 10**9)
    with pytest.raises(InvalidInputError):
        k_upper_bound(params, p, 1)


def test_ypbig_check_in_the_large_p_regime():
    verdict = ypbig_check(Instance(1, 7, "odd"), REGIME_P + 1, k=0)
    assert verdict.certified
    assert verdict.below_ceiling
    assert verdict.direct is True
    assert verdict.chain_bound < REGIME_P


def test_ypbig_check_below_the_regime_is_not_certified():
    verdict = ypbig_check(Instance(1, 7, "odd"), 101)
    assert not verdict.certified
    assert verdict.direct is None


def test_j_bound():
    assert j_bound(13) == 13
    with pytest.raises(InvalidInputError):
        j_bound(0)


def test_audit_for_1_7():
    result = audit(Instance(1, 7, "odd"))
    assert result.n0 == 72341570
    assert len(result.rows) == 4
    assert result.consistent
    assert result.as_dict()["consistent"] is True
