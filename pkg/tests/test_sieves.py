import pytest
from sympy import primerange

from app.config import RunConfig
from app.errors import InvalidInputError
from app.models.arith import jacobi_symbol
from app.models.curvedb import bundled_records
from app.models.frey import frey_curve, trace
from app.models.instance import Instance
from app.models.sieves import (
    EnumerationSolver,
    ProjectiveSolver,
    SieveConfig,
    combined_tm_sieve,
    highp_sieve,
    kraus_sieve,
    legendre_curve,
    sieve_range,
    symplectic_classes,
)
from app.models.tm import yeven_system

SMALL = {"m_max": 30, "ell_count": 6, "seed": 7}


@pytest.fixture()
def target_46a1():
    return bundled_records()["46a1"].curve


@pytest.fixture()
def frey_5_3():
    # 5*19^2 + 3^5 = 2^11
    return frey_curve(5, 3, 19, 2, 5, 11).curve


def test_sieve_config_validation(target_46a1):
    with pytest.raises(InvalidInputError):
        SieveConfig(Instance(1, 23, "odd"), 7, target_46a1)
    with pytest.raises(InvalidInputError):
        SieveConfig(Instance(1, 23, "odd"), 15, target_46a1)
    with pytest.raises(InvalidInputError):
        SieveConfig(Instance(1, 5, "odd"), 11, target_46a1)


def test_symplectic_classes_rational_target(target_46a1):
    a_prime, lifted = symplectic_classes(target_46a1, 11, "odd", q=23)
    assert 1 in a_prime
    assert 0 not in a_prime
    assert len(lifted) == len(a_prime)
    assert all(b % 2 == 1 and 0 <= b < 22 for b in lifted)


def test_symplectic_classes_other_branches(target_46a1):
    assert symplectic_classes(target_46a1, 11, "odd", p_divides_alpha=True) == ((0,), (11,))
    assert symplectic_classes(target_46a1, 11, "even", p_divides_alpha=True) == ((0,), (0,))
    a_prime, lifted = symplectic_classes(target_46a1, 11, "odd", rational=False)
    assert a_prime == tuple(range(11))
    assert len(lifted) == 11


def test_symplectic_classes_need_multiplicative_target():
    with pytest.raises(InvalidInputError):
        symplectic_classes(bundled_records()["14a1"].curve, 11, "odd", q=23)
    with pytest.raises(InvalidInputError):
        symplectic_classes(bundled_records()["46a1"].curve, 11, "odd")


def test_kraus_sieve_keeps_the_known_solution_of_1_23(target_46a1):
    cfg = SieveConfig(Instance(1, 23, "odd"), 11, target_46a1, "46a1", **SMALL)
    report = kraus_sieve(cfg)
    assert report.verdict == "survivors"
    assert 1 in report.survivors
    assert report.ells
    for entry in report.ells:
        assert entry.ell == 2 * entry.m * 11 + 1
        assert set(entry.running) <= set(entry.z)
    report.as_dict()


def test_kraus_sieve_keeps_the_known_solution_of_5_3(frey_5_3):
    cfg = SieveConfig(Instance(5, 3, "odd"), 11, frey_5_3, **SMALL)
    report = kraus_sieve(cfg)
    assert 5 in report.survivors


KNOWN_SOLUTIONS = [
    ((5, 3, 19, 2, 5, 11), Instance(5, 3, "odd"), ("150a1", "150b1")),
    ((7, 5, 17, 2, 2, 11), Instance(7, 5, "even"), ("490g1", "490j1")),
]


def _isogenous_candidates(solution, labels):
    frey = frey_curve(*solution).curve
    C1, q = solution[:2]
    ells = [ell for ell in primerange(3, 60) if (2 * C1 * q) % ell]
    records = bundled_records()
    return [label for label in labels if all(trace(frey, ell) == trace(records[label].curve, ell) for ell in ells)]


@pytest.mark.parametrize("solution, instance, labels", KNOWN_SOLUTIONS, ids=lambda v: getattr(v, "label", None))
def test_sieves_keep_the_known_solution_against_its_comparison_curve(solution, instance, labels):
    matching = _isogenous_candidates(solution, labels)
    assert matching
    alpha, p = solution[4], solution[5]
    for label in matching:
        target = bundled_records()[label].curve
        kraus = kraus_sieve(SieveConfig(instance, p, target, label, **SMALL))
        combined = combined_tm_sieve(
            SieveConfig(instance, p, target, label, m_max=20, ell_count=4, seed=7), yeven_system(instance, p)
        )
        assert alpha in kraus.survivors
        assert alpha in combined.survivors
        assert kraus.verdict == combined.verdict == "survivors"


@pytest.mark.parametrize("solution, instance, labels", KNOWN_SOLUTIONS, ids=lambda v: getattr(v, "label", None))
def test_sieves_run_against_every_comparison_curve(solution, instance, labels):
    for label in labels:
        report = kraus_sieve(SieveConfig(instance, solution[5], bundled_records()[label].curve, label, **SMALL))
        assert report.target == label
        assert set(report.survivors) <= set(report.classes)
        report.as_dict()


def test_shortcut_does_not_change_the_verdict(frey_5_3):
    instance = Instance(5, 3, "odd")
    fast = kraus_sieve(SieveConfig(instance, 11, frey_5_3, **SMALL))
    slow = kraus_sieve(SieveConfig(instance, 11, frey_5_3, shortcut=False, **SMALL))
    assert fast.survivors == slow.survivors
    assert fast.verdict == slow.verdict


def test_combined_sieve_keeps_the_known_solution_of_1_23(target_46a1):
    instance = Instance(1, 23, "odd")
    cfg = SieveConfig(instance, 11, target_46a1, "46a1", m_max=20, ell_count=4, seed=7)
    report = combined_tm_sieve(cfg, yeven_system(instance, 11))
    assert 1 in report.survivors
    assert all(entry.condition == "tm" for entry in report.ells)


def test_combined_sieve_rejects_a_foreign_problem(target_46a1):
    cfg = SieveConfig(Instance(1, 23, "odd"), 11, target_46a1, **SMALL)
    with pytest.raises(InvalidInputError):
        combined_tm_sieve(cfg, yeven_system(Instance(1, 7, "odd"), 11))
    with pytest.raises(InvalidInputError):
        combined_tm_sieve(cfg, yeven_system(Instance(1, 23, "odd"), 13))


@pytest.mark.parametrize("ell, m", [(23, 1), (67, 3), (89, 4)])
def test_projective_solver_matches_enumeration(ell, m):
    problem = yeven_system(Instance(1, 7, "odd"), 11)
    projective = ProjectiveSolver(problem, ell, m)
    enumeration = EnumerationSolver(problem, ell, m)
    for A in range(ell):
        for B in range(ell):
            assert projective.solvable(A, B) == enumeration.solvable(A, B), (A, B)


def test_legendre_curve_has_full_two_torsion():
    for tau in range(2, 30):
        curve = legendre_curve(tau, 31)
        if curve.is_singular():
            continue
        assert curve.has_full_two_torsion()
        assert curve.trace_of_frobenius() % 2 == 0


def test_highp_sieve_does_not_eliminate_a_solved_exponent(target_46a1):
    cfg = SieveConfig(Instance(1, 23, "odd"), 11, target_46a1, m_max=40, seed=3)
    report = highp_sieve(cfg)
    assert report.verdict != "eliminated"
    for entry in report.ells:
        assert jacobi_symbol(-23, entry.ell) == 1
        assert entry.taus <= 2 * entry.m


@pytest.mark.slow
def test_highp_sieve_at_a_large_exponent():
    target = bundled_records()["14a1"].curve
    cfg = SieveConfig(Instance(1, 7, "odd"), 10007, target, "14a1", m_max=200)
    report = highp_sieve(cfg)
    assert report.ells
    if report.eliminated:
        assert report.ells[-1].z == ()
        assert report.ells[-1].ell == report.eliminating_ell
    else:
        assert all(entry.z for entry in report.ells)


def test_sieve_range_runs_every_exponent(target_46a1, tmp_path):
    run = RunConfig(m_max=30, ell_count=6, cache_dir=str(tmp_path))
    result = sieve_range(Instance(1, 23, "odd"), target_46a1, [11, 13], "kraus", run, label="46a1")
    assert [r.p for r in result.reports] == [11, 13]
    assert sum(result.counts.values()) == 2
    assert 11 in result.not_eliminated
    assert not result.cancelled
    assert result.as_dict()["target"] == "46a1"


def test_sieve_range_rejects_unknown_method(target_46a1):
    with pytest.raises(InvalidInputError):
        sieve_range(Instance(1, 23, "odd"), target_46a1, [11], "brute", RunConfig())
