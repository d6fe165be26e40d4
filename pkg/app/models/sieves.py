"""
Exponent elimination for y even.

Three engines, all driven by auxiliary primes ell = 2mp + 1:

* ``kraus_sieve`` intersects the residue classes beta = alpha (mod 2p) that the
  surrogate curves F_{omega,beta} over F_ell allow;
* ``combined_tm_sieve`` additionally asks the Thue-Mahler system of the instance
  to be solvable modulo ell, and admits ell | y;
* ``highp_sieve`` works in Q(sqrt(-c)) with the curves Y^2 = X(X+1)(X+tau) and
  eliminates a single large p at once.
"""
import logging
import random
import time
from dataclasses import dataclass, field

from sympy import isprime

from app.config import Config
from app.errors import InvalidInputError
from app.models.arith import NON_RESIDUE, jacobi_symbol, primitive_root, primes_in_progression, sqrt_mod
from app.models.ellcurve import CurveFp, CurveQ, tate_conductor
from app.models.frey import local_frey, trace
from app.models.instance import Instance
from app.models.quadfield import element_factorisation_data
from app.schemas import SIEVE_REPORT, validate
from app.workers import Cancelled, run_units

logger = logging.getLogger(__name__)

METHODS = ("kraus", "combined", "highp")


@dataclass(frozen=True)
class SieveConfig:
    instance: Instance
    p: int
    target: CurveQ
    label: str | None = None
    m_max: int = Config.SIEVE_M_MAX
    ell_count: int = Config.SIEVE_ELL_COUNT
    seed: int = Config.SIEVE_SEED
    rational: bool = True
    p_divides_alpha: bool = False
    shortcut: bool = True
    enumeration_limit: int = Config.ENUMERATION_LIMIT
    timings: bool = False

    def __post_init__(self):
        if self.p < 11 or not isprime(self.p):
            raise InvalidInputError(f"the sieves need a prime p >= 11, got {self.p}")
        C1, q = self.instance.C1, self.instance.q
        residue = C1 * q if self.instance.parity == "odd" else C1
        if residue % 8 != 7:
            raise InvalidInputError(f"y is never even for {self.instance.label}")
        if self.m_max < 1 or self.ell_count < 1:
            raise InvalidInputError("the ell budget must be positive")

    @classmethod
    def from_run_config(cls, instance, p, target, label, run_config, **extra):
        return cls(
            instance,
            p,
            target,
            label,
            m_max=run_config.m_max,
            ell_count=run_config.ell_count,
            seed=run_config.seed,
            enumeration_limit=run_config.enumeration_limit,
            timings=run_config.timings,
            **extra,
        )

    def rng(self, ell):
        return random.Random(f"{self.seed}:{self.p}:{ell}")


@dataclass(frozen=True)
class EllEntry:
    ell: int
    m: int
    condition: str
    x_size: int
    z: tuple
    running: tuple

    def as_dict(self):
        return {
            "ell": self.ell,
            "m": self.m,
            "condition": self.condition,
            "x_size": self.x_size,
            "z": list(self.z),
            "running": list(self.running),
        }


@dataclass(frozen=True)
class SieveReport:
    method: str
    instance: Instance
    target: str | None
    p: int
    verdict: str
    survivors: tuple
    classes: tuple
    ells: tuple
    seed: int
    seconds: float | None = field(default=None, compare=False)

    @property
    def eliminated(self):
        return self.verdict == "eliminated"

    def as_dict(self):
        data = {
            "method": self.method,
            "instance": self.instance.as_dict(),
            "target": self.target,
            "p": self.p,
            "verdict": self.verdict,
            "survivors": list(self.survivors),
            "classes": list(self.classes),
            "ells": [e.as_dict() for e in self.ells],
            "seed": self.seed,
        }
        if self.seconds is not None:
            data["seconds"] = round(self.seconds, 3)
        return validate(data, SIEVE_REPORT, "sieve report")


def _lift(a_prime, p, parity):
    s = 1 if parity == "odd" else 0
    return tuple(b for b in range(2 * p) if b % p in a_prime and b % 2 == s)


def symplectic_classes(E, p, parity, q=None, rational=True, p_divides_alpha=False):
    """
    (A', A): the classes of alpha mod p the symplectic criterion allows, and their
    lifts to {0, ..., 2p-1} with the parity of alpha.

    For a rational target and p not dividing alpha, E must have multiplicative
    reduction at 2 and at q; A' is then the set of a with (-3*a*v2*vq / p) = 1.
    """
    if p_divides_alpha:
        a_prime = (0,)
    elif not rational:
        a_prime = tuple(range(p))
    else:
        if q is None:
            raise InvalidInputError("the rational branch of the symplectic criterion needs q")
        data = tate_conductor(E)
        two, at_q = data.local_at(2), data.local_at(q)
        if two.conductor_exponent != 1 or at_q.conductor_exponent != 1:
            raise InvalidInputError(f"the target must have multiplicative reduction at 2 and at q={q}")
        product = -3 * two.disc_valuation * at_q.disc_valuation
        if product % p == 0:
            logger.warning(f"p={p} divides a discriminant valuation of the target; no symplectic restriction")
            a_prime = tuple(range(1, p))
        else:
            a_prime = tuple(a for a in range(1, p) if jacobi_symbol(product * a, p) == 1)
    return a_prime, _lift(a_prime, p, parity)


def _target_conductor(cfg):
    return tate_conductor(cfg.target).conductor


def _kraus_ells(cfg, conductor):
    """Candidate ell = 2mp + 1 with ell not dividing 2*q*C1 nor the target's conductor."""
    instance = cfg.instance
    return primes_in_progression(cfg.p, cfg.m_max, avoid=(2 * instance.q * instance.C1, conductor))


def _p_th_powers(ell, m, p):
    h = pow(primitive_root(ell), p, ell)
    return {pow(h, j, ell) for j in range(2 * m)}


def _shortcut_applies(cfg, c, ell):
    # a_ell(F_{omega,beta}) is even; with c even and p^2 > 4*ell, a = +-c (mod 2p) forces a = +-c
    return cfg.shortcut and c % 2 == 0 and cfg.p * cfg.p > 4 * ell


def _trace_matches(cfg, curve, c, ell, square_q, rng):
    """Whether the surrogate curve belongs to Y_ell."""
    p = cfg.p
    if _shortcut_applies(cfg, c, ell):
        counts = (ell + 1 - c,) if square_q else (ell + 1 - c, ell + 1 + c)
        point = curve.random_point(rng)
        if all(curve.multiply(point, n) is not None for n in counts):
            return False
    a = curve.trace_of_frobenius(rng=rng)
    if square_q:
        return (a - c) % p == 0
    return (a * a - c * c) % p == 0


def _x_members(cfg, ell, beta, powers):
    C1, q = cfg.instance.C1, cfg.instance.q
    qb = pow(q, beta, ell)
    return [omega for omega in range(ell) if (C1 * omega * omega + qb) % ell in powers]


def _third_condition(cfg, ell, c):
    """Which branch admits ell, or None. The Jacobi branch is checked first."""
    instance = cfg.instance
    if jacobi_symbol(-instance.C1 * instance.q ** instance.s_parity, ell) == -1:
        return "non-square"
    if (c * c - 4) % cfg.p:
        return "trace"
    return None


def _finish(method, cfg, classes, running, entries, started):
    if not entries:
        verdict = "inconclusive"
    elif not running:
        verdict = "eliminated"
    else:
        verdict = "survivors"
    seconds = time.perf_counter() - started if cfg.timings else None
    logger.info(f"{method} sieve {cfg.instance.label} p={cfg.p}: {verdict} {sorted(running)}")
    return SieveReport(
        method,
        cfg.instance,
        cfg.label,
        cfg.p,
        verdict,
        tuple(sorted(running)),
        tuple(classes),
        tuple(entries),
        cfg.seed,
        seconds,
    )


def kraus_sieve(cfg):
    started = time.perf_counter()
    instance, p = cfg.instance, cfg.p
    _, classes = symplectic_classes(cfg.target, p, instance.parity, instance.q, cfg.rational, cfg.p_divides_alpha)
    running = set(classes)
    conductor = _target_conductor(cfg)
    entries = []
    for ell, m in _kraus_ells(cfg, conductor):
        if not running or len(entries) >= cfg.ell_count:
            break
        c = trace(cfg.target, ell)
        condition = _third_condition(cfg, ell, c)
        if condition is None:
            logger.debug(f"ell={ell} fails the third condition")
            continue
        square_q = jacobi_symbol(instance.q, ell) == 1
        powers = _p_th_powers(ell, m, p)
        rng = cfg.rng(ell)
        z, x_size = set(), 0
        for beta in sorted(running):
            omegas = _x_members(cfg, ell, beta, powers)
            x_size += len(omegas)
            for omega in omegas:
                curve = local_frey(omega, beta, instance.C1, instance.q, ell)
                if _trace_matches(cfg, curve, c, ell, square_q, rng):
                    z.add(beta)
                    break
        running &= z
        entries.append(EllEntry(ell, m, condition, x_size, tuple(sorted(z)), tuple(sorted(running))))
        logger.debug(f"kraus ell={ell}: |X|={x_size}, Z={sorted(z)}, running={sorted(running)}")
    return _finish("kraus", cfg, classes, running, entries, started)


# solvability of F = A, G = B over F_ell


def _horner_mod(coefficients, u, ell):
    total = 0
    for coefficient in coefficients:
        total = (total * u + coefficient) % ell
    return total


def _affine_values(problem, ell):
    """(F(u, 1), G(u, 1)) for every u, then (F(1, 0), G(1, 0))."""
    f = [c % ell for c in problem.F.coefficients]
    g = [c % ell for c in problem.G.coefficients]
    for u in range(ell):
        yield _horner_mod(f, u, ell), _horner_mod(g, u, ell)
    yield f[0], g[0]


class ProjectiveSolver:
    """
    S: F(U, V) = A, G(U, V) = B over F_ell.

    Both forms have degree p and ell = 2mp + 1, so scaling a point of P^1 by t
    multiplies (F, G) by t^p, which runs over the subgroup of p-th powers (the
    elements with r^(2m) = 1). Points are grouped by G/F and the p-th power class
    of F, so each (A, B) is answered by a set lookup.
    """

    def __init__(self, problem, ell, m):
        self.ell, self.exponent = ell, 2 * m
        self.both = set()
        self.f_zero = set()
        self.g_zero = set()
        for f, g in _affine_values(problem, ell):
            if f and g:
                self.both.add((g * pow(f, -1, ell) % ell, pow(f, self.exponent, ell)))
            elif g:
                self.f_zero.add(pow(g, self.exponent, ell))
            elif f:
                self.g_zero.add(pow(f, self.exponent, ell))

    def solvable(self, A, B):
        ell = self.ell
        A, B = A % ell, B % ell
        if A == 0 and B == 0:
            return True
        if A == 0:
            return pow(B, self.exponent, ell) in self.f_zero
        if B == 0:
            return pow(A, self.exponent, ell) in self.g_zero
        return (B * pow(A, -1, ell) % ell, pow(A, self.exponent, ell)) in self.both


class EnumerationSolver:
    """Every (U, V) in F_ell^2; quadratic in ell."""

    def __init__(self, problem, ell, m=None):
        self.ell = ell
        self.values = set()
        for u in range(ell):
            for v in range(ell):
                self.values.add((problem.F.evaluate_mod(u, v, ell), problem.G.evaluate_mod(u, v, ell)))

    def solvable(self, A, B):
        return (A % self.ell, B % self.ell) in self.values


def _solver_for(cfg, problem, ell, m):
    if ell <= cfg.enumeration_limit:
        return EnumerationSolver(problem, ell, m)
    return ProjectiveSolver(problem, ell, m)


def _k_residue(beta, p):
    """k mod p for alpha = beta: beta/2 or (beta - 1)/2."""
    return (beta // 2) % p


def _x_prime_members(cfg, ell, beta):
    """omega with C1*omega^2 + q^beta = 0 (mod ell), i.e. ell | y."""
    C1, q = cfg.instance.C1, cfg.instance.q
    root = sqrt_mod(-pow(q, beta, ell) * pow(C1, -1, ell), ell)
    if root == NON_RESIDUE:
        return []
    return sorted({root, (ell - root) % ell})


def combined_tm_sieve(cfg, problem):
    """
    The Kraus sieve with ell | y admitted, each surviving (omega, beta) further
    required to make a*q^v = F(U, V), b*omega = G(U, V) solvable modulo ell.
    """
    started = time.perf_counter()
    instance, p = cfg.instance, cfg.p
    if problem.instance is not None and problem.instance != instance:
        raise InvalidInputError("the Thue-Mahler problem belongs to another instance")
    if problem.p is not None and problem.p != p:
        raise InvalidInputError(f"the Thue-Mahler problem has exponent {problem.p}, not {p}")
    _, classes = symplectic_classes(cfg.target, p, instance.parity, instance.q, cfg.rational, cfg.p_divides_alpha)
    running = set(classes)
    conductor = _target_conductor(cfg)
    a, b, q = problem.a, problem.b, instance.q
    entries = []
    for ell, m in _kraus_ells(cfg, conductor):
        if not running or len(entries) >= cfg.ell_count:
            break
        c = trace(cfg.target, ell)
        square_q = jacobi_symbol(q, ell) == 1
        powers = _p_th_powers(ell, m, p)
        solver = _solver_for(cfg, problem, ell, m)
        rng = cfg.rng(ell)
        w, x_size = set(), 0
        for beta in sorted(running):
            A = a * pow(q, _k_residue(beta, p), ell)
            if any(solver.solvable(A, b * omega) for omega in _x_prime_members(cfg, ell, beta)):
                w.add(beta)
                continue
            omegas = _x_members(cfg, ell, beta, powers)
            x_size += len(omegas)
            for omega in omegas:
                if not solver.solvable(A, b * omega):
                    continue
                curve = local_frey(omega, beta, instance.C1, q, ell)
                if _trace_matches(cfg, curve, c, ell, square_q, rng):
                    w.add(beta)
                    break
        running &= w
        entries.append(EllEntry(ell, m, "tm", x_size, tuple(sorted(w)), tuple(sorted(running))))
        logger.debug(f"combined ell={ell}: W={sorted(w)}, running={sorted(running)}")
    return _finish("combined", cfg, classes, running, entries, started)


# large exponents


@dataclass(frozen=True)
class HighPEntry:
    ell: int
    m: int
    taus: int
    z: tuple

    def as_dict(self):
        return {"ell": self.ell, "m": self.m, "condition": "split", "x_size": self.taus, "z": list(self.z)}


@dataclass(frozen=True)
class HighPReport:
    instance: Instance
    target: str | None
    p: int
    verdict: str
    eliminating_ell: int | None
    ells: tuple
    seed: int
    seconds: float | None = field(default=None, compare=False)

    @property
    def eliminated(self):
        return self.verdict == "eliminated"

    @property
    def survivors(self):
        return ()

    def as_dict(self):
        data = {
            "method": "highp",
            "instance": self.instance.as_dict(),
            "target": self.target,
            "p": self.p,
            "verdict": self.verdict,
            "survivors": [],
            "eliminating_ell": self.eliminating_ell,
            "ells": [e.as_dict() for e in self.ells],
            "seed": self.seed,
        }
        if self.seconds is not None:
            data["seconds"] = round(self.seconds, 3)
        return validate(data, SIEVE_REPORT, "sieve report")


def legendre_curve(tau, ell):
    """Y^2 = X(X + 1)(X + tau)."""
    return CurveFp.short(1 + tau, tau, 0, ell)


def _highp_z(cfg, c, ell, m, start, h, rng):
    """The tau = start*h^j (j < 2m, tau != 1) whose curve has a^2 = c^2 (mod p)."""
    p = cfg.p
    exact = cfg.shortcut and p * p > 16 * ell
    z, taus, tau = [], 0, start
    for j in range(2 * m):
        if tau != 1:
            taus += 1
            curve = legendre_curve(tau, ell)
            if exact:
                # |a -+ c| <= 4*sqrt(ell) < p, so a^2 = c^2 (mod p) means #E = ell + 1 -+ c
                point = curve.random_point(rng)
                if all(curve.multiply(point, n) is not None for n in (ell + 1 - c, ell + 1 + c)):
                    tau = tau * h % ell
                    continue
            a = curve.trace_of_frobenius(rng=rng)
            if (a * a - c * c) % p == 0:
                z.append(j)
        tau = tau * h % ell
    return taus, z


def highp_sieve(cfg):
    """
    Eliminate one p: succeed as soon as some ell (split in K, a_ell(E)^2 != 4 mod p)
    leaves no tau with a(E_tau)^2 = a_ell(E)^2 (mod p). m runs up to cfg.m_max.
    """
    started = time.perf_counter()
    instance, p = cfg.instance, cfg.p
    if p < 1000:
        logger.info(f"high-exponent sieve at p={p}; it rarely succeeds below 1000")
    field_ = instance.field
    data = element_factorisation_data(field_, instance.C1, p)
    conductor = _target_conductor(cfg)
    entries = []
    eliminating = None
    for ell, m in _kraus_ells(cfg, conductor):
        if jacobi_symbol(-field_.c, ell) != 1:
            continue
        c = trace(cfg.target, ell)
        if (c * c - 4) % p == 0:
            logger.debug(f"ell={ell} skipped: a_ell(E)^2 = 4 (mod p)")
            continue
        reduce = field_.reduction_map(ell)
        omega, delta = reduce(data.omega), reduce(data.delta)
        theta = reduce(data.omega.conjugate()) * pow(omega, -1, ell) % ell
        beta = reduce(data.delta.conjugate()) * pow(delta, -1, ell) % ell
        start = theta * pow(beta, data.n_star, ell) % ell
        h = pow(primitive_root(ell), p, ell)
        taus, z = _highp_z(cfg, c, ell, m, start, h, cfg.rng(ell))
        entries.append(HighPEntry(ell, m, taus, tuple(z)))
        if not z:
            eliminating = ell
            break
    verdict = "eliminated" if eliminating is not None else "inconclusive"
    seconds = time.perf_counter() - started if cfg.timings else None
    logger.info(f"highp sieve {instance.label} p={p}: {verdict} (ell={eliminating}, {len(entries)} primes tried)")
    return HighPReport(instance, cfg.label, p, verdict, eliminating, tuple(entries), cfg.seed, seconds)


# ranges


@dataclass(frozen=True)
class RangeReport:
    method: str
    instance: Instance
    target: str | None
    reports: tuple
    cancelled: bool = False

    @property
    def counts(self):
        counts = {"eliminated": 0, "survivors": 0, "inconclusive": 0}
        for report in self.reports:
            counts[report.verdict] += 1
        return counts

    @property
    def not_eliminated(self):
        return [r.p for r in self.reports if not r.eliminated]

    @property
    def inconclusive(self):
        return any(r.verdict == "inconclusive" for r in self.reports)

    def as_dict(self):
        return {
            "method": self.method,
            "instance": self.instance.as_dict(),
            "target": self.target,
            "p_values": [r.p for r in self.reports],
            "counts": self.counts,
            "not_eliminated": self.not_eliminated,
            "cancelled": self.cancelled,
            "reports": [r.as_dict() for r in self.reports],
        }


def _sieve_unit(unit):
    method, cfg = unit
    if method == "kraus":
        return kraus_sieve(cfg)
    if method == "highp":
        return highp_sieve(cfg)
    from app.models.tm import yeven_system

    return combined_tm_sieve(cfg, yeven_system(cfg.instance, cfg.p))


def sieve_range(instance, target, p_values, method, run_config, label=None, **extra):
    """Run one method over many p with the worker pool; cancellation keeps the finished p."""
    if method not in METHODS:
        raise InvalidInputError(f"unknown sieve method {method!r}; expected one of {', '.join(METHODS)}")
    units = []
    for p in p_values:
        cfg = SieveConfig.from_run_config(instance, p, target, label, run_config, **extra)
        if method == "highp":
            cfg = SieveConfig.from_run_config(
                instance, p, target, label, run_config.with_overrides(m_max=run_config.highp_m_max), **extra
            )
        units.append((method, cfg))
    cancelled = False
    try:
        reports = run_units(_sieve_unit, units, run_config.workers)
    except Cancelled as e:
        reports, cancelled = e.completed, True
    result = RangeReport(method, instance, label, tuple(reports), cancelled)
    logger.info(f"{method} over {len(reports)} exponents for {instance.label}: {result.counts}")
    return result
