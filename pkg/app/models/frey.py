"""
Frey-Hellegouarch curves attached to C1*x^2 + q^alpha = y^p and the checks that
bound p once a candidate target curve E is known.

The global curve is

    F: Y^2 + XY = X^3 + (C1*x - 1)/4 * X^2 + C1*y^p/64 * X

with x normalised so that C1*x = 1 (mod 4). Its level after level lowering is
2*q*C1^2, or 2*C1^2 when p divides alpha.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from sympy import factorint, primerange

from app.errors import InvalidInputError
from app.models.arith import jacobi_symbol
from app.models.ellcurve import CurveFp, CurveQ, tate_conductor

logger = logging.getLogger(__name__)

TWIST_SCAN_LIMIT = 200
# the twisting argument needs p >= 17
TWIST_MIN_P = 17

STAGES = ("direct", "inertia", "twist", "discriminant")


@dataclass(frozen=True)
class LevelData:
    N: int
    p_divides_alpha: bool

    def as_dict(self):
        return {"N": self.N, "p_divides_alpha": self.p_divides_alpha}


def level(C1, q, p_divides_alpha=False):
    if p_divides_alpha:
        return LevelData(2 * C1 * C1, True)
    return LevelData(2 * q * C1 * C1, False)


@dataclass(frozen=True)
class FreyCurve:
    C1: int
    q: int
    x: int
    y: int
    alpha: int
    p: int
    curve: CurveQ = field(repr=False)

    @property
    def expected_discriminant(self):
        return Fraction(-(self.C1 ** 3) * self.q ** self.alpha * self.y ** (2 * self.p), 2 ** 12)

    def level(self):
        return level(self.C1, self.q, self.alpha % self.p == 0)

    def as_dict(self):
        return {
            "C1": self.C1,
            "q": self.q,
            "x": self.x,
            "y": self.y,
            "alpha": self.alpha,
            "p": self.p,
            "curve": self.curve.as_dict(),
            "level": self.level().N,
        }


def _normalised_x(C1, x):
    return x if C1 * x % 4 == 1 else -x


def _frey_model(C1, x, rhs):
    """The Frey model with y^p replaced by ``rhs``; x must already be normalised."""
    if (C1 * x - 1) % 4:
        raise InvalidInputError(f"C1*x = {C1 * x} is not 1 mod 4 for either sign of x")
    if C1 * rhs % 64:
        raise InvalidInputError(f"64 does not divide C1*y^p = {C1 * rhs}")
    return CurveQ(1, (C1 * x - 1) // 4, 0, C1 * rhs // 64, 0)


def frey_curve(C1, q, x, y, alpha, p):
    rhs = y ** p
    if C1 * x * x + q ** alpha != rhs:
        raise InvalidInputError(f"{C1}*{x}^2 + {q}^{alpha} != {y}^{p}")
    if p < 11:
        logger.warning(f"Frey curve requested for p={p}; level lowering needs p >= 11")
    x = _normalised_x(C1, x)
    return FreyCurve(C1, q, x, y, alpha, p, _frey_model(C1, x, rhs))


def local_frey(omega, beta, C1, q, ell):
    """
    The surrogate curve F_{omega,beta} over F_ell:

        Y^2 + XY = X^3 + (C1*omega - 1)/4 * X^2 + (C1^2*omega^2 + C1*q^beta)/64 * X

    It is singular exactly when C1*omega^2 + q^beta = 0 mod ell; callers check
    ``is_singular()``.
    """
    if (2 * q * C1) % ell == 0:
        raise InvalidInputError(f"ell={ell} divides 2*q*C1")
    omega = int(omega) % ell
    inv4 = pow(4, -1, ell)
    a2 = (C1 * omega - 1) * inv4 % ell
    a4 = (C1 * C1 * omega * omega + C1 * pow(q, beta, ell)) * pow(64, -1, ell) % ell
    return CurveFp(1, a2, 0, a4, 0, ell=ell)


def _good_model_at(E, ell):
    """A model of E with good reduction at ell, or None if E has bad reduction there."""
    if int(E.integral_model().discriminant) % ell:
        return E.integral_model()
    minimal = tate_conductor(E).minimal_model
    return None if int(minimal.discriminant) % ell == 0 else minimal


def trace(E, ell):
    model = _good_model_at(E, ell)
    if model is None:
        raise InvalidInputError(f"E has bad reduction at {ell}")
    return model.a_ell(ell)


def _even_traces(ell, modulus=2):
    """Even a with |a| < 2*sqrt(ell); with modulus 4, only those with ell + 1 - a = 0 mod 4."""
    bound = isqrt(4 * ell)
    if bound * bound == 4 * ell:
        bound -= 1
    traces = [a for a in range(-bound, bound + 1) if a % 2 == 0]
    if modulus == 4:
        traces = [a for a in traces if (ell + 1 - a) % 4 == 0]
    return traces


def _B(c, ell, modulus):
    value = (ell + 1) ** 2 - c * c
    for a in _even_traces(ell, modulus):
        value *= a - c
    return value


def bound_B_ell(E, N, ell):
    """(ell+1)^2 - c^2 times the product of (a - c) over even a with |a| < 2*sqrt(ell), c = a_ell(E)."""
    if N.N % ell == 0:
        raise InvalidInputError(f"ell={ell} divides the level {N.N}")
    return _B(trace(E, ell), ell, 2)


def discriminant_trick_bound(E, instance, N, ell):
    """
    B_ell with the product restricted to 4 | ell + 1 - a.

    Only valid at primes where -C1*q^s is a square, i.e. where the Frey curve has
    full 2-torsion over F_ell; returns None at other primes.
    """
    if N.N % ell == 0:
        raise InvalidInputError(f"ell={ell} divides the level {N.N}")
    if jacobi_symbol(-instance.c, ell) != 1:
        return None
    return _B(trace(E, ell), ell, 4)


def _gcd_bound(values):
    g = 0
    for value in values:
        g = gcd(g, value)
        if g == 1:
            break
    return g


def _admissible_ells(N, ell_max, extra=1):
    return [ell for ell in primerange(3, ell_max + 1) if N.N % ell and extra % ell]


@dataclass(frozen=True)
class InertiaVerdict:
    passed: bool
    primes: tuple

    @property
    def bound(self):
        """p must divide this when the check fails (0 when it passes)."""
        if self.passed:
            return 0
        return self.primes[0] if len(self.primes) == 1 else 1

    def as_dict(self):
        return {"passed": self.passed, "primes": list(self.primes), "bound": self.bound}


def inertia_check(E, C1, p=None):
    """Fails when a prime r | C1 (r != p) divides the denominator of j(E)."""
    denominator = E.j_invariant.denominator
    primes = tuple(r for r in sorted(factorint(C1)) if r != p and denominator % r == 0)
    return InertiaVerdict(not primes, primes)


def twist_divisors(C1):
    """Signed divisors d != 1 of C1 with d = 1 mod 4."""
    found = []
    for d in range(2, C1 + 1):
        if C1 % d:
            continue
        for signed in (d, -d):
            if signed % 4 == 1:
                found.append(signed)
    return sorted(found, key=lambda d: (abs(d), d))


@dataclass(frozen=True)
class TwistVerdict:
    d: int
    conductor: int
    N: int
    mismatches: dict
    gcd_bounds: dict

    @property
    def eliminated(self):
        return self.conductor != self.N

    @property
    def bound(self):
        """p < 17 or p divides this; 0 when some comparison curve matches every trace."""
        if not self.gcd_bounds or 0 in self.gcd_bounds.values():
            return 0
        result = 1
        for g in self.gcd_bounds.values():
            result = result * g // gcd(result, g)
        return result

    def as_dict(self):
        return {
            "d": self.d,
            "conductor": self.conductor,
            "N": self.N,
            "eliminated": self.eliminated,
            "mismatches": self.mismatches,
            "gcd_bounds": {label: str(g) for label, g in self.gcd_bounds.items()},
            "bound": str(self.bound),
        }


def twist_check(E, d, N, comparison=None, ell_max=TWIST_SCAN_LIMIT):
    """
    Compare the twist E^(d) with the curves of level N.

    ``comparison`` maps labels to curves of level N (the candidate targets). For
    each, the first ell with a_ell(E^(d)) != a_ell(E') is recorded together with
    the gcd of the differences, which p must divide.
    """
    if d == 1:
        return TwistVerdict(d, N.N, N.N, {}, {})
    twisted = tate_conductor(E.quadratic_twist(d))
    model = twisted.minimal_model
    ells = _admissible_ells(N, ell_max, extra=twisted.conductor)
    twisted_traces = {ell: model.a_ell(ell) for ell in ells}
    mismatches, bounds = {}, {}
    for label, other in (comparison or {}).items():
        differences = [twisted_traces[ell] - trace(other, ell) for ell in ells]
        mismatches[label] = next((ell for ell, diff in zip(ells, differences) if diff), None)
        bounds[label] = _gcd_bound(differences)
    logger.debug(f"twist by {d} has conductor {twisted.conductor} against level {N.N}")
    return TwistVerdict(d, twisted.conductor, N.N, mismatches, bounds)


@dataclass(frozen=True)
class CurveBound:
    label: str
    stage: str | None
    bound: int
    details: dict

    @property
    def possible_p(self):
        """Primes p >= 11 the stage leaves open, or None when p is unbounded."""
        if self.stage is None:
            return None
        extra = list(primerange(11, TWIST_MIN_P)) if self.stage == "twist" else []
        found = sorted(set(extra) | {r for r in factorint(self.bound) if r >= 11}) if self.bound else extra
        return found

    def as_dict(self):
        return {
            "label": self.label,
            "stage": self.stage,
            "bound": str(self.bound),
            "possible_p": self.possible_p,
            "details": self.details,
        }


@dataclass(frozen=True)
class BoundPSummary:
    instance: object
    N: int
    curves: tuple
    counts: dict
    reference: dict | None

    @property
    def remaining(self):
        return [c.label for c in self.curves if c.stage is None]

    def as_dict(self):
        return {
            "instance": self.instance.as_dict(),
            "level": self.N,
            "curves": [c.as_dict() for c in self.curves],
            "counts": self.counts,
            "remaining": self.remaining,
            "reference": self.reference,
        }


def _bound_one(label, E, instance, N, ell_max, comparison):
    ells = _admissible_ells(N, ell_max)
    details = {}

    direct = _gcd_bound(bound_B_ell(E, N, ell) for ell in ells)
    details["direct"] = str(direct)
    if direct:
        return CurveBound(label, "direct", direct, details)

    inertia = inertia_check(E, instance.C1)
    details["inertia"] = inertia.as_dict()
    if not inertia.passed:
        return CurveBound(label, "inertia", inertia.bound, details)

    twists = [twist_check(E, d, N, comparison, ell_max) for d in twist_divisors(instance.C1)]
    details["twist"] = [t.as_dict() for t in twists]
    bounded = [t for t in twists if t.bound]
    if bounded:
        return CurveBound(label, "twist", min(t.bound for t in bounded), details)

    values = [discriminant_trick_bound(E, instance, N, ell) for ell in ells]
    disc = _gcd_bound(v for v in values if v is not None)
    details["discriminant"] = str(disc)
    if disc:
        return CurveBound(label, "discriminant", disc, details)
    return CurveBound(label, None, 0, details)


def bound_p(instance, curves, ell_max=100, p_divides_alpha=False):
    """
    Apply the direct bound, the inertia argument, the twist comparison and the
    discriminant trick in that order to every candidate target.

    ``curves`` maps Cremona labels to CurveQ. ``counts`` gives the number of curves
    still unbounded after each stage.
    """
    from app.models.curvedb import technique_row

    N = level(instance.C1, instance.q, p_divides_alpha)
    results = tuple(
        _bound_one(label, E, instance, N, ell_max, curves) for label, E in sorted(curves.items())
    )
    counts = {"curves": len(results)}
    alive = len(results)
    for stage in STAGES:
        alive -= sum(1 for r in results if r.stage == stage)
        counts[stage] = alive
    logger.info(f"bound-p {instance.label}: {alive} of {len(results)} curves remain")
    return BoundPSummary(instance, N.N, results, counts, technique_row(instance))


@dataclass(frozen=True)
class TwoPowerTarget:
    x: int
    a: int
    t: int
    curve: CurveQ = field(repr=False)
    conductor: int

    def as_dict(self):
        return {
            "x": self.x,
            "a": self.a,
            "t": self.t,
            "ainvs": self.curve.as_list(),
            "conductor": self.conductor,
        }


def two_power_targets(instance, t_max=64):
    """
    Identities C1*x^2 + q^a = 2^t (t >= 7, a of the instance parity) and their
    Frey curves, kept when Tate confirms conductor 2*C1^2*q.
    """
    C1, q = instance.C1, instance.q
    wanted = 2 * C1 * C1 * q
    primes = sorted({2, q} | set(factorint(C1)))
    found = []
    for t in range(7, t_max + 1):
        power = 2 ** t
        a = 1 if instance.parity == "odd" else 2
        while q ** a < power:
            rest = power - q ** a
            if rest % C1 == 0:
                x = isqrt(rest // C1)
                if x > 0 and x * x == rest // C1:
                    x = _normalised_x(C1, x)
                    curve = _frey_model(C1, x, power)
                    conductor = tate_conductor(curve, primes=primes).conductor
                    if conductor == wanted:
                        found.append(TwoPowerTarget(abs(x), a, t, curve, conductor))
                    else:
                        logger.debug(f"{C1}*{x}^2 + {q}^{a} = 2^{t} has conductor {conductor}, not {wanted}")
            a += 2
    return found


def small_exponent_curve(C1, q, n, alpha):
    """Y^2 = X^3 - C1^3 q^i for n = 3 (alpha = 6k + i); Y^2 = X^3 - C1^2 q^j X for n = 4 (alpha = 4l + j)."""
    if n == 3:
        return CurveQ(0, 0, 0, 0, -(C1 ** 3) * q ** (alpha % 6))
    if n == 4:
        return CurveQ(0, 0, 0, -(C1 ** 2) * q ** (alpha % 4), 0)
    raise InvalidInputError(f"small exponent curves exist for n = 3, 4, not {n}")


def small_exponent_point(C1, q, x, y, alpha, n):
    """The rational point a solution with n = 3 or 4 gives on small_exponent_curve."""
    if C1 * x * x + q ** alpha != y ** n:
        raise InvalidInputError(f"{C1}*{x}^2 + {q}^{alpha} != {y}^{n}")
    if n == 3:
        k = alpha // 6
        return Fraction(C1 * y, q ** (2 * k)), Fraction(C1 * C1 * x, q ** (3 * k))
    if n == 4:
        l = alpha // 4
        return Fraction(C1 * y * y, q ** (2 * l)), Fraction(C1 * C1 * x * y, q ** (3 * l))
    raise InvalidInputError(f"small exponent curves exist for n = 3, 4, not {n}")
