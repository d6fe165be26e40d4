"""
Weierstrass curves over Q and over prime fields.

CurveQ keeps exact rational a-invariants; CurveFp keeps residues modulo an odd
prime. Conductors and minimal discriminants come from Tate's algorithm run prime
by prime on an integral model.
"""
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import isqrt, lcm

from sympy import factorint
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_degree, gf_from_int_poly, gf_gcd, gf_pow_mod, gf_sub

from app.errors import InvalidInputError, SingularCurveError
from app.models.arith import NON_RESIDUE, jacobi_symbol, legendre_table, sqrt_mod, squarefree_kernel, valuation

logger = logging.getLogger(__name__)

# above this the character sum gives way to baby-step giant-step point orders
CHARSUM_LIMIT = 50_000


def _b_invariants(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def _discriminant(b2, b4, b6, b8):
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def _rst(ainvs, r=0, s=0, t=0):
    a1, a2, a3, a4, a6 = ainvs
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1,
    )


@dataclass(frozen=True)
class CurveQ:
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.discriminant == 0:
            raise SingularCurveError(f"singular curve {self.ainvs}")

    @classmethod
    def from_ainvs(cls, ainvs):
        if len(ainvs) != 5:
            raise InvalidInputError(f"expected five a-invariants, got {len(ainvs)}")
        return cls(*ainvs)

    @classmethod
    def from_c4c6(cls, c4, c6):
        """The reduced integral model with the given c-invariants (a1, a3 in {0,1}, a2 in {-1,0,1})."""
        c4, c6 = int(c4), int(c6)
        b2 = (-c6) % 12
        if b2 > 6:
            b2 -= 12
        b4, rem4 = divmod(b2 * b2 - c4, 24)
        b6, rem6 = divmod(-(b2 ** 3) + 36 * b2 * b4 - c6, 216)
        if rem4 or rem6:
            raise InvalidInputError(f"no integral model with c4={c4}, c6={c6}")
        a1 = b2 % 2
        a3 = b6 % 2
        return cls(a1, (b2 - a1) // 4, a3, (b4 - a1 * a3) // 2, (b6 - a3) // 4)

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self):
        return _b_invariants(*self.ainvs)

    @property
    def c4(self):
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self):
        b2, b4, b6, _ = self.b_invariants
        return -(b2 ** 3) + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self):
        return _discriminant(*self.b_invariants)

    @property
    def j_invariant(self):
        return self.c4 ** 3 / self.discriminant

    def is_integral(self):
        return all(a.denominator == 1 for a in self.ainvs)

    def integral_model(self):
        """Scale by the least u making every a_i integral."""
        u = 1
        for r in factorint(lcm(*(a.denominator for a in self.ainvs))):
            e = max(-(-valuation(a.denominator, r) // i) for i, a in zip((1, 2, 3, 4, 6), self.ainvs) if a.denominator % r == 0)
            u *= r ** e
        return self.scaled(Fraction(1, u)) if u > 1 else self

    def scaled(self, u):
        """The model with a_i replaced by a_i / u^i."""
        return CurveQ(*(a / u ** i for a, i in zip(self.ainvs, (1, 2, 3, 4, 6))))

    def quadratic_twist(self, d):
        if d == 0:
            raise InvalidInputError("cannot twist by zero")
        d = squarefree_kernel(d)
        return CurveQ(0, 0, 0, -27 * d * d * self.c4, -54 * d ** 3 * self.c6)

    def reduce_mod(self, ell):
        values = []
        for a in self.ainvs:
            if a.denominator % ell == 0:
                raise InvalidInputError(f"a-invariant {a} is not ell-integral for ell={ell}")
            values.append(a.numerator * pow(a.denominator, -1, ell) % ell)
        return CurveFp(*values, ell=ell)

    def a_ell(self, ell):
        return self.reduce_mod(ell).trace_of_frobenius()

    def as_list(self):
        return [str(a) if a.denominator != 1 else int(a) for a in self.ainvs]

    def as_dict(self):
        return {
            "ainvs": [str(a) for a in self.ainvs],
            "discriminant": str(self.discriminant),
            "j_invariant": str(self.j_invariant),
        }


@dataclass(frozen=True)
class CurveFp:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    ell: int = field(kw_only=True)

    def __post_init__(self):
        if self.ell < 3 or self.ell % 2 == 0:
            raise InvalidInputError(f"curves over F_ell need an odd prime, got {self.ell}")
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, getattr(self, name) % self.ell)

    @classmethod
    def short(cls, A2, A4, A6, ell):
        """Y^2 = X^3 + A2 X^2 + A4 X + A6."""
        return cls(0, A2, 0, A4, A6, ell=ell)

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self):
        return tuple(b % self.ell for b in _b_invariants(*self.ainvs))

    @property
    def discriminant(self):
        return _discriminant(*self.b_invariants) % self.ell

    def is_singular(self):
        return self.discriminant == 0

    def _require_smooth(self):
        if self.is_singular():
            raise SingularCurveError(f"curve {self.ainvs} is singular modulo {self.ell}")

    def cubic(self):
        """Coefficients of 4x^3 + b2 x^2 + 2 b4 x + b6 (the right side after completing the square)."""
        b2, b4, b6, _ = self.b_invariants
        return 4, b2, 2 * b4 % self.ell, b6

    def short_model(self):
        """(A2, A4, A6) of the isomorphic model Y^2 = X^3 + A2 X^2 + A4 X + A6."""
        b2, b4, b6, _ = self.b_invariants
        return b2, 8 * b4 % self.ell, 16 * b6 % self.ell

    def trace_of_frobenius(self, method="auto", rng=None):
        self._require_smooth()
        if method == "auto":
            method = "charsum" if self.ell <= CHARSUM_LIMIT else "bsgs"
        if method == "charsum":
            return self._trace_charsum()
        if method == "bsgs":
            return self.ell + 1 - self.group_order(rng or random.Random(self.ell))
        raise InvalidInputError(f"unknown point counting method {method!r}")

    def _trace_charsum(self):
        ell = self.ell
        c3, c2, c1, c0 = self.cubic()
        total = 0
        if ell <= CHARSUM_LIMIT:
            chi = legendre_table(ell)
            for x in range(ell):
                total += chi[(((c3 * x + c2) * x + c1) * x + c0) % ell]
        else:
            for x in range(ell):
                total += jacobi_symbol(((c3 * x + c2) * x + c1) * x + c0, ell)
        return -total

    def two_torsion_roots(self):
        """Roots of the completed-square cubic, i.e. x-coordinates of the points of order 2."""
        ell = self.ell
        c3, c2, c1, c0 = self.cubic()
        return [x for x in range(ell) if (((c3 * x + c2) * x + c1) * x + c0) % ell == 0]

    def has_full_two_torsion(self):
        """For a curve with a rational 2-torsion point: all three are rational iff the discriminant is a square."""
        self._require_smooth()
        if not self._has_two_torsion_point():
            raise InvalidInputError(f"curve {self.ainvs} has no 2-torsion point over F_{self.ell}")
        return jacobi_symbol(self.discriminant, self.ell) == 1

    def _has_two_torsion_point(self):
        if self.short_model()[2] == 0:
            return True
        # gcd(x^ell - x, cubic) has positive degree iff the cubic has a root
        ell = self.ell
        cubic = gf_from_int_poly(list(self.cubic()), ell)
        x_ell = gf_pow_mod([1, 0], ell, cubic, ell, ZZ)
        return gf_degree(gf_gcd(gf_sub(x_ell, [1, 0], ell, ZZ), cubic, ell, ZZ)) > 0

    # point arithmetic on the short model

    def _add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        ell = self.ell
        A2, A4, _ = self._short
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % ell == 0:
                return None
            lam = (3 * x1 * x1 + 2 * A2 * x1 + A4) * pow(2 * y1, -1, ell) % ell
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, ell) % ell
        x3 = (lam * lam - A2 - x1 - x2) % ell
        return x3, (lam * (x1 - x3) - y1) % ell

    def multiply(self, P, n):
        if n < 0:
            P = None if P is None else (P[0], -P[1] % self.ell)
            n = -n
        result = None
        while n:
            if n & 1:
                result = self._add(result, P)
            P = self._add(P, P)
            n >>= 1
        return result

    @cached_property
    def _short(self):
        return self.short_model()

    def random_point(self, rng):
        ell = self.ell
        A2, A4, A6 = self._short
        while True:
            x = rng.randrange(ell)
            rhs = ((x + A2) * x + A4) * x + A6
            y = sqrt_mod(rhs, ell)
            if y == NON_RESIDUE:
                continue
            if rng.randrange(2):
                y = -y % ell
            return x, y

    def annihilated_by(self, n, rng, tries=1):
        """False when some random point has n*P != O, which rules out #E = n."""
        self._require_smooth()
        return all(self.multiply(self.random_point(rng), n) is None for _ in range(tries))

    def _point_order(self, P, multiple):
        order = multiple
        for r in factorint(multiple):
            while order % r == 0 and self.multiply(P, order // r) is None:
                order //= r
        return order

    def _bsgs_multiple(self, P, low, high):
        step = isqrt(high - low) + 1
        baby = {}
        Q = None
        for j in range(step):
            baby.setdefault(Q, j)
            Q = self._add(Q, P)
        giant = self.multiply(P, step)
        Q = self.multiply(P, low)
        for i in range(step + 2):
            if Q in baby:
                multiple = low + i * step - baby[Q]
                if multiple > 0:
                    return multiple
            Q = self._add(Q, giant)
        raise ArithmeticError(f"no multiple of the point order in [{low}, {high}]")

    def group_order(self, rng, attempts=8):
        """#E(F_ell) from point orders inside the Hasse interval."""
        self._require_smooth()
        ell = self.ell
        width = isqrt(4 * ell)
        low, high = ell + 1 - width, ell + 1 + width
        exponent = 1
        for _ in range(attempts):
            P = self.random_point(rng)
            order = self._point_order(P, self._bsgs_multiple(P, low, high))
            exponent = lcm(exponent, order)
            first = -(-low // exponent) * exponent
            if first + exponent > high:
                return first
        logger.debug(f"point orders ambiguous over F_{ell}, counting with the character sum")
        return ell + 1 - self._trace_charsum()

    def quadratic_twist(self, d):
        A2, A4, A6 = self._short
        d %= self.ell
        return CurveFp.short(A2 * d, A4 * d * d, A6 * d ** 3, self.ell)


@dataclass(frozen=True)
class LocalData:
    prime: int
    conductor_exponent: int
    disc_valuation: int
    kodaira: str

    def as_dict(self):
        return {
            "prime": self.prime,
            "f": self.conductor_exponent,
            "v_disc": self.disc_valuation,
            "kodaira": self.kodaira,
        }


@dataclass(frozen=True)
class ConductorData:
    minimal_model: CurveQ
    conductor: int
    local: tuple

    def local_at(self, p):
        for data in self.local:
            if data.prime == p:
                return data
        return LocalData(p, 0, 0, "I0")

    def as_dict(self):
        return {
            "minimal_model": self.minimal_model.as_list(),
            "conductor": self.conductor,
            "local": [data.as_dict() for data in self.local],
        }


def _tate_local(ainvs, p):
    """Tate's algorithm at p for an integral model. Returns (LocalData, number of p-scalings)."""
    scalings = 0
    half = pow(2, -1, p) if p != 2 else None
    while True:
        a1, a2, a3, a4, a6 = ainvs
        b2, b4, b6, b8 = _b_invariants(*ainvs)
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2 ** 3) + 36 * b2 * b4 - 216 * b6
        disc = _discriminant(b2, b4, b6, b8)
        n = valuation(disc, p)
        if n == 0:
            return LocalData(p, 0, 0, "I0"), scalings

        # move the singular point to (0, 0)
        if p == 2:
            if b2 % 2 == 0:
                r = a4 % 2
                t = (r * (1 + a2 + a4) + a6) % 2
            else:
                r = a3 % 2
                t = (r + a4) % 2
        elif p == 3:
            r = (-b6) % 3 if b2 % 3 == 0 else (-b2 * b4) % 3
            t = (a1 * r + a3) % 3
        else:
            if c4 % p == 0:
                r = -pow(12, -1, p) * b2 % p
            else:
                r = -pow(12 * c4, -1, p) * (c6 + b2 * c4) % p
            t = -half * (a1 * r + a3) % p
        ainvs = _rst(ainvs, r=r, t=t)
        a1, a2, a3, a4, a6 = ainvs
        b2, b4, b6, b8 = _b_invariants(*ainvs)

        if c4 % p:
            return LocalData(p, 1, n, f"I{n}"), scalings
        if a6 % p ** 2:
            return LocalData(p, n, n, "II"), scalings
        if b8 % p ** 3:
            return LocalData(p, n - 1, n, "III"), scalings
        if b6 % p ** 3:
            return LocalData(p, n - 2, n, "IV"), scalings

        # now p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = a2 % 2
            t = (a6 // 4) % 2
        else:
            s = -a1 * half % p
            t = -(a3 // p) * half % p
        ainvs = _rst(ainvs, s=s, t=p * t)
        a1, a2, a3, a4, a6 = ainvs

        b = a2 // p
        c = a4 // p ** 2
        d = a6 // p ** 3
        w = 27 * d * d - b * b * c * c + 4 * b ** 3 * d - 18 * b * c * d + 4 * c ** 3
        x = 3 * c - b * b
        if w % p:
            return LocalData(p, n - 4, n, "I0*"), scalings

        if x % p:
            # double root of the auxiliary cubic: type I_m*
            if p == 2:
                r = c % 2
            elif p == 3:
                r = b * c % 3
            else:
                r = (b * c - 9 * d) * pow(2 * x, -1, p) % p
            ainvs = _rst(ainvs, r=p * r)
            m, mx, my = 1, p * p, p * p
            while True:
                a1, a2, a3, a4, a6 = ainvs
                xa2, xa3, xa6 = a2 // p, a3 // my, a6 // (mx * my)
                if (xa3 * xa3 + 4 * xa6) % p:
                    break
                t = my * (xa6 if p == 2 else -xa3 * half % p)
                ainvs = _rst(ainvs, t=t)
                my *= p
                m += 1
                a1, a2, a3, a4, a6 = ainvs
                xa2, xa4, xa6 = a2 // p, a4 // (p * mx), a6 // (mx * my)
                if (xa4 * xa4 - 4 * xa2 * xa6) % p:
                    break
                r = mx * (xa6 * xa2 if p == 2 else -xa4 * pow(2 * xa2, -1, p) % p)
                ainvs = _rst(ainvs, r=r)
                mx *= p
                m += 1
            return LocalData(p, n - m - 4, n, f"I{m}*"), scalings

        # triple root
        if p == 2:
            r = b % 2
        elif p == 3:
            r = (-d) % 3
        else:
            r = -b * pow(3, -1, p) % p
        ainvs = _rst(ainvs, r=p * r)
        a1, a2, a3, a4, a6 = ainvs
        x3, x6 = a3 // p ** 2, a6 // p ** 4
        if (x3 * x3 + 4 * x6) % p:
            return LocalData(p, n - 6, n, "IV*"), scalings
        t = x6 if p == 2 else -x3 * half % p
        ainvs = _rst(ainvs, t=p * p * t)
        a1, a2, a3, a4, a6 = ainvs
        if a4 % p ** 4:
            return LocalData(p, n - 7, n, "III*"), scalings
        if a6 % p ** 6:
            return LocalData(p, n - 8, n, "II*"), scalings
        # not minimal at p
        ainvs = (a1 // p, a2 // p ** 2, a3 // p ** 3, a4 // p ** 4, a6 // p ** 6)
        scalings += 1


def tate_conductor(E, primes=None):
    """
    Minimal model, conductor and local data of E.

    ``primes`` may list the primes dividing the discriminant when they are known, to
    spare factoring it.
    """
    integral = E.integral_model()
    ainvs = tuple(int(a) for a in integral.ainvs)
    disc = abs(int(integral.discriminant))
    if primes is None:
        primes = factorint(disc)
    primes = [p for p in primes if disc % p == 0]
    local = []
    conductor, u = 1, 1
    for p in sorted(primes):
        data, scalings = _tate_local(ainvs, p)
        u *= p ** scalings
        if data.disc_valuation:
            local.append(data)
            conductor *= p ** data.conductor_exponent
    c4 = int(integral.c4) // u ** 4
    c6 = int(integral.c6) // u ** 6
    minimal = CurveQ.from_c4c6(c4, c6)
    logger.debug(f"conductor of {E.as_list()} is {conductor}")
    return ConductorData(minimal, conductor, tuple(local))


def twist_is_isomorphic(E1, E2):
    """Whether E1 and E2 are isomorphic over Q (same j and c4/c6 related by a twelfth power)."""
    if E1.j_invariant != E2.j_invariant:
        return False
    m1, m2 = tate_conductor(E1).minimal_model, tate_conductor(E2).minimal_model
    return m1.c4 == m2.c4 and m1.c6 == m2.c6
