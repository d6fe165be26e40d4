"""
Imaginary quadratic fields K = Q(sqrt(-c)).

Elements of the ring of integers are written a + b*w with w = (1 + sqrt(-c))/2
when -c = 1 (mod 4) and w = sqrt(-c) otherwise. Ideals are kept in Hermite
normal form [a, b + d*w]; the class group is computed with reduced binary
quadratic forms and Gauss composition.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from sympy import factorint, isprime
from sympy.core.numbers import igcdex

from app.errors import InvalidInputError, NotSquarefreeError
from app.models.arith import NON_RESIDUE, is_squarefree, sqrt_mod

logger = logging.getLogger(__name__)

NON_PRINCIPAL = "non-principal"


@dataclass(frozen=True)
class QuadField:
    c: int

    def __post_init__(self):
        if self.c < 1 or not is_squarefree(self.c):
            raise NotSquarefreeError(f"c must be a positive squarefree integer, got {self.c}")

    @property
    def half_basis(self):
        """True when w = (1 + sqrt(-c))/2."""
        return self.c % 4 == 3

    @property
    def disc(self):
        return -self.c if self.half_basis else -4 * self.c

    @property
    def m(self):
        """The constant term of the minimal polynomial of w."""
        return (1 + self.c) // 4 if self.half_basis else self.c

    def norm(self, a, b):
        if self.half_basis:
            return a * a + a * b + self.m * b * b
        return a * a + self.c * b * b

    def __call__(self, a, b=0):
        return QuadInt(a, b, self)

    @property
    def one(self):
        return QuadInt(1, 0, self)

    @property
    def w(self):
        return QuadInt(0, 1, self)

    def sqrt_minus_c(self):
        """sqrt(-c) as an element of the ring of integers."""
        return QuadInt(-1, 2, self) if self.half_basis else QuadInt(0, 1, self)

    def from_parts(self, rational, sqrt_part):
        """The integral element rational + sqrt_part*sqrt(-c) (half-integers allowed in the half basis)."""
        rational, sqrt_part = Fraction(rational), Fraction(sqrt_part)
        if self.half_basis:
            b = 2 * sqrt_part
            a = rational - sqrt_part
        else:
            a, b = rational, sqrt_part
        if a.denominator != 1 or b.denominator != 1:
            raise InvalidInputError(f"{rational} + {sqrt_part}*sqrt(-{self.c}) is not integral")
        return QuadInt(int(a), int(b), self)

    def reduction_map(self, ell, conjugate=False):
        """
        Reduction modulo a prime of degree one above ell.

        sqrt(-c) goes to the smaller square root of -c modulo ell, or to the larger
        one for the conjugate prime.
        """
        root = sqrt_mod(-self.c, ell)
        if root == NON_RESIDUE or root == 0:
            raise InvalidInputError(f"{ell} does not split in Q(sqrt(-{self.c}))")
        if conjugate:
            root = ell - root
        w_image = (1 + root) * pow(2, -1, ell) % ell if self.half_basis else root

        def reduce(element):
            if isinstance(element, QuadFraction):
                return reduce(element.num) * pow(element.den, -1, ell) % ell
            return (element.a + element.b * w_image) % ell

        return reduce


@dataclass(frozen=True)
class QuadInt:
    a: int
    b: int
    field: QuadField = field(repr=False)

    def __add__(self, other):
        other = self._lift(other)
        return QuadInt(self.a + other.a, self.b + other.b, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        return QuadInt(self.a - other.a, self.b - other.b, self.field)

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.field)

    def __mul__(self, other):
        other = self._lift(other)
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        if self.field.half_basis:
            return QuadInt(a1 * a2 - self.field.m * b1 * b2, a1 * b2 + a2 * b1 + b1 * b2, self.field)
        return QuadInt(a1 * a2 - self.field.c * b1 * b2, a1 * b2 + a2 * b1, self.field)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if exponent < 0:
            raise InvalidInputError("negative powers live in QuadFraction")
        result, base = self.field.one, self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def _lift(self, other):
        if isinstance(other, int):
            return QuadInt(other, 0, self.field)
        return other

    def conjugate(self):
        if self.field.half_basis:
            return QuadInt(self.a + self.b, -self.b, self.field)
        return QuadInt(self.a, -self.b, self.field)

    def norm(self):
        return self.field.norm(self.a, self.b)

    @property
    def rational_part(self):
        return Fraction(2 * self.a + self.b, 2) if self.field.half_basis else Fraction(self.a)

    @property
    def sqrt_part(self):
        """Coefficient of sqrt(-c)."""
        return Fraction(self.b, 2) if self.field.half_basis else Fraction(self.b)

    def divide_exact(self, n):
        if self.a % n or self.b % n:
            raise InvalidInputError(f"{self} is not divisible by {n}")
        return QuadInt(self.a // n, self.b // n, self.field)

    def as_dict(self):
        return {"a": str(self.a), "b": str(self.b)}


@dataclass(frozen=True)
class QuadFraction:
    """An element num/den of K with den > 0, kept in lowest terms."""

    num: QuadInt
    den: int

    def __post_init__(self):
        if self.den == 0:
            raise ZeroDivisionError("zero denominator")
        g = gcd(gcd(self.num.a, self.num.b), self.den)
        sign = -1 if self.den < 0 else 1
        if g != 1 or sign < 0:
            g *= sign
            object.__setattr__(self, "num", QuadInt(self.num.a // g, self.num.b // g, self.num.field))
            object.__setattr__(self, "den", self.den // g)

    def __mul__(self, other):
        if isinstance(other, QuadInt):
            other = QuadFraction(other, 1)
        return QuadFraction(self.num * other.num, self.den * other.den)

    def __pow__(self, exponent):
        if exponent >= 0:
            return QuadFraction(self.num ** exponent, self.den ** exponent)
        inverse = self.inverse()
        return QuadFraction(inverse.num ** -exponent, inverse.den ** -exponent)

    def inverse(self):
        n = self.num.norm()
        return QuadFraction(self.num.conjugate() * self.den, n)

    def conjugate(self):
        return QuadFraction(self.num.conjugate(), self.den)

    def is_integral(self):
        return self.den == 1

    def as_dict(self):
        return {"num": self.num.as_dict(), "den": str(self.den)}


def _hnf(field_, vectors):
    """Hermite normal form (a, b, d) of the Z-span of coordinate vectors (x, y) ~ x + y*w."""
    pivot_x, pivot_y = 0, 0
    xs = []
    for x, y in vectors:
        if y == 0:
            xs.append(x)
            continue
        if pivot_y == 0:
            pivot_x, pivot_y = x, y
            continue
        s, t, g = igcdex(pivot_y, y)
        xs.append((y // g) * pivot_x - (pivot_y // g) * x)
        pivot_x, pivot_y = s * pivot_x + t * x, g
    a = 0
    for x in xs:
        a = gcd(a, x)
    if a == 0 or pivot_y == 0:
        raise InvalidInputError("generators do not span a full-rank ideal")
    if pivot_y < 0:
        pivot_x, pivot_y = -pivot_x, -pivot_y
    return a, pivot_x % a, pivot_y


@dataclass(frozen=True)
class QuadIdeal:
    """The integral ideal with Z-basis {a, b + d*w}; 0 <= b < a and d | a, d | b."""

    field: QuadField = field(repr=False)
    a: int
    b: int
    d: int

    @classmethod
    def generated_by(cls, field_, *elements):
        vectors = []
        for e in elements:
            if isinstance(e, int):
                e = QuadInt(e, 0, field_)
            ew = e * field_.w
            vectors.extend([(e.a, e.b), (ew.a, ew.b)])
        return cls(field_, *_hnf(field_, vectors))

    @classmethod
    def unit(cls, field_):
        return cls(field_, 1, 0, 1)

    @property
    def norm(self):
        return self.a * self.d

    def basis(self):
        return QuadInt(self.a, 0, self.field), QuadInt(self.b, self.d, self.field)

    def __mul__(self, other):
        x1, y1 = self.basis()
        x2, y2 = other.basis()
        return QuadIdeal.generated_by(self.field, x1 * x2, x1 * y2, y1 * x2, y1 * y2)

    def __pow__(self, exponent):
        result, base = QuadIdeal.unit(self.field), self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self):
        x, y = self.basis()
        return QuadIdeal.generated_by(self.field, x, y.conjugate())

    def contains(self, element):
        if element.b % self.d:
            return False
        return (element.a - (element.b // self.d) * self.b) % self.a == 0

    def to_form(self):
        """The reduced binary quadratic form of the ideal class."""
        a, b = self.a // self.d, self.b // self.d
        if self.field.half_basis:
            form = BinaryQF(a, 2 * b + 1, (b * b + b + self.field.m) // a)
        else:
            form = BinaryQF(a, 2 * b, (b * b + self.field.c) // a)
        return form.reduced()

    def as_dict(self):
        return {"a": str(self.a), "b": str(self.b), "d": str(self.d), "norm": str(self.norm)}


@dataclass(frozen=True)
class BinaryQF:
    a: int
    b: int
    c: int

    @property
    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c

    def normalized(self):
        r = (self.a - self.b) // (2 * self.a)
        b = self.b + 2 * r * self.a
        return BinaryQF(self.a, b, (b * b - self.discriminant) // (4 * self.a))

    def reduced(self):
        f = self.normalized()
        while f.a > f.c or (f.a == f.c and f.b < 0):
            if f.a > f.c:
                f = BinaryQF(f.c, -f.b, f.a).normalized()
            else:
                f = BinaryQF(f.a, -f.b, f.c)
        return f

    def is_identity(self):
        return self.a == 1

    def __mul__(self, other):
        # Gauss composition (Shanks' two-step Euclid)
        f1, f2 = (self, other) if self.a <= other.a else (other, self)
        disc = f1.discriminant
        s = (f1.b + f2.b) // 2
        n = f2.b - s
        if f2.a % f1.a == 0:
            y1, d = 0, f1.a
        else:
            u, _, d = igcdex(f2.a, f1.a)
            y1 = u
        if s % d == 0:
            y2, x2, d1 = -1, 0, d
        else:
            u, v, d1 = igcdex(s, d)
            x2, y2 = u, -v
        v1, v2 = f1.a // d1, f2.a // d1
        r = (y1 * y2 * n - x2 * f2.c) % v1
        b3 = f2.b + 2 * v2 * r
        a3 = v1 * v2
        return BinaryQF(a3, b3, (b3 * b3 - disc) // (4 * a3)).reduced()

    def __pow__(self, exponent):
        result = identity_form(self.discriminant)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def as_list(self):
        return [self.a, self.b, self.c]


def identity_form(disc):
    return BinaryQF(1, disc % 2, (disc % 2 - disc) // 4)


def reduced_forms(disc):
    """All reduced primitive positive definite forms of discriminant ``disc``."""
    forms = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            forms.append(BinaryQF(a, b, c))
        a += 1
    return forms


@dataclass(frozen=True)
class SplitData:
    kind: str
    ideals: tuple
    f: int
    D: int

    def as_dict(self):
        return {
            "kind": self.kind,
            "ideals": [ideal.as_dict() for ideal in self.ideals],
            "f": self.f,
            "D": self.D,
        }


@lru_cache(maxsize=1024)
def split_prime(field_, r):
    if not isprime(r):
        raise InvalidInputError(f"{r} is not prime")
    if field_.half_basis:
        # roots b of b^2 + b + m
        if r == 2:
            roots = [0, 1] if field_.m % 2 == 0 else []
        else:
            root = sqrt_mod(-field_.c, r)
            half = pow(2, -1, r)
            roots = [] if root == NON_RESIDUE else sorted({(-1 + root) * half % r, (-1 - root) * half % r})
    else:
        # roots b of b^2 + c
        if r == 2:
            roots = [field_.c % 2]
        else:
            root = sqrt_mod(-field_.c, r)
            roots = [] if root == NON_RESIDUE else sorted({(-root) % r, root % r})

    if not roots:
        return SplitData("inert", (QuadIdeal(field_, r, 0, r),), 2, 1)
    ideals = tuple(QuadIdeal.generated_by(field_, r, QuadInt(b, 1, field_)) for b in roots)
    ideals = tuple(sorted(ideals, key=lambda I: (I.b, I.a)))
    if field_.disc % r == 0:
        return SplitData("ramified", ideals[:1], 1, 2)
    return SplitData("split", ideals, 1, 1)


def prime_above(field_, r):
    """The canonical prime ideal above r (HNF-smaller one when r splits)."""
    return split_prime(field_, r).ideals[0]


def _normalise_generator(candidates):
    nonneg = [g for g in candidates if g.sqrt_part >= 0]
    pool = [g for g in nonneg if g.rational_part >= 0] or nonneg
    return min(pool, key=lambda g: (g.sqrt_part, g.rational_part))


def elements_of_norm(field_, n):
    """All a + b*w with norm n."""
    found = []
    if field_.half_basis:
        bound = isqrt(4 * n // field_.c) + 1
        for b in range(-bound, bound + 1):
            disc = 4 * n - field_.c * b * b
            if disc < 0:
                continue
            t = isqrt(disc)
            if t * t != disc:
                continue
            for root in {t, -t}:
                if (root - b) % 2 == 0:
                    found.append(QuadInt((root - b) // 2, b, field_))
    else:
        bound = isqrt(n // field_.c) + 1
        for b in range(-bound, bound + 1):
            rest = n - field_.c * b * b
            if rest < 0:
                continue
            t = isqrt(rest)
            if t * t == rest:
                for a in {t, -t}:
                    found.append(QuadInt(a, b, field_))
    return found


def is_principal_with_generator(ideal):
    """A normalised generator of ``ideal``, or NON_PRINCIPAL."""
    candidates = [g for g in elements_of_norm(ideal.field, ideal.norm) if ideal.contains(g)]
    if not candidates:
        return NON_PRINCIPAL
    return _normalise_generator(candidates)


@dataclass(frozen=True)
class ClassGroupData:
    field: QuadField
    h_K: int
    reduced_forms: tuple
    p2_order: int
    p2_is_generator: bool
    s: int | None = None
    delta: QuadInt | None = None
    beta: QuadFraction | None = None

    def as_dict(self):
        return {
            "c": self.field.c,
            "disc": self.field.disc,
            "h_K": self.h_K,
            "reduced_forms": [f.as_list() for f in self.reduced_forms],
            "p2_order": self.p2_order,
            "p2_is_generator": self.p2_is_generator,
            "s": self.s,
            "delta": None if self.delta is None else self.delta.as_dict(),
            "beta": None if self.beta is None else self.beta.as_dict(),
        }


def ideal_class_order(ideal):
    form = ideal.to_form()
    order, power = 1, form
    while not power.is_identity():
        power = power * form
        order += 1
    return order


@lru_cache(maxsize=256)
def class_group(field_):
    forms = tuple(reduced_forms(field_.disc))
    p2 = prime_above(field_, 2)
    order = ideal_class_order(p2)
    data = ClassGroupData(field_, len(forms), forms, order, order == len(forms))
    if split_prime(field_, 2).kind == "split":
        s, delta, beta = p2_distinguished_elements(field_)
        data = ClassGroupData(field_, len(forms), forms, order, order == len(forms), s, delta, beta)
    logger.debug(f"class group of Q(sqrt(-{field_.c})): h={len(forms)}, [p2] of order {order}")
    return data


def p2_distinguished_elements(field_):
    """(s, delta, beta): s least with p2^(2s) principal, delta its generator, beta = delta/conj(delta)."""
    split = split_prime(field_, 2)
    if split.kind != "split":
        raise InvalidInputError(f"2 does not split in Q(sqrt(-{field_.c}))")
    order = ideal_class_order(split.ideals[0])
    s = order if order % 2 else order // 2
    delta = is_principal_with_generator(split.ideals[0] ** (2 * s))
    beta = QuadFraction(delta * delta, 2 ** (2 * s))
    return s, delta, beta


@dataclass(frozen=True)
class FactorisationData:
    j: int
    i: int
    n_star: int
    omega: QuadInt
    delta: QuadInt
    h_K: int

    def as_dict(self):
        return {
            "j": self.j,
            "i": self.i,
            "n_star": self.n_star,
            "omega": self.omega.as_dict(),
            "delta": self.delta.as_dict(),
            "h_K": self.h_K,
        }


def q_ideal(field_, C1):
    """Product over the primes r | C1 of the canonical prime above r."""
    ideal = QuadIdeal.unit(field_)
    for r in sorted(factorint(C1)):
        ideal = ideal * prime_above(field_, r)
    return ideal


@lru_cache(maxsize=1024)
def element_factorisation_data(field_, C1, p):
    data = class_group(field_)
    h = data.h_K
    if p % h == 0 and h > 1:
        raise InvalidInputError(f"p={p} divides the class number {h} of Q(sqrt(-{field_.c}))")
    if not data.p2_is_generator:
        raise InvalidInputError(f"the prime above 2 does not generate Cl(Q(sqrt(-{field_.c})))")
    p2 = prime_above(field_, 2)
    base = q_ideal(field_, C1)
    for j in range(h):
        omega = is_principal_with_generator(base * p2 ** j)
        if omega != NON_PRINCIPAL:
            break
    else:
        raise InvalidInputError("no power of p2 makes the C1-ideal principal")
    i = (-2 - j) * pow(p, -1, h) % h if h > 1 else 0
    n_star = (-2 - j - p * i) // h
    delta = is_principal_with_generator(p2 ** h)
    return FactorisationData(j, i, n_star, omega, delta, h)
