"""
Integer and prime-field primitives shared by the sieves, the class group code and
the curve arithmetic.

Everything here is a pure function of Python integers; ``PrimeField`` and
``Residue`` are immutable wrappers for the places where carrying the modulus
around reads better than passing it explicitly.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

from sympy import factorint, isprime

from app.errors import InvalidInputError

logger = logging.getLogger(__name__)

NON_RESIDUE = "non-residue"


def jacobi_symbol(a, n):
    if n <= 0 or n % 2 == 0:
        raise InvalidInputError(f"Jacobi symbol needs an odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_mod(a, ell):
    """Square root of ``a`` modulo the odd prime ``ell``; the smaller root, or NON_RESIDUE."""
    a %= ell
    if a == 0:
        return 0
    if jacobi_symbol(a, ell) != 1:
        return NON_RESIDUE
    if ell % 4 == 3:
        r = pow(a, (ell + 1) // 4, ell)
    else:
        # Tonelli-Shanks
        q, s = ell - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while jacobi_symbol(z, ell) != -1:
            z += 1
        m, c, t, r = s, pow(z, q, ell), pow(a, q, ell), pow(a, (q + 1) // 2, ell)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % ell
                i += 1
            b = pow(c, 1 << (m - i - 1), ell)
            m, c = i, b * b % ell
            t, r = t * c % ell, r * b % ell
    return min(r, ell - r)


@lru_cache(maxsize=4096)
def primitive_root(ell):
    if ell == 2:
        return 1
    order = ell - 1
    cofactors = [order // r for r in factorint(order)]
    g = 2
    while any(pow(g, e, ell) == 1 for e in cofactors):
        g += 1
    return g


def primes_in_progression(p, m_max, avoid=()):
    """Primes ell = 2mp + 1 with 1 <= m <= m_max dividing no element of ``avoid``."""
    if m_max < 1:
        raise InvalidInputError("m_max must be at least 1")
    found = []
    for m in range(1, m_max + 1):
        ell = 2 * m * p + 1
        if not isprime(ell):
            continue
        if any(a % ell == 0 for a in avoid):
            continue
        found.append((ell, m))
    return found


@lru_cache(maxsize=64)
def legendre_table(ell):
    """chi(n) for n in [0, ell) as a tuple, built from the set of squares."""
    table = [-1] * ell
    table[0] = 0
    for x in range(1, (ell + 1) // 2):
        table[x * x % ell] = 1
    return tuple(table)


def is_squarefree(n):
    if n == 0:
        return False
    return all(e == 1 for e in factorint(abs(n)).values())


def squarefree_kernel(d):
    """The squarefree integer d' with d / d' a square (sign kept)."""
    if d == 0:
        raise InvalidInputError("zero has no squarefree kernel")
    kernel = -1 if d < 0 else 1
    for r, e in factorint(abs(d)).items():
        if e % 2:
            kernel *= r
    return kernel


def valuation(n, r):
    if n == 0:
        raise InvalidInputError("valuation of zero is infinite")
    v = 0
    while n % r == 0:
        n //= r
        v += 1
    return v


@dataclass(frozen=True)
class PrimeField:
    modulus: int

    def __post_init__(self):
        if not isprime(self.modulus):
            raise InvalidInputError(f"{self.modulus} is not prime")

    def __call__(self, value):
        return Residue(value % self.modulus, self)

    def sqrt(self, residue):
        root = sqrt_mod(residue.value, self.modulus)
        return NON_RESIDUE if root == NON_RESIDUE else self(root)

    def primitive_root(self):
        return self(primitive_root(self.modulus))


@dataclass(frozen=True)
class Residue:
    value: int
    field: PrimeField

    def _coerce(self, other):
        if isinstance(other, Residue):
            if other.field != self.field:
                raise InvalidInputError("residues from different fields")
            return other.value
        return other

    def __add__(self, other):
        return self.field(self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.field(self.value - self._coerce(other))

    def __rsub__(self, other):
        return self.field(self._coerce(other) - self.value)

    def __mul__(self, other):
        return self.field(self.value * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.field(-self.value)

    def __pow__(self, exponent):
        return self.field(pow(self.value, exponent, self.field.modulus))

    def __truediv__(self, other):
        return self * self.field(self._coerce(other)).inverse()

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.field(pow(self.value, -1, self.field.modulus))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0
