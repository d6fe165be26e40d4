"""
Thue and Thue-Mahler equations attached to C1*x^2 + q^alpha = y^p.

y even: C1*x + q^k*sqrt(-c) = 2*gamma*beta^p in Q(sqrt(-c)) with beta = U + V*w,
whose imaginary part gives a*q^k = F(U, V) and whose real part gives
b*x = G(U, V).

y odd: the Lucas-sequence reduction G(r, s) = C1^((p-1)/2) q^k (times 2^p when
-c = 1 mod 4) with s in a finite candidate set. Candidates whose right-hand side
still moves with k are pruned q-adically and then resolved by integer roots.

Nothing here solves a genuine Thue-Mahler equation; problems are exported as JSON
for an external solver and the solver's answers are checked on import.
"""
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb, gcd

from sympy import Poly, symbols

from app.errors import InvalidInputError
from app.models.arith import jacobi_symbol, valuation
from app.models.quadfield import (
    QuadField,
    QuadFraction,
    class_group,
    element_factorisation_data,
    elements_of_norm,
)
from app.models.search import Solution, nth_root_exact
from app.schemas import TM_PROBLEM, TM_RESULTS, validate

logger = logging.getLogger(__name__)

U, V, T = symbols("U V T")


@dataclass(frozen=True)
class BivariateIntPoly:
    """Homogeneous sum of coefficients[i] * U^(degree - i) * V^i."""

    degree: int
    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) != self.degree + 1:
            raise InvalidInputError(f"a form of degree {self.degree} needs {self.degree + 1} coefficients")
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    @classmethod
    def from_poly(cls, poly, degree):
        coefficients = [0] * (degree + 1)
        for (eu, ev), c in poly.terms():
            if eu + ev != degree:
                raise InvalidInputError(f"term U^{eu} V^{ev} is not of degree {degree}")
            coefficients[ev] = int(c)
        return cls(degree, tuple(coefficients))

    def to_poly(self):
        return Poly(sum(c * U ** (self.degree - i) * V ** i for i, c in enumerate(self.coefficients)), U, V)

    def __call__(self, u, v):
        return sum(c * u ** (self.degree - i) * v ** i for i, c in enumerate(self.coefficients))

    def evaluate_mod(self, u, v, ell):
        total = 0
        for i, c in enumerate(self.coefficients):
            total += c * pow(u, self.degree - i, ell) * pow(v, i, ell)
        return total % ell

    def content(self):
        g = 0
        for c in self.coefficients:
            g = gcd(g, c)
        return g

    def divided(self, g):
        if any(c % g for c in self.coefficients):
            raise InvalidInputError(f"{g} does not divide every coefficient")
        return BivariateIntPoly(self.degree, tuple(c // g for c in self.coefficients))

    def at_v(self, v):
        """The univariate polynomial U -> F(U, v)."""
        return Poly([c * v ** i for i, c in enumerate(self.coefficients)], U)

    def as_dict(self):
        return {"degree": self.degree, "coefficients": [str(c) for c in self.coefficients]}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["degree"]), tuple(int(c) for c in data["coefficients"]))


@dataclass(frozen=True)
class TMProblem:
    """a * prod(primes^k) = F(U, V), with x recovered from b*x = G(U, V)."""

    kind: str
    F: BivariateIntPoly
    a: int
    primes: tuple
    G: BivariateIntPoly
    b: int
    instance: object = None
    p: int | None = None
    content: int = 1
    divisor: int = 1
    gamma: QuadFraction | None = field(default=None, repr=False)
    norm_shift: int = 0

    def __post_init__(self):
        if self.a == 0:
            raise InvalidInputError("the right-hand constant of a Thue-Mahler equation is nonzero")
        if self.kind not in ("thue", "thue_mahler"):
            raise InvalidInputError(f"unknown problem kind {self.kind!r}")

    def solves(self, u, v, k):
        """Whether (u, v) satisfies the main equation with exponent k (u, v already scaled by the divisor)."""
        return self.F(u, v) == self.a * self.primes[0] ** k

    def recover_x(self, u, v):
        value = self.G(u, v)
        if value % self.b:
            return None
        return value // self.b

    def exponent_of(self, u, v):
        """k with F(u, v) = a*q^k, or None."""
        value = self.F(u, v)
        if value == 0 or value % self.a:
            return None
        rest = value // self.a
        if rest < 0:
            return None
        q = self.primes[0]
        k = valuation(rest, q) if rest > 1 else 0
        return k if rest == q ** k else None

    def as_dict(self):
        data = {
            "kind": self.kind,
            "F": self.F.as_dict(),
            "a": str(self.a),
            "primes": list(self.primes),
            "G": self.G.as_dict(),
            "b": str(self.b),
            "content": str(self.content),
            "divisor": str(self.divisor),
        }
        if self.instance is not None:
            data["instance"] = self.instance.as_dict()
        if self.p is not None:
            data["p"] = self.p
        if self.gamma is not None:
            data["gamma"] = self.gamma.as_dict()
        return data

    @classmethod
    def from_dict(cls, data):
        from app.models.instance import Instance

        validate(data, TM_PROBLEM, "TMProblem")
        instance = data.get("instance")
        return cls(
            data["kind"],
            BivariateIntPoly.from_dict(data["F"]),
            int(data["a"]),
            tuple(data["primes"]),
            BivariateIntPoly.from_dict(data["G"]),
            int(data["b"]),
            None if instance is None else Instance(**instance),
            data.get("p"),
            int(data.get("content", 1)),
            int(data.get("divisor", 1)),
        )


# y odd


def _check_odd_prime(p):
    if p < 3 or p % 2 == 0:
        raise InvalidInputError(f"p must be an odd prime, got {p}")


def yodd_polynomials(c, p):
    """
    (G, F) with G(U, V) = ((U + V sqrt(-c))^p - (U - V sqrt(-c))^p) / (2 sqrt(-c)) = V*F(U, V).
    """
    _check_odd_prime(p)
    if c < 1:
        raise InvalidInputError(f"c must be positive, got {c}")
    g = [0] * (p + 1)
    for j in range(1, p + 1, 2):
        g[j] = comb(p, j) * (-c) ** ((j - 1) // 2)
    G = BivariateIntPoly(p, tuple(g))
    F = BivariateIntPoly(p - 1, tuple(g[1:]))
    return G, F


def yodd_real_polynomial(c, p):
    """Re((U + V sqrt(-c))^p) as a form in U, V."""
    r = [0] * (p + 1)
    for j in range(0, p + 1, 2):
        r[j] = comb(p, j) * (-c) ** (j // 2)
    return BivariateIntPoly(p, tuple(r))


@dataclass(frozen=True)
class SEntry:
    """s = sign * 2^two_exp * q^(k + q_offset); q_offset None means s does not involve q^k."""

    sign: int
    two_exp: int
    q_offset: int | None = None

    @property
    def kind(self):
        # with q^k in s the right-hand side no longer moves with k
        return "thue" if self.q_offset is not None else "thue_mahler"

    def value(self, q, k):
        if self.q_offset is None:
            return self.sign * 2 ** self.two_exp
        if k + self.q_offset < 0:
            return None
        return self.sign * 2 ** self.two_exp * q ** (k + self.q_offset)

    def label(self):
        text = "-" if self.sign < 0 else ""
        parts = []
        if self.two_exp:
            parts.append("2" if self.two_exp == 1 else f"2^{self.two_exp}")
        if self.q_offset is not None:
            parts.append("q^k" if self.q_offset == 0 else f"q^(k{self.q_offset:+d})")
        return text + ("*".join(parts) or "1")

    def as_dict(self):
        return {"sign": self.sign, "two_exp": self.two_exp, "q_offset": self.q_offset, "kind": self.kind}


def _signed(pairs):
    return [SEntry(sign, two_exp, offset) for two_exp, offset in pairs for sign in (1, -1)]


def s_candidate_set(c, q, p):
    """The possible values of s, written symbolically in k."""
    hard = (-c) % 4 == 1
    if not hard:
        if p % q:
            return _signed([(0, None), (0, 0)])
        return _signed([(0, None), (0, -1), (0, 0)])
    if q == 2:
        return _signed([(i, None) for i in range((p - 1) // 2 + 1)] + [(1, 0)])
    if p % q:
        return _signed([(0, None), (1, None), (0, 0), (1, 0)])
    return _signed([(0, None), (1, None), (0, -1), (1, -1), (0, 0), (1, 0)])


@dataclass(frozen=True)
class HenselVerdict:
    root_free: bool
    k0: int | None
    certified: bool

    def as_dict(self):
        return {"root_free": self.root_free, "k0": self.k0, "certified": self.certified}


def _as_poly(f):
    if isinstance(f, Poly):
        return Poly(f.as_expr().subs(f.gens[0], T), T) if f.gens != (T,) else f
    return Poly(list(f), T)


def _content_valuation(g, q):
    v = None
    for c in g.all_coeffs():
        c = int(c)
        if c:
            cv = valuation(c, q)
            v = cv if v is None else min(v, cv)
    return v


def hensel_root_free(f, q, k_cap=50):
    """
    Decide whether f (a sympy Poly or a coefficient list, highest degree first)
    has a root in Z_q.

    Each residue class U = r + q*t is followed while f keeps vanishing mod q; a
    simple root lifts by Hensel's lemma. When no class survives, f(U) = 0 mod q^k0
    is insoluble and k0 is the least such exponent.
    """
    f = _as_poly(f)
    if f.is_zero:
        raise InvalidInputError("the zero polynomial has every root")
    best = 0
    stack = [(f, 0)]
    while stack:
        g, base = stack.pop()
        v = _content_valuation(g, q)
        if v:
            g = Poly([int(c) // q ** v for c in g.all_coeffs()], T)
            base += v
        if base >= k_cap:
            return HenselVerdict(False, None, False)
        derivative = g.diff(T)
        roots = [r for r in range(q) if int(g.eval(r)) % q == 0]
        if not roots:
            best = max(best, base)
            continue
        for r in roots:
            if int(derivative.eval(r)) % q:
                return HenselVerdict(False, None, True)
            shifted = g.shift(r)
            stack.append((Poly([int(c) * q ** i for i, c in enumerate(reversed(shifted.all_coeffs()))][::-1], T), base))
    return HenselVerdict(True, best + 1, True)


def yodd_exponent_cases(C1, q, parity, p):
    """Which alternatives of the primitive-divisor argument leave room for an odd-y solution with exponent p."""
    cases = []
    if p <= 5:
        cases.append("a")
    if p == 7:
        cases.append("b")
    if parity == "odd" and class_group(QuadField(C1 * q)).h_K % p == 0:
        cases.append("c")
    if parity == "even":
        if class_group(QuadField(C1)).h_K % p == 0:
            cases.append("d")
        if q != 2 and (q - jacobi_symbol(-C1, q)) % p == 0:
            cases.append("e")
    return cases


@dataclass(frozen=True)
class YOddEntry:
    s: SEntry
    hensel: HenselVerdict | None = None
    k_limit: int | None = None

    @property
    def kind(self):
        return self.s.kind

    def as_dict(self):
        return {
            "s": self.s.label(),
            "entry": self.s.as_dict(),
            "kind": self.kind,
            "hensel": None if self.hensel is None else self.hensel.as_dict(),
            "k_limit": self.k_limit,
        }


@dataclass(frozen=True)
class YOddSystem:
    instance: object
    p: int
    c: int
    hard: bool
    G: BivariateIntPoly
    F: BivariateIntPoly
    real: BivariateIntPoly
    base: int
    y_divisor: int
    x_divisor: int
    entries: tuple

    @property
    def k_start(self):
        return 0 if self.instance.parity == "odd" else 1

    def rhs(self, k):
        return self.base * self.instance.q ** k

    def as_problem(self):
        """The whole system as one Thue-Mahler problem G(U, V) = base * q^k for export."""
        return TMProblem(
            "thue_mahler", self.G, self.base, (self.instance.q,), self.real, self.x_divisor, self.instance, self.p
        )

    def as_dict(self):
        return {
            "instance": self.instance.as_dict(),
            "p": self.p,
            "c": self.c,
            "hard": self.hard,
            "G": self.G.as_dict(),
            "F": self.F.as_dict(),
            "real": self.real.as_dict(),
            "rhs": f"{self.base}*{self.instance.q}^k",
            "y_divisor": self.y_divisor,
            "x_divisor": self.x_divisor,
            "entries": [e.as_dict() for e in self.entries],
        }


def yodd_system(instance, p, k_cap=50):
    _check_odd_prime(p)
    c = instance.c
    h = class_group(QuadField(c)).h_K
    if h % p == 0:
        raise InvalidInputError(f"p={p} divides the class number {h} of Q(sqrt(-{c})); this case needs Case II equations")
    q, C1 = instance.q, instance.C1
    hard = (-c) % 4 == 1
    G, F = yodd_polynomials(c, p)
    base = C1 ** ((p - 1) // 2) * (2 ** p if hard else 1)
    entries = []
    for s in s_candidate_set(c, q, p):
        if s.kind == "thue":
            entries.append(YOddEntry(s))
            continue
        value = s.value(q, 0)
        verdict = hensel_root_free(F.at_v(value), q, k_cap)
        k_limit = None
        if verdict.root_free:
            excess = valuation(base, q) - valuation(abs(value), q)
            k_limit = max(0, verdict.k0 - excess)
        entries.append(YOddEntry(s, verdict, k_limit))
    logger.debug(f"y-odd system for {instance.label}, p={p}: {len(entries)} candidates for s")
    return YOddSystem(
        instance,
        p,
        c,
        hard,
        G,
        F,
        yodd_real_polynomial(c, p),
        base,
        4 * C1 if hard else C1,
        C1 ** ((p + 1) // 2) * (2 ** p if hard else 1),
        tuple(entries),
    )


def _integer_roots(poly):
    roots = set()
    for factor, _ in poly.factor_list()[1]:
        if factor.degree() != 1:
            continue
        lead, const = (int(c) for c in factor.all_coeffs())
        if const % lead == 0:
            roots.add(-const // lead)
    return sorted(roots)


def resolve_yodd(system, entry, k):
    """Solutions (x, y, alpha) coming from a fixed s-candidate and a fixed k."""
    instance, p = system.instance, system.p
    if k < system.k_start:
        return []
    s = entry.s.value(instance.q, k)
    if s is None:
        return []
    rhs = system.rhs(k)
    if rhs % s:
        return []
    poly = system.F.at_v(s) - Poly(rhs // s, U)
    alpha = 2 * k + instance.s_parity
    found = set()
    for r in _integer_roots(poly):
        y_num = r * r + system.c * s * s
        if y_num % system.y_divisor:
            continue
        y = y_num // system.y_divisor
        if y % 2 == 0:
            continue
        x_num = abs(system.real(r, s))
        if x_num % system.x_divisor:
            continue
        solution = Solution(instance.C1, instance.q, x_num // system.x_divisor, y, alpha, p)
        if solution.verify():
            found.add(solution)
    return sorted(found)


@dataclass(frozen=True)
class ResolveResult:
    entry: YOddEntry
    solutions: tuple
    k_max: int
    exhaustive: bool

    def as_dict(self):
        return {
            "s": self.entry.s.label(),
            "solutions": [s.as_row() for s in self.solutions],
            "k_max": self.k_max,
            "exhaustive": self.exhaustive,
        }


def resolve_bounded(system, entry, k_cap=50):
    """
    Run k over the range Hensel allows. Exhaustive only for Thue-Mahler candidates
    with a certified k0; everything else stops at k_cap.
    """
    exhaustive = entry.k_limit is not None
    k_stop = entry.k_limit if exhaustive else k_cap
    found = set()
    for k in range(system.k_start, k_stop):
        found.update(resolve_yodd(system, entry, k))
    return ResolveResult(entry, tuple(sorted(found)), k_stop - 1, exhaustive)


# y even


def _power_coefficients(m, p):
    """(P0, P1) with (U + V*w)^p = P0 + P1*w where w^2 = w - m."""
    P0, P1 = Poly(1, U, V), Poly(0, U, V)
    u, v = Poly(U, U, V), Poly(V, U, V)
    for _ in range(p):
        P0, P1 = P0 * u - m * P1 * v, P0 * v + P1 * u + P1 * v
    return P0, P1


def yeven_system(instance, p):
    """
    The Thue-Mahler equation for y even and exponent p.

    With A of norm y/2 and the representative p2^i of its inverse class,
    C1*x + q^k*sqrt(-c) = 2*gamma*beta^p where gamma generates q_C1 * p2^(p-2-p*i),
    i being the unique class with h | p - 2 - p*i - j.
    """
    _check_odd_prime(p)
    field_ = instance.field
    if not field_.half_basis:
        raise InvalidInputError(f"y even needs -c = 1 mod 4; c = {field_.c}")
    data = element_factorisation_data(field_, instance.C1, p)
    h, j = data.h_K, data.j
    i = next(i for i in range(h) if (p - 2 - p * i - j) % h == 0)
    t = (p - 2 - p * i - j) // h
    gamma = QuadFraction(data.omega, 1) * QuadFraction(data.delta, 1) ** t

    g0, g1, D = gamma.num.a, gamma.num.b, gamma.den
    P0, P1 = _power_coefficients(field_.m, p)
    real = g0 * P0 - field_.m * g1 * P1
    imag = g0 * P1 + g1 * P0 + g1 * P1
    F = BivariateIntPoly.from_poly(imag, p)
    G = BivariateIntPoly.from_poly(2 * real + imag, p)
    a, b = D, D * instance.C1

    content = F.content()
    g = gcd(content, a)
    F, a = F.divided(g), a // g
    g2 = gcd(G.content(), b)
    G, b = G.divided(g2), b // g2
    logger.debug(f"y-even system for {instance.label}, p={p}: i={i}, t={t}, gamma={gamma}")
    return TMProblem("thue_mahler", F, a, (instance.q,), G, b, instance, p, content, 1, gamma, i)


def recover_uv(problem, solution):
    """
    Find beta = U + V*w behind a known solution with y even, checking both
    identities of the problem. Raises when the solution does not come from it.
    """
    instance, field_ = problem.instance, problem.instance.field
    if problem.gamma is None:
        raise InvalidInputError("recover_uv needs a problem built by yeven_system")
    k = instance.k_of(solution.alpha)
    gamma = problem.gamma
    norm = (solution.y // 2) * 2 ** problem.norm_shift
    for x in (solution.x, -solution.x):
        xi = field_.from_parts(Fraction(instance.C1 * x, 2), Fraction(instance.q ** k, 2))
        target = xi * gamma.den
        for beta in elements_of_norm(field_, norm):
            if gamma.num * beta ** problem.p != target:
                continue
            u, v = beta.a, beta.b
            if problem.solves(u, v, k) and problem.G(u, v) == problem.b * x:
                return u, v
    raise InvalidInputError(f"{solution.as_row()} does not arise from this Thue-Mahler equation")


# interchange


def descend(problem):
    """Problems for solutions with gcd(U, V) = d > 1: a replaced by a/d^p, (U, V) = (d*U', d*V')."""
    degree = problem.F.degree
    out = []
    d = 2
    while d ** degree <= abs(problem.a):
        if problem.a % d ** degree == 0:
            out.append(replace(problem, a=problem.a // d ** degree, divisor=problem.divisor * d))
        d += 1
    return out


def export_problem(problem):
    document = problem.as_dict()
    validate(document, TM_PROBLEM, "TMProblem")
    return document


@dataclass(frozen=True)
class ImportedSolution:
    U: int
    V: int
    k: int
    x: int
    solution: Solution | None

    def as_dict(self):
        return {
            "U": str(self.U),
            "V": str(self.V),
            "k": self.k,
            "x": str(self.x),
            "solution": None if self.solution is None else self.solution.as_row(),
        }


def import_results(problem, document):
    """
    Check an external solver's (U, V) pairs against the problem; scaled by the
    descent divisor, each must satisfy F = a*q^k and give an integral x through
    b*x = G(U, V). Pairs that fail are logged and dropped.
    """
    validate(document, TM_RESULTS, "Thue-Mahler solver results")
    accepted = []
    for entry in document["solutions"]:
        u = int(entry["U"]) * problem.divisor
        v = int(entry["V"]) * problem.divisor
        k = entry.get("k")
        if k is None:
            k = problem.exponent_of(u, v)
        if k is None or not problem.solves(u, v, k):
            logger.warning(f"({entry['U']}, {entry['V']}) does not solve the exported equation")
            continue
        x = problem.recover_x(u, v)
        if x is None:
            logger.warning(f"({entry['U']}, {entry['V']}) gives a non-integral x")
            continue
        accepted.append(ImportedSolution(u, v, k, abs(x), _solution_from(problem, abs(x), k)))
    return accepted


def _solution_from(problem, x, k):
    instance = problem.instance
    if instance is None or problem.p is None or x == 0:
        return None
    alpha = 2 * k + instance.s_parity
    if alpha < 1:
        return None
    y = nth_root_exact(instance.C1 * x * x + instance.q ** alpha, problem.p)
    if y is None:
        return None
    solution = Solution(instance.C1, instance.q, x, y, alpha, problem.p)
    return solution if solution.verify() else None
