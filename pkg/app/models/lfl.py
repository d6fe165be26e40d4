"""
Exponent bounds from linear forms in logarithms.

Every real quantity is an ``mpmath.iv`` interval; upper bounds are read off the
right endpoint and lower bounds off the left one, so a certified inequality never
depends on a rounding direction. The constants of the complex-logarithm step (the
linear forms in Delta_2 and the final exponent ceilings N0) are bundled data.
"""
import json
import logging
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from importlib import resources

import mpmath
from mpmath import iv

from app.errors import InvalidInputError, NotABadPairError
from app.models.instance import Instance
from app.models.quadfield import p2_distinguished_elements, split_prime

logger = logging.getLogger(__name__)

PRECISION_BITS = 96
REGIME_P = 30_000_000
YPBIG_CEILING = 10_000_000
DEFAULT_GRID = ((30_000_000, None), (30_000_000, 10**6), (100_000_000, None), (100_000_000, 10**6))

iv.prec = max(iv.prec, PRECISION_BITS)


def _endpoint(point):
    # mpf() rounds to mp.prec; the endpoint carries iv.prec bits
    with mpmath.workprec(iv.prec):
        return mpmath.mpf(point)


def _upper(x):
    return _endpoint(x.b)


def _lower(x):
    return _endpoint(x.a)


def _max(x, y):
    """An interval holding max(x, y) whose right endpoint is exact."""
    return x if _upper(x) >= _upper(y) else y


def _text(x):
    return mpmath.nstr(x, 12)


@lru_cache(maxsize=None)
def constants():
    text = resources.files("app.data").joinpath("lfl_constants.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class BoundParams:
    instance: Instance
    c: int
    s: int
    f: int
    D: int

    def __post_init__(self):
        if self.D not in (1, 2) or self.f not in (1, 2) or self.s < 1:
            raise InvalidInputError(f"inconsistent local data f={self.f}, D={self.D}, s={self.s}")

    @property
    def log_A2(self):
        return _max(self.s * iv.log(2), iv.log(self.instance.q) / self.D)

    def b_prime(self, p, y):
        """p/(D log A2) + 2/(D s log y); at most 1.001 p/(D log A2) in the large-p regime."""
        return iv.mpf(p) / (self.D * self.log_A2) + 2 / (self.D * self.s * iv.log(y))

    def as_dict(self):
        return {
            "instance": self.instance.as_dict(),
            "c": self.c,
            "s": self.s,
            "f": self.f,
            "D": self.D,
            "log_A2": _text(_upper(self.log_A2)),
        }


def bound_params(instance):
    field_ = instance.field
    split = split_prime(field_, instance.q)
    s, _, _ = p2_distinguished_elements(field_)
    params = BoundParams(instance, field_.c, s, split.f, split.D)
    logger.debug(f"bound parameters for {instance.label}: s={s}, f={split.f}, D={split.D} ({split.kind})")
    return params


def _y_lower(p):
    if p < 11:
        raise InvalidInputError(f"the lower bound for y needs p >= 11, got {p}")
    p = iv.mpf(p)
    return 4 * p - 4 * iv.sqrt(2 * p) + 2


def y_lower_bound(p):
    """4p - 4 sqrt(2p) + 2, rounded down."""
    return _lower(_y_lower(p))


def _log_y(y):
    if y is None:
        raise InvalidInputError("y is required")
    y = iv.mpf(y)
    if not _lower(y) > 1:
        raise InvalidInputError("y must exceed 1")
    return iv.log(y)


def _k_factor(params, p):
    """K with k <= K log(y)."""
    q = params.instance.q
    log_q = iv.log(q)
    log_A2 = params.log_A2
    head = 48 * q * params.s / log_q ** 4 * iv.mpf(q ** params.f - 1) / (q - 1) * params.D ** 2 * log_A2
    inner = _max(iv.log(p) + iv.log(log_q) - iv.log(params.D * log_A2) + iv.mpf("0.401"), 5 * log_q)
    return head * inner ** 2


def k_upper_bound(params, p, y):
    if p <= REGIME_P:
        logger.debug(f"k bound evaluated at p={p}, outside the range p > {REGIME_P} it is proved for")
    return _upper(_k_factor(params, p) * _log_y(y))


@dataclass(frozen=True)
class YPBigVerdict:
    p: int
    y: mpmath.mpf
    chain_bound: mpmath.mpf
    certified: bool
    below_ceiling: bool
    direct: bool | None = None

    def as_dict(self):
        return {
            "p": self.p,
            "y_lower": _text(self.y),
            "chain_bound": _text(self.chain_bound),
            "certified": self.certified,
            "below_1e7": self.below_ceiling,
            "direct": self.direct,
        }


def _chain_bound(params, p, log_y):
    """
    Assuming y^p <= 100*c*q^(2k): p <= (2 log 10 + log C1 + log q)/log y + 2 K log q,
    with the k bound K log y substituted (log y cancels in that term).
    """
    instance = params.instance
    log_q = iv.log(instance.q)
    head = (2 * iv.log(10) + iv.log(instance.C1) + log_q) / log_y
    return head + 2 * _k_factor(params, p) * log_q


def ypbig_check(instance, p, k=None):
    """
    y^p > 100*c*q^(2k) for every solution with y even: the contradiction chain is
    certified when p > 3e7 and the chain bound, evaluated at the least possible y,
    stays below p. With k given, the inequality is also checked directly at that y.
    """
    params = bound_params(instance)
    y = _y_lower(p)
    log_y = iv.log(iv.mpf(_lower(y)))
    bound = _upper(_chain_bound(params, p, log_y))
    certified = p > REGIME_P and bound < p
    direct = None
    if k is not None:
        lhs = p * log_y
        rhs = iv.log(100 * params.c) + 2 * k * iv.log(instance.q)
        direct = bool(_lower(lhs) > _upper(rhs))
    return YPBigVerdict(p, _lower(y), bound, bool(certified), bool(bound <= YPBIG_CEILING), direct)


@dataclass(frozen=True)
class Delta2Constants:
    slope: str
    coefficient: str
    constant: str

    def __post_init__(self):
        if not Decimal("-0.5") <= Decimal(self.slope) <= Decimal("-0.47"):
            raise InvalidInputError(f"slope {self.slope} outside [-0.5, -0.47]")

    def evaluate(self, p, log_y):
        return iv.mpf(self.slope) * p * log_y + iv.mpf(self.coefficient) * log_y + iv.mpf(self.constant)

    def as_dict(self):
        return {"slope": self.slope, "coefficient": self.coefficient, "constant": self.constant}


def _key(instance):
    return f"{instance.C1},{instance.q}"


def delta2_constants(instance):
    row = constants()["delta2"][instance.parity].get(_key(instance))
    if row is None:
        raise NotABadPairError(f"no Delta_2 constants for {instance.label}")
    return Delta2Constants(*row)


def delta2_bound(instance, p, y):
    """The stated upper bound for log|Delta_2|."""
    return _upper(delta2_constants(instance).evaluate(p, _log_y(y)))


def _derived_delta2(params, p, log_y):
    instance = params.instance
    log_q = iv.log(instance.q)
    k = _k_factor(params, p) * log_y
    q_part = (k + iv.mpf(1) / 2) * log_q if instance.parity == "odd" else k * log_q
    return iv.log(params.s) + iv.mpf("0.81") + q_part + iv.log(instance.C1) / 2 - iv.mpf(p) / 2 * log_y


def derived_delta2_bound(params, p, y):
    """log s + log|Delta| with k replaced by its upper bound."""
    return _upper(_derived_delta2(params, p, _log_y(y)))


def n0_lookup(instance):
    text = constants()["n0"][instance.parity].get(_key(instance))
    if text is None:
        raise NotABadPairError(f"no exponent ceiling for {instance.label}")
    return int(Decimal(text))


def j_bound(p):
    """|j| <= p for the multiple of pi i in Delta_2 (given |Delta_2| <= pi/2)."""
    if p <= 0:
        raise InvalidInputError(f"p must be positive, got {p}")
    return p


@dataclass(frozen=True)
class AuditRow:
    p: int
    y: mpmath.mpf
    derived: mpmath.mpf
    stated: mpmath.mpf
    consistent: bool

    def as_dict(self):
        return {
            "p": self.p,
            "y": _text(self.y),
            "derived": _text(self.derived),
            "stated": _text(self.stated),
            "consistent": self.consistent,
        }


@dataclass(frozen=True)
class Audit:
    instance: Instance
    params: BoundParams
    constants: Delta2Constants
    n0: int
    rows: tuple

    @property
    def consistent(self):
        return all(row.consistent for row in self.rows)

    def as_dict(self):
        return {
            "instance": self.instance.as_dict(),
            "params": self.params.as_dict(),
            "constants": self.constants.as_dict(),
            "n0": self.n0,
            "rows": [row.as_dict() for row in self.rows],
            "consistent": self.consistent,
        }


def audit(instance, grid=DEFAULT_GRID):
    """
    Compare the rebuilt Delta_2 bound with the stated one on a grid of (p, y);
    y = None stands for the least y allowed at that p. A row is consistent when the
    rebuilt bound is at most the stated one.
    """
    params = bound_params(instance)
    stated_constants = delta2_constants(instance)
    rows = []
    for p, y in grid:
        y = y_lower_bound(p) if y is None else mpmath.mpf(y)
        log_y = iv.log(iv.mpf(y))
        derived = _derived_delta2(params, p, log_y)
        stated = stated_constants.evaluate(p, log_y)
        consistent = bool(_upper(derived) <= _lower(stated))
        if not consistent:
            logger.warning(f"Delta_2 bound for {instance.label} at p={p}, y={_text(y)} exceeds the stated form")
        rows.append(AuditRow(p, y, _upper(derived), _lower(stated), consistent))
    return Audit(instance, params, stated_constants, n0_lookup(instance), tuple(rows))
