"""
Brute-force oracle for C1*x^2 + q^alpha = y^n inside explicit bounds.

For fixed (alpha, n) the scan runs over y rather than x: the y-range between
(q^alpha + C1)^(1/n) and (q^alpha + C1*x_max^2)^(1/n) covers every x <= x_max and
is short, so exact integer roots keep the whole table reproducible in minutes.
"""
import csv
import io
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from math import gcd, isqrt
from pathlib import Path

from sympy import integer_nthroot, isprime, primerange

from app.errors import InvalidInputError, ReportError
from app.models.arith import is_squarefree
from app.workers import Cancelled, run_units

logger = logging.getLogger(__name__)

COLUMNS = ("C1", "q", "x", "y", "alpha", "n")
C1_RANGE = range(1, 21)
Q_RANGE = range(2, 25)
DEFAULT_N_SET = (3, 4, 5, 7, 11, 13)


@dataclass(frozen=True, order=True)
class Solution:
    C1: int
    q: int
    x: int
    y: int
    alpha: int
    n: int

    def verify(self):
        return verify(self)

    def as_row(self):
        return [self.C1, self.q, self.x, self.y, self.alpha, self.n]

    def as_dict(self):
        return dict(zip(COLUMNS, self.as_row()))


def nth_root_exact(value, n):
    """The integer r with r^n == value, or None."""
    if value < 0:
        return None
    root, exact = integer_nthroot(value, n)
    return int(root) if exact else None


def verify(solution):
    """Exact identity, positivity, gcd(C1*x, q, y) = 1 and n = 4 or n prime."""
    C1, q, x, y, alpha, n = solution.as_row()
    if min(C1, x, y, alpha) < 1:
        return False
    if n != 4 and not isprime(n):
        return False
    if gcd(gcd(C1 * x, q), y) != 1:
        return False
    return C1 * x * x + q ** alpha == y ** n


def enumerate_solutions(C1, q, x_max, alpha_max, n_set=DEFAULT_N_SET):
    """Every solution with x <= x_max, alpha <= alpha_max and n in n_set, alpha-major then x."""
    if x_max < 1 or alpha_max < 1:
        raise InvalidInputError("x_max and alpha_max must be positive")
    found = []
    for alpha in range(1, alpha_max + 1):
        found.extend(_scan_alpha(C1, q, alpha, x_max, tuple(n_set)))
    return found


def _scan_alpha(C1, q, alpha, x_max, n_set):
    base = q ** alpha
    found = []
    for n in n_set:
        low, exact = integer_nthroot(base + C1, n)
        low = int(low) if exact else int(low) + 1
        high = int(integer_nthroot(base + C1 * x_max * x_max, n)[0])
        for y in range(low, high + 1):
            rest = y ** n - base
            if rest % C1:
                continue
            square = rest // C1
            x = isqrt(square)
            if x * x != square or x > x_max:
                continue
            solution = Solution(C1, q, x, y, alpha, n)
            if verify(solution):
                found.append(solution)
    found.sort(key=lambda s: (s.x, s.n))
    return found


def coprime_pairs(C1_range=C1_RANGE, q_range=Q_RANGE):
    """(C1, q) with C1 squarefree, q prime and q not dividing C1."""
    primes = list(primerange(q_range.start, q_range.stop))
    return [(C1, q) for C1 in C1_range if is_squarefree(C1) for q in primes if C1 % q]


def admissible_pairs(C1_range=C1_RANGE, q_range=Q_RANGE, parity="odd"):
    """Pairs where y can be even: C1*q = 7 (mod 8) for odd alpha, C1 = 7 (mod 8) for even alpha."""
    if parity not in ("odd", "even"):
        raise InvalidInputError(f"parity must be 'odd' or 'even', got {parity!r}")
    if parity == "odd":
        return [(C1, q) for C1, q in coprime_pairs(C1_range, q_range) if C1 * q % 8 == 7]
    return [(C1, q) for C1, q in coprime_pairs(C1_range, q_range) if C1 % 8 == 7]


@lru_cache(maxsize=None)
def _table():
    text = resources.files("app.data").joinpath("solutions.json").read_text(encoding="utf-8")
    data = json.loads(text)
    return tuple(Solution(*row) for row in data["rows"])


def table_rows(C1=None, q=None, x_max=None, alpha_max=None, n_set=None):
    """The bundled table of known solutions, optionally restricted to a pair and to bounds."""
    rows = []
    for s in _table():
        if C1 is not None and s.C1 != C1:
            continue
        if q is not None and s.q != q:
            continue
        if x_max is not None and s.x > x_max:
            continue
        if alpha_max is not None and s.alpha > alpha_max:
            continue
        if n_set is not None and s.n not in n_set:
            continue
        rows.append(s)
    return sorted(rows)


@dataclass(frozen=True)
class SearchDiff:
    missing: tuple
    extra: tuple

    @property
    def empty(self):
        return not self.missing and not self.extra

    def as_dict(self):
        return {
            "missing": [s.as_row() for s in self.missing],
            "extra": [s.as_row() for s in self.extra],
        }


def diff(found, expected):
    found, expected = set(found), set(expected)
    return SearchDiff(tuple(sorted(expected - found)), tuple(sorted(found - expected)))


@dataclass(frozen=True)
class SearchResult:
    solutions: tuple
    cancelled: bool
    units_done: int
    units_total: int

    def as_dict(self):
        return {
            "solutions": [s.as_row() for s in self.solutions],
            "cancelled": self.cancelled,
            "units_done": self.units_done,
            "units_total": self.units_total,
        }


def _search_unit(unit):
    C1, q, alpha, x_max, n_set = unit
    return _scan_alpha(C1, q, alpha, x_max, n_set)


def _load_checkpoint(path, signature):
    if path is None or not Path(path).exists():
        return 0, []
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ReportError(f"unreadable search checkpoint {path}: {e}") from e
    if data.get("signature") != signature:
        logger.warning(f"checkpoint {path} belongs to a different search; starting over")
        return 0, []
    logger.info(f"resuming search at pair {data['pair_index']}, alpha {data['alpha']}")
    return data["cursor"], [Solution(*row) for row in data["solutions"]]


def _save_checkpoint(path, signature, cursor, units, solutions):
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pair_index, alpha = (units[cursor][5], units[cursor][2]) if cursor < len(units) else (None, None)
    payload = {
        "signature": signature,
        "cursor": cursor,
        "pair_index": pair_index,
        "alpha": alpha,
        "solutions": [s.as_row() for s in solutions],
    }
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".checkpoint.", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
    os.replace(tmp, path)


def run_search(pairs, x_max, alpha_max, n_set=DEFAULT_N_SET, workers=1, checkpoint=None, batch=64):
    """
    Enumerate over many pairs. Work units are (pair, alpha); the cursor of the
    first unfinished unit is persisted to ``checkpoint`` after every batch and a
    rerun resumes from it.
    """
    n_set = tuple(n_set)
    units = [
        (C1, q, alpha, x_max, n_set, index)
        for index, (C1, q) in enumerate(pairs)
        for alpha in range(1, alpha_max + 1)
    ]
    signature = {"pairs": [list(p) for p in pairs], "x_max": x_max, "alpha_max": alpha_max, "n_set": list(n_set)}
    cursor, solutions = _load_checkpoint(checkpoint, signature)

    cancelled = False
    while cursor < len(units):
        chunk = units[cursor : cursor + batch]
        try:
            results = run_units(_search_unit, [u[:5] for u in chunk], workers)
        except Cancelled as e:
            results, cancelled = e.completed, True
        for found in results:
            solutions.extend(found)
        cursor += len(results)
        _save_checkpoint(checkpoint, signature, cursor, units, solutions)
        if cancelled:
            break
        logger.info(f"search: {cursor}/{len(units)} units, {len(solutions)} solutions")
    return SearchResult(tuple(sorted(set(solutions))), cancelled, cursor, len(units))


def to_csv(solutions):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for s in solutions:
        writer.writerow(s.as_row())
    return buffer.getvalue()


def to_json(solutions):
    return json.dumps({"columns": list(COLUMNS), "rows": [s.as_row() for s in solutions]}, indent=2)
