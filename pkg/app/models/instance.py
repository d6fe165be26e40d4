from dataclasses import dataclass
from functools import cached_property

from sympy import isprime

from app.errors import InvalidInputError, NotSquarefreeError
from app.models.arith import is_squarefree

PARITIES = ("odd", "even")


@dataclass(frozen=True)
class Instance:
    """A pair (C1, q) together with the parity of the exponent alpha."""

    C1: int
    q: int
    parity: str

    def __post_init__(self):
        if self.C1 < 1 or not is_squarefree(self.C1):
            raise NotSquarefreeError(f"C1 must be a positive squarefree integer, got {self.C1}")
        if not isprime(self.q):
            raise InvalidInputError(f"q must be prime, got {self.q}")
        if self.C1 % self.q == 0:
            raise InvalidInputError(f"q={self.q} divides C1={self.C1}")
        if self.parity not in PARITIES:
            raise InvalidInputError(f"parity must be 'odd' or 'even', got {self.parity!r}")

    @classmethod
    def from_alpha(cls, C1, q, alpha):
        if alpha < 1:
            raise InvalidInputError("alpha must be positive")
        return cls(C1, q, "odd" if alpha % 2 else "even")

    @classmethod
    def parse(cls, text):
        """Parse "C1,q,parity" as used on the command line and in URLs."""
        try:
            c1, q, parity = (part.strip() for part in text.split(","))
            return cls(int(c1), int(q), parity)
        except ValueError as e:
            raise InvalidInputError(f"expected C1,q,odd|even, got {text!r}") from e

    @property
    def c(self):
        return self.C1 * self.q if self.parity == "odd" else self.C1

    @property
    def s_parity(self):
        """alpha mod 2."""
        return 1 if self.parity == "odd" else 0

    def k_of(self, alpha):
        if alpha % 2 != self.s_parity:
            raise InvalidInputError(f"alpha={alpha} is not {self.parity}")
        return (alpha - 1) // 2 if self.parity == "odd" else alpha // 2

    @cached_property
    def field(self):
        from app.models.quadfield import QuadField

        return QuadField(self.c)

    @property
    def is_bad_pair(self):
        """Level lowering leaves rational newforms for this pair (bundled lists)."""
        from app.models.curvedb import bad_pairs

        return (self.C1, self.q) in bad_pairs(self.parity)

    @property
    def is_good_pair(self):
        from app.models.curvedb import good_pairs

        return (self.C1, self.q) in good_pairs(self.parity)

    @property
    def label(self):
        return f"{self.C1},{self.q},{self.parity}"

    def as_dict(self):
        return {"C1": self.C1, "q": self.q, "parity": self.parity}
