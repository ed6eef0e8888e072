"""Exact scalar fields: the rationals and prime fields.

All arithmetic in the package is exact; there is no floating point
anywhere.  Rational elements are `fractions.Fraction`, prime-field
elements are ints in `range(p)`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Rationals:
    """The field of rational numbers, backed by arbitrary-precision Fractions."""

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def of_int(self, n: int):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def is_zero(self, a):
        return a == 0

    def parse(self, s: str):
        return Fraction(s)

    def format(self, a) -> str:
        return str(a)

    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_p.  Elements are canonical residues 0..p-1."""

    p: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def zero(self):
        return 0

    def one(self):
        return 1

    def of_int(self, n: int):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        # Fermat inversion: a^(p-2) mod p
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def parse(self, s: str):
        return int(s) % self.p

    def format(self, a) -> str:
        return str(a % self.p)

    def __str__(self):
        return f"F{self.p}"


QQ = Rationals()


def field_from_json(data):
    """Parse "Q" or {"Fp": p} into a field object."""
    if data == "Q":
        return QQ
    if isinstance(data, dict) and set(data) == {"Fp"}:
        return PrimeField(int(data["Fp"]))
    raise ValueError(f"unknown field spec: {data!r}")


def field_to_json(field):
    if isinstance(field, Rationals):
        return "Q"
    if isinstance(field, PrimeField):
        return {"Fp": field.p}
    raise TypeError(f"not a field: {field!r}")
