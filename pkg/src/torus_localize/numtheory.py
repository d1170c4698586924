"""Integer factorization and Gaussian-integer helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass

from sympy import factorint, isprime

from .errors import UnfactoredInput


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: tuple  # ((prime, exponent), ...) sorted by prime

    def __post_init__(self):
        prod = 1
        for p, e in self.factors:
            prod *= p ** e
        if prod != self.value:
            raise UnfactoredInput("factor list does not multiply to the value")

    @classmethod
    def of(cls, n: int) -> "FactoredInteger":
        if n < 1:
            raise ValueError("only positive integers are factored")
        return cls(n, tuple(sorted(factorint(n).items())))

    @classmethod
    def from_factors(cls, factors: dict) -> "FactoredInteger":
        value = 1
        for p, e in factors.items():
            value *= p ** e
        return cls(value, tuple(sorted(factors.items())))

    def verify_primes(self) -> bool:
        return all(isprime(p) for p, _ in self.factors)

    def as_dict(self) -> dict:
        return dict(self.factors)


def merge_factors(*dicts) -> dict:
    out: dict = {}
    for f in dicts:
        for p, e in f.items():
            out[p] = out.get(p, 0) + e
    return out


def sqrt_minus_one(p: int) -> int:
    """A square root of -1 modulo a prime ``p = 1 mod 4``."""
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return pow(c, (p - 1) // 4, p)
    raise ValueError(f"{p} has no square root of -1")


def two_squares_prime(p: int) -> tuple[int, int]:
    """``(a, b)`` with ``a^2 + b^2 = p`` for ``p = 2`` or ``p = 1 mod 4`` (Hermite-Serret)."""
    if p == 2:
        return 1, 1
    if p % 4 != 1:
        raise ValueError(f"{p} is not a sum of two squares")
    a, b = p, sqrt_minus_one(p)
    limit = math.isqrt(p)
    while b > limit:
        a, b = b, a % b
    x, y = b, a % b
    assert x * x + y * y == p
    return x, y


def gmul(z, w):
    return (z[0] * w[0] - z[1] * w[1], z[0] * w[1] + z[1] * w[0])


def gpow(z, e: int):
    out = (1, 0)
    base = z
    while e:
        if e & 1:
            out = gmul(out, base)
        base = gmul(base, base)
        e >>= 1
    return out


UNITS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def r2(factors: dict) -> int:
    """Number of representations as a sum of two squares (order and signs count)."""
    count = 4
    for p, e in factors.items():
        if p % 4 == 3:
            if e % 2:
                return 0
        elif p % 4 == 1:
            count *= e + 1
    return count
