"""Exact arithmetic over Z/p^N and truncated p-adic scalars.

Every local integral in the package reduces to a finite sum modulo a known
power of p; this module provides the scalar type those sums consume and the
additive character psi_p.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Invalid static parameters (non-prime p, p = 2, ...)."""


class PrecisionError(ValueError):
    """A truncated p-adic input does not carry enough digits."""

    def __init__(self, message: str, required: int):
        super().__init__(f"{message} (required precision N >= {required})")
        self.required = required


class UnsupportedError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_odd_prime(p: int) -> None:
    if not is_prime(p):
        raise ConfigurationError(f"p={p} is not prime")
    if p == 2:
        raise UnsupportedError("p = 2 is not supported")


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise DomainError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def totient_pp(p: int, m: int) -> int:
    """phi(p^m) for m >= 0 (phi(1) = 1)."""
    return 1 if m == 0 else p ** (m - 1) * (p - 1)


@dataclass(frozen=True)
class ResidueRing:
    p: int
    N: int

    def __post_init__(self):
        check_odd_prime(self.p)
        if self.N < 1:
            raise ConfigurationError("N must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p ** self.N


@dataclass(frozen=True)
class TruncatedPAdic:
    """y = p^v * u with u a unit known modulo p^N."""

    p: int
    v: int
    u: int
    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ConfigurationError("precision must be >= 0")
        mod = self.p ** self.N
        object.__setattr__(self, "u", self.u % mod if mod > 1 else 0)
        if self.N > 0 and self.u % self.p == 0:
            raise DomainError("unit part must be prime to p")

    @classmethod
    def from_parts(cls, p: int, v: int, u: int = 1, N: int = 8) -> "TruncatedPAdic":
        return cls(p, v, u, N)

    @property
    def abs(self) -> Fraction:
        """|y|_p = p^{-v}."""
        return Fraction(1, self.p ** self.v) if self.v >= 0 else Fraction(self.p ** -self.v)

    def require(self, n: int, what: str = "operation") -> None:
        if self.N < n:
            raise PrecisionError(f"{what} needs more unit digits than N={self.N}", n)

    def __mul__(self, other):
        if isinstance(other, TruncatedPAdic):
            if other.p != self.p:
                raise DomainError("mismatched primes")
            N = min(self.N, other.N)
            return TruncatedPAdic(self.p, self.v + other.v, self.u * other.u, N)
        if isinstance(other, int):
            if other == 0:
                raise DomainError("multiplication by zero leaves Q_p^x")
            w = valuation(other, self.p)
            return TruncatedPAdic(self.p, self.v + w, self.u * (other // self.p ** w), self.N)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedPAdic":
        mod = self.p ** self.N
        return TruncatedPAdic(self.p, -self.v, pow(self.u, -1, mod) if mod > 1 else 0, self.N)

    def shift(self, k: int) -> "TruncatedPAdic":
        """Multiply by p^k."""
        return TruncatedPAdic(self.p, self.v + k, self.u, self.N)

    def to_fraction(self) -> Fraction:
        """A rational representative p^v * u (u taken in [0, p^N))."""
        base = Fraction(self.p) ** self.v
        return base * self.u


def decompose(q, p: int, N: int) -> TruncatedPAdic:
    """Write a nonzero rational as p^v * u with u mod p^N."""
    check_odd_prime(p)
    q = Fraction(q)
    if q == 0:
        raise DomainError("cannot decompose zero")
    num, den = q.numerator, q.denominator
    vn = valuation(num, p)
    vd = valuation(den, p)
    un = num // p ** vn
    ud = den // p ** vd
    mod = p ** N
    return TruncatedPAdic(p, vn - vd, un * pow(ud, -1, mod) % mod, N)


def frac_part(x, p: int) -> Fraction:
    """p-adic fractional part {x}_p in [0, 1) with p-power denominator."""
    if isinstance(x, TruncatedPAdic):
        if x.v >= 0:
            return Fraction(0)
        x.require(-x.v, "additive character")
        mod = p ** (-x.v)
        return Fraction(x.u % mod, mod)
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    den = x.denominator
    vd = valuation(den, p)
    if vd == 0:
        return Fraction(0)
    pk = p ** vd
    rest = den // pk
    # x = num / (pk * rest); the p-part of x mod Z is (num * rest^{-1} mod pk) / pk
    r = x.numerator * pow(rest, -1, pk) % pk
    return Fraction(r, pk)


def additive_char(x, p: int | None = None) -> complex:
    """psi_p(x) = exp(2 pi i {x}_p)."""
    if isinstance(x, TruncatedPAdic):
        p = x.p
    if p is None:
        raise ConfigurationError("p required for rational input")
    r = frac_part(x, p)
    if r == 0:
        return 1.0 + 0.0j
    return cmath.exp(2j * math.pi * r)


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest integer generating (Z/p^m)^x for every m >= 1."""
    check_odd_prime(p)
    order = p - 1
    factors = [q for q in range(2, order + 1) if order % q == 0 and is_prime(q)]
    for g in range(2, p * p):
        if g % p == 0:
            continue
        if all(pow(g, order // q, p) != 1 for q in factors):
            if pow(g, p - 1, p * p) != 1:
                return g
    raise AssertionError("no primitive root found")


@lru_cache(maxsize=None)
def unit_group(p: int, m: int) -> tuple[int, ...]:
    """Units mod p^m listed as successive powers g^0, g^1, ... of a fixed generator.

    The generator (the element at index 1) is independent of m, so characters
    defined through discrete logarithms are compatible across moduli.
    """
    if p == 2:
        raise UnsupportedError("p = 2 is not supported")
    check_odd_prime(p)
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    mod = p ** m
    g = primitive_root(p)
    out = [1]
    for _ in range(totient_pp(p, m) - 1):
        out.append(out[-1] * g % mod)
    # reorder so the generator is first, as advertised, while keeping powers in order
    return tuple(out[1:] + out[:1])


@lru_cache(maxsize=None)
def discrete_log_table(p: int, m: int) -> dict[int, int]:
    """u -> k with g^k = u mod p^m."""
    mod = p ** m
    g = primitive_root(p)
    table = {}
    x = 1
    for k in range(totient_pp(p, m)):
        table[x] = k
        x = x * g % mod
    return table


def discrete_log(u: int, p: int, m: int) -> int:
    u %= p ** m
    try:
        return discrete_log_table(p, m)[u]
    except KeyError:
        raise DomainError(f"{u} is not a unit mod {p}^{m}") from None
