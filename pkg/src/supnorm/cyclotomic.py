"""Exact elements of Q(zeta_L) for character-sum identities.

Values are sparse maps exponent -> Fraction meaning sum c_j zeta_L^j.  Zero
testing reduces the numerator polynomial modulo the L-th cyclotomic polynomial.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

# int64 fast path bound; reduction multiplies magnitudes by a small factor at most
_SMALL = 2 ** 40


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _exact_div(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]  # den is monic
        out[i - dd] = c
        if c:
            for j in range(dd + 1):
                num[i - dd + j] -= c * den[j]
    assert not any(num[:dd]), "non-exact cyclotomic division"
    return out


def reduce_mod_cyclotomic(vec, L: int) -> np.ndarray:
    """Remainder of sum vec[j] x^j modulo Phi_L (integer coefficients).

    Runs in int64 while the coefficients stay small and in Python integers otherwise.
    """
    coeffs = [int(x) for x in vec]
    if max(map(abs, coeffs), default=0) <= _SMALL:
        out = _reduce(np.array(coeffs, dtype=np.int64), L)
        if np.abs(out).max(initial=0) <= _SMALL:
            return out
    return _reduce(np.array(coeffs, dtype=object), L)


def _reduce(v: np.ndarray, L: int) -> np.ndarray:
    phi = np.array(cyclotomic_poly(L), dtype=v.dtype)
    deg = len(phi) - 1
    for i in range(len(v) - 1, deg - 1, -1):
        c = v[i]
        if c:
            v[i - deg:i + 1] -= c * phi
    return v[:deg]


class Cyclo:
    """An element of Q(zeta_L)."""

    __slots__ = ("L", "terms")

    def __init__(self, L: int, terms: dict[int, Fraction] | None = None):
        self.L = L
        self.terms: dict[int, Fraction] = {}
        if terms:
            for j, c in terms.items():
                self._add_term(j, c)

    def _add_term(self, j: int, c) -> None:
        j %= self.L
        c = self.terms.get(j, Fraction(0)) + Fraction(c)
        if c:
            self.terms[j] = c
        else:
            self.terms.pop(j, None)

    @classmethod
    def root(cls, L: int, j: int, coeff=1) -> "Cyclo":
        return cls(L, {j: Fraction(coeff)})

    @classmethod
    def rational(cls, L: int, q) -> "Cyclo":
        return cls(L, {0: Fraction(q)})

    def lift(self, L: int) -> "Cyclo":
        if L % self.L:
            raise ValueError(f"cannot lift Q(zeta_{self.L}) into Q(zeta_{L})")
        k = L // self.L
        return Cyclo(L, {j * k: c for j, c in self.terms.items()})

    def _common(self, other: "Cyclo"):
        L = self.L * other.L // math.gcd(self.L, other.L)
        return self.lift(L), other.lift(L)

    def __add__(self, other):
        if not isinstance(other, Cyclo):
            other = Cyclo.rational(self.L, other)
        a, b = self._common(other)
        for j, c in b.terms.items():
            a._add_term(j, c)
        return a

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.L, {j: -c for j, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Cyclo):
            other = Cyclo.rational(self.L, other)
        return self + (-other)

    def scale(self, q) -> "Cyclo":
        q = Fraction(q)
        return Cyclo(self.L, {j: c * q for j, c in self.terms.items()})

    def rotate(self, j: int) -> "Cyclo":
        """Multiply by zeta_L^j."""
        return Cyclo(self.L, {i + j: c for i, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = self._common(other)
        out = Cyclo(a.L)
        for i, c in a.terms.items():
            for j, d in b.terms.items():
                out._add_term(i + j, c * d)
        return out

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclo":
        return Cyclo(self.L, {-j: c for j, c in self.terms.items()})

    def is_zero(self) -> bool:
        if not self.terms:
            return True
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        vec = [0] * self.L
        for j, c in self.terms.items():
            vec[j] = c.numerator * (den // c.denominator)
        return not reduce_mod_cyclotomic(vec, self.L).any()

    def to_rational(self) -> Fraction:
        """The value as a rational number; raises ValueError if it is irrational."""
        if not self.terms:
            return Fraction(0)
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        vec = [0] * self.L
        for j, c in self.terms.items():
            vec[j] = c.numerator * (den // c.denominator)
        rem = reduce_mod_cyclotomic(vec, self.L)
        if rem[1:].any():
            raise ValueError("cyclotomic value is not rational")
        return Fraction(int(rem[0]), den)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclo.rational(self.L, other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __complex__(self):
        return complex(sum(float(c) * cmath.exp(2j * math.pi * j / self.L)
                           for j, c in self.terms.items()))

    def __repr__(self):
        return f"Cyclo(L={self.L}, {len(self.terms)} terms, ~{complex(self):.6g})"
