"""Characters of (Z/p^m)^x, incomplete Gauss sums and their closed form.

A character is stored as (p, m, e) with chi(g) = e(e / phi(p^m)) for the
canonical generator g; chi(p) = 1 throughout, so chi(y) means chi(unit part).
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cyclotomic import Cyclo
from .padic import (
    DomainError,
    TruncatedPAdic,
    check_odd_prime,
    discrete_log,
    totient_pp,
)


def _ceil_half(a: int) -> int:
    return (a + 1) // 2


@dataclass(frozen=True)
class MultChar:
    p: int
    m: int
    e: int

    def __post_init__(self):
        check_odd_prime(self.p)
        if self.m < 1:
            raise DomainError("character modulus exponent must be >= 1")
        object.__setattr__(self, "e", self.e % totient_pp(self.p, self.m))

    @property
    def order_modulus(self) -> int:
        return totient_pp(self.p, self.m)

    @property
    def conductor(self) -> int:
        return conductor(self)

    def is_trivial(self) -> bool:
        return self.e == 0

    def log(self, u: int) -> int:
        """Exponent j with chi(u) = e(j / phi(p^m))."""
        if u % self.p == 0:
            raise DomainError(f"{u} is not a unit mod {self.p}")
        return self.e * discrete_log(u, self.p, self.m) % self.order_modulus

    def __call__(self, u: int) -> complex:
        j = self.log(u)
        if j == 0:
            return 1.0 + 0.0j
        return cmath.exp(2j * math.pi * j / self.order_modulus)

    def exact(self, u: int) -> Cyclo:
        return Cyclo.root(self.order_modulus, self.log(u))

    def inverse(self) -> "MultChar":
        return MultChar(self.p, self.m, -self.e)

    def power(self, t: int) -> "MultChar":
        return MultChar(self.p, self.m, self.e * t)

    def lift(self, m: int) -> "MultChar":
        """The same character viewed modulo p^m (m >= conductor)."""
        if m >= self.m:
            return MultChar(self.p, m, self.e * (totient_pp(self.p, m) // self.order_modulus))
        step = self.order_modulus // totient_pp(self.p, m)
        if conductor(self) > m or self.e % step:
            raise DomainError("character does not factor through the smaller modulus")
        return MultChar(self.p, m, self.e // step)


def conductor(chi: MultChar) -> int:
    """Smallest a with chi trivial on 1 + p^a Z_p."""
    phi_m = chi.order_modulus
    for a in range(chi.m + 1):
        if chi.e * totient_pp(chi.p, a) % phi_m == 0:
            return a
    raise AssertionError("unreachable")


def enumerate_X(p: int, k: int) -> list[MultChar]:
    """All characters with conductor <= k and chi(p) = 1."""
    check_odd_prime(p)
    if k < 1:
        raise DomainError("k must be >= 1")
    return [MultChar(p, k, e) for e in range(totient_pp(p, k))]


def _psi_index(p: int, v: int, u: int) -> tuple[int, int]:
    """psi_p(p^v u) = e(num / den) returned as (num, den)."""
    if v >= 0:
        return 0, 1
    den = p ** (-v)
    return u % den, den


def gauss_G(l: int, y: TruncatedPAdic, chi: MultChar, exact: bool = False):
    """Finite-average evaluation of G_l(y, chi) over 1 + p^l Z_p."""
    if l < 1:
        raise DomainError("l must be >= 1")
    p = chi.p
    a = conductor(chi)
    N = max(a, l, -y.v, 1)
    y.require(max(a, l, -y.v), "gauss_G")
    step = p ** l
    count = p ** (N - l)
    if exact:
        L = math.lcm(p ** N, chi.order_modulus)
        terms: dict[int, int] = {}
        kc = L // chi.order_modulus
        for t in range(count):
            x = 1 + step * t
            num, den = _psi_index(p, y.v, y.u * x)
            j = (chi.log(x) * kc + num * (L // den)) % L
            terms[j] = terms.get(j, 0) + 1
        scale = Fraction(1, p ** N)
        return Cyclo(L, {j: c * scale for j, c in terms.items()})
    total = 0j
    for t in range(count):
        x = 1 + step * t
        num, den = _psi_index(p, y.v, y.u * x)
        total += chi(x) * cmath.exp(2j * math.pi * num / den)
    return total / p ** N


@lru_cache(maxsize=None)
def tau(chi: MultChar, exact: bool = False):
    """Complete Gauss sum sum_{x mod p^a unit} chi(x) psi_p(x p^{-a})."""
    a = conductor(chi)
    if a == 0:
        raise DomainError("unramified character has no Gauss-sum epsilon here")
    p = chi.p
    mod = p ** a
    if exact:
        L = math.lcm(mod, chi.order_modulus)
        out = Cyclo(L)
        for x in range(1, mod):
            if x % p:
                out = out + Cyclo.root(L, chi.log(x) * (L // chi.order_modulus) + x * (L // mod))
        return out
    return sum(chi(x) * cmath.exp(2j * math.pi * x / mod) for x in range(1, mod) if x % p)


def epsilon_factor(chi: MultChar) -> complex:
    """Normalized complete Gauss sum p^{-a/2} tau(chi)."""
    a = conductor(chi)
    return tau(chi) / chi.p ** (a / 2)


@lru_cache(maxsize=None)
def b_of_chi(chi: MultChar) -> int:
    """Class b mod p^{floor(a/2)} with chi(1+u) = psi(b u p^{-a}) on p^{ceil(a/2)} Z_p."""
    a = conductor(chi)
    if a < 2:
        raise DomainError("b(chi) needs conductor >= 2")
    p = chi.p
    lo, hi = _ceil_half(a), a // 2
    # u = p^lo s with s mod p^hi, and psi(b u p^{-a}) = e(b s / p^hi)
    found = [
        b for b in range(1, p ** hi) if b % p
        and all(_same_root(chi.log(1 + p ** lo * s), chi.order_modulus, b * s, p ** hi)
                for s in range(p ** hi))
    ]
    if len(found) != 1:
        raise AssertionError(f"b(chi) not unique: {found}")
    return found[0]


def _same_root(j1: int, n1: int, j2: int, n2: int) -> bool:
    return (j1 * n2 - j2 * n1) % (n1 * n2) == 0


# --- closed form --------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormVariant:
    """Sign and character choices left open by the printed case formula."""

    mid_sign: int  # distinguished class mid_sign * b mod p^{a-l} for ceil(a/2) <= l < a
    small_sign: int  # distinguished class small_sign * b mod p^l for l < ceil(a/2)
    small_power: int  # chi^{small_power}(z) factor in the small-l case
    eps_inverse: bool  # use tau(chi^{-1}) instead of tau(chi)


ALL_VARIANTS = tuple(
    ClosedFormVariant(s1, s2, pw, ei)
    for s1, s2, pw, ei in itertools.product((1, -1), (1, -1), (-1, 1), (False, True))
)

# calibration grid: {3,5} x {1,2} plus conductor 3, where the small-l case first occurs
CALIBRATION_GRID = ((3, 1), (3, 2), (5, 1), (5, 2), (3, 3))


def _closed_form_variant(l: int, k: int, z: int, chi: MultChar, var: ClosedFormVariant,
                         exact: bool = False):
    p = chi.p
    a = conductor(chi)
    if z % p == 0:
        raise DomainError("z must be a unit")
    if a == 0 or l >= a:
        if k < -l:
            return Cyclo(1) if exact else 0j
        if exact:
            num, den = _psi_index(p, k, z)
            return Cyclo.root(den, num, Fraction(1, p ** l))
        return additive_char_vk(p, k, z) / p ** l
    if k != -a:
        return Cyclo(1) if exact else 0j
    b = b_of_chi(chi) if a >= 2 else None
    if l >= _ceil_half(a):
        mod = p ** (a - l)
        if (z - var.mid_sign * b) % mod:
            return Cyclo(1) if exact else 0j
        if exact:
            num, den = _psi_index(p, k, z)
            return Cyclo.root(den, num, Fraction(1, p ** l))
        return additive_char_vk(p, k, z) / p ** l
    mod = p ** l
    if (z - var.small_sign * b) % mod:
        return Cyclo(1) if exact else 0j
    base = chi.inverse() if var.eps_inverse else chi
    twist = chi.power(var.small_power)
    if exact:
        return (tau(base, exact=True) * twist.exact(z)).scale(Fraction(1, p ** a))
    return tau(base) * twist(z) / p ** a


def additive_char_vk(p: int, k: int, z: int) -> complex:
    num, den = _psi_index(p, k, z)
    if num == 0:
        return 1.0 + 0.0j
    return cmath.exp(2j * math.pi * num / den)


@lru_cache(maxsize=None)
def _reference_table(p: int, a: int) -> tuple:
    rows = []
    for chi in enumerate_X(p, a):
        if conductor(chi) != a:
            continue
        for l in range(1, a + 2):
            for k in range(-a - 1, 2):
                for z in range(1, p ** a):
                    if z % p:
                        y = TruncatedPAdic(p, k, z, max(a, l, -k, 1))
                        rows.append((chi, l, k, z, gauss_G(l, y, chi)))
    return tuple(rows)


def _variant_matches(var: ClosedFormVariant, p: int, a: int) -> bool:
    return all(abs(ref - _closed_form_variant(l, k, z, chi, var)) <= 1e-9
               for chi, l, k, z, ref in _reference_table(p, a))


@lru_cache(maxsize=None)
def calibrated_variant() -> ClosedFormVariant:
    """The unique case-formula variant that matches brute force on the calibration grid."""
    survivors = [v for v in ALL_VARIANTS
                 if all(_variant_matches(v, p, a) for p, a in CALIBRATION_GRID)]
    if len(survivors) != 1:
        raise AssertionError(f"closed-form calibration not unique: {survivors}")
    return survivors[0]


def gauss_G_closed_form(l: int, k: int, z: int, chi: MultChar, exact: bool = False):
    """G_l(p^k z, chi) from the calibrated three-case formula."""
    if l < 1:
        raise DomainError("l must be >= 1")
    return _closed_form_variant(l, k, z, chi, calibrated_variant(), exact=exact)
