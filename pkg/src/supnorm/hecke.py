"""Normalized Hecke operators kappa_r, the amplifier prime set S and f_ur.

kappa_r = r^{-1/2} T(r) with trivial central character away from p, so for a
prime l: kappa_{l^a} * kappa_{l^b} = sum_{j <= min(a, b)} kappa_{l^{a+b-2j}}.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .padic import DomainError, check_odd_prime


class DegenerateAmplifierError(ValueError):
    """The amplifier would be empty (no admissible primes or all lambda values zero)."""


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primes_in(lo: int, hi: int) -> list[int]:
    """Primes in [lo, hi)."""
    if hi <= 2:
        return []
    sieve = np.ones(hi, dtype=bool)
    sieve[:2] = False
    for q in range(2, int(hi ** 0.5) + 1):
        if sieve[q]:
            sieve[q * q::q] = False
    return [int(q) for q in np.nonzero(sieve)[0] if q >= lo]


@dataclass(frozen=True)
class HeckeElement:
    """Finite combination sum_r y_r kappa_r."""

    coeffs: Mapping[int, object] = field(default_factory=dict)
    p: int | None = None

    def __post_init__(self):
        clean = {}
        for r, c in self.coeffs.items():
            if r < 1:
                raise DomainError("Hecke indices are positive integers")
            if self.p is not None and r % self.p == 0:
                raise DomainError(f"index {r} is not coprime to p = {self.p}")
            if c != 0:
                clean[int(r)] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def kappa(cls, r: int, coeff=1, p: int | None = None) -> "HeckeElement":
        return cls({r: coeff}, p)

    @property
    def support(self) -> list[int]:
        return list(self.coeffs)

    def __getitem__(self, r: int):
        return self.coeffs.get(r, 0)

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        out = dict(self.coeffs)
        for r, c in other.coeffs.items():
            out[r] = out.get(r, 0) + c
        return HeckeElement(out, self.p or other.p)

    def scale(self, c) -> "HeckeElement":
        return HeckeElement({r: c * v for r, v in self.coeffs.items()}, self.p)

    def __eq__(self, other):
        if not isinstance(other, HeckeElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))


def _kappa_product(r1: int, r2: int) -> list[int]:
    """Indices s with kappa_{r1} * kappa_{r2} = sum kappa_s."""
    f1, f2 = factorize(r1), factorize(r2)
    out = [1]
    for q in sorted(set(f1) | set(f2)):
        a, b = f1.get(q, 0), f2.get(q, 0)
        out = [s * q ** (a + b - 2 * j) for s in out for j in range(min(a, b) + 1)]
    return out


def convolve(h1: HeckeElement, h2: HeckeElement) -> HeckeElement:
    p = h1.p or h2.p
    out: dict[int, object] = {}
    for r1, c1 in h1.coeffs.items():
        for r2, c2 in h2.coeffs.items():
            for s in _kappa_product(r1, r2):
                out[s] = out.get(s, 0) + c1 * c2
    return HeckeElement(out, p)


def adjoint(h: HeckeElement) -> HeckeElement:
    return HeckeElement({r: _conj(c) for r, c in h.coeffs.items()}, h.p)


def _conj(c):
    return c.conjugate() if isinstance(c, complex) else c


# --- double-coset oracle ------------------------------------------------------------------


def hnf_reps(n: int) -> list[tuple[int, int, int]]:
    """Upper-triangular coset representatives (a, b, d) with ad = n and 0 <= b < d."""
    return [(a, b, n // a) for a in range(1, n + 1) if n % a == 0 for b in range(n // a)]


def hecke_coset_oracle(l: int) -> list[tuple[int, int, int]]:
    """The l + 1 representatives of SL2(Z) backslash {det = l}."""
    if not (2 <= l <= 100 and len(factorize(l)) == 1 and factorize(l).get(l) == 1):
        raise DomainError("oracle expects a prime l <= 100")
    return hnf_reps(l)


def _hnf(a: int, b: int, d: int) -> tuple[int, int, int]:
    return a, b % d, d


def coset_product_multiplicities(m: int, n: int) -> Counter:
    """How often each det-(mn) coset occurs among products M_i M_j of the reps for m and n."""
    out: Counter = Counter()
    for a1, b1, d1 in hnf_reps(m):
        for a2, b2, d2 in hnf_reps(n):
            out[_hnf(a1 * a2, a1 * b2 + b1 * d2, d1 * d2)] += 1
    return out


def oracle_product(l: int, a: int, b: int) -> dict[int, Fraction]:
    """Normalized expansion of kappa_{l^a} * kappa_{l^b} read off from coset products.

    A coset whose entries have content l^j carries sum_{i <= j} x_i where x_i is the
    multiplicity of [l^i I] T(l^{a+b-2i}); then kappa-coefficients are x_i / l^i.
    """
    mult = coset_product_multiplicities(l ** a, l ** b)
    total = a + b
    by_content: dict[int, set] = {}
    for (x, y, z) in hnf_reps(l ** total):
        g = math.gcd(math.gcd(x, y), z)
        j = round(math.log(g, l)) if g > 1 else 0
        by_content.setdefault(j, set()).add(mult.get((x, y, z), 0))
    cumulative = []
    for j in sorted(by_content):
        vals = by_content[j]
        if len(vals) != 1:
            raise AssertionError(f"multiplicity not constant on content level {j}: {vals}")
        cumulative.append(vals.pop())
    out = {}
    prev = 0
    for j, c in enumerate(cumulative):
        x = c - prev
        prev = c
        if x:
            out[l ** (total - 2 * j)] = Fraction(x, l ** j)
    return out


# --- amplifier ----------------------------------------------------------------------------


DEFAULT_WINDOW_RATIO = 3


def admissible(residues: list[int], p: int) -> bool:
    """No l, l1 l2 or (l1 l2)^2 congruent to 1 mod p over all pairs (equal pairs included)."""
    for r in residues:
        if r % p == 1:
            return False
    for r in residues:
        for s in residues:
            t = r * s % p
            if t == 1 or t * t % p == 1:
                return False
    return True


def build_S(p: int, Lam: int, window: tuple[int, int] | None = None) -> list[int]:
    """Largest prime set in the window satisfying the congruence constraints mod p.

    The constraints only see residues: r^4 != 1 and r s != +-1 for r, s in the set. The
    admissible residues split into orbits {x, -x, 1/x, -1/x}; from each the heavier half
    {x, -x} or {1/x, -1/x} is kept, which is optimal.
    """
    check_odd_prime(p)
    if Lam < 10:
        raise DomainError("Lambda must be >= 10")
    lo, hi = window if window is not None else (Lam, DEFAULT_WINDOW_RATIO * Lam)
    cands = [q for q in primes_in(lo, hi) if q != p]
    by_res: dict[int, list[int]] = {}
    for q in cands:
        by_res.setdefault(q % p, []).append(q)
    chosen: list[int] = []
    seen: set[int] = set()
    for x in range(2, p - 1):
        if x in seen or pow(x, 4, p) == 1:
            continue
        xi = pow(x, -1, p)
        half1, half2 = {x, p - x}, {xi, p - xi}
        seen |= half1 | half2
        n1 = sum(len(by_res.get(r, [])) for r in half1)
        n2 = sum(len(by_res.get(r, [])) for r in half2)
        keep = half1 if n1 >= n2 else half2
        for r in keep:
            chosen += by_res.get(r, [])
    S = sorted(chosen)
    if not S:
        raise DegenerateAmplifierError(f"no admissible primes in [{lo}, {hi}) for p = {p}")
    if not verify_S(S, p):
        raise AssertionError("constructed S violates a congruence constraint")
    return S


def verify_S(S: list[int], p: int) -> bool:
    """Exhaustive check over all pairs of the three congruence conditions."""
    for l1 in S:
        if l1 % p == 1:
            return False
        for l2 in S:
            if (l1 * l2) % p == 1 or (l1 * l1 * l2 * l2) % p == 1:
                return False
    return True


def unit_ratio(lam) -> object:
    """c = |lambda| / lambda, or 0 when lambda = 0."""
    if lam == 0:
        return 0
    if isinstance(lam, complex):
        return abs(lam) / lam
    return 1 if lam > 0 else -1


@dataclass
class Amplifier:
    S: list[int]
    f_ur: HeckeElement
    effective_l: list[int]
    effective_l2: list[int]

    @property
    def y1(self):
        return self.f_ur[1]


def build_f_ur(S: list[int], lambda_source: Callable[[int], object], p: int | None = None) -> Amplifier:
    """(sum c_l kappa_l)(sum c_l kappa_l)^* + (sum c_{l^2} kappa_{l^2})(...)^*."""
    c1 = {l: unit_ratio(lambda_source(l)) for l in S}
    c2 = {l * l: unit_ratio(lambda_source(l * l)) for l in S}
    h1 = HeckeElement(c1, p)
    h2 = HeckeElement(c2, p)
    if not h1.coeffs and not h2.coeffs:
        raise DegenerateAmplifierError("all lambda values vanish on S")
    f = convolve(h1, adjoint(h1)) + convolve(h2, adjoint(h2))
    return Amplifier(list(S), f, sorted(h1.coeffs), sorted(int(math.isqrt(r)) for r in h2.coeffs))


def support_types(f: HeckeElement, S: list[int]) -> Counter:
    """Classify support indices by shape: 1, l, l^2, l^4, l1 l2, l1^2 l2^2, other."""
    Sset = set(S)
    out: Counter = Counter()
    for r in f.support:
        fac = factorize(r)
        exps = sorted(fac.values())
        if r == 1:
            kind = "1"
        elif not set(fac) <= Sset:
            kind = "other"
        elif exps == [1]:
            kind = "l"
        elif exps == [2]:
            kind = "l^2"
        elif exps == [4]:
            kind = "l^4"
        elif exps == [1, 1]:
            kind = "l1 l2"
        elif exps == [2, 2]:
            kind = "l1^2 l2^2"
        else:
            kind = "other"
        out[kind] += 1
    return out


PRINTED_SUPPORT = ("1", "l", "l1 l2", "l1^2 l2^2")
