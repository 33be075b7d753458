"""Local Whittaker averages S(a(y)) for principal series, Steinberg and supercuspidals.

Measures: the principal-series and Steinberg Whittaker norms use dy/|y|_p
(mass 1 - 1/p per shell); the supercuspidal Kirillov basis is orthonormal for
the unit-volume d^x y (mass 1 per shell).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .characters import MultChar, conductor, enumerate_X, gauss_G, gauss_G_closed_form, tau
from .cyclotomic import Cyclo
from .oscillatory import shell_psi_oracle, steinberg_tail_A_oracle, steinberg_tail_B_oracle
from .padic import DomainError, TruncatedPAdic, check_odd_prime

CASES = ("PS", "St", "SC_even", "SC_odd")


class IntegrityError(AssertionError):
    """A brute-force cross-check disagreed with a structural claim."""


@dataclass(frozen=True)
class LocalRepDescriptor:
    case: str
    p: int
    m: int
    n: int
    d: int
    chi: MultChar | None = None
    rho: complex = 0j

    @property
    def whittaker_norm(self) -> Fraction:
        return 1 + Fraction(1, self.p)


def describe(case: str, p: int, m: int | None = None, chi: MultChar | None = None,
             rho: complex = 0j) -> LocalRepDescriptor:
    """Conductor exponent n, level m and dimension d of the K-type for each case."""
    check_odd_prime(p)
    if case == "PS":
        if chi is None:
            raise DomainError("principal series needs a character")
        a = conductor(chi)
        if a < 1:
            raise DomainError("principal series needs a ramified character")
        if m is not None and m != a:
            raise DomainError(f"principal series level is a(chi) = {a}, got m = {m}")
        rho = complex(rho)
        if abs(rho.real) > 1e-12:
            raise DomainError("non-unitary rho: expected a purely imaginary exponent")
        return LocalRepDescriptor("PS", p, a, a, p ** a + p ** (a - 1), chi.lift(a), rho)
    if case == "St" and m is None:
        m = 1
    if m is None:
        raise DomainError("m required")
    if case == "St":
        if m != 1:
            raise DomainError("Steinberg has level m = 1")
        return LocalRepDescriptor("St", p, 1, 1, p)
    if case == "SC_even":
        if m < 1:
            raise DomainError("supercuspidal needs m >= 1")
        return LocalRepDescriptor("SC_even", p, m, 2 * m, p ** m - p ** (m - 1))
    if case == "SC_odd":
        if m < 2:
            raise DomainError("odd-conductor supercuspidal needs m >= 2 (conductor 2m-1 >= 3)")
        return LocalRepDescriptor("SC_odd", p, m, 2 * m - 1, p ** m - p ** (m - 2))
    raise DomainError(f"unknown case {case!r}; expected one of {CASES}")


# --- coset representatives ----------------------------------------------------------------


@dataclass(frozen=True)
class CosetRep:
    i: int
    a: int
    matrix: tuple[int, int, int, int] = field(compare=False)


@lru_cache(maxsize=None)
def coset_reps(p: int, m: int) -> tuple[CosetRep, ...]:
    """Representatives gamma_{i,a} of B(Z/p^m) backslash GL2(Z/p^m)."""
    check_odd_prime(p)
    if m < 1:
        raise DomainError("m must be >= 1")
    mod = p ** m
    reps = [CosetRep(0, a, (0, mod - 1, 1, a)) for a in range(mod)]
    for i in range(1, m):
        for a in range(1, p ** (m - i)):
            if a % p:
                reps.append(CosetRep(i, a, (1, 0, a * p ** i % mod, 1)))
    reps.append(CosetRep(m, 0, (1, 0, 0, 1)))
    return tuple(reps)


def verify_coset_reps(p: int, m: int) -> int:
    """Check that every element of GL2(Z/p^m) lies in exactly one B * gamma; returns |G|."""
    mod = p ** m
    reps = coset_reps(p, m)
    if len(reps) != p ** m + p ** (m - 1):
        raise IntegrityError("wrong number of coset representatives")
    r = np.arange(mod)
    a, b, c, d = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    det = (a * d - b * c) % mod
    unit = det % p != 0
    c, d = c[unit], d[unit]
    hits = np.zeros(c.shape, dtype=np.int64)
    for rep in reps:
        ga, gb, gc, gd = rep.matrix
        # g gamma^{-1} is upper triangular iff its lower-left entry c*gd - d*gc vanishes
        hits += ((c * gd - d * gc) % mod == 0)
    if not np.all(hits == 1):
        bad = int(np.sum(hits != 1))
        raise IntegrityError(f"coset cover/disjointness failed for {bad} elements")
    return int(unit.sum())


# --- principal series ---------------------------------------------------------------------


def _abs_pow(p: int, v: int, s: complex) -> complex:
    """|p^v|_p^s."""
    return cmath.exp(-v * s * math.log(p))


def ps_whittaker(desc: LocalRepDescriptor, rep: CosetRep, y: TruncatedPAdic,
                 closed_form: bool = True) -> complex:
    """W(a(y)) for the basis vector supported on B gamma_{i,a} K(m), normalized by v(1)^2 = d."""
    if desc.case != "PS":
        raise DomainError("ps_whittaker needs a principal-series descriptor")
    p, m, chi, rho = desc.p, desc.m, desc.chi, desc.rho
    if y.v < -m:
        return 0j
    y.require(max(m, -y.v), "principal-series Whittaker value")
    v0 = math.sqrt(desc.d)
    pref = _abs_pow(p, y.v, 0.5 - rho) * v0
    mod = p ** m
    if rep.i == 0:
        num = rep.a * y.u % p ** (-y.v) if y.v < 0 else 0
        den = p ** (-y.v) if y.v < 0 else 1
        return pref * cmath.exp(-2j * math.pi * num / den) / mod
    if rep.i == m:
        if y.v < 0:
            return 0j
        # tail: p^{-2 rho (v + m)} chi(-z) p^{-m} tau(chi^{-1})
        return (pref * cmath.exp(-2 * rho * (y.v + m) * math.log(p))
                * chi(-y.u % mod) * tau(chi.inverse()) / mod)
    i, b = rep.i, rep.a
    l = m - i
    z = -pow(b, -1, mod) * y.u % mod
    k = y.v - i
    if closed_form:
        g = gauss_G_closed_form(l, k, z, chi.inverse())
    else:
        g = gauss_G(l, TruncatedPAdic(p, k, z, max(m, -k, l)), chi.inverse())
    return pref * cmath.exp(-2 * rho * i * math.log(p)) * chi(b) * g


def ps_partial_average(desc: LocalRepDescriptor, i: int, y: TruncatedPAdic,
                       closed_form: bool = True) -> float:
    """S_i(y): normalized sum of |W|^2 over the representatives with first label i."""
    if not 0 <= i <= desc.m:
        raise DomainError("i out of range")
    total = sum(abs(ps_whittaker(desc, r, y, closed_form)) ** 2
                for r in coset_reps(desc.p, desc.m) if r.i == i)
    return total / float(desc.whittaker_norm)


def ps_average(desc: LocalRepDescriptor, y: TruncatedPAdic) -> float:
    return sum(ps_partial_average(desc, i, y) for i in range(desc.m + 1))


def ps_whittaker_norm(desc: LocalRepDescriptor, rep: CosetRep, tol: float = 1e-12) -> float:
    """Integral of |W(a(y))|^2 dy/|y| summed shell by shell with a certified tail cut.

    On every shell |W|^2 <= |y| d p^{-m}, so the shells beyond V contribute at most
    d p^{-m-V}; V is chosen to push that below tol.
    """
    p, m = desc.p, desc.m
    vmax = -m
    while desc.d * float(p) ** (-m - vmax) >= tol:
        vmax += 1
    N = 2 * m
    mod = p ** N
    units = [u for u in range(1, mod) if u % p]
    total = 0.0
    for v in range(-m, vmax + 1):
        shell = sum(abs(ps_whittaker(desc, rep, TruncatedPAdic(p, v, u, N))) ** 2 for u in units)
        total += shell / len(units) * (1 - 1 / p)
    return total


# --- Steinberg ----------------------------------------------------------------------------


def _abs_frac(p: int, v: int) -> Fraction:
    return Fraction(p) ** -v


def steinberg_SV(p: int, y: TruncatedPAdic) -> Fraction:
    """|y|(d(v>=-1) + d(v>=0) p^-2 |y| + d(v>=1)(p^-1 |y| - p^-1))."""
    v, a = y.v, _abs_frac(p, y.v)
    out = Fraction(1) if v >= -1 else Fraction(0)
    if v >= 0:
        out += a / p ** 2
    if v >= 1:
        out += a / p - Fraction(1, p)
    return a * out


def steinberg_SV_printed(p: int, y: TruncatedPAdic) -> Fraction:
    """The closed form with p^-3 |y| in the last bracket, kept for comparison."""
    v, a = y.v, _abs_frac(p, y.v)
    out = Fraction(1) if v >= -1 else Fraction(0)
    if v >= 0:
        out += a / p ** 2
    if v >= 1:
        out += a / p ** 3 - Fraction(1, p)
    return a * out


def _integral_pZp_oracle(y: TruncatedPAdic) -> Fraction:
    """Integral of psi(-y x) over p Z_p: brute-force shells, then the exact geometric tail."""
    p = y.p
    neg = TruncatedPAdic(p, y.v, -y.u, y.N)
    k0 = max(1, -y.v)
    head = sum((shell_psi_oracle(k, neg) for k in range(1, k0)), Fraction(0))
    return head + Fraction(1, p ** k0)


def steinberg_oracle(p: int, y: TruncatedPAdic) -> Fraction:
    """S_V(y) rebuilt from the p translates with small support and the tail product for v_0."""
    if not -3 <= y.v <= 3:
        raise DomainError("steinberg oracle window is v(y) in [-3, 3]")
    translates = p * _integral_pZp_oracle(y)
    py = TruncatedPAdic(p, y.v + 1, y.u, y.N)
    v0_term = steinberg_tail_A_oracle(py) * steinberg_tail_B_oracle(py)
    return _abs_frac(p, y.v) * (translates + v0_term)


# --- supercuspidal ------------------------------------------------------------------------


def sc_average(desc: LocalRepDescriptor, y: TruncatedPAdic) -> Fraction:
    p, m = desc.p, desc.m
    zeta_inv = 1 - Fraction(1, p)
    out = Fraction(0)
    if y.v == -m:
        out += p ** m * zeta_inv
    if desc.case == "SC_odd" and y.v == 1 - m:
        out += p ** (m - 1) * zeta_inv
    return out


def sc_basis(desc: LocalRepDescriptor) -> list[tuple[int, MultChar]]:
    """Kirillov basis labels (shell m', character) with xi = 1_{p^{-m'} Z_p^x} chi."""
    if desc.case not in ("SC_even", "SC_odd"):
        raise DomainError("supercuspidal descriptor required")
    m = desc.m
    basis = [(m, chi) for chi in enumerate_X(desc.p, m)]
    if desc.case == "SC_odd":
        basis += [(m - 1, chi.lift(m)) for chi in enumerate_X(desc.p, m - 1)]
    return basis


def sc_kirillov_oracle(desc: LocalRepDescriptor, y: TruncatedPAdic) -> Fraction:
    """Sum over the Kirillov basis of |xi(y)|^2, evaluated exactly."""
    total = Cyclo(1)
    for shell, chi in sc_basis(desc):
        if y.v == -shell:
            val = chi.exact(y.u % desc.p ** desc.m)
            total = total + val * val.conjugate()
    return total.to_rational()


def sc_gram_matrix(desc: LocalRepDescriptor) -> list[list[Fraction]]:
    """Exact Gram matrix of the Kirillov basis for the unit-volume measure d^x y."""
    basis = sc_basis(desc)
    p, m = desc.p, desc.m
    units = [u for u in range(1, p ** m) if u % p]
    gram = []
    for s1, c1 in basis:
        row = []
        for s2, c2 in basis:
            if s1 != s2:
                row.append(Fraction(0))
                continue
            acc = Cyclo(1)
            for u in units:
                acc = acc + c1.exact(u) * c2.exact(u).conjugate()
            row.append(acc.scale(Fraction(1, len(units))).to_rational())
        gram.append(row)
    return gram


# --- dispatcher ---------------------------------------------------------------------------


def local_average(desc: LocalRepDescriptor, y: TruncatedPAdic):
    """S(a(y)) for the descriptor's case (exact Fraction except for principal series)."""
    if desc.case == "PS":
        return ps_average(desc, y)
    if desc.case == "St":
        return steinberg_SV(desc.p, y)
    return sc_average(desc, y)


def local_bound_ratio(desc: LocalRepDescriptor, v: int, u: int = 1, eps: float = 0.01) -> float:
    """S(a(p^{-m} y)) / (d^{1+eps} |y|) for y = p^v u."""
    N = max(desc.m + max(0, -v + desc.m), 2 * desc.m, 1)
    s = local_average(desc, TruncatedPAdic(desc.p, v - desc.m, u, N))
    return float(s) / (desc.d ** (1 + eps) * float(_abs_frac(desc.p, v)))


def shell_mass(desc: LocalRepDescriptor, vmin: int, vmax: int):
    """Sum over shells of S(a(p^v)) weighted by the case's shell measure."""
    if desc.case == "PS":
        raise DomainError("principal-series mass depends on the unit class; use ps_whittaker_norm")
    weight = Fraction(1) if desc.case.startswith("SC") else 1 - Fraction(1, desc.p)
    return sum((local_average(desc, TruncatedPAdic(desc.p, v, 1, 4)) * weight
                for v in range(vmin, vmax + 1)), Fraction(0))

