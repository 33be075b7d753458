"""Shell integrals of psi_p and the regularized sums of the Steinberg computation.

Stable sums over shells p^l Z_p^x terminate: once the frequency has valuation
<= -2 on the unit shell the shell integral is zero, so every evaluator here
knows its last contributing index.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction

from .cyclotomic import Cyclo
from .padic import DomainError, TruncatedPAdic


def _shell_value(p: int, k: int, v: int) -> Fraction:
    """Integral of psi_p(x y) over p^k Z_p^x for v(y) = v."""
    measure = Fraction(p) ** -k
    if v >= -k:
        return measure * (1 - Fraction(1, p))
    if v == -k - 1:
        return -measure / p
    return Fraction(0)


def shell_psi_integral(k: int, y: TruncatedPAdic) -> Fraction:
    """Exact value of the integral of psi_p(x y) dx over p^k Z_p^x (depends on v(y) only)."""
    return _shell_value(y.p, k, y.v)


def shell_psi_oracle(k: int, y: TruncatedPAdic) -> Fraction:
    """Same integral as an explicit finite character sum, reduced exactly."""
    p = y.p
    if k < 0:
        raise DomainError("oracle handles k >= 0 only")
    if y.v >= -k:
        return _shell_value(p, k, y.v)
    y.require(-y.v - k, "shell oracle")
    # x = p^k t with t a unit mod p^n, n = -v - k; psi(x y) = e(t u / p^n)
    n = -y.v - k
    mod = p ** n
    counts = Counter(t * y.u % mod for t in range(1, mod) if t % p)
    acc = Cyclo(mod, {j: Fraction(c, p ** (k + n)) for j, c in counts.items()})
    return acc.to_rational()


def _tail_terms(y: TruncatedPAdic, weight, oracle: bool, extra: int = 0):
    """Terms weight(l) * (integral over Z_p^x of psi(z y p^{-1-l})) for l >= 1."""
    last = max(0, y.v + 1) + extra
    out = []
    for l in range(1, last + 1):
        w = TruncatedPAdic(y.p, y.v - 1 - l, y.u, max(y.N, l + 1 - y.v, 0))
        shell = shell_psi_oracle(0, w) if oracle else _shell_value(y.p, 0, w.v)
        out.append(weight(l) * shell)
    return out


def steinberg_tail_A(y: TruncatedPAdic) -> Fraction:
    """Regularized sum over l >= 1 of p^l times the unit-shell integral: -1 if v(y) >= 1."""
    return Fraction(-1) if y.v >= 1 else Fraction(0)


def steinberg_tail_A_oracle(y: TruncatedPAdic, extra: int = 1) -> Fraction:
    return sum(_tail_terms(y, lambda l: Fraction(y.p) ** l, True, extra), Fraction(0))


def steinberg_tail_B(y: TruncatedPAdic) -> Fraction:
    """Regularized sum over l >= 1 of p^{-l} times the unit-shell integral.

    Equals d(v>=2)(1/p - p^{-v}) - d(v>=1) p^{-1-v}.
    """
    p, v = y.p, y.v
    out = Fraction(0)
    if v >= 2:
        out += Fraction(1, p) - Fraction(1, p ** v)
    if v >= 1:
        out -= Fraction(1, p ** (v + 1))
    return out


def steinberg_tail_B_printed(y: TruncatedPAdic) -> Fraction:
    """The variant with p^{-2-v} in the first bracket; disagrees with the shell sum for v >= 2."""
    p, v = y.p, y.v
    out = Fraction(0)
    if v >= 2:
        out += Fraction(1, p) - Fraction(1, p ** (v + 2))
    if v >= 1:
        out -= Fraction(1, p ** (v + 1))
    return out


def steinberg_tail_B_oracle(y: TruncatedPAdic, extra: int = 1) -> Fraction:
    neg = TruncatedPAdic(y.p, y.v, -y.u, y.N)
    return sum(_tail_terms(neg, lambda l: Fraction(1, y.p ** l), True, extra), Fraction(0))
