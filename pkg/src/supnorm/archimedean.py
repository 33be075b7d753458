"""K-Bessel functions of imaginary order, the spherical Whittaker function at infinity and
the Fourier-expansion bound for Phi.

W(y) = 2 |y|^{1/2} K_{it}(2 pi |y|) / |Gamma(1/2 + it) Gamma(1/2 - it)|^{1/2} has unit mass
in L^2(R^x, dy/|y|), because the integral of K_{it}(u)^2 over (0, inf) is pi^2 / (4 cosh(pi t)).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate, special

from .padic import DomainError, TruncatedPAdic, valuation
from .local_whittaker import local_average

# e^{-x cosh u} < 1e-18 beyond this point
_LOG_CUT = math.log(1e18)
DEFAULT_REL_TOL = 1e-8
W_CUTOFF = 1e-15


class AccuracyError(ArithmeticError):
    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class SpectralParams:
    t: float

    @property
    def T(self) -> float:
        return 1 + abs(self.t)


@lru_cache(maxsize=1 << 16)
def bessel_K(t: float, x: float, rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = 0.0) -> float:
    """K_{it}(x) as the integral of e^{-x cosh u} cos(t u) over u > 0.

    Raises AccuracyError when the quadrature error estimate exceeds both rel_tol |K| and
    abs_tol; large t with small x loses digits to cancellation.
    """
    if not x > 0:
        raise DomainError("bessel_K needs x > 0")
    t = abs(t)
    top = math.acosh(max(1.0, _LOG_CUT / x))
    if top == 0.0:
        return 0.0
    f = lambda u: math.exp(-x * math.cosh(u))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if t == 0:
            val, err = integrate.quad(f, 0, top, epsabs=0, epsrel=1e-12, limit=400)
        else:
            val, err = integrate.quad(f, 0, top, weight="cos", wvar=t, epsabs=1e-300, epsrel=1e-12, limit=400)
    if err > max(rel_tol * abs(val), abs_tol, 1e-300):
        raise AccuracyError(f"K_(i{t})({x}): error estimate {err:.3g} for value {val:.3g}", err)
    return val


def bessel_K_series(t: float, x: float, dps: int = 60) -> float:
    """Independent evaluation from the power series of I_{it} (K_0 series when t = 0)."""
    if not x > 0:
        raise DomainError("bessel_K_series needs x > 0")
    t = abs(t)
    with mpmath.workdps(dps):
        X = mpmath.mpf(x) / 2
        z = X * X
        if t == 0:
            # K_0(x) = -(log(x/2) + gamma) I_0(x) + sum_k H_k (x^2/4)^k / (k!)^2
            total, term, H, k = mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(0), 0
            i0 = mpmath.mpf(0)
            while True:
                i0 += term
                total += H * term
                k += 1
                H += mpmath.mpf(1) / k
                term = term * z / (k * k)
                if term < mpmath.mpf(10) ** (-dps + 5) and k > x:
                    break
            return float(-(mpmath.log(X) + mpmath.euler) * i0 + total)
        nu = mpmath.mpc(0, t)
        # K_{it} = -pi Im I_{it} / sinh(pi t)
        term = X ** nu / mpmath.gamma(1 + nu)
        acc, k = mpmath.mpc(0), 0
        while True:
            acc += term
            k += 1
            term = term * z / (k * (k + nu))
            if abs(term) < mpmath.mpf(10) ** (-dps + 5) and k > x:
                break
        return float(-mpmath.pi * acc.imag / mpmath.sinh(mpmath.pi * t))


def gamma_product_abs(t: float) -> float:
    """|Gamma(1/2 + it) Gamma(1/2 - it)| from the reflection formula."""
    return math.pi / math.cosh(math.pi * t)


def gamma_product_abs_direct(t: float) -> float:
    return float(np.exp(2 * special.loggamma(0.5 + 1j * t).real))


def w_infty(y: float, params: SpectralParams, abs_tol: float = 0.0) -> float:
    if y == 0:
        raise DomainError("w_infty needs y != 0")
    a = abs(y)
    k = bessel_K(params.t, 2 * math.pi * a, DEFAULT_REL_TOL, abs_tol)
    return 2 * math.sqrt(a) * k / math.sqrt(gamma_product_abs(params.t))


def w_infty_envelope(y: float, params: SpectralParams) -> float:
    """Upper bound for |w_infty| from |K_{it}| <= K_0."""
    a = abs(y)
    return 2 * math.sqrt(a) * float(special.k0(2 * math.pi * a)) / math.sqrt(gamma_product_abs(params.t))


def cutoff_height(params: SpectralParams, cutoff: float = W_CUTOFF) -> float:
    """Smallest Y (on a fine bisection) beyond which the envelope stays below the cutoff."""
    lo, hi = 0.5, 1.0
    while w_infty_envelope(hi, params) >= cutoff:
        hi *= 2
    for _ in range(60):
        mid = (lo + hi) / 2
        if w_infty_envelope(mid, params) >= cutoff:
            lo = mid
        else:
            hi = mid
    return hi


def normalization_mass(params: SpectralParams, y_lo: float = 1e-6, nodes: int = 600) -> float:
    """Integral of w_infty^2 dy/|y| over R^x restricted to y_lo <= |y| <= cutoff height."""
    hi = cutoff_height(params, 1e-18)
    s, w = np.polynomial.legendre.leggauss(nodes)
    a, b = math.log(y_lo), math.log(hi)
    # split the log-range so the nodes resolve the oscillation near 0
    pieces = np.linspace(a, b, 9)
    total = 0.0
    for lo, up in zip(pieces[:-1], pieces[1:]):
        xs = (up - lo) / 2 * s + (up + lo) / 2
        vals = np.array([w_infty(math.exp(v), params, 1e-12) ** 2 for v in xs])
        total += (up - lo) / 2 * float(np.dot(w, vals))
    return 2 * total


# --- global Whittaker-expansion bound -----------------------------------------------------


def _S_precision(desc, v: int) -> int:
    return max(desc.m + max(0, -v), 2 * desc.m, 1)


@lru_cache(maxsize=1 << 16)
def _local_S_cached(desc, v: int, u: int) -> float:
    N = _S_precision(desc, v)
    return float(local_average(desc, TruncatedPAdic(desc.p, v, u % desc.p ** N, N)))


def local_S(desc, v: int, n: int) -> float:
    """S_{pi_p}(a(p^v n)) for n prime to p, using the sign as part of the unit."""
    N = _S_precision(desc, v)
    return _local_S_cached(desc, v, n % desc.p ** N)


def shell_vanishes(desc, v: int) -> bool:
    """True when S(a(p^v u)) is zero for every unit u."""
    N = _S_precision(desc, v)
    p = desc.p
    return all(_local_S_cached(desc, v, u) == 0 for u in range(1, p ** N) if u % p)


@dataclass
class WhittakerBound:
    value: float
    terms: dict  # k -> (sum over n, largest n used)
    n_terms: int
    notes: list

    def dominant_k(self):
        return max(self.terms, key=lambda k: self.terms[k][0]) if self.terms else None

    def to_dict(self) -> dict:
        return {"value": self.value, "n_terms": self.n_terms, "dominant_k": self.dominant_k(),
                "by_k": {str(k): {"sum": s, "n_max": nm} for k, (s, nm) in self.terms.items()},
                "notes": self.notes}


def whittaker_global_bound(y: float, desc, params: SpectralParams, lambda_source=lambda n: 1,
                           cutoff: float = W_CUTOFF) -> WhittakerBound:
    """Sum over k >= 0 and n prime to p of |lambda(n)| / sqrt|n| |W(n y / p^{m-k})| S(a(n p^{k-m}))^{1/2}.

    The sign factor of the expansion has modulus one and is dropped.
    """
    if y < math.sqrt(3) / 2:
        raise DomainError("expansion bound is evaluated for y >= sqrt(3)/2")
    p, m = desc.p, desc.m
    Y = cutoff_height(params, cutoff)
    terms, count = {}, 0
    k = 0
    while y * p ** (k - m) <= Y:
        v = k - m
        n_max = int(Y * p ** (m - k) / y)
        if not shell_vanishes(desc, v):
            acc = 0.0
            for n in range(1, n_max + 1):
                if n % p == 0:
                    continue
                arg = n * y * float(p) ** (k - m)
                wv = abs(w_infty(arg, params, 1e-14))
                for sn in (n, -n):
                    S = local_S(desc, v, sn)
                    if S:
                        acc += abs(lambda_source(n)) / math.sqrt(n) * wv * math.sqrt(S)
                        count += 1
            terms[k] = (acc, n_max)
        k += 1
    return WhittakerBound(sum(s for s, _ in terms.values()), terms, count,
                          ["sign factor sgn(n)^rho dropped (modulus one)"])


def whittaker_bound_by_q(y: float, desc, params: SpectralParams, lambda_source=lambda n: 1,
                         cutoff: float = W_CUTOFF) -> float:
    """Same sum enumerated over q = N / p^m, N a nonzero integer, split as N = p^k n."""
    p, m = desc.p, desc.m
    Y = cutoff_height(params, cutoff)
    N_max = int(Y * p ** m / y)
    total = 0.0
    for N in range(1, N_max + 1):
        k = valuation(N, p)
        n = N // p ** k
        wv = abs(w_infty(N * y / p ** m, params, 1e-14))
        for sn in (n, -n):
            S = local_S(desc, k - m, sn)
            if S:
                total += abs(lambda_source(n)) / math.sqrt(n) * wv * math.sqrt(S)
    return total


def y_slope(ys, desc, params: SpectralParams, lambda_source=lambda n: 1) -> dict:
    """Least-squares slope of log(bound) against log(y) and the monotonicity record."""
    vals = [whittaker_global_bound(y, desc, params, lambda_source).value for y in ys]
    pos = [(y, v) for y, v in zip(ys, vals) if v > 0]
    slope = float(np.polyfit(np.log([y for y, _ in pos]), np.log([v for _, v in pos]), 1)[0]) if len(pos) > 1 else None
    increases = [(ys[i], ys[i + 1]) for i in range(len(ys) - 1) if vals[i + 1] > vals[i] * (1 + 1e-9)]
    return {"y": list(ys), "values": vals, "slope": slope, "increases": increases}
