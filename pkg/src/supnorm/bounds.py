"""Max-plus algebra of monomial bounds in d, T, y and Lambda with exact rational exponents.

A BoundExpr stands for a sum of monomials, read up to constants as their maximum (all
variables are >= 1 in every regime used here).  The d^eps and T^eps factors live in a
separate additive tag and never influence which monomials are kept.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import linprog

from .padic import DomainError

VARS = ("d", "T", "y", "L")
_IDX = {v: i for i, v in enumerate(VARS)}
_NAMES = {"Lambda": "L", "Λ": "L"}


class UnboundedError(ValueError):
    """Lowering the objective along Lambda never stops."""


def _var(name: str) -> str:
    name = _NAMES.get(name, name)
    if name not in _IDX:
        raise DomainError(f"unknown variable {name!r}; expected one of {VARS}")
    return name


@dataclass(frozen=True, order=True)
class Monomial:
    exps: tuple  # Fractions in VARS order

    @classmethod
    def of(cls, **powers) -> "Monomial":
        e = [Fraction(0)] * len(VARS)
        for k, v in powers.items():
            e[_IDX[_var(k)]] = Fraction(v)
        return cls(tuple(e))

    def __getitem__(self, var: str) -> Fraction:
        return self.exps[_IDX[_var(var)]]

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(tuple(a + b for a, b in zip(self.exps, other.exps)))

    def scale(self, q) -> "Monomial":
        q = Fraction(q)
        return Monomial(tuple(a * q for a in self.exps))

    def dominated_by(self, other: "Monomial") -> bool:
        return all(a <= b for a, b in zip(self.exps, other.exps))

    def value(self, assignment: Mapping[str, float]) -> float:
        out = 1.0
        for v, e in zip(VARS, self.exps):
            if e:
                out *= float(assignment.get(v, 1.0)) ** float(e)
        return out

    def __str__(self) -> str:
        parts = []
        for v, e in zip(VARS, self.exps):
            if e == 1:
                parts.append(v)
            elif e:
                parts.append(f"{v}^{e}")
        return "*".join(parts) or "1"


def _canonical(monos: Iterable[Monomial]) -> frozenset:
    ms = set(monos)
    keep = [m for m in ms if not any(o != m and m.dominated_by(o) for o in ms)]
    return frozenset(keep)


@dataclass(frozen=True)
class BoundExpr:
    monomials: frozenset = field(default_factory=frozenset)
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "monomials", _canonical(self.monomials))
        object.__setattr__(self, "eps", Fraction(self.eps))

    @classmethod
    def of(cls, *monos: Monomial, eps=0) -> "BoundExpr":
        return cls(frozenset(monos), Fraction(eps))

    @classmethod
    def parse(cls, text: str, eps=0) -> "BoundExpr":
        """'d^1*L^-2 + y^1/2' style input; exponents are rationals."""
        monos = []
        for term in text.split("+"):
            powers = {}
            for factor in term.strip().split("*"):
                factor = factor.strip()
                if factor in ("", "1"):
                    continue
                name, _, e = factor.partition("^")
                powers[_var(name.strip())] = powers.get(_var(name.strip()), 0) + Fraction(e.strip() or 1)
            monos.append(Monomial.of(**powers))
        return cls(frozenset(monos), Fraction(eps))

    def sorted(self) -> list[Monomial]:
        return sorted(self.monomials, key=lambda m: tuple(-e for e in m.exps))

    def __str__(self) -> str:
        body = " + ".join(str(m) for m in self.sorted()) or "0"
        return body + (f"  [eps {self.eps}]" if self.eps else "")

    def evaluate(self, assignment: Mapping[str, float]) -> float:
        return max((m.value(assignment) for m in self.monomials), default=0.0)

    def to_dict(self) -> dict:
        return {"monomials": [{v: str(e) for v, e in zip(VARS, m.exps) if e} for m in self.sorted()],
                "eps": str(self.eps), "text": str(self)}


def combine(e1: BoundExpr, e2: BoundExpr) -> BoundExpr:
    return BoundExpr(e1.monomials | e2.monomials, max(e1.eps, e2.eps))


def multiply(e1: BoundExpr, e2: BoundExpr) -> BoundExpr:
    return BoundExpr(frozenset(a * b for a in e1.monomials for b in e2.monomials), e1.eps + e2.eps)


def power(e: BoundExpr, q) -> BoundExpr:
    """(sum m_i)^q, which for q > 0 is comparable to sum m_i^q."""
    q = Fraction(q)
    if q <= 0 and len(e.monomials) > 1:
        raise DomainError("non-positive powers are only defined for single monomials")
    return BoundExpr(frozenset(m.scale(q) for m in e.monomials), e.eps * abs(q))


def hull_reduce(e: BoundExpr) -> BoundExpr:
    """Drop monomials bounded by a weighted geometric mean of the others.

    m <= prod m_i^{theta_i} <= max m_i for theta in the simplex; the weights are found by
    a linear program and then re-verified in exact arithmetic.
    """
    monos = e.sorted()
    changed = True
    while changed and len(monos) > 1:
        changed = False
        for m in monos:
            others = [o for o in monos if o != m]
            theta = _hull_certificate(m, others)
            if theta is not None:
                monos = others
                changed = True
                break
    return BoundExpr(frozenset(monos), e.eps)


def _hull_certificate(m: Monomial, others: list[Monomial]):
    k = len(others)
    A = np.array([[-float(o.exps[j]) for o in others] for j in range(len(VARS))])
    b = np.array([-float(x) for x in m.exps])
    res = linprog(np.zeros(k), A_ub=A, b_ub=b, A_eq=np.ones((1, k)), b_eq=[1.0],
                  bounds=[(0, None)] * k, method="highs")
    if res.status != 0:
        return None
    for denom in (2, 3, 4, 6, 8, 12, 24, 60, 120, 1000, 10 ** 6):
        theta = [Fraction(x).limit_denominator(denom) for x in res.x]
        s = sum(theta)
        if s == 0 or any(t < 0 for t in theta):
            continue
        theta = [t / s for t in theta]
        if all(sum(t * o.exps[j] for t, o in zip(theta, others)) >= m.exps[j] for j in range(len(VARS))):
            return theta
    return None


def substitute(e: BoundExpr, var: str, replacement, hull: bool = True) -> BoundExpr:
    """Replace var by d^replacement (replacement: the rational exponent of d)."""
    var = _var(var)
    if var == "d":
        raise DomainError("substitution target must differ from d")
    r = Fraction(replacement)
    i, di = _IDX[var], _IDX["d"]
    out = []
    for m in e.monomials:
        ex = list(m.exps)
        ex[di] += r * ex[i]
        ex[i] = Fraction(0)
        out.append(Monomial(tuple(ex)))
    res = BoundExpr(frozenset(out), e.eps)
    return hull_reduce(res) if hull else res


# --- one-parameter optimization -----------------------------------------------------------


def _lines(e: BoundExpr, beta: Fraction) -> list[tuple[Fraction, Fraction]]:
    """(intercept, slope in alpha) of each monomial's d-exponent with y = d^beta, Lambda = d^alpha."""
    return [(m["d"] + beta * m["y"], m["L"]) for m in e.monomials]


def _envelope(lines, alpha: Fraction) -> Fraction:
    return max(a + b * alpha for a, b in lines)


@dataclass(frozen=True)
class Optimum:
    alpha: Fraction
    exponent: Fraction  # d-exponent of the bound (for Phi^2 when e bounds Phi^2)

    def to_dict(self) -> dict:
        return {"alpha": str(self.alpha), "exponent": str(self.exponent)}


def optimize_Lambda(e: BoundExpr, beta) -> Optimum:
    """min over alpha >= 0 of max over monomials of (d + alpha Lambda + beta y exponents)."""
    beta = Fraction(beta)
    lines = _lines(e, beta)
    if not lines:
        raise DomainError("empty expression")
    if all(b < 0 for _, b in lines):
        raise UnboundedError("every monomial decreases in Lambda; no optimum")
    cands = {Fraction(0)}
    for (a1, b1), (a2, b2) in itertools.combinations(lines, 2):
        if b1 != b2:
            x = (a2 - a1) / (b1 - b2)
            if x >= 0:
                cands.add(x)
    best = min(cands, key=lambda x: (_envelope(lines, x), x))
    return Optimum(best, _envelope(lines, best))


def pretrace_exponent(e: BoundExpr, beta) -> Fraction:
    return optimize_Lambda(e, beta).exponent


def whittaker_exponent(e: BoundExpr, beta) -> Fraction:
    beta = Fraction(beta)
    return max(m["d"] + beta * m["y"] for m in e.monomials)


def plateau_end(e: BoundExpr, beta_max=Fraction(2)) -> Fraction | None:
    """Largest beta in [0, beta_max] with optimized exponent still equal to its value at 0.

    Feasibility of a_i + beta c_i + alpha b_i <= f0 is a 2-variable LP; its optimum sits on
    a vertex, so intersecting constraint lines pairwise and testing each point is exact.
    """
    beta_max = Fraction(beta_max)
    f0 = pretrace_exponent(e, 0)
    # constraints  b_i alpha + c_i beta <= f0 - d_i,  -alpha <= 0,  -beta <= 0,  beta <= beta_max
    cons = [(m["L"], m["y"], f0 - m["d"]) for m in e.monomials]
    cons += [(Fraction(-1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(-1), Fraction(0)),
             (Fraction(0), Fraction(1), beta_max)]
    best = None
    for (p1, q1, r1), (p2, q2, r2) in itertools.combinations(cons, 2):
        det = p1 * q2 - p2 * q1
        if det == 0:
            continue
        al = (r1 * q2 - r2 * q1) / det
        be = (p1 * r2 - p2 * r1) / det
        if all(p * al + q * be <= r for p, q, r in cons):
            best = be if best is None else max(best, be)
    return best


def _intersection(f, g, lo: Fraction, hi: Fraction, max_steps: int = 200) -> Fraction | None:
    """Exact root of f - g on [lo, hi] for piecewise-linear f, g (None if no sign change)."""
    h = lambda b: f(b) - g(b)
    hl, hh = h(lo), h(hi)
    if hl == 0:
        return lo
    if hh == 0:
        return hi
    if (hl > 0) == (hh > 0):
        return None
    for _ in range(max_steps):
        guess = lo - hl * (hi - lo) / (hh - hl)
        if h(guess) == 0:
            return guess
        mid = (lo + hi) / 2
        hm = h(mid)
        if hm == 0:
            return mid
        if (hm > 0) == (hl > 0):
            lo, hl = mid, hm
        else:
            hi, hh = mid, hm
    return None


@dataclass
class Crossover:
    beta_star: Fraction | None  # end of the pre-trace plateau
    beta_equal: Fraction | None  # where the two exponent curves meet
    plateau_exponent: Fraction
    whittaker_at_star: Fraction | None
    global_exponent: Fraction | None  # for the squared quantity
    report_only: bool

    @property
    def phi_exponent(self) -> Fraction | None:
        return None if self.global_exponent is None else self.global_exponent / 2

    def to_dict(self) -> dict:
        s = lambda x: None if x is None else str(x)
        return {"beta_star": s(self.beta_star), "beta_equal": s(self.beta_equal),
                "plateau_exponent": s(self.plateau_exponent),
                "whittaker_at_beta_star": s(self.whittaker_at_star),
                "global_exponent": s(self.global_exponent), "phi_exponent": s(self.phi_exponent),
                "report_only": self.report_only}


def crossover(whittaker_e: BoundExpr, pretrace_e: BoundExpr, beta_max=Fraction(2)) -> Crossover:
    """Regime split y = d^beta: pre-trace for beta <= beta*, Whittaker expansion above."""
    beta_max = Fraction(beta_max)
    f = lambda b: pretrace_exponent(pretrace_e, b)
    w = lambda b: whittaker_exponent(whittaker_e, b)
    f0 = f(Fraction(0))
    star = plateau_end(pretrace_e, beta_max)
    equal = _intersection(f, w, Fraction(0), beta_max)
    if star is None or star >= beta_max:
        return Crossover(star, equal, f0, None, None, True)
    w_star = w(star)
    # above beta* the Whittaker exponent is nonincreasing (all its y-exponents are <= 0)
    if any(m["y"] > 0 for m in whittaker_e.monomials):
        return Crossover(star, equal, f0, w_star, None, True)
    return Crossover(star, equal, f0, w_star, max(f0, w_star), False)


# --- the two chains -----------------------------------------------------------------------

# Phi^2 from the expansion:  (d^{1/2} T^{1/6} + d T^{1/2} y^{-1/2})^2
WHITTAKER_PHI2 = BoundExpr.parse("d^1*T^1/3 + d^2*T^1*y^-1", eps=2)


def main_chain() -> BoundExpr:
    """T d^{1+eps} Lambda^{-2+eps} (Lambda y^{1/2} + Lambda^{5/2} y + Lambda^4 + Lambda d)."""
    inner = BoundExpr.parse("L*y^1/2 + L^5/2*y + L^4 + L*d")
    return multiply(BoundExpr.parse("T*d*L^-2", eps=2), inner)


def sc_odd_chain() -> BoundExpr:
    """T d Lambda^{-2} (d^{1/2} Lambda^4 + d^{1/2} Lambda^{5/2} y + Lambda d + Lambda d^{1/2} y^{1/2})."""
    inner = BoundExpr.parse("d^1/2*L^4 + d^1/2*L^5/2*y + L*d + L*d^1/2*y^1/2")
    return multiply(BoundExpr.parse("T*d*L^-2", eps=2), inner)


CHAINS = {"main": (main_chain, Fraction(1, 2)), "sc-odd": (sc_odd_chain, Fraction(1, 4))}


def derivation(case: str) -> dict:
    """Every step from the pre-trace display to the final exponent, as strings."""
    if case not in CHAINS:
        raise DomainError(f"unknown case {case!r}; expected one of {sorted(CHAINS)}")
    build, beta = CHAINS[case]
    chain = build()
    opt = optimize_Lambda(chain, beta)
    after = substitute(chain, "L", opt.alpha)
    cross = crossover(WHITTAKER_PHI2, chain)
    steps = [
        {"step": "pre-trace bound for Phi^2", "expr": str(chain)},
        {"step": f"y-cap y = d^{beta}", "lines": [f"{a} + {b} alpha" for a, b in sorted(_lines(chain, beta))]},
        {"step": "optimize Lambda = d^alpha", **opt.to_dict()},
        {"step": f"insert Lambda = d^{opt.alpha}", "expr": str(after)},
        {"step": "Whittaker bound for Phi^2", "expr": str(WHITTAKER_PHI2)},
        {"step": "regime split", **cross.to_dict()},
    ]
    t_exp = max(m["T"] for m in chain.monomials) / 2
    return {"case": case, "beta": str(beta), "alpha": str(opt.alpha), "phi2_exponent": str(opt.exponent),
            "phi_exponent_d": str(cross.phi_exponent), "phi_exponent_T": str(t_exp),
            "beta_star": str(cross.beta_star), "steps": steps}


def fit_cross_check(slope: float, expected: Fraction = Fraction(4)) -> dict:
    """Compare an empirical Lambda-slope, rounded to 1/12, with the symbolic Lambda^4 term."""
    rounded = Fraction(round(slope * 12), 12)
    return {"fitted": slope, "rounded": str(rounded), "symbolic": str(expected), "match": rounded == expected}
