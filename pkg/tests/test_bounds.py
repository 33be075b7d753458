import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from supnorm import bounds as b
from supnorm.padic import DomainError

E = b.BoundExpr.parse

exps = st.fractions(min_value=-3, max_value=3, max_denominator=6)
monos = st.tuples(exps, exps, exps, exps).map(lambda t: b.Monomial(t))
exprs = st.lists(monos, min_size=1, max_size=4).map(lambda ms: b.BoundExpr(ms))


def test_combine_multiply_power_examples():
    assert b.combine(E("d^1"), E("d^1")) == E("d")
    assert b.multiply(E("L^5/2*y"), E("L^-2")) == E("L^1/2*y")
    assert b.power(E("d^2/3 + d^1/6*y"), F(1, 2)) == E("d^1/3 + d^1/12*y^1/2")


def test_power_rejects_nonpositive_on_sums():
    with pytest.raises(DomainError):
        b.power(E("d + y"), -1)


def test_substitution_examples():
    assert b.substitute(b.multiply(E("L^4 + L*d"), E("L^-2")), "L", F(1, 3)) == E("d^2/3")
    chain = b.substitute(b.sc_odd_chain(), "L", F(1, 6))
    assert chain == E("d^11/6*T + d^19/12*T*y", eps=2)
    assert b.multiply(chain, E("d^-1*T^-1")) == E("d^5/6 + d^7/12*y", eps=2)
    assert b.substitute(E("d*T + y"), "L", 0) == E("d*T + y")


def test_optimize_examples():
    assert b.optimize_Lambda(b.main_chain(), F(1, 2)) == b.Optimum(F(1, 3), F(5, 3))
    assert b.optimize_Lambda(b.sc_odd_chain(), F(1, 4)) == b.Optimum(F(1, 6), F(11, 6))
    assert b.optimize_Lambda(E("d^2*T"), F(1, 2)) == b.Optimum(F(0), F(2))


def test_crossover_examples():
    main = b.crossover(b.WHITTAKER_PHI2, b.main_chain())
    assert (main.beta_star, main.phi_exponent) == (F(1, 2), F(5, 6))
    sc = b.crossover(b.WHITTAKER_PHI2, b.sc_odd_chain())
    assert (sc.beta_star, sc.phi_exponent) == (F(1, 4), F(11, 12))
    same = b.crossover(b.main_chain(), b.main_chain())
    assert same.report_only or same.global_exponent == b.optimize_Lambda(b.main_chain(), F(0)).exponent


@pytest.mark.parametrize("case,alpha,phi", [("main", F(1, 3), F(5, 6)), ("sc-odd", F(1, 6), F(11, 12))])
def test_derivation(case, alpha, phi):
    d = b.derivation(case)
    assert F(d["alpha"]) == alpha and F(d["phi_exponent_d"]) == phi and F(d["phi_exponent_T"]) == F(1, 2)


@given(exprs, exprs, exprs)
def test_semiring_laws(x, y, z):
    assert b.combine(x, y) == b.combine(y, x)
    assert b.combine(b.combine(x, y), z) == b.combine(x, b.combine(y, z))
    assert b.combine(x, x) == x
    assert b.multiply(x, y) == b.multiply(y, x)
    assert b.multiply(b.multiply(x, y), z) == b.multiply(x, b.multiply(y, z))
    assert b.multiply(x, b.combine(y, z)) == b.combine(b.multiply(x, y), b.multiply(x, z))


def _log_value(e, point):
    return max(sum(float(m[v]) * math.log(point[v]) for v in b.VARS) for m in e.monomials)


@given(exprs, exprs, st.tuples(*[st.floats(1.0, 1e6)] * 4))
def test_symbolic_ops_dominate_numerically(x, y, pt):
    point = dict(zip(b.VARS, pt))
    lx, ly = _log_value(x, point), _log_value(y, point)
    assert _log_value(b.multiply(x, y), point) == pytest.approx(lx + ly, abs=1e-6)
    assert _log_value(b.combine(x, y), point) >= max(lx, ly) - 1e-6
    assert _log_value(b.combine(x, y), point) <= math.log(2) + max(lx, ly) + 1e-6


@given(exprs, st.tuples(*[st.floats(1.0, 1e6)] * 4))
def test_hull_reduction_keeps_the_maximum(x, pt):
    point = dict(zip(b.VARS, pt))
    assert _log_value(b.hull_reduce(x), point) == pytest.approx(_log_value(x, point), abs=1e-6)


@pytest.mark.parametrize("chain,beta", [(b.main_chain, F(1, 2)), (b.sc_odd_chain, F(1, 4)),
                                        (b.main_chain, F(1, 5)), (b.sc_odd_chain, F(1, 3))])
def test_optimum_beats_neighbours(chain, beta):
    e = chain()
    opt = b.optimize_Lambda(e, beta)
    at = lambda a: b.whittaker_exponent(b.substitute(e, "L", a, hull=False), beta)
    assert at(opt.alpha) == opt.exponent
    for delta in (F(1, 100), F(-1, 100)):
        assert at(opt.alpha + delta) >= opt.exponent


def test_unbounded_minimization_raises():
    with pytest.raises(b.UnboundedError):
        b.optimize_Lambda(E("L^-1*d"), F(1, 2))


def test_fit_cross_check():
    assert b.fit_cross_check(4.01)["match"]
    assert not b.fit_cross_check(3.43)["match"]
