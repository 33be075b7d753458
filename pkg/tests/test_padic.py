import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from supnorm.padic import (ConfigurationError, DomainError, PrecisionError, TruncatedPAdic, UnsupportedError,
                           additive_char,
                           decompose, discrete_log, frac_part, primitive_root, unit_group, valuation)

PRIMES = st.sampled_from([3, 5, 7, 11])


@pytest.mark.parametrize("q,p,N,v,u", [(50, 5, 2, 2, 2), (1, 7, 3, 0, 1), (Fraction(-9, 5), 5, 1, -1, 1)])
def test_decompose_examples(q, p, N, v, u):
    y = decompose(q, p, N)
    assert (y.v, y.u) == (v, u)


def test_decompose_rejects_zero_and_even_prime():
    with pytest.raises(DomainError):
        decompose(0, 5, 2)
    with pytest.raises(UnsupportedError):
        decompose(3, 2, 2)


@given(PRIMES, st.integers(-10**6, 10**6).filter(bool), st.integers(1, 10**6), st.integers(1, 4))
def test_decompose_multiplies_back(p, num, den, N):
    q = Fraction(num, den)
    y = decompose(q, p, N)
    assert y.v == valuation(q.numerator, p) - valuation(q.denominator, p)
    unit = q / Fraction(p) ** y.v
    mod = p ** N
    assert (unit.numerator - y.u * unit.denominator) % mod == 0


@pytest.mark.parametrize("x,p,want", [
    (3, 5, 1), (Fraction(1, 5), 5, cmath.exp(2j * math.pi / 5)), (Fraction(7, 25), 5, cmath.exp(2j * math.pi * 7 / 25)),
])
def test_additive_char_examples(x, p, want):
    assert abs(additive_char(x, p) - want) < 1e-12


@given(PRIMES, st.fractions(max_denominator=10**4), st.fractions(max_denominator=10**4))
def test_additive_char_is_a_character(p, x, y):
    lhs = additive_char(x + y, p)
    assert abs(lhs - additive_char(x, p) * additive_char(y, p)) < 1e-9


@given(PRIMES, st.fractions(max_denominator=10**5))
def test_frac_part_differs_by_p_integral(p, x):
    r = frac_part(x, p)
    assert 0 <= r < 1
    diff = x - r
    assert valuation(diff.denominator, p) == 0


def test_additive_char_needs_p_for_rationals():
    with pytest.raises(ConfigurationError):
        additive_char(Fraction(1, 3))


def test_truncated_padic_precision_guard():
    y = TruncatedPAdic(5, -3, 2, 1)
    with pytest.raises(PrecisionError):
        frac_part(y, 5)


@pytest.mark.parametrize("p,m,count,gen", [(5, 1, 4, 2), (3, 2, 6, None), (7, 1, 6, 3)])
def test_unit_groups(p, m, count, gen):
    units = unit_group(p, m)
    assert len(units) == count
    if gen is not None:
        assert primitive_root(p) == gen


@given(st.sampled_from([(3, 1), (3, 2), (5, 2), (7, 1), (11, 1)]), st.data())
def test_discrete_log_inverts_power(pm, data):
    p, m = pm
    mod = p ** m
    u = data.draw(st.sampled_from(unit_group(p, m)))
    assert pow(primitive_root(p), discrete_log(u, p, m), mod) == u


def test_unit_part_must_be_unit():
    with pytest.raises(DomainError):
        TruncatedPAdic(5, 0, 10, 2)
