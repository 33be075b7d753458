from math import gcd

import pytest
from hypothesis import given, strategies as st

from supnorm import characters as ch
from supnorm.padic import DomainError, TruncatedPAdic, additive_char


def primitive(p, a):
    return [chi for chi in ch.enumerate_X(p, a) if ch.conductor(chi) == a]


@pytest.mark.parametrize("p,k,n", [(5, 1, 4), (3, 2, 6), (5, 2, 20), (7, 1, 6)])
def test_enumerate_X_size_and_trivial(p, k, n):
    X = ch.enumerate_X(p, k)
    assert len(X) == n
    assert any(chi.is_trivial() for chi in X)


def test_conductors():
    assert ch.conductor(ch.MultChar(5, 1, 0)) == 0
    # order p on units mod p^2 is trivial mod p but not on 1 + pZ
    order3 = [chi for chi in ch.enumerate_X(3, 2) if chi.order_modulus // gcd(chi.e, chi.order_modulus) == 3]
    assert len(order3) == 2
    assert order3 and all(ch.conductor(chi) == 2 for chi in order3)
    quadratic = ch.MultChar(5, 1, 2)
    assert ch.conductor(quadratic) == 1


def test_gauss_trivial_character():
    triv = ch.MultChar(5, 1, 0)
    assert abs(ch.gauss_G(2, TruncatedPAdic(5, 0, 3, 4), triv) - 5 ** -2) < 1e-15
    y = TruncatedPAdic(5, -1, 3, 4)
    assert abs(ch.gauss_G(1, y, triv) - additive_char(y) / 5) < 1e-15


def test_gauss_support_in_one_class():
    chi = primitive(5, 2)[0]
    support = [u for u in range(25) if u % 5 and abs(ch.gauss_G(1, TruncatedPAdic(5, -2, u, 4), chi)) > 1e-12]
    assert len(support) == 5 and len({u % 5 for u in support}) == 1


def test_epsilon_factor_quadratic_mod_5():
    eps = ch.epsilon_factor(ch.MultChar(5, 1, 2))
    assert min(abs(eps - w) for w in (1, 1j, -1, -1j)) < 1e-12


@pytest.mark.parametrize("p,k", [(3, 2), (5, 2), (7, 1)])
def test_epsilon_unit_modulus_and_pairing(p, k):
    for chi in ch.enumerate_X(p, k):
        if chi.is_trivial():
            continue
        eps = ch.epsilon_factor(chi)
        assert abs(abs(eps) - 1) < 1e-12
        assert abs(eps * ch.epsilon_factor(chi.inverse()) - chi.exact(-1 % p ** k).__complex__()) < 1e-12


@pytest.mark.parametrize("p", [3, 5])
def test_b_of_chi_properties(p):
    mod = p
    for chi in primitive(p, 2):
        b = ch.b_of_chi(chi)
        assert b % p
        assert ch.b_of_chi(chi.inverse()) % mod == -b % mod
        for t in range(2, p):
            assert ch.b_of_chi(chi.power(t)) % mod == t * b % mod


def test_b_of_chi_needs_conductor_two():
    with pytest.raises(DomainError):
        ch.b_of_chi(ch.MultChar(5, 1, 1))


@pytest.mark.parametrize("p,a", [(3, 2), (5, 2), (3, 3)])
def test_closed_form_case_magnitudes(p, a):
    for chi in primitive(p, a):
        b = ch.b_of_chi(chi)
        h = p ** (a // 2)
        for z in (u for u in range(1, p ** a) if u % p):
            distinguished = (z + b) % h == 0
            for l in range(1, a + 2):
                g = abs(ch.gauss_G_closed_form(l, -a, z, chi))
                if l >= a:
                    assert g == pytest.approx(p ** -l, abs=1e-13)
                elif not distinguished:
                    assert g == pytest.approx(0, abs=1e-13)
                elif l >= -(-a // 2):
                    assert g == pytest.approx(p ** -l, abs=1e-13)
                else:
                    assert g == pytest.approx(p ** (-a / 2), abs=1e-13)
            for k in (-a - 1, -a + 1, 0):
                for l in range(1, a):
                    assert ch.gauss_G_closed_form(l, k, z, chi) == pytest.approx(0, abs=1e-13)


def test_calibration_is_frozen():
    v = ch.calibrated_variant()
    assert (v.mid_sign, v.small_sign, v.small_power, v.eps_inverse) == (-1, -1, -1, False)


@given(st.sampled_from([(3, 2), (5, 2), (3, 1), (5, 1)]), st.data())
def test_closed_form_matches_brute_force(pa, data):
    p, a = pa
    chi = data.draw(st.sampled_from(primitive(p, a)))
    l = data.draw(st.integers(1, a + 1))
    k = data.draw(st.integers(-a - 1, 1))
    z = data.draw(st.integers(1, p ** (a + 2)).filter(lambda u: u % p))
    want = ch.gauss_G(l, TruncatedPAdic(p, k, z, a + 2), chi)
    got = ch.gauss_G_closed_form(l, k, z, chi)
    assert abs(got - want) < 1e-12


def test_exact_mode_agrees_with_float():
    chi = primitive(3, 2)[0]
    y = TruncatedPAdic(3, -2, 2, 4)
    assert abs(complex(ch.gauss_G(1, y, chi, exact=True)) - ch.gauss_G(1, y, chi)) < 1e-13
