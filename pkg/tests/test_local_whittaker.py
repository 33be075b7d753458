from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from supnorm import characters as ch, local_whittaker as lw
from supnorm.padic import DomainError, TruncatedPAdic as T


def chi_of(p, m):
    return next(c for c in ch.enumerate_X(p, m) if ch.conductor(c) == m)


@pytest.mark.parametrize("case,p,m,n,d", [
    ("PS", 5, 1, 1, 6), ("SC_even", 5, 1, 2, 4), ("SC_odd", 3, 2, 3, 8),
    ("St", 3, None, 1, 3), ("PS", 3, 2, 2, 12), ("SC_even", 7, 2, 4, 42),
])
def test_describe(case, p, m, n, d):
    desc = lw.describe(case, p, m, chi_of(p, m) if case == "PS" else None)
    assert (desc.n, desc.d) == (n, d)


def test_sc_odd_needs_level_two():
    with pytest.raises(DomainError):
        lw.describe("SC_odd", 3, 1)


@pytest.mark.parametrize("p,m,k", [(3, 1, 4), (3, 2, 12), (5, 1, 6)])
def test_coset_reps(p, m, k):
    assert len(lw.coset_reps(p, m)) == k
    assert lw.verify_coset_reps(p, m) > 0


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 1)])
def test_ps_partial_spots(p, m):
    desc = lw.describe("PS", p, m, chi_of(p, m))
    assert lw.ps_partial_average(desc, m, T(p, 0, 1, 4)) == pytest.approx(1, abs=1e-9)
    assert lw.ps_partial_average(desc, 0, T(p, -m, 1, 4)) == pytest.approx(p ** m, abs=1e-9)
    if m == 2:
        assert lw.ps_partial_average(desc, 1, T(p, 0, 1, 4)) == pytest.approx(0, abs=1e-9)
    assert lw.local_average(desc, T(p, -m - 1, 1, 4)) == 0
    y = T(p, -1, 1, 4)
    parts = sum(lw.ps_partial_average(desc, i, y) for i in range(m + 1))
    assert lw.local_average(desc, y) == pytest.approx(parts, abs=1e-12)


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 1)])
def test_ps_whittaker_norm(p, m):
    desc = lw.describe("PS", p, m, chi_of(p, m), 0.7j)
    for rep in lw.coset_reps(p, m):
        assert lw.ps_whittaker_norm(desc, rep) == pytest.approx(1 + 1 / p, abs=1e-9)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_steinberg_spots(p):
    assert lw.steinberg_SV(p, T(p, -1, 1, 4)) == p
    assert lw.steinberg_SV(p, T(p, -2, 1, 4)) == 0
    assert lw.steinberg_SV(p, T(p, 0, 1, 4)) == 1 + F(1, p ** 2)


@given(st.sampled_from([3, 5, 7]), st.integers(-3, 3), st.integers(1, 200))
def test_steinberg_matches_oracle(p, v, u):
    if u % p == 0:
        u += 1
    y = T(p, v, u, 4)
    assert lw.steinberg_SV(p, y) == lw.steinberg_oracle(p, y)


def test_steinberg_printed_grouping_differs_for_positive_valuation():
    assert lw.steinberg_SV_printed(3, T(3, 1, 1, 4)) != lw.steinberg_oracle(3, T(3, 1, 1, 4))


def test_sc_spots():
    even = lw.describe("SC_even", 5, 1)
    assert [lw.sc_average(even, T(5, v, 1, 4)) for v in (-2, -1, 0)] == [0, 4, 0]
    odd = lw.describe("SC_odd", 3, 2)
    assert lw.sc_average(odd, T(3, -1, 1, 4)) == 2


@pytest.mark.parametrize("case,p,m", [("SC_even", 3, 1), ("SC_even", 3, 2), ("SC_even", 5, 1), ("SC_odd", 3, 2)])
def test_sc_matches_kirillov_oracle(case, p, m):
    desc = lw.describe(case, p, m)
    g = lw.sc_gram_matrix(desc)
    assert all(g[i][j] == (i == j) for i in range(len(g)) for j in range(len(g)))
    for v in range(-m - 2, 2):
        for u in (1, 2, p + 1):
            y = T(p, v, u, 2 * m + 2)
            assert lw.sc_average(desc, y) == lw.sc_kirillov_oracle(desc, y)


@pytest.mark.parametrize("case,p,m", [("St", 3, 1), ("SC_even", 5, 1), ("PS", 3, 2), ("SC_odd", 3, 2)])
def test_master_bound(case, p, m):
    desc = lw.describe(case, p, m if case != "St" else None, chi_of(p, m) if case == "PS" else None)
    for v in range(-2, 4):
        assert lw.local_bound_ratio(desc, v) <= 2


@pytest.mark.parametrize("p", [3, 5])
def test_steinberg_shell_mass_is_dimension(p):
    # the averaged basis has total mass dim V = p
    desc = lw.describe("St", p)
    assert abs(float(lw.shell_mass(desc, -1, 60)) - desc.d) < 1e-12
