import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from supnorm import hecke, lattice as la, local_whittaker as lw
from supnorm.finite_gl2 import ResourceError, character_table
from supnorm.padic import DomainError

Z = la.UpperHalfPoint


def test_point_pair_examples():
    z = Z(0.3, 1.7)
    assert la.point_pair_u(z, z) == 0
    assert la.point_pair_u(Z(0, 1), Z(0, 2)) == pytest.approx(0.5)
    assert la.point_pair_u_exact(0, 1, 0, 2) == Fraction(1, 2)
    # translation by b
    assert la.u_of_matrix_exact(1, 3, 0, 1, Fraction(1, 5), Fraction(2)) == Fraction(9, 4)


def test_identity_is_counted():
    res = la.count_M(1, (1, 0, 0, 1), Z(0, 2), 3, 2, want_list=True)
    assert res.count >= 1
    assert [1, 0, 0, 1] in res.matrices.tolist()


def test_lambda_one_at_i():
    res = la.count_M_lambda(1, 1, Z(0, 1), 5, want_list=True)
    assert res.count == 1


@pytest.mark.parametrize("p,lam", [(3, 2), (5, 1), (7, 1)])
@pytest.mark.parametrize("y", [0.9, 1.5, 3.0])
def test_level_sets_force_upper_triangular(p, lam, y):
    res = la.count_M_lambda(1, lam, Z(0.2, y), p, want_list=True)
    assert res.count >= 1
    assert all(row[2] == 0 for row in res.matrices.tolist())


@pytest.mark.parametrize("r", [2, 7, 13])
def test_no_solutions_unless_det_is_one_mod_p(r):
    assert la.count_M_lambda(r, 1, Z(0.1, 1.3), 5).count == 0


def test_lambda_zero_sums_residue_classes():
    z, r, p = Z(0.25, 1.1), 14, 3
    total = la.count_M_lambda(r, 0, z, p).count
    parts = sum(la.count_M(r, (a, b, c, d), z, p, 1).count
                for a in range(3) for b in range(3) for c in range(3) for d in range(3))
    assert total == parts


@given(st.integers(1, 50), st.floats(-0.5, 0.5), st.floats(1.0, 5.0), st.sampled_from([9, 25]),
       st.tuples(*[st.integers(0, 24)] * 4))
def test_optimized_count_matches_naive(r, x, y, n, g):
    z = Z(x, y)
    g = tuple(v % n for v in g)
    res = la.count_congruent(r, z, n, g, want_list=True)
    naive = la.count_naive(r, z, n, g)
    assert res.count == len(naive)
    assert sorted(map(tuple, res.matrices.tolist())) == sorted(naive)


@given(st.integers(1, 60), st.floats(-0.5, 0.5), st.floats(0.87, 4.0))
def test_members_satisfy_constraints(r, x, y):
    z = Z(x, y)
    res = la.count_congruent(r, z, want_list=True)
    assert la.check_members(res.matrices, r, z) == []
    assert all(abs(c) <= la.c_bound(r, y) for c in res.matrices[:, 2])


def test_boundary_point_counted_exactly():
    # translation by 1 at z = i sits exactly on u = 1
    res = la.count_congruent(1, Z(0.0, 1.0), want_list=True)
    rows = set(map(tuple, res.matrices.tolist()))
    assert (1, 1, 0, 1) in rows and (1, -1, 0, 1) in rows


def test_budget_guard():
    with pytest.raises(ResourceError):
        la.count_congruent(10 ** 6, Z(0, 0.9), budget=10)


def test_fundamental_domain_reduction():
    w = la.reduce_to_fundamental_domain(Z(3.7, 0.05))
    assert w.in_fundamental_domain()


def test_geometric_side_kappa_one():
    desc = lw.describe("St", 3)
    z = Z(0.0, 2.0)
    f = hecke.HeckeElement({1: 1})
    side = la.geometric_side(z, f, desc)
    want = sum(3 ** lam * la.count_M_lambda(1, lam, z, 3, 1).count for lam in range(2))
    assert side.lemma == pytest.approx(want)


def test_geometric_side_table_mode_is_bounded_by_lemma():
    desc = lw.describe("St", 3)
    table = character_table(3, 1)
    for z in (Z(0.0, 1.0), Z(0.3, 1.4)):
        f = hecke.build_f_ur([5, 11], lambda r: 1).f_ur
        side = la.geometric_side(z, f, desc, "both", table)
        assert side.table <= side.lemma * 3 + 1e-9
    with pytest.raises(DomainError):
        la.geometric_side(z, f, desc, "table")


def test_character_envelope():
    assert la.character_envelope(lw.describe("SC_odd", 3, 2), 1) == pytest.approx(3 ** 1.5)
    assert la.character_envelope(lw.describe("St", 3), 1) == 3


@pytest.mark.slow
def test_lambda_zero_block_growth():
    fit = la.fit_lambda_slope()
    assert 2.3 <= fit["slope"] <= 4.2
