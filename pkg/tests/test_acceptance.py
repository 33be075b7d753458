"""Acceptance criteria 1-14, one pass/fail line each (see the terminal summary)."""
import json
import math
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from supnorm import archimedean as arch
from supnorm import bounds, characters, finite_gl2, hecke, lattice, local_whittaker as lw
from supnorm.padic import DomainError, TruncatedPAdic

# pinned tolerances and time limits (seconds)
EXACT = 0
PS_TOL = 1e-9
ORTHO_TOL = 1e-6
CHAR_C = 4.0
LOCAL_C = 2.0
LOCAL_EPS = 0.01
BESSEL_REL = 1e-7
MASS_RANGE = (0.99, 1.0)
SLOPE_MAX = 4.2
LIMITS = {1: 1, 2: 30, 3: 5, 4: 10, 5: 120, 6: 60, 7: 10, 8: 300, 9: 5, 10: 5, 11: 180, 12: 1, 13: 30, 14: 900}


def primitive_chars(p, a):
    return [chi for chi in characters.enumerate_X(p, a) if characters.conductor(chi) == a]


def units(p, k):
    return [u for u in range(1, p ** k) if u % p]


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_1_dimensions(criterion):
    expected = {"PS": lambda p, m: p ** m + p ** (m - 1), "St": lambda p, m: p,
                "SC_even": lambda p, m: p ** m - p ** (m - 1), "SC_odd": lambda p, m: p ** m - p ** (m - 2)}
    bad, n = [], 0
    with Clock() as c:
        for p in (3, 5, 7):
            for m in (1, 2):
                for case, dim in expected.items():
                    if (case == "St" and m != 1) or (case == "SC_odd" and m < 2):
                        continue
                    chi = primitive_chars(p, m)[0] if case == "PS" else None
                    d = lw.describe(case, p, m, chi).d
                    n += 1
                    if d != dim(p, m):
                        bad.append((case, p, m, d))
    criterion(1, not bad and c.seconds < LIMITS[1],
              f"{n} (case, p, m) exact dimension matches, mismatches {bad}, {c.seconds:.2f}s < {LIMITS[1]}s "
              "(SC_odd needs m >= 2)")


def test_2_cosets(criterion):
    sizes = {}
    with Clock() as c:
        for p, m in ((3, 1), (3, 2), (5, 1)):
            assert len(lw.coset_reps(p, m)) == p ** m + p ** (m - 1)
            sizes[(p, m)] = lw.verify_coset_reps(p, m)
    ok = all(sizes[k] == finite_gl2.group_order(*k) for k in sizes) and c.seconds < LIMITS[2]
    criterion(2, ok, f"cover and disjointness over |G| = {list(sizes.values())}, {c.seconds:.2f}s < {LIMITS[2]}s")


def test_3_steinberg(criterion):
    equal = 0
    with Clock() as c:
        for p in (3, 5, 7):
            for v in range(-3, 4):
                y = TruncatedPAdic(p, v, 1, 6)
                equal += lw.steinberg_SV(p, y) == lw.steinberg_oracle(p, y)
        spots = all(lw.steinberg_SV(p, TruncatedPAdic(p, -1, 1, 6)) == p
                    and lw.steinberg_SV(p, TruncatedPAdic(p, -2, 1, 6)) == 0 for p in (3, 5, 7))
    criterion(3, equal == 21 and spots and c.seconds < LIMITS[3],
              f"exact S_V = oracle on {equal}/21, spots v=-1 -> p, v=-2 -> 0: {spots}, {c.seconds:.2f}s < {LIMITS[3]}s")


def test_4_supercuspidal(criterion):
    checked = mismatched = 0
    ortho = True
    with Clock() as c:
        for p, m in ((3, 1), (3, 2), (5, 1)):
            for case in ("SC_even", "SC_odd"):
                try:
                    desc = lw.describe(case, p, m)
                except DomainError:
                    continue  # conductor 2m - 1 = 1 is not supercuspidal
                g = lw.sc_gram_matrix(desc)
                ortho &= all(g[i][j] == (i == j) for i in range(len(g)) for j in range(len(g)))
                for v in range(-m - 1, 2):
                    for u in units(p, m + 1):
                        y = TruncatedPAdic(p, v, u, 2 * m + 2)
                        checked += 1
                        mismatched += lw.sc_average(desc, y) != lw.sc_kirillov_oracle(desc, y)
        spot = lw.sc_average(lw.describe("SC_even", 5, 1), TruncatedPAdic(5, -1, 1, 4))
    criterion(4, mismatched == 0 and ortho and spot == 4 and c.seconds < LIMITS[4],
              f"exact agreement {checked - mismatched}/{checked}, orthonormal basis {ortho}, "
              f"SC_even p=5 m=1 shell value {spot}, {c.seconds:.2f}s < {LIMITS[4]}s")


def test_5_principal_series(criterion):
    """Literal statement: every S_i(y) equals |y| delta_{v(y) = i - m}."""
    worst, off = 0.0, {}
    norm_err = 0.0
    with Clock() as c:
        for p in (3, 5):
            for m in (1, 2):
                for chi in primitive_chars(p, m):
                    for t in (0.0, 0.7):
                        desc = lw.describe("PS", p, m, chi, complex(0, t))
                        for v in range(-m - 1, 2):
                            for u in units(p, m + 1):
                                y = TruncatedPAdic(p, v, u, 2 * m + 2)
                                a = float(Fraction(p) ** -v)
                                for i in range(m + 1):
                                    s = lw.ps_partial_average(desc, i, y)
                                    err = abs(s - (a if v == i - m else 0.0))
                                    worst = max(worst, err)
                                    if err > PS_TOL:
                                        key = "i=0" if i == 0 else ("i=m" if i == m else "middle")
                                        off[key] = off.get(key, 0) + 1
                        for rep in lw.coset_reps(p, m):
                            norm_err = max(norm_err, abs(lw.ps_whittaker_norm(desc, rep) - (1 + 1 / p)))
    off.setdefault("middle", 0)
    ok = worst <= PS_TOL and norm_err <= PS_TOL and c.seconds < LIMITS[5]
    criterion(5, ok, f"max |S_i - |y| delta| = {worst:.3g} (tol {PS_TOL}), violations by block {off}; "
                     f"norm error {norm_err:.2e}; {c.seconds:.1f}s < {LIMITS[5]}s")


def test_6_gauss_closed_form(criterion):
    total = bad = 0
    with Clock() as c:
        for p in (3, 5):
            for a in (1, 2):
                for chi in primitive_chars(p, a):
                    for l in range(1, a + 2):
                        for k in range(-a - 1, 2):
                            for z in units(p, a + 1):
                                y = TruncatedPAdic(p, k, z, a + 2)
                                ref = characters.gauss_G(l, y, chi, exact=True)
                                got = characters.gauss_G_closed_form(l, k, z, chi, exact=True)
                                total += 1
                                bad += not (ref == got)
    criterion(6, bad == 0 and c.seconds < LIMITS[6],
              f"exact closed form = brute force on {total - bad}/{total}, {c.seconds:.1f}s < {LIMITS[6]}s")


def _all_descs():
    for p in (3, 5, 7):
        yield lw.describe("St", p)
    for p, m in ((3, 1), (3, 2), (5, 1)):
        yield lw.describe("SC_even", p, m)
    yield lw.describe("SC_odd", 3, 2)
    for p in (3, 5):
        for m in (1, 2):
            for chi in primitive_chars(p, m):
                for t in (0.0, 0.7):
                    yield lw.describe("PS", p, m, chi, complex(0, t))


def test_7_master_bound(criterion):
    worst, n = 0.0, 0
    with Clock() as c:
        for desc in _all_descs():
            for v in range(-2, 4):
                for u in units(desc.p, 1):
                    worst = max(worst, lw.local_bound_ratio(desc, v, u, LOCAL_EPS))
                    n += 1
    criterion(7, worst <= LOCAL_C + 1e-9 and c.seconds < LIMITS[7],
              f"max S(p^-m y) / (d^1.01 |y|) = {worst:.6f} <= {LOCAL_C} over {n} points, "
              f"{c.seconds:.2f}s < {LIMITS[7]}s")


def test_8_character_bound(criterion):
    with Clock() as c:
        table = finite_gl2.character_table(3, 2)
        row = table.row_orthogonality_error()
        col = table.column_orthogonality_error()
        reps = {d: finite_gl2.verify_character_bound(table, d) for d in (12, 6, 8)}
    measured = {d: round(r.max_ratio, 6) for d, r in reps.items()}
    ok = (table.group_order == 3888 and row <= ORTHO_TOL and col <= ORTHO_TOL
          and all(r.max_ratio <= CHAR_C for r in reps.values()) and reps[8].kind == "odd" and c.seconds < LIMITS[8])
    criterion(8, ok, f"|G| = {table.group_order}, orthogonality {max(row, col):.1e} <= {ORTHO_TOL}, "
                     f"max ratios (dim: value) {measured} <= {CHAR_C} (dim 8 against p^((2+lambda)/2)), "
                     f"{c.seconds:.2f}s < {LIMITS[8]}s")


def test_9_hecke(criterion):
    with Clock() as c:
        results = {l: hecke.oracle_product(l, 1, 1) == {l * l: 1, 1: 1}
                   and hecke.convolve(hecke.HeckeElement.kappa(l), hecke.HeckeElement.kappa(l)).coeffs == {1: 1, l * l: 1}
                   for l in (2, 3, 5)}
    criterion(9, all(results.values()) and c.seconds < LIMITS[9],
              f"kappa_l * kappa_l = kappa_l^2 + kappa_1 against double cosets {results}, {c.seconds:.2f}s")


def test_10_amplifier(criterion):
    with Clock() as c:
        S = hecke.build_S(11, 100)
        pairs_ok = all(l1 % 11 != 1 and l1 * l2 % 11 != 1 and (l1 * l2) ** 2 % 11 != 1 for l1 in S for l2 in S)
        amp = hecke.build_f_ur(S, lambda r: 1, 11)
        real = all(isinstance(v, (int, Fraction, float)) for v in amp.f_ur.coeffs.values())
    ok = pairs_ok and len(S) >= 15 and real and amp.y1 >= len(amp.effective_l) and c.seconds < LIMITS[10]
    criterion(10, ok, f"|S| = {len(S)} >= 15, pairwise constraints {pairs_ok}, real coefficients {real}, "
                      f"y_1 = {amp.y1} >= |S_eff| = {len(amp.effective_l)}, {c.seconds:.2f}s")


def test_11_counting(criterion):
    rng = random.Random(20240611)
    agree = 0
    c_zero = True
    with Clock() as c:
        for _ in range(50):
            r = rng.randint(1, 50)
            z = lattice.UpperHalfPoint(rng.uniform(-0.5, 0.5), rng.uniform(1.0, 5.0))
            n = rng.choice((9, 25))
            g = tuple(rng.randrange(n) for _ in range(4))
            got = lattice.count_congruent(r, z, n, g, want_list=True)
            naive = lattice.count_naive(r, z, n, g)
            agree += got.count == len(naive) and sorted(map(tuple, got.matrices.tolist())) == sorted(naive)
        for p, lam in ((5, 1), (3, 2), (7, 1), (5, 2)):
            for x in np.linspace(-0.5, 0.5, 5):
                for y in (math.sqrt(3) / 2, 1.0, 1.7, 3.0):
                    res = lattice.count_M_lambda(1, lam, lattice.UpperHalfPoint(float(x), y), p, want_list=True)
                    c_zero &= bool((res.matrices[:, 2] == 0).all())
        fit = lattice.fit_lambda_slope()
    ok = agree == 50 and c_zero and fit["slope"] <= SLOPE_MAX and c.seconds < LIMITS[11]
    criterion(11, ok, f"optimized = naive on {agree}/50, c = 0 on M^(lambda)(1) for p^lambda >= 4: {c_zero}, "
                      f"Lambda-slope {fit['slope']:.3f} <= {SLOPE_MAX} (p={fit['p']}, y={fit['y']}), "
                      f"{c.seconds:.1f}s < {LIMITS[11]}s")


def test_12_exponents(criterion):
    with Clock() as c:
        main = bounds.crossover(bounds.WHITTAKER_PHI2, bounds.main_chain())
        odd = bounds.crossover(bounds.WHITTAKER_PHI2, bounds.sc_odd_chain())
    ok = (main.phi_exponent, main.beta_star, odd.phi_exponent, odd.beta_star) == (
        Fraction(5, 6), Fraction(1, 2), Fraction(11, 12), Fraction(1, 4)) and c.seconds < LIMITS[12]
    criterion(12, ok, f"Phi-exponents main {main.phi_exponent} (beta* {main.beta_star}), "
                      f"odd {odd.phi_exponent} (beta* {odd.beta_star}), exact rationals, {c.seconds:.3f}s")


def test_13_archimedean(criterion):
    worst = 0.0
    with Clock() as c:
        for t in (0.0, 1.0, 5.0):
            for x in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
                ref = arch.bessel_K_series(t, x)
                worst = max(worst, abs(arch.bessel_K(t, x) - ref) / abs(ref))
        masses = {t: float(arch.normalization_mass(arch.SpectralParams(t))) for t in (0.0, 1.0, 5.0)}
    ok = worst <= BESSEL_REL and all(MASS_RANGE[0] <= v <= MASS_RANGE[1] for v in masses.values()) \
        and c.seconds < LIMITS[13]
    criterion(13, ok, f"bessel_K vs series max rel err {worst:.2e} <= {BESSEL_REL}, masses "
                      f"{ {t: round(v, 6) for t, v in masses.items()} } in {list(MASS_RANGE)}, {c.seconds:.1f}s")


@pytest.mark.slow
def test_14_determinism(criterion, tmp_path):
    outs, codes = [], []
    with Clock() as c:
        for k in range(2):
            target = tmp_path / f"run{k}.json"
            proc = subprocess.run([sys.executable, "-m", "supnorm", "--seed", "7", "--json", str(target),
                                   "verify-all", "--quiet"], capture_output=True)
            codes.append(proc.returncode)
            outs.append(target.read_bytes())
    status = json.loads(outs[0])["status"]
    ok = outs[0] == outs[1] and c.seconds < LIMITS[14] and codes[0] == (1 if status == "fail" else 0)
    criterion(14, ok, f"two verify-all runs byte-identical: {outs[0] == outs[1]} ({len(outs[0])} bytes), "
                      f"overall {status}, exit {codes}, {c.seconds:.0f}s for both < {LIMITS[14]}s")
