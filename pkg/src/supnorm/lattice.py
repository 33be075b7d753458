"""Counting integral matrices A with det A = r, a congruence condition and u(Az, z) <= 1.

With sigma_z = [[y^{1/2}, x y^{-1/2}], [0, y^{-1/2}]], u(Az, z) <= 1 is equivalent to
||sigma_z^{-1} A sigma_z||_F^2 <= 3r.  For a 2x2 matrix of determinant r this pins the
squared bottom-row norm c^2 y^2 + (cx + d)^2 to [r / phi^2, r phi^2] (phi the golden
ratio), which gives the (c, d) annulus scanned below; a then runs over an arithmetic
progression and b is solved from the determinant.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .finite_gl2 import ResourceError
from .padic import DomainError

PHI = (1 + math.sqrt(5)) / 2
DEFAULT_BOX_BUDGET = 5 * 10 ** 9


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError("point must lie in the upper half plane")

    def in_fundamental_domain(self) -> bool:
        return abs(self.x) <= 0.5 and self.x * self.x + self.y * self.y >= 1

    @property
    def exact(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.x), Fraction(self.y)


def reduce_to_fundamental_domain(z: UpperHalfPoint, max_steps: int = 10 ** 4) -> UpperHalfPoint:
    x, y = z.x, z.y
    for _ in range(max_steps):
        x -= math.floor(x + 0.5)
        n = x * x + y * y
        if n >= 1:
            return UpperHalfPoint(x, y)
        x, y = -x / n, y / n
    raise RuntimeError("reduction did not terminate")


def point_pair_u(z1: UpperHalfPoint, z2: UpperHalfPoint) -> float:
    """|z1 - z2|^2 / (Im z1 Im z2)."""
    return ((z1.x - z2.x) ** 2 + (z1.y - z2.y) ** 2) / (z1.y * z2.y)


def point_pair_u_exact(x1, y1, x2, y2) -> Fraction:
    x1, y1, x2, y2 = map(Fraction, (x1, y1, x2, y2))
    if y1 <= 0 or y2 <= 0:
        raise DomainError("point must lie in the upper half plane")
    return ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (y1 * y2)


def mobius_exact(a: int, b: int, c: int, d: int, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    """A z for rational z = x + iy, as exact real and imaginary parts."""
    nr, ni = a * x + b, a * y
    dr, di = c * x + d, c * y
    den = dr * dr + di * di
    return (nr * dr + ni * di) / den, (ni * dr - nr * di) / den


def u_of_matrix_exact(a: int, b: int, c: int, d: int, x: Fraction, y: Fraction) -> Fraction:
    wx, wy = mobius_exact(a, b, c, d, x, y)
    return point_pair_u_exact(wx, wy, x, y)


def _inside_exact(a, b, c, d, r, x: Fraction, y: Fraction) -> bool:
    t = a - d
    R = -c * (x * x - y * y) + t * x + b
    I = y * (t - 2 * c * x)
    return R * R + I * I <= r * y * y


# --- numba kernel -------------------------------------------------------------------------


@numba.njit(cache=True)
def _inv_mod(a, m):
    g, x0, x1, r0, r1 = 0, 1, 0, a % m, m
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
    return x0 % m


@numba.njit(cache=True)
def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


@numba.njit(cache=True)
def _first_at_least(lo, residue, n):
    """Smallest integer >= lo congruent to residue mod n."""
    return lo + ((residue - lo) % n)


@numba.njit(cache=True)
def _classify(a, b, c, d, r, x, y, tol):
    t = a - d
    R = -c * (x * x - y * y) + t * x + b
    I = y * (t - 2.0 * c * x)
    q = R * R + I * I - r * y * y
    scale = 1.0 + r * y * y
    if q < -tol * scale:
        return 1
    if q > tol * scale:
        return 0
    return 2


PHI_C = PHI * (1 + 1e-12)
PHI2_C = PHI * PHI * (1 + 1e-12)


@numba.njit(cache=True)
def _record(buf, k, a, b, c, d):
    if k < buf.shape[0]:
        buf[k, 0] = a
        buf[k, 1] = b
        buf[k, 2] = c
        buf[k, 3] = d
    return k + 1


@numba.njit(cache=True)
def _progression_count(lo, hi, residue, step):
    """Integers a = residue mod step with lo <= a <= hi (lo, hi integers)."""
    if hi < lo:
        return 0
    first = _first_at_least(lo, residue, step)
    if first > hi:
        return 0
    return (hi - first) // step + 1


@numba.njit(cache=True)
def _scan(r, x, y, n, ga, gb, gc, gd, collect, out, border, tol):
    """Count (and optionally store) matrices with det r, A = g mod n, u(Az, z) <= 1.

    Returns (n_sure, n_border); border rows need an exact recheck.
    """
    n_in = 0
    n_b = 0
    sr = math.sqrt(r)
    ryy = r * y * y
    cmax = int(PHI_C * sr / y) + 1
    c0 = _first_at_least(-cmax, gc, n)
    gtab = np.empty(cmax + 1, dtype=np.int64)
    rtab = np.empty(cmax + 1, dtype=np.int64)
    for c in range(c0, cmax + 1, n):
        ac = abs(c)
        if c != 0:
            # ad = r mod |c| depends on d mod |c| only
            for dm in range(ac):
                g = _gcd(dm, ac)
                gtab[dm] = g
                if r % g != 0:
                    rtab[dm] = -1
                else:
                    st = ac // g
                    rtab[dm] = 0 if st == 1 else ((r // g) % st) * _inv_mod((dm // g) % st, st) % st
        rem = PHI2_C * r - c * c * y * y
        if rem < 0:
            rem = 0.0
        s = math.sqrt(rem)
        dlo = int(math.floor(-c * x - s)) - 1
        dhi = int(math.ceil(-c * x + s)) + 1
        d0 = _first_at_least(dlo, gd, n)
        for d in range(d0, dhi + 1, n):
            if c == 0:
                if d == 0 or r % d != 0:
                    continue
                a = r // d
                if (a - ga) % n != 0:
                    continue
                t = a - d
                rad = ryy - (y * t) * (y * t)
                if rad < -tol * (1.0 + ryy):
                    continue
                sb = math.sqrt(max(rad, 0.0))
                blo = int(math.floor(-t * x - sb)) - 1
                bhi = int(math.ceil(-t * x + sb)) + 1
                b0 = _first_at_least(blo, gb, n)
                for b in range(b0, bhi + 1, n):
                    k = _classify(a, b, c, d, r, x, y, tol)
                    if k == 1:
                        n_in = _record(out, n_in, a, b, c, d) if collect else n_in + 1
                    elif k == 2:
                        n_b = _record(border, n_b, a, b, c, d)
                continue
            dm = d % ac
            a_res = rtab[dm]
            if a_res < 0:
                continue
            step = ac // gtab[dm]
            # with b = (ad - r)/c both parts of -c z^2 + (a - d) z + b are linear in a
            aR = x + d / c
            bR = -c * (x * x - y * y) - d * x - r / c
            bI = -y * (d + 2.0 * c * x)
            A2 = aR * aR + y * y
            B = aR * bR + y * bI
            C = bR * bR + bI * bI - ryy
            disc = B * B - A2 * C
            center = -B / A2
            scale = abs(B) + math.sqrt(abs(A2 * C)) + 1.0
            if disc < -1e-9 * scale * scale:
                continue
            half = math.sqrt(max(disc, 0.0)) / A2
            delta = 1e-6 * (1.0 + abs(center) + half)
            lo_out = int(math.floor(center - half - delta))
            hi_out = int(math.ceil(center + half + delta))
            lo_in = int(math.ceil(center - half + delta))
            hi_in = int(math.floor(center + half - delta))
            fast = n == 1 and not collect
            if fast and hi_in >= lo_in:
                n_in += _progression_count(lo_in, hi_in, a_res, step)
            a0 = _first_at_least(lo_out, a_res, step)
            for a in range(a0, hi_out + 1, step):
                inner = lo_in <= a <= hi_in
                if fast and inner:
                    continue
                if n > 1 and (a - ga) % n != 0:
                    continue
                b = (a * d - r) // c
                if n > 1 and (b - gb) % n != 0:
                    continue
                k = 1 if inner else _classify(a, b, c, d, r, x, y, tol)
                if k == 1:
                    n_in = _record(out, n_in, a, b, c, d) if collect else n_in + 1
                elif k == 2:
                    n_b = _record(border, n_b, a, b, c, d)
    return n_in, n_b


@dataclass
class CountResult:
    count: int
    matrices: np.ndarray | None
    border_checked: int

    def to_dict(self, with_list: bool = False) -> dict:
        out = {"count": self.count, "border_checked": self.border_checked}
        if with_list and self.matrices is not None:
            out["matrices"] = self.matrices.tolist()
        return out


def _target(g, n: int) -> tuple[int, int, int, int]:
    if g is None:
        return (0, 0, 0, 0)
    if hasattr(g, "a"):
        return (g.a % n, g.b % n, g.c % n, g.d % n)
    a, b, c, d = g
    return (a % n, b % n, c % n, d % n)


def count_congruent(r: int, z: UpperHalfPoint, n: int = 1, g=None, want_list: bool = False,
                    budget: float = DEFAULT_BOX_BUDGET, tol: float = 1e-9) -> CountResult:
    """Matrices with det r, A = g mod n and u(Az, z) <= 1 (n = 1: no congruence)."""
    if r < 1:
        raise DomainError("r must be >= 1")
    if n < 1:
        raise DomainError("modulus must be >= 1")
    box = (2 * PHI * math.sqrt(r) / z.y + 1) * (2 * PHI * math.sqrt(r) + 1) / n / n
    if box > budget:
        raise ResourceError(f"(c, d) scan of about {box:.3g} pairs exceeds budget {budget:.3g}")
    ga, gb, gc, gd = _target(g, n)
    cap = 1024 if want_list else 0
    cap_b = 64
    while True:
        out = np.zeros((cap, 4), dtype=np.int64)
        border = np.zeros((cap_b, 4), dtype=np.int64)
        n_in, n_b = _scan(r, float(z.x), float(z.y), n, ga, gb, gc, gd, want_list, out, border, tol)
        if (want_list and n_in > cap) or n_b > cap_b:
            cap = max(cap, n_in) if want_list else 0
            cap_b = max(cap_b, n_b)
            continue
        break
    x, y = z.exact
    extra = [tuple(int(v) for v in row) for row in border[:n_b]
             if _inside_exact(int(row[0]), int(row[1]), int(row[2]), int(row[3]), r, x, y)]
    mats = None
    if want_list:
        rows = out[:n_in]
        if extra:
            rows = np.vstack([rows, np.array(extra, dtype=np.int64)])
        order = np.lexsort(rows.T[::-1])
        mats = rows[order]
    return CountResult(n_in + len(extra), mats, n_b)


def count_M(r: int, g, z: UpperHalfPoint, p: int, m: int, want_list: bool = False) -> CountResult:
    """#{A in M_2(Z): det A = r, A = g mod p^m, u(Az, z) <= 1}."""
    return count_congruent(r, z, p ** m, g, want_list)


def count_M_lambda(r: int, lam: int, z: UpperHalfPoint, p: int, m: int | None = None,
                   want_list: bool = False) -> CountResult:
    """Matrices congruent to the identity mod p^lambda (lambda = 0: no condition)."""
    if lam < 0 or (m is not None and lam > m):
        raise DomainError("lambda out of range")
    return count_congruent(r, z, p ** lam, (1, 0, 0, 1), want_list)


def count_naive(r: int, z: UpperHalfPoint, n: int = 1, g=None) -> list[tuple[int, int, int, int]]:
    """Box scan with generous entry bounds, a determinant filter and an exact Mobius test."""
    x, y = z.exact
    sr = math.sqrt(r)
    ax = abs(z.x)
    Bc = int(3 * sr / z.y) + 1
    Bd = int(3 * sr + Bc * ax) + 1
    Ba = Bd
    Bb = int(3 * sr * z.y + (Ba + Bd) * ax + Bc * ax * ax) + 1
    ga, gb, gc, gd = _target(g, n)
    A = np.arange(-Ba, Ba + 1)[:, None, None]
    D = np.arange(-Bd, Bd + 1)[None, :, None]
    B = np.arange(-Bb, Bb + 1)[None, None, :]
    found = []
    for c in range(-Bc, Bc + 1):
        mask = (A * D - B * c == r)
        if n > 1:
            mask &= ((A - ga) % n == 0) & ((D - gd) % n == 0) & ((B - gb) % n == 0) & ((c - gc) % n == 0)
        ia, id_, ib = np.nonzero(mask)
        for i, j, k in zip(ia, id_, ib):
            a, d, b = int(A[i, 0, 0]), int(D[0, j, 0]), int(B[0, 0, k])
            if u_of_matrix_exact(a, b, c, d, x, y) <= 1:
                found.append((a, b, c, d))
    return sorted(found)


def c_bound(r: int, y: float) -> float:
    return 2 ** 1.5 * math.sqrt(r) / y


def check_members(mats: np.ndarray, r: int, z: UpperHalfPoint, n: int = 1, g=None) -> list[str]:
    """Re-check enumerated rows exactly; returns a list of violations (empty when clean)."""
    x, y = z.exact
    ga, gb, gc, gd = _target(g, n)
    bad = []
    for row in mats.tolist():
        a, b, c, d = row
        if a * d - b * c != r:
            bad.append(f"{row}: det != {r}")
        if n > 1 and ((a - ga) % n or (b - gb) % n or (c - gc) % n or (d - gd) % n):
            bad.append(f"{row}: not congruent to target mod {n}")
        if u_of_matrix_exact(a, b, c, d, x, y) > 1:
            bad.append(f"{row}: u > 1")
        if abs(c) > c_bound(r, z.y):
            bad.append(f"{row}: |c| above 2^(3/2) sqrt(r)/y")
    return bad


# --- geometric side -----------------------------------------------------------------------


def character_envelope(desc, lam: int) -> float:
    p, m = desc.p, desc.m
    if desc.case == "SC_odd":
        return p ** ((m + lam) / 2)
    return float(p ** lam)


@dataclass
class GeometricSide:
    lemma: float
    table: float | None
    terms: list[dict]

    @property
    def ratio(self) -> float | None:
        if self.table is None or self.lemma == 0:
            return None
        return self.table / self.lemma

    def to_dict(self) -> dict:
        return {"lemma": self.lemma, "table": self.table,
                "table_over_lemma": self.ratio, "terms": self.terms}


def geometric_side(z: UpperHalfPoint, f_ur, desc, chi_bound_mode: str = "lemma",
                   table=None) -> GeometricSide:
    """sum_r |y_r| / sqrt(r) sum_lambda env(lambda) #M^(lambda)(r), and the table variant.

    The table variant replaces the envelope by max over rows of dimension d of
    |chi(A mod p^m)| summed over each matrix of M^(0)(r).
    """
    if chi_bound_mode not in ("lemma", "table", "both"):
        raise DomainError("chi_bound_mode must be lemma, table or both")
    p, m = desc.p, desc.m
    lemma_total = 0.0
    table_total = 0.0 if chi_bound_mode in ("table", "both") else None
    if table_total is not None:
        if table is None:
            raise DomainError("table mode needs a character table")
        from .finite_gl2 import conjugacy_classes
        cls = conjugacy_classes(p, m)
        rows = [i for i, dd in enumerate(table.dims) if round(float(dd)) == desc.d]
        if not rows:
            raise DomainError(f"no row of dimension {desc.d} in the table")
        worst = np.abs(table.values[rows]).max(axis=0)
        n = p ** m
    terms = []
    for r, coeff in f_ur.coeffs.items():
        w = abs(coeff) / math.sqrt(r)
        counts = [count_M_lambda(r, lam, z, p, m).count for lam in range(m + 1)]
        lemma_r = sum(character_envelope(desc, lam) * cnt for lam, cnt in enumerate(counts))
        lemma_total += w * lemma_r
        entry = {"r": r, "weight": w, "counts_by_lambda": counts, "lemma": lemma_r}
        if table_total is not None:
            mats = count_congruent(r, z, 1, None, want_list=True).matrices
            codes = ((mats[:, 0] % n * n + mats[:, 1] % n) * n + mats[:, 2] % n) * n + mats[:, 3] % n
            labels = cls.labels[cls.group.index[codes]]
            tab_r = float(worst[labels].sum())
            table_total += w * tab_r
            entry["table"] = tab_r
        terms.append(entry)
    return GeometricSide(lemma_total, table_total, terms)


def lambda_zero_block(f_ur, z: UpperHalfPoint) -> float:
    """sum_r |y_r| / sqrt(r) #M^(0)(r): the unrestricted part of the geometric side."""
    return sum(abs(c) / math.sqrt(r) * count_congruent(r, z).count for r, c in f_ur.coeffs.items())


# p far above the window keeps every window prime in S, so |S| grows smoothly with Lambda;
# a large y shrinks the (c, d) scan without changing the dominant counts
FIT_GRID = (10, 13, 16, 19, 22, 25)
FIT_Y = 20.0
FIT_P = 1009


def fit_lambda_slope(lams=FIT_GRID, y: float = FIT_Y, p: int = FIT_P, lambda_source=lambda r: 1) -> dict:
    """Least-squares slope of log(lambda-0 block) against log(Lambda)."""
    from .hecke import build_S, build_f_ur

    z = UpperHalfPoint(0.0, y)
    vals, sizes, times = [], [], []
    for L in lams:
        t0 = time.perf_counter()
        S = build_S(p, L)
        amp = build_f_ur(S, lambda_source, p)
        vals.append(lambda_zero_block(amp.f_ur, z))
        sizes.append(len(S))
        times.append(time.perf_counter() - t0)
    slope, intercept = np.polyfit(np.log(lams), np.log(vals), 1)
    return {"Lambda": list(lams), "y": y, "p": p, "block": vals, "S_sizes": sizes,
            "slope": float(slope), "seconds": times}
