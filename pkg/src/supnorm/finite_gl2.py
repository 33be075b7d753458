"""GL2(Z/p^m): enumeration, conjugacy classes, character tables and level sets.

Elements are encoded as integers ((a*n + b)*n + c)*n + d with n = p^m so that
whole-group operations run as numpy array arithmetic.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .cyclotomic import Cyclo
from .padic import DomainError, check_odd_prime, primitive_root

CENTRAL = "central"
DEFAULT_BUDGET = 10 ** 7


class ResourceError(RuntimeError):
    """An enumeration would exceed its configured budget."""


class SplittingError(RuntimeError):
    """Class-sum eigenvectors could not be separated numerically."""


@dataclass(frozen=True)
class ResidueMatrix:
    a: int
    b: int
    c: int
    d: int
    p: int
    m: int

    def __post_init__(self):
        n = self.p ** self.m
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) % n)

    @property
    def modulus(self) -> int:
        return self.p ** self.m

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.modulus

    def is_invertible(self) -> bool:
        return self.det % self.p != 0

    def __matmul__(self, o: "ResidueMatrix") -> "ResidueMatrix":
        return ResidueMatrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                             self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
                             self.p, self.m)

    def inverse(self) -> "ResidueMatrix":
        if not self.is_invertible():
            raise DomainError("matrix is not invertible")
        t = pow(self.det, -1, self.modulus)
        return ResidueMatrix(self.d * t, -self.b * t, -self.c * t, self.a * t, self.p, self.m)

    @property
    def code(self) -> int:
        n = self.modulus
        return ((self.a * n + self.b) * n + self.c) * n + self.d

    @classmethod
    def from_code(cls, code: int, p: int, m: int) -> "ResidueMatrix":
        n = p ** m
        code, d = divmod(code, n)
        code, c = divmod(code, n)
        a, b = divmod(code, n)
        return cls(a, b, c, d, p, m)

    @classmethod
    def identity(cls, p: int, m: int) -> "ResidueMatrix":
        return cls(1, 0, 0, 1, p, m)


def group_order(p: int, m: int) -> int:
    check_odd_prime(p)
    if m < 1:
        raise DomainError("m must be >= 1")
    return p ** (4 * (m - 1)) * (p * p - 1) * (p * p - p)


def level_of(g: ResidueMatrix):
    """Largest lambda with z g = 1 mod p^lambda for some scalar z, or CENTRAL for scalars."""
    if not g.is_invertible():
        raise DomainError("level_of needs an invertible matrix")
    lam = 0
    while lam < g.m:
        q = g.p ** (lam + 1)
        if g.b % q or g.c % q or (g.a - g.d) % q:
            break
        lam += 1
    return CENTRAL if lam == g.m else lam


# --- vectorized group arithmetic ----------------------------------------------------------


def _split(codes: np.ndarray, n: int):
    d = codes % n
    c = codes // n % n
    b = codes // (n * n) % n
    a = codes // (n * n * n)
    return a, b, c, d


def _join(a, b, c, d, n: int) -> np.ndarray:
    return ((a % n * n + b % n) * n + c % n) * n + d % n


def _mul(x, y, n: int):
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return ((a1 * a2 + b1 * c2) % n, (a1 * b2 + b1 * d2) % n,
            (c1 * a2 + d1 * c2) % n, (c1 * b2 + d1 * d2) % n)


def _inv(x, n: int, inv_table: np.ndarray):
    a, b, c, d = x
    t = inv_table[(a * d - b * c) % n]
    return (d * t % n, -b * t % n, -c * t % n, a * t % n)


def _inverse_table(p: int, n: int) -> np.ndarray:
    tab = np.zeros(n, dtype=np.int64)
    for u in range(n):
        if u % p:
            tab[u] = pow(u, -1, n)
    return tab


@dataclass
class GroupData:
    p: int
    m: int
    n: int
    codes: np.ndarray  # sorted codes of invertible matrices
    index: np.ndarray  # code -> position in codes, -1 if not invertible
    inv_table: np.ndarray

    @property
    def order(self) -> int:
        return len(self.codes)

    def elements(self):
        return _split(self.codes, self.n)


def enumerate_group(p: int, m: int, budget: int = DEFAULT_BUDGET) -> GroupData:
    check_odd_prime(p)
    n = p ** m
    if n ** 4 > 8 * budget or group_order(p, m) > budget:
        raise ResourceError(f"GL2(Z/{p}^{m}) has {group_order(p, m)} elements; budget is {budget}")
    allc = np.arange(n ** 4, dtype=np.int64)
    a, b, c, d = _split(allc, n)
    inv = (a * d - b * c) % p != 0
    codes = allc[inv]
    index = np.full(n ** 4, -1, dtype=np.int64)
    index[codes] = np.arange(len(codes))
    return GroupData(p, m, n, codes, index, _inverse_table(p, n))


def generators(p: int, m: int) -> list[tuple[int, int, int, int]]:
    return [(1, 1, 0, 1), (1, 0, 1, 1), (primitive_root(p), 0, 0, 1)]


@dataclass
class ClassData:
    group: GroupData
    labels: np.ndarray  # class id per group element (position in codes)
    reps: list[int]  # representative code per class
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.reps)


def conjugacy_classes(p: int, m: int, budget: int = DEFAULT_BUDGET) -> ClassData:
    """Orbits of conjugation by a generating set, found as graph components."""
    G = enumerate_group(p, m, budget)
    n = G.n
    x = G.elements()
    rows, cols = [], []
    for gen in generators(p, m):
        s = tuple(np.full_like(x[0], v) for v in gen)
        s_inv = _inv(s, n, G.inv_table)
        y = _mul(_mul(s, x, n), s_inv, n)
        rows.append(np.arange(G.order))
        cols.append(G.index[_join(*y, n)])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(G.order, G.order))
    ncomp, comp = connected_components(graph, directed=True, connection="weak")
    # order classes by their smallest element code so that the identity class comes early
    first = np.full(ncomp, G.order, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(G.order))
    order = np.argsort(first, kind="stable")
    relabel = np.empty(ncomp, dtype=np.int64)
    relabel[order] = np.arange(ncomp)
    labels = relabel[comp]
    reps = [int(G.codes[first[k]]) for k in order]
    sizes = np.bincount(labels, minlength=ncomp)
    ident = ResidueMatrix.identity(p, m).code
    id_class = labels[G.index[ident]]
    if sizes[id_class] != 1:
        raise AssertionError("identity class is not a singleton")
    return ClassData(G, labels, reps, sizes)


def class_of(cls: ClassData, g: ResidueMatrix) -> int:
    return int(cls.labels[cls.group.index[g.code]])


def class_multiplication(cls: ClassData) -> np.ndarray:
    """c[j, i, k] = #{x in C_j : x^{-1} g_k in C_i}."""
    G = cls.group
    n, r = G.n, cls.count
    x = G.elements()
    xinv = _inv(x, n, G.inv_table)
    cx = cls.labels
    out = np.zeros((r, r, r), dtype=np.int64)
    for k, rep in enumerate(cls.reps):
        g = tuple(np.full_like(x[0], v) for v in _split(np.int64(rep), n))
        yk = G.index[_join(*_mul(xinv, g, n), n)]
        ci = cls.labels[yk]
        out[:, :, k] = np.bincount(cx * r + ci, minlength=r * r).reshape(r, r)
    return out


@dataclass
class CharacterTable:
    p: int
    m: int
    reps: list[ResidueMatrix]
    sizes: np.ndarray
    values: np.ndarray  # rows = characters, columns = classes
    dims: np.ndarray
    levels: list
    seed: int
    exact_values: list[list[Cyclo]] | None = None

    @property
    def group_order(self) -> int:
        return int(self.sizes.sum())

    def inner(self, i: int, j: int) -> complex:
        return complex(np.sum(self.sizes * self.values[i] * np.conj(self.values[j])) / self.group_order)

    def row_orthogonality_error(self) -> float:
        gram = (self.values * self.sizes) @ self.values.conj().T / self.group_order
        return float(np.abs(gram - np.eye(len(self.dims))).max())

    def column_orthogonality_error(self) -> float:
        gram = self.values.conj().T @ self.values
        expected = np.diag(self.group_order / self.sizes)
        return float(np.abs(gram - expected).max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["character", "dim"] + [f"class{k}" for k in range(len(self.reps))])
        for i, row in enumerate(self.values):
            w.writerow([i, int(self.dims[i])] + [f"{v.real:.12g},{v.imag:.12g}" for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "p": self.p, "m": self.m, "seed": self.seed,
            "classes": [{"rep": [r.a, r.b, r.c, r.d], "size": int(s), "level": lv}
                        for r, s, lv in zip(self.reps, self.sizes, self.levels)],
            "dims": [int(d) for d in self.dims],
            "values": [[[round(v.real, 10) + 0.0, round(v.imag, 10) + 0.0] for v in row]
                       for row in self.values],
        }


def _split_eigen(mats: np.ndarray, sizes: np.ndarray, rng: np.random.Generator):
    r = mats.shape[0]
    coeffs = rng.standard_normal(r)
    M = np.tensordot(coeffs, mats.astype(float), axes=1)
    eigval, eigvec = np.linalg.eig(M)
    gaps = np.abs(eigval[:, None] - eigval[None, :]) + np.eye(r) * 1e300
    scale = max(1.0, float(np.abs(eigval).max()))
    if gaps.min() < 1e-7 * scale:
        return None
    return eigvec


def character_table(p: int, m: int, seed: int = 0, exact: bool = False,
                    budget: int = DEFAULT_BUDGET, retries: int = 8) -> CharacterTable:
    """Burnside-Dixon table: common eigenvectors of the class multiplication matrices."""
    cls = conjugacy_classes(p, m, budget)
    G = cls.group
    r = cls.count
    c = class_multiplication(cls)
    mats = c  # mats[j] has entries [i, k]
    id_class = class_of(cls, ResidueMatrix.identity(p, m))
    sizes = cls.sizes.astype(float)
    rng = np.random.default_rng(seed)
    eigvec = None
    for _ in range(retries):
        eigvec = _split_eigen(mats, sizes, rng)
        if eigvec is not None:
            break
    if eigvec is None:
        raise SplittingError(f"eigenvalues stayed degenerate after {retries} random combinations")
    omega = (eigvec / eigvec[id_class]).T  # rows: characters, columns: omega(K_k)
    deg2 = G.order / np.sum(np.abs(omega) ** 2 / sizes, axis=1)
    dims = np.rint(np.sqrt(deg2.real)).astype(np.int64)
    if np.abs(np.sqrt(deg2.real) - dims).max() > 1e-3:
        raise SplittingError("character degrees are not close to integers")
    values = omega * dims[:, None] / sizes[None, :]
    order = np.lexsort((np.round(values.real.sum(axis=1), 6), dims))
    values, dims = values[order], dims[order]
    # move the trivial character to the front
    triv = int(np.argmin(np.abs(values - 1).max(axis=1)))
    perm = [triv] + [i for i in range(r) if i != triv]
    values, dims = values[perm], dims[perm]
    reps = [ResidueMatrix.from_code(code, p, m) for code in cls.reps]
    levels = [level_of(g) for g in reps]
    table = CharacterTable(p, m, reps, cls.sizes.copy(), values, dims, levels, seed)
    if exact:
        table.exact_values = exact_character_values(table, cls)
    return table


def element_order(g: ResidueMatrix) -> int:
    x, k = g, 1
    ident = ResidueMatrix.identity(g.p, g.m)
    while x != ident:
        x = x @ g
        k += 1
    return k


def exact_character_values(table: CharacterTable, cls: ClassData) -> list[list[Cyclo]]:
    """Write each value as a sum of e-th roots of unity via eigenvalue multiplicities.

    For g of order e the multiplicity of zeta_e^t as an eigenvalue of sigma(g) is
    (1/e) sum_j chi(g^j) zeta_e^{-jt}; these are rounded to integers.
    """
    out = [[None] * len(table.reps) for _ in table.dims]
    for k, g in enumerate(table.reps):
        e = element_order(g)
        powers = []
        x = ResidueMatrix.identity(g.p, g.m)
        for _ in range(e):
            powers.append(class_of(cls, x))
            x = x @ g
        zeta = np.exp(-2j * np.pi * np.outer(np.arange(e), np.arange(e)) / e)
        for i in range(len(table.dims)):
            vals = table.values[i, powers]
            mult = vals @ zeta / e
            rounded = np.rint(mult.real).astype(np.int64)
            if np.abs(mult - rounded).max() > 1e-4 or (rounded < 0).any():
                raise SplittingError(f"non-integral eigenvalue multiplicities at class {k}")
            out[i][k] = Cyclo(e, {t: Fraction(int(cnt)) for t, cnt in enumerate(rounded) if cnt})
    return out


# --- character bound ----------------------------------------------------------------------


def dimension_classes(p: int, m: int) -> dict[str, int]:
    out = {"plus": p ** m + p ** (m - 1), "minus": p ** m - p ** (m - 1)}
    if m >= 2:
        out["odd"] = p ** m - p ** (m - 2)
    return out


@dataclass
class BoundReport:
    dimension: int
    kind: str
    max_ratio_by_level: dict[int, float]
    rows: int
    constant: float

    @property
    def max_ratio(self) -> float:
        return max(self.max_ratio_by_level.values(), default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_ratio <= self.constant

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "kind": self.kind, "rows": self.rows,
                "constant": self.constant, "max_ratio": round(self.max_ratio, 10),
                "max_ratio_by_level": {str(k): round(v, 10)
                                       for k, v in sorted(self.max_ratio_by_level.items())},
                "status": "pass" if self.ok else "fail"}


def verify_character_bound(table: CharacterTable, dimension_class, constant: float = 4.0) -> BoundReport:
    """Worst |chi(g)| / envelope(level g) over rows of the given dimension and non-central g.

    The envelope is p^lambda, or p^{(m+lambda)/2} for the p^m(1 - p^-2) dimension class.
    """
    p, m = table.p, table.m
    named = dimension_classes(p, m)
    if isinstance(dimension_class, str):
        if dimension_class not in named:
            raise DomainError(f"dimension class {dimension_class!r} not defined for m = {m}")
        dim = named[dimension_class]
    else:
        dim = int(dimension_class)
    rows = [i for i, d in enumerate(table.dims) if d == dim]
    if not rows:
        raise DomainError(f"no irreducible of dimension {dim}; available: {sorted(set(map(int, table.dims)))}")
    odd = dim == named.get("odd")
    best: dict[int, float] = {}
    for k, lam in enumerate(table.levels):
        if lam == CENTRAL:
            continue
        env = p ** ((m + lam) / 2) if odd else p ** lam
        ratio = float(np.abs(table.values[rows, k]).max()) / env
        best[lam] = max(best.get(lam, 0.0), ratio)
    return BoundReport(dim, "odd" if odd else "p^lambda", best, len(rows), constant)


def magnitudes_ok(table: CharacterTable, tol: float = 1e-6) -> bool:
    """|chi(g)| <= chi(1) everywhere, with equality on scalar classes."""
    mags = np.abs(table.values)
    if (mags > table.dims[:, None] + tol).any():
        return False
    central = [k for k, lam in enumerate(table.levels) if lam == CENTRAL]
    return bool(np.abs(mags[:, central] - table.dims[:, None]).max() <= tol)


def sum_of_squares_ok(table: CharacterTable) -> bool:
    return sum(int(d) ** 2 for d in table.dims) == table.group_order
