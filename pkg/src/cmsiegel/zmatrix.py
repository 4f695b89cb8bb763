"""Exact matrices over Z and Z/NZ: similitude checks, decomposition, brute-force
enumeration and lifting from Sp_2g(Z/NZ) to Sp_2g(Z).

Integral matrices are plain tuples of row tuples.  Residue matrices are wrapped
in :class:`ModMatrix`, which keeps every entry reduced into ``[0, N)``.

Lifting works with elementary symplectic row operations on an integer
representative.  Every operation is itself an integral symplectic matrix, so
it lifts verbatim; representatives are changed by multiples of N whenever that
lets a Euclidean step finish.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, NotExtendable, NotSimilitude, NotSp

IntMatrix = tuple[tuple[int, ...], ...]

DEFAULT_BUDGET = 10**8


# -- plain integer matrix helpers ---------------------------------------------

def as_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(int(x) for x in r) for r in rows)


def identity(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def zeros(r: int, c: int) -> IntMatrix:
    return tuple((0,) * c for _ in range(r))


def eta(g: int) -> IntMatrix:
    """The standard alternating matrix [[O, -I], [I, O]]."""
    n = 2 * g
    rows = [[0] * n for _ in range(n)]
    for i in range(g):
        rows[i][g + i] = -1
        rows[g + i][i] = 1
    return as_matrix(rows)


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def transpose(a: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(zip(*a))


def mat_mod(a: Sequence[Sequence[int]], n: int) -> IntMatrix:
    return tuple(tuple(x % n for x in row) for row in a)


def scale(a: Sequence[Sequence[int]], k: int) -> IntMatrix:
    return tuple(tuple(k * x for x in row) for row in a)


def blocks(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix, IntMatrix]:
    """Split a 2g x 2g matrix into its g x g blocks A, B, C, D."""
    g = len(m) // 2
    A = tuple(tuple(r[:g]) for r in m[:g])
    B = tuple(tuple(r[g:]) for r in m[:g])
    C = tuple(tuple(r[:g]) for r in m[g:])
    D = tuple(tuple(r[g:]) for r in m[g:])
    return A, B, C, D


def from_blocks(A, B, C, D) -> IntMatrix:
    top = [tuple(a) + tuple(b) for a, b in zip(A, B)]
    bot = [tuple(c) + tuple(d) for c, d in zip(C, D)]
    return as_matrix(top + bot)


def similitude_form(m: Sequence[Sequence[int]]) -> IntMatrix:
    """m^T eta m."""
    g = len(m) // 2
    return mat_mul(mat_mul(transpose(m), eta(g)), m)


def is_symplectic(m: Sequence[Sequence[int]]) -> bool:
    """Exact test of m^T eta m = eta over Z."""
    if len(m) % 2 or any(len(r) != len(m) for r in m):
        return False
    return similitude_form(m) == eta(len(m) // 2)


def symplectic_inverse(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Inverse of an integral symplectic matrix, -eta m^T eta."""
    g = len(m) // 2
    e = eta(g)
    return scale(mat_mul(mat_mul(e, transpose(m)), e), -1)


def matrix_to_json(m: Sequence[Sequence[int]]) -> list[list[str]]:
    return [[str(int(x)) for x in row] for row in m]


def matrix_from_json(data: Sequence[Sequence[str | int]]) -> IntMatrix:
    return as_matrix([[int(x) for x in row] for row in data])


# -- residue matrices -----------------------------------------------------------

@dataclass(frozen=True)
class ModMatrix:
    entries: IntMatrix
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be >= 2")
        n = len(self.entries)
        if n == 0 or n % 2 or any(len(r) != n for r in self.entries):
            raise ValueError("matrix must be square of even dimension")
        object.__setattr__(self, "entries", mat_mod(self.entries, self.modulus))

    @property
    def genus(self) -> int:
        return len(self.entries) // 2

    def __matmul__(self, other: ModMatrix) -> ModMatrix:
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")
        return ModMatrix(mat_mul(self.entries, other.entries), self.modulus)

    def transpose(self) -> ModMatrix:
        return ModMatrix(transpose(self.entries), self.modulus)

    def negate(self) -> ModMatrix:
        return ModMatrix(scale(self.entries, -1), self.modulus)

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "entries": matrix_to_json(self.entries)}


@dataclass(frozen=True)
class GSpElement:
    matrix: ModMatrix
    multiplier: int

    @property
    def modulus(self) -> int:
        return self.matrix.modulus

    @property
    def genus(self) -> int:
        return self.matrix.genus

    @property
    def entries(self) -> IntMatrix:
        return self.matrix.entries

    def __matmul__(self, other: GSpElement) -> GSpElement:
        return GSpElement(self.matrix @ other.matrix,
                          self.multiplier * other.multiplier % self.modulus)

    def inverse(self) -> GSpElement:
        # alpha^{-1} = nu^{-1} eta^{-1} alpha^T eta
        N = self.modulus
        g = self.genus
        nu_inv = pow(self.multiplier, -1, N)
        e = eta(g)
        inv = scale(mat_mul(mat_mul(e, transpose(self.entries)), e), -nu_inv)
        return GSpElement(ModMatrix(inv, N), nu_inv)

    def canonical(self) -> GSpElement:
        """Representative of the class modulo {+I, -I}.

        The first nonzero entry (row-major) is brought into [1, N/2]; when it
        equals N/2 the lexicographically smaller of the pair wins.
        """
        N = self.modulus
        flat = [x for row in self.entries for x in row]
        neg = [(-x) % N for x in flat]
        first = next(x for x in flat if x)
        if 2 * first < N:
            return self
        if 2 * first > N or neg < flat:
            return GSpElement(self.matrix.negate(), self.multiplier)
        return self

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "multiplier": self.multiplier,
                "entries": matrix_to_json(self.entries)}


def gsp_check(m: ModMatrix) -> GSpElement:
    """Verify m^T eta m = nu eta (mod N) for a unit nu and return the element."""
    N = m.modulus
    g = m.genus
    form = mat_mod(similitude_form(m.entries), N)
    nu = form[g][0]
    expected = mat_mod(scale(eta(g), nu), N)
    if form != expected:
        raise NotSimilitude("m^T eta m is not a multiple of eta")
    if gcd(nu, N) != 1:
        raise NotSimilitude(f"multiplier {nu} is not a unit mod {N}")
    return GSpElement(m, nu)


def diag_similitude(g: int, nu: int, N: int) -> GSpElement:
    rows = [[0] * (2 * g) for _ in range(2 * g)]
    for i in range(g):
        rows[i][i] = 1
        rows[g + i][g + i] = nu
    return GSpElement(ModMatrix(as_matrix(rows), N), nu % N)


def decompose(e: GSpElement) -> tuple[GSpElement, GSpElement]:
    """Split e = diag(I, nu I) * s with s symplectic."""
    g, N = e.genus, e.modulus
    diag = diag_similitude(g, e.multiplier, N)
    nu_inv = pow(e.multiplier, -1, N)
    A, B, C, D = blocks(e.entries)
    sp = from_blocks(A, B, scale(C, nu_inv), scale(D, nu_inv))
    return diag, GSpElement(ModMatrix(sp, N), 1)


def enumerate_gsp(g: int, N: int, budget: int = DEFAULT_BUDGET) -> list[GSpElement]:
    """Every element of GSp_2g(Z/NZ), found by testing all N^(4g^2) matrices."""
    n = 2 * g
    total = N ** (n * n)
    if total > budget:
        raise BudgetExceeded(f"{total} candidate matrices exceed budget {budget}")
    e = np.array(eta(g), dtype=np.int64)
    out: list[GSpElement] = []
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.empty((idx.size, n * n), dtype=np.int64)
        rest = idx.copy()
        for k in range(n * n - 1, -1, -1):
            digits[:, k] = rest % N
            rest //= N
        mats = digits.reshape(-1, n, n)
        form = np.einsum("kji,jl,klm->kim", mats, e, mats) % N
        nu = form[:, g, 0]
        ok = np.all(form == (nu[:, None, None] * e[None]) % N, axis=(1, 2))
        ok &= np.gcd(nu, N) == 1
        for k in np.nonzero(ok)[0]:
            out.append(GSpElement(ModMatrix(as_matrix(mats[k].tolist()), N), int(nu[k])))
    return out


# -- lifting ---------------------------------------------------------------------

class _RowReducer:
    """Applies elementary integral symplectic row operations to ``X`` while
    accumulating their product in ``E`` (so that always E @ X0 == X, up to
    representative changes made mod N)."""

    def __init__(self, X: Sequence[Sequence[int]], g: int, N: int):
        self.X = [list(r) for r in X]
        self.E = [list(r) for r in identity(2 * g)]
        self.g = g
        self.N = N

    def _add(self, dst: int, src: int, k: int) -> None:
        if k:
            for M in (self.X, self.E):
                M[dst] = [x + k * y for x, y in zip(M[dst], M[src])]

    def t_op(self, i: int, j: int, k: int) -> None:
        # [[I, S], [0, I]] with S = k(E_ij + E_ji), or k E_ii when i == j
        g = self.g
        self._add(i, g + j, k)
        if i != j:
            self._add(j, g + i, k)

    def l_op(self, i: int, j: int, k: int) -> None:
        # [[I, 0], [S, I]]
        g = self.g
        self._add(g + i, j, k)
        if i != j:
            self._add(g + j, i, k)

    def r_op(self, i: int, j: int, k: int) -> None:
        # diag(U, U^-T) with U = I + k E_ij, i != j
        g = self.g
        self._add(i, j, k)
        self._add(g + j, g + i, -k)

    def neg_pair(self, i: int) -> None:
        g = self.g
        for M in (self.X, self.E):
            M[i] = [-x for x in M[i]]
            M[g + i] = [-x for x in M[g + i]]

    def euclid(self, col: int, r: int, s: int, add_r, add_s) -> None:
        """Drive X[s][col] to zero; X[r][col] ends at +-gcd."""
        X = self.X
        while X[s][col] != 0:
            add_r(-(X[r][col] // X[s][col]))
            if X[r][col] == 0:
                add_r(1)
                add_s(-1)
                return
            add_s(-(X[s][col] // X[r][col]))

    def reduce_frame_column0(self) -> None:
        """Exact reduction of a primitive first column to e_0 (no mod-N steps)."""
        g, X = self.g, self.X
        for i in range(g):
            self.euclid(0, i, g + i,
                        lambda k, i=i: self.t_op(i, i, k),
                        lambda k, i=i: self.l_op(i, i, k))
        for i in range(1, g):
            self.euclid(0, 0, i,
                        lambda k, i=i: self.r_op(0, i, k),
                        lambda k, i=i: self.r_op(i, 0, k))
        if X[0][0] == -1:
            self.neg_pair(0)
        assert [r[0] for r in X] == [int(k == 0) for k in range(2 * g)]

    def reduce_frame(self) -> None:
        """Bring columns 0..g-1 of X to the unit vectors e_0..e_{g-1}, mod N.

        Requires those columns to be isotropic and to extend to a basis mod N.
        """
        g, N, X = self.g, self.N, self.X
        for p in range(g):
            for k in range(p):
                if X[g + k][p] % N:
                    raise NotExtendable("columns are not isotropic mod N")
                X[g + k][p] = 0
            for i in range(p, g):
                self.euclid(p, i, g + i,
                            lambda k, i=i: self.t_op(i, i, k),
                            lambda k, i=i: self.l_op(i, i, k))
            for i in range(p + 1, g):
                self.euclid(p, p, i,
                            lambda k, i=i: self.r_op(p, i, k),
                            lambda k, i=i: self.r_op(i, p, k))
            d = X[p][p]
            if gcd(d, N) != 1:
                raise NotExtendable("frame is not unimodular mod N")
            if abs(d) != 1:
                X[g + p][p] += N
                self.euclid(p, p, g + p,
                            lambda k: self.t_op(p, p, k),
                            lambda k: self.l_op(p, p, k))
            if X[p][p] == -1:
                self.neg_pair(p)
            for k in range(p):
                c = X[k][p]
                if c:
                    self.r_op(k, p, -c)


def sp_lift(b: GSpElement) -> IntMatrix:
    """An integral symplectic matrix reducing to b mod N."""
    if b.multiplier % b.modulus != 1:
        raise NotSp(f"multiplier {b.multiplier} != 1")
    g, N = b.genus, b.modulus
    centered = tuple(tuple(x - N if 2 * x > N else x for x in row) for row in b.entries)
    if is_symplectic(centered):
        return centered
    red = _RowReducer(b.entries, g, N)
    red.reduce_frame()
    X = mat_mod(red.X, N)
    _, S, C, D = blocks(X)
    if C != zeros(g, g) or D != identity(g) or S != transpose(S):
        raise NotSp("matrix is not symplectic mod N")
    S = tuple(tuple(x - N if 2 * x > N else x for x in row) for row in S)
    shear = from_blocks(identity(g), S, zeros(g, g), identity(g))
    lift = mat_mul(symplectic_inverse(red.E), shear)
    assert is_symplectic(lift) and mat_mod(lift, N) == b.entries
    return lift


def frame_is_isotropic(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], N: int) -> bool:
    abt = mat_mod(mat_mul(A, transpose(B)), N)
    return abt == transpose(abt)


def complete_block_row(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], N: int) -> IntMatrix:
    """Integral symplectic gamma whose top block row is [A B] mod N."""
    A = as_matrix(A)
    B = as_matrix(B)
    g = len(A)
    if not frame_is_isotropic(A, B, N):
        raise NotExtendable("A B^T is not symmetric mod N")
    frame = transpose(A) + transpose(B)       # the 2g x g matrix [A^T; B^T]
    red = _RowReducer(frame, g, N)
    red.reduce_frame()
    extension = transpose(symplectic_inverse(red.E))
    gamma = sp_lift(GSpElement(ModMatrix(extension, N), 1))
    top = tuple(row[:g] for row in mat_mod(gamma[:g], N)), tuple(row[g:] for row in mat_mod(gamma[:g], N))
    assert top == (mat_mod(A, N), mat_mod(B, N))
    return gamma


# -- random elements (test and audit helpers) -----------------------------------

def _generator(g: int, kind: int, rng: random.Random, bound: int) -> IntMatrix:
    red = _RowReducer(zeros(2 * g, 1), g, 2)
    i, j = rng.randrange(g), rng.randrange(g)
    k = rng.randint(-bound, bound)
    if kind == 0:
        red.t_op(i, j, k)
    elif kind == 1:
        red.l_op(i, j, k)
    elif kind == 2 and i != j:
        red.r_op(i, j, k)
    else:
        e = eta(g)
        return e if rng.random() < 0.5 else scale(e, -1)
    return as_matrix(red.E)


def random_sp_integral(g: int, rng: random.Random, length: int = 6, bound: int = 2) -> IntMatrix:
    """A random word in elementary generators of Sp_2g(Z)."""
    m = identity(2 * g)
    for _ in range(length):
        m = mat_mul(m, _generator(g, rng.randrange(4), rng, bound))
    return m


def random_sp_mod(g: int, N: int, rng: random.Random, length: int = 12) -> GSpElement:
    m = identity(2 * g)
    for _ in range(length):
        m = mat_mod(mat_mul(m, _generator(g, rng.randrange(4), rng, N)), N)
    return GSpElement(ModMatrix(m, N), 1)


def random_gsp_mod(g: int, N: int, rng: random.Random, length: int = 12) -> GSpElement:
    units = [u for u in range(1, N) if gcd(u, N) == 1]
    nu = rng.choice(units)
    return diag_similitude(g, nu, N) @ random_sp_mod(g, N, rng, length)


def random_gamma1(g: int, N: int, rng: random.Random, length: int = 4, bound: int = 2) -> IntMatrix:
    """A random element of Gamma^1(N) = {gamma = [[I, O], [*, I]] mod N}."""
    m = identity(2 * g)
    for _ in range(length):
        red = _RowReducer(zeros(2 * g, 1), g, N)
        i, j = rng.randrange(g), rng.randrange(g)
        kind = rng.randrange(3)
        if kind == 0:
            red.l_op(i, j, rng.randint(-bound, bound))
        elif kind == 1:
            red.t_op(i, j, N * rng.randint(-1, 1))
        elif i != j:
            red.r_op(i, j, N * rng.randint(-1, 1))
        m = mat_mul(m, as_matrix(red.E))
    return m


def all_residue_matrices(rows: int, cols: int, N: int):
    for flat in itertools.product(range(N), repeat=rows * cols):
        yield tuple(tuple(flat[r * cols:(r + 1) * cols]) for r in range(rows))


def extend_to_symplectic(v: Sequence[int], column: int) -> IntMatrix:
    """An integral symplectic matrix whose given column is the primitive vector v."""
    n = len(v)
    g = n // 2
    if la_content(v) != 1:
        raise NotExtendable("vector is not primitive")
    red = _RowReducer([[x] for x in v], g, 2 * max(abs(x) for x in v) + 2)
    # a single column: Euclid steps alone reach e_0 exactly
    red.reduce_frame_column0()
    s0 = symplectic_inverse(red.E)
    # move e_0 to the requested column: pair swap then eta^{-1}
    j = column % g
    perm = [[0] * n for _ in range(n)]
    for i in range(n):
        k = i % g
        k = j if k == 0 else (0 if k == j else k)
        perm[(i // g) * g + k][i] = 1
    target = as_matrix(perm)
    if column >= g:
        target = mat_mul(symplectic_inverse(eta(g)), target)
    s = mat_mul(s0, target)
    assert is_symplectic(s) and tuple(r[column] for r in s) == tuple(v)
    return s


def la_content(v: Sequence[int]) -> int:
    c = 0
    for x in v:
        c = gcd(c, int(x))
    return c
