"""Small exact linear algebra over Q and Z.

Matrices are lists of rows.  Entries may be ints or Fractions; results are
Fractions unless stated otherwise.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


def frac_matrix(m: Sequence[Sequence]) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in m]


def det(m: Sequence[Sequence]) -> Fraction:
    a = frac_matrix(m)
    n = len(a)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        p = a[c][c]
        result *= p
        for r in range(c + 1, n):
            f = a[r][c] / p
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return sign * result


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(row) for row in m]
    n = len(a)
    sign, prev = 1, 1
    for c in range(n - 1):
        if a[c][c] == 0:
            piv = next((r for r in range(c + 1, n) if a[r][c] != 0), None)
            if piv is None:
                return 0
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        for r in range(c + 1, n):
            for k in range(c + 1, n):
                a[r][k] = (a[r][k] * a[c][c] - a[r][c] * a[c][k]) // prev
        prev = a[c][c]
    return sign * a[n - 1][n - 1] if n else 1


def solve(m: Sequence[Sequence], rhs: Sequence[Sequence]) -> list[list[Fraction]] | None:
    """Solve m X = rhs for square nonsingular m; None when singular."""
    n = len(m)
    a = [row + list(r) for row, r in zip(frac_matrix(m), frac_matrix(rhs))]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def inverse(m: Sequence[Sequence]) -> list[list[Fraction]] | None:
    n = len(m)
    return solve(m, [[int(i == j) for j in range(n)] for i in range(n)])


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*a)]


def common_denominator(values) -> int:
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d


def hnf_rows(gens: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Row Hermite normal form of the Z-span of integer vectors of length n.

    Output rows are upper triangular with positive pivots and entries above each
    pivot reduced into [0, pivot).  Zero rows are dropped.
    """
    rows = [list(map(int, r)) for r in gens if any(r)]
    out: list[list[int]] = []
    col = 0
    while rows and col < n:
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not active:
            col += 1
            continue
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                if r[col] != 0:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            active = nxt
        piv = active[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append(piv)
        rows = rest
        col += 1
    # reduce entries above pivots
    for i in range(len(out)):
        pc = next(c for c in range(n) if out[i][c])
        for k in range(i):
            q = out[k][pc] // out[i][pc]
            if q:
                out[k] = [x - q * y for x, y in zip(out[k], out[i])]
    return out


def content(values) -> int:
    c = 0
    for v in values:
        c = gcd(c, int(v))
    return c


def unimodular_solve(basis_rows: Sequence[Sequence], v: Sequence) -> list[Fraction] | None:
    """Coordinates x with sum x_i basis_rows[i] = v (square basis)."""
    sol = solve(transpose(basis_rows), [[x] for x in v])
    return None if sol is None else [r[0] for r in sol]
