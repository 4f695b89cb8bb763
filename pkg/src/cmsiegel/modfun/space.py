"""The symplectic action on H_g and reduction towards a fundamental domain."""

from __future__ import annotations

import math
from typing import Sequence

import mpmath

from ..zmatrix import IntMatrix, blocks, identity, mat_mul

_MAX_REDUCTION_STEPS = 200


def _mp(m: Sequence[Sequence[int]]) -> mpmath.matrix:
    return mpmath.matrix([[mpmath.mpf(x) for x in row] for row in m])


def act(gamma: Sequence[Sequence[int]], Z: mpmath.matrix, z_err=0) -> tuple[mpmath.matrix, mpmath.mpf]:
    """(A Z + B)(C Z + D)^{-1}, with the propagated entrywise error.

    dZ' = (CZ+D)^{-T} dZ (CZ+D)^{-1}, so the input error scales by ||(CZ+D)^{-1}||^2;
    rounding adds a conditioning-weighted term.
    """
    g = Z.rows
    A, B, C, D = (_mp(x) for x in blocks(gamma))
    num = A * Z + B
    den = C * Z + D
    den_inv = mpmath.inverse(den)
    W = num * den_inv
    W = (W + W.T) / 2
    ninv = mpmath.mnorm(den_inv, 1)
    eps = mpmath.ldexp(1, -mpmath.mp.prec + 4)
    scale = 1 + mpmath.mnorm(Z, 1)
    gnorm = max(abs(x) for row in gamma for x in row) + 1
    err = z_err * ninv * ninv + 8 * g * eps * gnorm * scale * ninv * (1 + mpmath.mnorm(W, 1))
    return W, err


def scalar_act(gamma: Sequence[Sequence[int]], tau):
    (a, b), (c, d) = gamma
    return (a * tau + b) / (c * tau + d)


def _gauss_reduce(Y: mpmath.matrix) -> IntMatrix:
    """U in GL_2(Z) with U Y U^T reduced: |2 y12| <= y11 <= y22."""
    U = [[1, 0], [0, 1]]
    a, b, c = Y[0, 0], Y[0, 1], Y[1, 1]
    for _ in range(_MAX_REDUCTION_STEPS):
        k = int(mpmath.nint(b / a))
        if k:
            # row 1 -= k row 0
            U[1] = [U[1][0] - k * U[0][0], U[1][1] - k * U[0][1]]
            c = c - 2 * k * b + k * k * a
            b = b - k * a
        if a > c:
            U = [U[1], U[0]]
            a, c = c, a
            continue
        break
    if b < 0:
        U[1] = [-U[1][0], -U[1][1]]
    return tuple(tuple(r) for r in U)


def _compose(Z, gamma, total, z_err):
    Z, e = act(gamma, Z, z_err)
    return Z, mat_mul(gamma, total), e


def reduce_point(Z: mpmath.matrix, z_err=0) -> tuple[IntMatrix, mpmath.matrix, mpmath.mpf]:
    """gamma in Sp_2g(Z) and gamma(Z) in (an approximation of) the fundamental domain.

    Genus 1: the usual translation/inversion loop.  Genus 2: Gauss reduction of
    Im Z, translation of Re Z into [-1/2, 1/2], inversion in the first
    coordinate while |z11| < 1.
    """
    g = Z.rows
    total = identity(2 * g)
    err = mpmath.mpf(z_err)
    if g == 1:
        for _ in range(_MAX_REDUCTION_STEPS):
            k = -math.floor(float(Z[0, 0].real) + 0.5)
            if k:
                Z, total, err = _compose(Z, ((1, k), (0, 1)), total, err)
            if abs(Z[0, 0]) < 1 - mpmath.mpf(10) ** -20:
                Z, total, err = _compose(Z, ((0, -1), (1, 0)), total, err)
                continue
            return total, Z, err
    elif g == 2:
        for _ in range(_MAX_REDUCTION_STEPS):
            Y = mpmath.matrix([[Z[i, j].imag for j in range(2)] for i in range(2)])
            U = _gauss_reduce(Y)
            if U != ((1, 0), (0, 1)):
                det = U[0][0] * U[1][1] - U[0][1] * U[1][0]
                Uinv_t = ((U[1][1] * det, -U[1][0] * det), (-U[0][1] * det, U[0][0] * det))
                gamma = tuple(tuple(U[i]) + (0, 0) for i in range(2)) + tuple(
                    (0, 0) + tuple(Uinv_t[i]) for i in range(2))
                Z, total, err = _compose(Z, gamma, total, err)
            S = [[-math.floor(float(Z[i, j].real) + 0.5) for j in range(2)] for i in range(2)]
            if any(S[i][j] for i in range(2) for j in range(2)):
                gamma = ((1, 0, S[0][0], S[0][1]), (0, 1, S[1][0], S[1][1]), (0, 0, 1, 0), (0, 0, 0, 1))
                Z, total, err = _compose(Z, gamma, total, err)
            if abs(Z[0, 0]) < 1 - mpmath.mpf(10) ** -20:
                gamma = ((0, 0, -1, 0), (0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1))
                Z, total, err = _compose(Z, gamma, total, err)
                continue
            return total, Z, err
    else:
        raise ValueError("reduction implemented for genus 1 and 2 only")
    raise RuntimeError("reduction did not terminate")
