"""Leaf kernels: theta constants with characteristics, Siegel functions, eta.

Each ``*_ball`` routine runs at the ambient mpmath precision and returns a
:class:`Ball` whose radius covers series truncation, rounding, and an input
uncertainty ``z_err`` on the point (absolute, entrywise).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from ..errors import NotInSiegelSpace, PrecisionUnreachable
from .ball import Ball
from .precision import Precision

MAX_PRODUCT_TERMS = 2_000_000


def _mpq(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _eps():
    return mpmath.ldexp(1, -mpmath.mp.prec + 2)


@dataclass(frozen=True)
class ThetaChar:
    a: tuple[Fraction, ...]
    b: tuple[Fraction, ...]

    def __post_init__(self):
        a = tuple(Fraction(x) % 1 for x in self.a)
        b = tuple(Fraction(x) % 1 for x in self.b)
        if len(a) != len(b):
            raise ValueError("characteristic halves differ in length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def genus(self) -> int:
        return len(self.a)

    def is_even(self) -> bool:
        """Parity for half-integral characteristics: 4 a.b even."""
        return sum(4 * x * y for x, y in zip(self.a, self.b)) % 2 == 0

    def to_json(self) -> dict:
        return {"a": [str(x) for x in self.a], "b": [str(x) for x in self.b]}


def as_matrix(Z) -> mpmath.matrix:
    if isinstance(Z, mpmath.matrix):
        return Z
    if isinstance(Z, (list, tuple)):
        return mpmath.matrix([[mpmath.mpc(x) for x in row] for row in Z])
    return mpmath.matrix([[mpmath.mpc(Z)]])


def check_siegel_space(Z: mpmath.matrix, tol=None) -> mpmath.mpf:
    """Return the smallest eigenvalue of Im(Z); raise unless Z is in H_g."""
    g = Z.rows
    tol = tol if tol is not None else mpmath.mpf(10) ** (-10)
    defect = max((abs(Z[i, j] - Z[j, i]) for i in range(g) for j in range(g)), default=0)
    if defect > tol:
        raise NotInSiegelSpace(f"Z is not symmetric (defect {mpmath.nstr(defect, 5)})")
    Y = mpmath.matrix([[Z[i, j].imag for j in range(g)] for i in range(g)])
    if g == 1:
        lam = Y[0, 0]
    elif g == 2:
        tr = Y[0, 0] + Y[1, 1]
        det = Y[0, 0] * Y[1, 1] - Y[0, 1] * Y[1, 0]
        lam = (tr - mpmath.sqrt((Y[0, 0] - Y[1, 1]) ** 2 + 4 * Y[0, 1] * Y[1, 0])) / 2
        if det <= 0:
            lam = min(lam, mpmath.mpf(0))
    else:
        lam = min(mpmath.eigsy(Y, eigvals_only=True))
    if lam <= 0:
        raise NotInSiegelSpace("Im(Z) is not positive definite")
    return lam


def _theta_tail(lam, g: int, R: int):
    """Bound on sum of |terms| over n with max|n_i| > R."""
    total = mpmath.mpf(0)
    k = R + 1
    while True:
        cnt = (2 * k + 1) ** g - (2 * k - 1) ** g
        t = cnt * mpmath.exp(-mpmath.pi * lam * (k - 1) ** 2)
        total += t
        if k > R + 3 and t < total * mpmath.mpf(2) ** -20:
            # remaining terms decay faster than geometrically with ratio < 1/2
            return total * 2
        k += 1


def theta_radius(lam, g: int, target, radius: int | None = None) -> tuple[int, mpmath.mpf]:
    if radius is not None:
        return radius, _theta_tail(lam, g, radius)
    R = 1
    while True:
        tail = _theta_tail(lam, g, R)
        if tail < target:
            return R, tail
        R += 1
        if R > 400:
            raise PrecisionUnreachable("theta series needs an excessive truncation radius")


def theta_ball(a: Sequence[Fraction], b: Sequence[Fraction], Z: mpmath.matrix, z_err=0,
               radius: int | None = None, lam=None) -> Ball:
    """sum_n e(1/2 (n+a)^T Z (n+a) + (n+a)^T b) with a rigorous-style radius."""
    g = Z.rows
    if lam is None:
        lam = check_siegel_space(Z)
    eps = _eps()
    aq = [_mpq(Fraction(x)) for x in a]
    bq = [_mpq(Fraction(x)) for x in b]
    # scale of the dominant term, used to set a relative truncation target
    q0 = min(sum((n[i] + aq[i]) * (n[j] + aq[j]) * Z[i, j].imag for i in range(g) for j in range(g))
             for n in itertools.product((-1, 0, 1), repeat=g))
    scale = mpmath.exp(-mpmath.pi * q0)
    R, tail = theta_radius(lam, g, eps * scale, radius)
    pii = mpmath.mpc(0, 1) * mpmath.pi
    cutoff = -mpmath.pi * q0 - mpmath.mp.prec * 0.7 - 10
    total = mpmath.mpc(0)
    abs_sum = mpmath.mpf(0)
    deriv = mpmath.mpf(0)
    for n in itertools.product(range(-R, R + 1), repeat=g):
        w = [n[i] + aq[i] for i in range(g)]
        quad = sum(w[i] * w[j] * Z[i, j] for i in range(g) for j in range(g))
        arg = pii * quad + 2 * pii * sum(w[i] * bq[i] for i in range(g))
        if arg.real < cutoff:
            continue  # negligible against the dominant term at this precision
        t = mpmath.exp(arg)
        total += t
        at = abs(t)
        abs_sum += at * (10 + abs(arg))
        deriv += at * mpmath.pi * sum(abs(x) for x in w) ** 2
    skipped = (2 * R + 1) ** g * mpmath.exp(cutoff)
    rad = tail + skipped + eps * abs_sum + z_err * deriv
    return Ball(total, rad)


def theta_value(c: ThetaChar, Z, prec: Precision, z_err=0) -> Ball:
    """theta[a, b](Z) with error radius below prec.target (escalating bits)."""
    bits = prec.bits
    while True:
        with mpmath.workprec(bits):
            Zm = as_matrix(Z)
            if Zm.rows != c.genus:
                raise ValueError("characteristic genus does not match Z")
            ball = theta_ball(c.a, c.b, Zm, z_err, prec.truncation_radius)
        if ball.rad <= prec.target:
            return ball
        bits *= 2
        if bits > prec.max_bits:
            raise PrecisionUnreachable(f"theta radius {mpmath.nstr(ball.rad, 5)} above target")


def bernoulli2(x):
    return x * x - x + mpmath.mpf(1) / 6


def _product_terms(absq, rel_target) -> int:
    """Smallest T with 4|q|^T / (1 - |q|) below rel_target."""
    if absq >= 1:
        raise PrecisionUnreachable("tau is not in the upper half plane")
    if absq == 0:
        return 1
    T = int(mpmath.ceil(mpmath.log(rel_target * (1 - absq) / 4) / mpmath.log(absq))) + 1
    T = max(T, 1)
    if T > MAX_PRODUCT_TERMS:
        raise PrecisionUnreachable(f"Im(tau) too small: {T} product terms needed")
    return T


def siegel_ball(v: Sequence[Fraction], tau, z_err=0, terms: int | None = None) -> Ball:
    """Siegel function g_v(tau), v reduced into [0, 1)^2, v not integral.

    g_v = q^{B2(v1)/2} e(v2 (v1 - 1)/2) (1 - q_z) prod_{n>=1} (1 - q^n q_z)(1 - q^n / q_z),
    q = e(tau), q_z = e(v1 tau + v2).
    """
    v1, v2 = (Fraction(x) % 1 for x in v)
    if v1 == 0 and v2 == 0:
        raise ValueError("Siegel function index must be non-integral")
    tau = mpmath.mpc(tau)
    if tau.imag <= 0:
        raise NotInSiegelSpace("tau must have positive imaginary part")
    eps = _eps()
    pi2i = 2 * mpmath.pi * mpmath.mpc(0, 1)
    m1, m2 = _mpq(v1), _mpq(v2)
    q = mpmath.exp(pi2i * tau)
    qz = mpmath.exp(pi2i * (m1 * tau + m2))
    qz_inv = 1 / qz
    absq = abs(q)
    T = terms if terms is not None else _product_terms(absq, eps)
    b2 = bernoulli2(m1)
    lead = mpmath.exp(pi2i * (b2 / 2 * tau) + mpmath.pi * mpmath.mpc(0, 1) * m2 * (m1 - 1))
    prod = 1 - qz
    logderiv = mpmath.pi * abs(b2) + 2 * mpmath.pi * m1 * abs(qz) / abs(1 - qz)
    qn = mpmath.mpc(1)
    for n in range(1, T + 1):
        qn *= q
        x1 = qn * qz
        x2 = qn * qz_inv
        prod *= (1 - x1) * (1 - x2)
        logderiv += 2 * mpmath.pi * ((n + m1) * abs(x1) / abs(1 - x1) + (n - m1) * abs(x2) / abs(1 - x2))
    value = lead * prod
    tail = 4 * absq ** (T + 1 - m1) / (1 - absq) if absq else mpmath.mpf(0)
    rel = 2 * tail + (8 * T + 40) * eps + (abs(tau) + 2) * 4 * eps
    rad = abs(value) * (rel + z_err * logderiv * (1 + z_err * logderiv))
    return Ball(value, rad)


def siegel_value(v: Sequence[Fraction], tau, prec: Precision, z_err=0) -> Ball:
    bits = prec.bits
    while True:
        with mpmath.workprec(bits):
            ball = siegel_ball(v, mpmath.mpc(tau), z_err)
        if ball.rad <= prec.target:
            return ball
        bits *= 2
        if bits > prec.max_bits:
            raise PrecisionUnreachable(f"Siegel radius {mpmath.nstr(ball.rad, 5)} above target")


def eta_ball(tau, z_err=0, terms: int | None = None) -> Ball:
    """Dedekind eta q^{1/24} prod (1 - q^n)."""
    tau = mpmath.mpc(tau)
    if tau.imag <= 0:
        raise NotInSiegelSpace("tau must have positive imaginary part")
    eps = _eps()
    pi2i = 2 * mpmath.pi * mpmath.mpc(0, 1)
    q = mpmath.exp(pi2i * tau)
    absq = abs(q)
    T = terms if terms is not None else _product_terms(absq, eps)
    prod = mpmath.mpc(1)
    qn = mpmath.mpc(1)
    logderiv = mpmath.pi / 12
    for n in range(1, T + 1):
        qn *= q
        prod *= 1 - qn
        logderiv += 2 * mpmath.pi * n * abs(qn) / abs(1 - qn)
    value = mpmath.exp(pi2i * tau / 24) * prod
    tail = 2 * absq ** (T + 1) / (1 - absq)
    rel = 2 * tail + (4 * T + 20) * eps + (abs(tau) + 2) * 4 * eps
    rad = abs(value) * (rel + z_err * logderiv * (1 + z_err * logderiv))
    return Ball(value, rad)
