"""Complex midpoint-radius arithmetic.

A :class:`Ball` is a value together with an upper bound on its absolute
error.  Every operation adds a relative rounding allowance at the working
precision, so radii stay sound as long as the inputs' radii are.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from ..errors import PoleDetected


@dataclass(frozen=True)
class Ball:
    mid: mpmath.mpc
    rad: mpmath.mpf

    @staticmethod
    def exact(x) -> Ball:
        return Ball(mpmath.mpc(x), mpmath.mpf(0))

    def __abs__(self):
        return abs(self.mid)

    def _eps(self):
        return mpmath.ldexp(1, -mpmath.mp.prec + 2)

    def __add__(self, other: Ball) -> Ball:
        v = self.mid + other.mid
        return Ball(v, self.rad + other.rad + abs(v) * self._eps())

    def __neg__(self) -> Ball:
        return Ball(-self.mid, self.rad)

    def __sub__(self, other: Ball) -> Ball:
        return self + (-other)

    def __mul__(self, other: Ball) -> Ball:
        v = self.mid * other.mid
        r = abs(self.mid) * other.rad + abs(other.mid) * self.rad + self.rad * other.rad
        return Ball(v, r + abs(v) * self._eps())

    def scale(self, c) -> Ball:
        """Multiply by an exact constant c."""
        v = self.mid * c
        return Ball(v, self.rad * abs(c) + abs(v) * self._eps())

    def inverse(self, pole_threshold) -> Ball:
        m = abs(self.mid)
        if m < pole_threshold or m <= self.rad:
            raise PoleDetected(f"denominator {mpmath.nstr(m, 5)} (radius {mpmath.nstr(self.rad, 5)})")
        v = 1 / self.mid
        return Ball(v, self.rad / (m * (m - self.rad)) + abs(v) * self._eps())

    def __pow__(self, k: int) -> Ball:
        if k < 0:
            raise ValueError("use inverse() for negative powers")
        result = Ball.exact(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def contains(self, x, slack=0) -> bool:
        return abs(self.mid - x) <= self.rad + slack
