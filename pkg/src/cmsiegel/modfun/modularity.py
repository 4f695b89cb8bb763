"""Numerical certification that a generator is invariant under Gamma^1(N)."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import mpmath

from ..errors import MathematicalFailure
from ..zmatrix import matrix_to_json, random_gamma1
from .expr import FunctionExpr, evaluate
from .precision import Precision
from .space import act

# trials whose transformed point leaves the comfortable evaluation range are redrawn
_MAX_REDRAWS = 20


@dataclass
class ModularityReport:
    name: str
    level: int
    trials: int
    max_defect: float
    tolerance: float
    passed: bool
    worst: dict = field(default_factory=dict)
    skipped: int = 0

    def to_json(self) -> dict:
        return {"function": self.name, "level": self.level, "trials": self.trials,
                "max_defect": self.max_defect, "tolerance": self.tolerance,
                "result": "PASS" if self.passed else "FAIL", "skipped": self.skipped,
                "worst": self.worst}


def random_point(g: int, rng: random.Random) -> mpmath.matrix:
    """A point of H_g with moderate imaginary part."""
    if g == 1:
        return mpmath.matrix([[mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.6))]])
    y1, y2 = rng.uniform(0.9, 1.5), rng.uniform(0.9, 1.5)
    y12 = rng.uniform(-0.3, 0.3)
    Z = mpmath.matrix(2, 2)
    x = [[rng.uniform(-0.5, 0.5) for _ in range(2)] for _ in range(2)]
    Z[0, 0] = mpmath.mpc(x[0][0], y1)
    Z[1, 1] = mpmath.mpc(x[1][1], y2)
    Z[0, 1] = Z[1, 0] = mpmath.mpc(x[0][1], y12)
    return Z


def _min_imag(W: mpmath.matrix):
    if W.rows == 1:
        return W[0, 0].imag
    Y = mpmath.matrix([[W[i, j].imag for j in range(W.cols)] for i in range(W.rows)])
    return min(mpmath.eigsy(Y, eigvals_only=True))


def _image(gamma, Z):
    def point(bits: int):
        with mpmath.workprec(bits + 64):
            return act(gamma, Z)
    return point


def verify_modularity(expr: FunctionExpr, N: int | None = None, trials: int = 20,
                      prec: Precision | None = None, seed: int = 0,
                      min_imag: float = 0.02) -> ModularityReport:
    """Compare h(gamma Z) with h(Z) for random gamma in Gamma^1(N) and random Z.

    PASS iff the largest defect is below 100 * prec.target.  Draws whose image
    point has smallest imaginary eigenvalue below ``min_imag`` are redrawn
    (they only cost time); evaluation failures count as FAIL.
    """
    N = expr.level if N is None else N
    prec = prec or Precision()
    rng = random.Random(seed)
    g = expr.genus
    tol = 100 * prec.target
    worst_defect = mpmath.mpf(0)
    worst: dict = {}
    skipped = 0
    done = 0
    while done < trials:
        Z = random_point(g, rng)
        for _ in range(_MAX_REDRAWS):
            gamma = random_gamma1(g, N, rng)
            with mpmath.workprec(prec.bits + 64):
                W, _ = act(gamma, Z)
            if _min_imag(W) >= min_imag:
                break
            skipped += 1
        else:
            continue
        try:
            v0 = evaluate(expr, Z, prec)
            v1 = evaluate(expr, _image(gamma, Z), prec)
        except MathematicalFailure as exc:
            return ModularityReport(expr.name, N, done + 1, float("inf"), tol, False,
                                    {"gamma": matrix_to_json(gamma), "error": str(exc)}, skipped)
        defect = abs(v1.value - v0.value)
        if defect > worst_defect or not worst:
            worst_defect = defect
            worst = {"gamma": matrix_to_json(gamma), "defect": float(defect),
                     "value": mpmath.nstr(v0.value, 15)}
        done += 1
    return ModularityReport(expr.name, N, trials, float(worst_defect), tol, worst_defect < tol, worst, skipped)
