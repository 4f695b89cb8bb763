"""Expression trees for catalog functions and their ball-arithmetic evaluation.

Node kinds:

``const``     exact rational
``theta``     theta constant with characteristic (a, b), weight 1/2
``siegel``    genus-1 Siegel function g_v, weight 0
``eta``       Dedekind eta, weight 1/2
``product``   product of children
``quotient``  numerator / denominator
``power``     integer power (negative allowed)
``sum``       sum of children of equal weight
``rescale``   child evaluated at Z / t
``reduced``   level-one weight-zero child evaluated at a reduced representative of Z
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath

from ..errors import PrecisionUnreachable
from .ball import Ball
from .kernels import as_matrix, check_siegel_space, eta_ball, siegel_ball, theta_ball
from .precision import Precision
from .space import reduce_point

_GUARD_BITS = 24


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple = ()
    params: tuple = ()

    def param(self, key):
        return dict(self.params)[key]

    def to_json(self) -> dict:
        out: dict[str, Any] = {"op": self.op}
        p = dict(self.params)
        if self.op == "const":
            out["value"] = str(p["value"])
        elif self.op == "theta":
            out["a"] = [str(x) for x in p["a"]]
            out["b"] = [str(x) for x in p["b"]]
        elif self.op == "siegel":
            out["v"] = [str(x) for x in p["v"]]
        elif self.op == "power":
            out["exp"] = p["exp"]
        elif self.op == "rescale":
            out["factor"] = p["factor"]
        if self.args:
            out["args"] = [a.to_json() for a in self.args]
        return out


def node_from_json(d: dict) -> Node:
    op = d["op"]
    args = tuple(node_from_json(a) for a in d.get("args", ()))
    if op == "const":
        return const(Fraction(d["value"]))
    if op == "theta":
        return theta([Fraction(x) for x in d["a"]], [Fraction(x) for x in d["b"]])
    if op == "siegel":
        return siegel([Fraction(x) for x in d["v"]])
    if op == "eta":
        return eta()
    if op == "product":
        return product(*args)
    if op == "quotient":
        return quotient(*args)
    if op == "power":
        return power(args[0], int(d["exp"]))
    if op == "sum":
        return add(*args)
    if op == "rescale":
        return rescale(int(d["factor"]), args[0])
    if op == "reduced":
        return reduced(args[0])
    raise ValueError(f"unknown node kind {op!r}")


def const(value) -> Node:
    return Node("const", params=(("value", Fraction(value)),))


def theta(a, b) -> Node:
    a = tuple(Fraction(x) for x in a)
    b = tuple(Fraction(x) for x in b)
    if len(a) != len(b):
        raise ValueError("characteristic halves differ in length")
    return Node("theta", params=(("a", a), ("b", b)))


def siegel(v) -> Node:
    v = tuple(Fraction(x) % 1 for x in v)
    if len(v) != 2 or v == (0, 0):
        raise ValueError("Siegel index must be a non-integral pair")
    return Node("siegel", params=(("v", v),))


def eta() -> Node:
    return Node("eta")


def product(*args: Node) -> Node:
    return Node("product", tuple(args))


def quotient(num: Node, den: Node) -> Node:
    return Node("quotient", (num, den))


def power(base: Node, k: int) -> Node:
    return Node("power", (base,), (("exp", int(k)),))


def add(*args: Node) -> Node:
    return Node("sum", tuple(args))


def rescale(t: int, child: Node) -> Node:
    if t < 1:
        raise ValueError("rescale factor must be positive")
    return Node("rescale", (child,), (("factor", int(t)),))


def reduced(child: Node) -> Node:
    return Node("reduced", (child,))


def weight(n: Node) -> Fraction:
    op = n.op
    if op in ("const", "siegel", "reduced"):
        if op == "reduced" and weight(n.args[0]) != 0:
            raise ValueError("reduced() needs a weight-zero child")
        return Fraction(0)
    if op in ("theta", "eta"):
        return Fraction(1, 2)
    if op == "product":
        return sum((weight(a) for a in n.args), Fraction(0))
    if op == "quotient":
        return weight(n.args[0]) - weight(n.args[1])
    if op == "power":
        return weight(n.args[0]) * n.param("exp")
    if op == "sum":
        ws = {weight(a) for a in n.args}
        if len(ws) != 1:
            raise ValueError("summands must share a weight")
        return ws.pop()
    if op == "rescale":
        return weight(n.args[0])
    raise ValueError(f"unknown node kind {op!r}")


def node_genus(n: Node) -> int | None:
    if n.op == "theta":
        return len(n.param("a"))
    if n.op in ("siegel", "eta"):
        return 1
    gs = {node_genus(a) for a in n.args} - {None}
    if len(gs) > 1:
        raise ValueError("mixed genera in one expression")
    return gs.pop() if gs else None


@dataclass(frozen=True)
class FunctionExpr:
    """A named modular function: expression tree, declared level and genus."""

    name: str
    root: Node
    level: int
    genus: int
    version: int = 1
    description: str = ""

    def __post_init__(self):
        if weight(self.root) != 0:
            raise ValueError(f"{self.name}: numerator and denominator weights differ")
        g = node_genus(self.root)
        if g is not None and g != self.genus:
            raise ValueError(f"{self.name}: expression genus {g} != declared {self.genus}")

    def with_level(self, level: int) -> FunctionExpr:
        return FunctionExpr(self.name, self.root, level, self.genus, self.version, self.description)

    def to_json(self) -> dict:
        return {"name": self.name, "version": self.version, "level": self.level,
                "genus": self.genus, "description": self.description, "expr": self.root.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> FunctionExpr:
        return cls(d["name"], node_from_json(d["expr"]), int(d["level"]), int(d["genus"]),
                   int(d.get("version", 1)), d.get("description", ""))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class _Context:
    pole_threshold: Any
    radius: int | None
    cache: dict = field(default_factory=dict)


def _point_key(Z: mpmath.matrix):
    return tuple(Z[i, j] for i in range(Z.rows) for j in range(Z.cols))


def _eval(n: Node, Z: mpmath.matrix, z_err, ctx: _Context) -> Ball:
    key = (n, _point_key(Z), z_err)
    hit = ctx.cache.get(key)
    if hit is not None:
        return hit
    op = n.op
    if op == "const":
        v = n.param("value")
        out = Ball.exact(mpmath.mpf(v.numerator) / v.denominator)
    elif op == "theta":
        out = theta_ball(n.param("a"), n.param("b"), Z, z_err, ctx.radius)
    elif op == "siegel":
        out = siegel_ball(n.param("v"), Z[0, 0], z_err)
    elif op == "eta":
        out = eta_ball(Z[0, 0], z_err)
    elif op == "product":
        out = Ball.exact(1)
        for a in n.args:
            out = out * _eval(a, Z, z_err, ctx)
    elif op == "quotient":
        num = _eval(n.args[0], Z, z_err, ctx)
        den = _eval(n.args[1], Z, z_err, ctx)
        out = num * den.inverse(ctx.pole_threshold)
    elif op == "power":
        k = n.param("exp")
        base = _eval(n.args[0], Z, z_err, ctx)
        out = base ** abs(k)
        if k < 0:
            out = out.inverse(ctx.pole_threshold)
    elif op == "sum":
        out = Ball.exact(0)
        for a in n.args:
            out = out + _eval(a, Z, z_err, ctx)
    elif op == "rescale":
        t = n.param("factor")
        W = Z / t
        out = _eval(n.args[0], W, z_err / t, ctx)
    elif op == "reduced":
        _, W, err = reduce_point(Z, z_err)
        out = _eval(n.args[0], W, err, ctx)
    else:
        raise ValueError(f"unknown node kind {op!r}")
    ctx.cache[key] = out
    return out


@dataclass(frozen=True)
class Value:
    """A computed complex number with an absolute error bound."""

    value: mpmath.mpc
    error_bound: mpmath.mpf
    bits: int

    def to_json(self) -> dict:
        digits = int(self.bits * 0.30103) + 1
        return {"re": mpmath.nstr(self.value.real, digits), "im": mpmath.nstr(self.value.imag, digits),
                "bound": mpmath.nstr(self.error_bound, 6)}


def evaluate_ball(expr: FunctionExpr | Node, Z, bits: int, z_err=0, pole_threshold=1e-30,
                  radius: int | None = None) -> Ball:
    root = expr.root if isinstance(expr, FunctionExpr) else expr
    with mpmath.workprec(bits):
        Zm = as_matrix(Z)
        Zm = mpmath.matrix([[mpmath.mpc(Zm[i, j]) for j in range(Zm.cols)] for i in range(Zm.rows)])
        check_siegel_space(Zm, tol=max(mpmath.mpf(10) ** -10, 4 * mpmath.mpf(z_err)))
        ctx = _Context(mpmath.mpf(pole_threshold), radius)
        ball = _eval(root, Zm, mpmath.mpf(z_err), ctx)
        return Ball(+ball.mid, +ball.rad)


def evaluate(expr: FunctionExpr | Node, Z, prec: Precision, z_err=0) -> Value:
    """Evaluate with escalating working precision until the bound meets prec.target.

    ``Z`` may be a callable ``bits -> (Z, z_err)``; it is then re-invoked at every
    escalation step, so a point computed from exact data gets sharper together
    with the arithmetic instead of pinning the bound at its first error.
    """
    bits = prec.bits
    while True:
        if callable(Z):
            point, err = Z(bits + _GUARD_BITS)
        else:
            point, err = Z, z_err
        ball = evaluate_ball(expr, point, bits + _GUARD_BITS, err, prec.pole_threshold, prec.truncation_radius)
        if ball.rad <= prec.target:
            return Value(ball.mid, ball.rad, bits)
        bits *= 2
        if bits > prec.max_bits:
            raise PrecisionUnreachable(
                f"error bound {mpmath.nstr(ball.rad, 5)} exceeds target {prec.target} at {bits // 2} bits")
