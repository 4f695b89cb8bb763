"""Named, versioned generators h of level N.

Metadata lives in ``data/catalog.json``.  Each entry names a builder here;
entries whose level is fixed also store their expression tree, which is
checked against the builder on load so the file and the code cannot drift.

Genus-2 entries are assembled from the ten even theta constants with
half-integral characteristics:

    psi4  = 1/4 sum theta^8
    chi10 = -2^-14 prod theta^2
    chi12 = 2^-17/3 sum_C prod_{m not in C} theta^4

where C runs over the 15 four-element sets of even characteristics summing to
zero in F_2^4.  Then I2 = -24 chi12/chi10, I4 = 4 psi4, I10 = -2^14 chi10 and
the absolute invariants are j1 = I2^5/I10, j2 = I2^3 I4/I10, i3 = I4^5/I10^2.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import gcd, lcm

from .expr import (FunctionExpr, Node, add, const, eta, node_from_json, power, product, quotient,
                   reduced, rescale, siegel, theta)

_HALF = Fraction(1, 2)


def even_characteristics(g: int = 2) -> list[tuple[tuple[Fraction, ...], tuple[Fraction, ...]]]:
    out = []
    for a in itertools.product((0, _HALF), repeat=g):
        for b in itertools.product((0, _HALF), repeat=g):
            if sum(4 * x * y for x, y in zip(a, b)) % 2 == 0:
                out.append((tuple(Fraction(x) for x in a), tuple(Fraction(x) for x in b)))
    return out


def _zero_sum_quadruples(chars) -> list[tuple[int, ...]]:
    def vec(c):
        return [int(2 * x) for x in c[0] + c[1]]
    return [C for C in itertools.combinations(range(len(chars)), 4)
            if all(sum(vec(chars[i])[k] for i in C) % 2 == 0 for k in range(4))]


def siegel_exponent(N: int) -> int:
    """Smallest exponent m for which g_{(1/N, 0)}^m is invariant under Gamma^1(N)."""
    return lcm(12, gcd(2, N) * N)


# -- genus-1 builders ----------------------------------------------------------

def _j_g1() -> Node:
    t2 = theta([_HALF], [0])
    t3 = theta([0], [0])
    t4 = theta([0], [_HALF])
    num = product(const(32), power(add(power(t2, 8), power(t3, 8), power(t4, 8)), 3))
    return reduced(quotient(num, power(product(t2, t3, t4), 8)))


def _siegel_power(N: int) -> Node:
    return power(siegel((Fraction(1, N), 0)), siegel_exponent(N))


def _eta_quotient(N: int) -> Node:
    return power(quotient(rescale(N, eta()), eta()), 24)


# -- genus-2 builders ----------------------------------------------------------

def _thetas():
    return [theta(a, b) for a, b in even_characteristics(2)]


def _psi4() -> Node:
    return product(const(Fraction(1, 4)), add(*(power(t, 8) for t in _thetas())))


def _chi10() -> Node:
    return product(const(Fraction(-1, 2**14)), *(power(t, 2) for t in _thetas()))


def _chi12() -> Node:
    ts = _thetas()
    terms = [product(*(power(ts[m], 4) for m in range(10) if m not in C))
             for C in _zero_sum_quadruples(even_characteristics(2))]
    return product(const(Fraction(1, 3 * 2**17)), add(*terms))


def _igusa_basic():
    I2 = quotient(product(const(-24), _chi12()), _chi10())
    I4 = product(const(4), _psi4())
    I10 = product(const(-(2**14)), _chi10())
    return I2, I4, I10


def _igusa(which: str) -> Node:
    I2, I4, I10 = _igusa_basic()
    if which == "j1":
        body = quotient(power(I2, 5), I10)
    elif which == "j2":
        body = quotient(product(power(I2, 3), I4), I10)
    else:
        body = quotient(power(I4, 5), power(I10, 2))
    return reduced(body)


def _theta4_quotient() -> Node:
    ch = even_characteristics(2)
    num = theta(*ch[1])
    den = theta(*ch[0])
    return rescale(2, quotient(power(num, 4), power(den, 4)))


_BUILDERS = {
    "j": lambda N: _j_g1(),
    "siegel_power": _siegel_power,
    "eta_quotient": _eta_quotient,
    "igusa_j1": lambda N: _igusa("j1"),
    "igusa_j2": lambda N: _igusa("j2"),
    "igusa_i3": lambda N: _igusa("i3"),
    "scaled_igusa_j1": lambda N: rescale(N, _igusa("j1")),
    "scaled_igusa_i3": lambda N: rescale(N, _igusa("i3")),
    "theta4_quotient": lambda N: _theta4_quotient(),
}


@lru_cache(maxsize=1)
def _metadata() -> dict:
    raw = resources.files("cmsiegel.data").joinpath("catalog.json").read_text()
    data = json.loads(raw)
    entries = {e["name"]: e for e in data["entries"]}
    for name, e in entries.items():
        if e["builder"] not in _BUILDERS:
            raise ValueError(f"catalog entry {name!r} names unknown builder {e['builder']!r}")
        if "expr" in e and node_from_json(e["expr"]) != _BUILDERS[e["builder"]](None):
            raise ValueError(f"catalog entry {name!r}: stored tree differs from its builder")
    return entries


def available() -> list[str]:
    return sorted(_metadata())


def entry_info(name: str) -> dict:
    meta = _metadata()
    if name not in meta:
        raise KeyError(f"unknown catalog entry {name!r}; available: {', '.join(available())}")
    return meta[name]


def minimal_level(name: str, N: int) -> int:
    rule = entry_info(name)["level"]
    return N if rule == "N" else int(rule)


def get(name: str, N: int) -> FunctionExpr:
    """The catalog function ``name`` as a generator at level N.

    Fixed-level entries can serve at any multiple of their own level.
    """
    info = entry_info(name)
    if N < 2:
        raise ValueError("level must be at least 2")
    own = minimal_level(name, N)
    if N % own:
        raise ValueError(f"{name} has level {own}, which does not divide {N}")
    root = _BUILDERS[info["builder"]](N)
    return FunctionExpr(name, root, N, int(info["genus"]), int(info["version"]), info.get("description", ""))


def catalog_json() -> dict:
    """The metadata file contents, regenerated from the builders (used to refresh catalog.json)."""
    out = []
    for name in available():
        e = dict(entry_info(name))
        if e["level"] != "N":
            e["expr"] = _BUILDERS[e["builder"]](None).to_json()
        out.append(e)
    return {"format": 1, "entries": out}
