"""Ray class groups Cl(N O_K) for class-number-one CM fields.

With class number one every ideal coprime to N is (d), and (d) ~ (d') iff
d'/d is a global unit modulo N.  So Cl(N O_K) is (O_K/N)^x modulo the image
of the unit group, and classes are keyed by residue labels: the smallest
residue (integral-basis coordinates in [0, N)) of each unit orbit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd
from typing import Sequence

from . import _linalg as la
from .cmfield import CMField, Element, FractionalIdeal, ReflexData, type_norm_elem
from .errors import UnsupportedField

Residue = tuple[int, ...]

UNIT_IMAGE_CAP = 10**6


@dataclass(frozen=True)
class RayClass:
    index: int
    label: Residue
    generator: Element
    representative: FractionalIdeal

    def to_json(self) -> dict:
        return {"index": self.index, "label": list(self.label),
                "generator": self.generator.to_json(), "representative": self.representative.to_json()}


class _IntNorm:
    """Norms of integral elements from integer multiplication tables."""

    def __init__(self, f: CMField):
        n = f.degree
        self.n = n
        self.tables = []
        for b in f.basis_elements():
            m = b.mult_matrix()
            if any(x.denominator != 1 for row in m for x in row):
                raise ValueError("basis multiplication table is not integral")
            self.tables.append([[int(x) for x in row] for row in m])

    def __call__(self, c: Sequence[int]) -> int:
        n = self.n
        m = [[sum(c[k] * self.tables[k][i][j] for k in range(n) if c[k]) for j in range(n)] for i in range(n)]
        return la.int_det(m)


def _reduce(a: Element, N: int) -> Residue:
    if any(c.denominator != 1 for c in a.coords):
        raise ValueError("element is not integral")
    return tuple(int(c) % N for c in a.coords)


def _residue_mul(f: CMField, N: int, r: Residue, s: Residue) -> Residue:
    return _reduce(f.element(r) * f.element(s), N)




def unit_image(f: CMField, N: int) -> frozenset[Residue]:
    """Closure of the supplied unit generators (and -1) inside (O/N)^x."""
    gens = {_reduce(u, N) for u in f.units} | {_reduce(-f.one, N)}
    seen = {_reduce(f.one, N)}
    frontier = list(seen)
    while frontier:
        x = frontier.pop()
        for u in gens:
            y = _residue_mul(f, N, x, u)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
                if len(seen) > UNIT_IMAGE_CAP:
                    raise ValueError("unit image exceeds the enumeration cap")
    return frozenset(seen)


@dataclass(frozen=True, eq=False)
class RayClassGroup:
    field: CMField
    level: int
    classes: tuple[RayClass, ...]
    table: tuple[tuple[int, ...], ...]
    identity: int
    units: frozenset[Residue]
    _label_of: dict

    @property
    def order(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, k: int) -> RayClass:
        return self.classes[k]

    @property
    def identity_class(self) -> RayClass:
        return self.classes[self.identity]

    def class_of_residue(self, r: Residue) -> RayClass:
        r = tuple(x % self.level for x in r)
        if r not in self._label_of:
            raise ValueError(f"{r} is not a unit residue mod {self.level}")
        return self.classes[self._label_of[r]]

    def class_of(self, d: Element) -> RayClass:
        """The class of (d) for an integral d coprime to N."""
        return self.class_of_residue(_reduce(d, self.level))

    def compose(self, C: RayClass, D: RayClass) -> RayClass:
        return self.classes[self.table[C.index][D.index]]

    def inverse(self, C: RayClass) -> RayClass:
        return next(D for D in self.classes if self.table[C.index][D.index] == self.identity)

    def to_json(self) -> dict:
        return {"field": self.field.label, "N": self.level, "order": self.order,
                "identity": self.identity,
                "classes": [{"label": list(c.label), "representative": c.representative.to_json(),
                             "generator": c.generator.to_json()} for c in self.classes],
                "table": [list(r) for r in self.table]}


def _smallest_generators(f: CMField, N: int, label_of: dict, norm: _IntNorm) -> dict[int, Element]:
    """Per class, the integral d of least norm in the box |c_i| <= N (ties: small, then positive, coordinates)."""
    best: dict[int, tuple] = {}
    for c in itertools.product(range(-N, N + 1), repeat=f.degree):
        k = label_of.get(tuple(x % N for x in c))
        if k is None:
            continue
        key = (abs(norm(c)), sum(map(abs, c)), tuple(-x for x in c))
        if k not in best or key < best[k][0]:
            best[k] = (key, c)
    return {k: f.element(v[1]) for k, v in best.items()}


def ray_class_group(f: CMField, N: int) -> RayClassGroup:
    if f.class_number != 1:
        raise UnsupportedField("class number must be 1")
    if N < 2:
        raise ValueError("N must be at least 2")
    units = unit_image(f, N)
    norm = _IntNorm(f)
    residues = [r for r in itertools.product(range(N), repeat=f.degree) if gcd(norm(r), N) == 1]
    labels: list[Residue] = []
    label_of: dict[Residue, int] = {}
    for r in residues:
        if r in label_of:
            continue
        orbit = {_residue_mul(f, N, r, u) for u in units}
        k = len(labels)
        labels.append(min(orbit))
        for x in orbit:
            label_of[x] = k
    # order classes by label so the identity class (label of 1) is deterministic
    order = sorted(range(len(labels)), key=lambda k: labels[k])
    renum = {old: new for new, old in enumerate(order)}
    labels = [labels[k] for k in order]
    label_of = {r: renum[k] for r, k in label_of.items()}
    gens = _smallest_generators(f, N, label_of, norm)
    classes = tuple(RayClass(k, labels[k], gens[k], FractionalIdeal.principal(f, gens[k]))
                    for k in range(len(labels)))
    table = tuple(tuple(label_of[_residue_mul(f, N, a, b)] for b in labels) for a in labels)
    identity = label_of[_reduce(f.one, N)]
    return RayClassGroup(f, N, classes, table, identity, units, label_of)


def compose(G: RayClassGroup, C: RayClass, D: RayClass) -> RayClass:
    return G.compose(C, D)


def coprime_representative(C: RayClass, N: int | None = None) -> FractionalIdeal:
    """The smallest-norm principal integral ideal (d) in C; its norm is coprime to N."""
    if N is not None:
        assert gcd(int(C.representative.norm()), N) == 1
    return C.representative


def alternate_generators(G: RayClassGroup, C: RayClass, count: int, rng) -> list[Element]:
    """Random integral d' with (d') in C: d' = u d (1 + N x), u a unit, x random."""
    f, N = G.field, G.level
    out = []
    for _ in range(count):
        x = f.element([rng.randint(-2, 2) for _ in range(f.degree)])
        u = f.units[rng.randrange(len(f.units))] ** rng.randint(-2, 2) if f.units else f.one
        d = u * C.generator * (f.one + x * N)
        if d.is_zero():
            continue
        out.append(d)
    return out


def subgroup_H(G: RayClassGroup, rd: ReflexData) -> list[RayClass]:
    """Subgroup generated by classes of (d) with type norm g(d) = 1 mod N O_{K*}."""
    f, N = G.field, G.level
    if rd.source_type.field is not f:
        raise ValueError("reflex data belongs to another field")
    one = _reduce(rd.reflex_field.one, N)
    seeds = set()
    for r in itertools.product(range(N), repeat=f.degree):
        if r not in G._label_of:
            continue
        if _reduce(type_norm_elem(rd.source_type, f.element(r)), N) == one:
            seeds.add(G._label_of[r])
    members = {G.identity} | seeds
    frontier = list(members)
    while frontier:
        a = frontier.pop()
        for b in seeds:
            c = G.table[a][b]
            if c not in members:
                members.add(c)
                frontier.append(c)
    return [G.classes[k] for k in sorted(members)]


def residues(G: RayClassGroup) -> Sequence[Residue]:
    return sorted(G._label_of)
