"""Explicit arithmetic in CM fields given by an integral basis.

Elements are exact rational coordinate vectors over the integral basis, ideals
are Z-lattices in Hermite normal form, and only embeddings into C are floating.

Embeddings are the roots of the defining polynomial, sorted by real part and
then imaginary part.  An automorphism sigma of a Galois field is labelled
relative to a reference root r: the automorphism with sigma(x) |-> r_k under r
is "the automorphism for embedding k".  A CM type uses its first embedding as
that reference, which fixes the identification of the reflex field with K.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from importlib import resources
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

import mpmath
import sympy

from . import _linalg as la
from .errors import NotACMType, PrecisionUnreachable, UnsupportedField, ValidationFailed
from .modfun.precision import Precision

_ORDER_BITS = 256


def _poly_mulmod(a: Sequence, b: Sequence, f: Sequence[int]) -> list:
    """Product of ascending coefficient lists modulo the monic polynomial f."""
    n = len(f) - 1
    prod = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for j in range(n + 1):
                prod[k - n + j] -= c * f[j]
    prod = prod[:n] + [Fraction(0)] * max(0, n - len(prod))
    return prod


def _poly_compose_mod(p: Sequence, q: Sequence, f: Sequence[int]) -> list:
    """p(q(x)) mod f, Horner style."""
    n = len(f) - 1
    acc = [Fraction(0)] * n
    for c in reversed(p):
        acc = _poly_mulmod(acc, q, f)
        acc[0] += c
    return acc


class Automorphism:
    """A field automorphism, stored as the image of x and as a matrix acting on
    integral-basis coordinates."""

    def __init__(self, field: CMField, image: Sequence[Fraction]):
        self.field = field
        self.image = tuple(Fraction(c) for c in image)
        n = field.degree
        cols = []
        for b in field.power_basis_rows:
            cols.append(field.coords_from_power(_poly_compose_mod(b, self.image, field.poly)))
        self.matrix = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))

    def __call__(self, a: Element) -> Element:
        m = self.matrix
        return Element(self.field, tuple(sum(m[i][j] * a.coords[j] for j in range(len(m)))
                                         for i in range(len(m))))

    def compose(self, other: Automorphism) -> Automorphism:
        """self after other."""
        f = self.field
        return Automorphism(f, _poly_compose_mod(other.image, self.image, f.poly))

    def __eq__(self, other):
        return isinstance(other, Automorphism) and self.image == other.image

    def __hash__(self):
        return hash(self.image)

    def is_identity(self) -> bool:
        return self.image == tuple(Fraction(int(i == 1)) for i in range(self.field.degree))

    def order(self) -> int:
        k, s = 1, self
        while not s.is_identity():
            s = s.compose(self)
            k += 1
        return k

    @cached_property
    def root_map(self) -> tuple[int, ...]:
        """pi with (root i) o sigma = root pi(i)."""
        f = self.field
        out = []
        with mpmath.workprec(_ORDER_BITS):
            roots = f.roots_mp(_ORDER_BITS)
            for r in roots:
                v = mpmath.polyval(list(reversed([mpmath.mpf(c.numerator) / c.denominator for c in self.image])), r)
                out.append(min(range(len(roots)), key=lambda k: abs(roots[k] - v)))
        return tuple(out)


class CMField:
    """A CM field with explicit integral basis (CMFieldSpec)."""

    def __init__(self, label: str, poly: Sequence[int], basis: Sequence[Sequence], units: Sequence[Sequence],
                 class_number: int, cm_type: Sequence[int]):
        self.label = label
        self.poly = tuple(int(c) for c in poly)
        self.degree = len(self.poly) - 1
        self.power_basis_rows = tuple(tuple(Fraction(c) for c in b) for b in basis)
        self.class_number = class_number
        self.cm_type_indices = tuple(int(i) for i in cm_type)
        inv = la.inverse(self.power_basis_rows)
        if inv is None:
            raise ValidationFailed("basis_independent", "integral basis is singular")
        self._from_power = inv
        n = self.degree
        self.table = [[self.coords_from_power(_poly_mulmod(self.power_basis_rows[i], self.power_basis_rows[j], self.poly))
                       for j in range(n)] for i in range(n)]
        self.units = tuple(self.element(u) for u in units)

    # -- coordinates ------------------------------------------------------------------
    def coords_from_power(self, p: Sequence) -> tuple[Fraction, ...]:
        p = list(p) + [0] * (self.degree - len(p))
        if len(p) > self.degree:
            p = _poly_mulmod(p, [Fraction(1)], self.poly)
        return tuple(sum(Fraction(p[i]) * self._from_power[i][j] for i in range(self.degree))
                     for j in range(self.degree))

    def to_power(self, a: Element) -> tuple[Fraction, ...]:
        n = self.degree
        return tuple(sum(a.coords[i] * self.power_basis_rows[i][j] for i in range(n)) for j in range(n))

    def element(self, coords: Sequence) -> Element:
        if len(coords) != self.degree:
            raise ValueError("coordinate vector has wrong length")
        return Element(self, tuple(Fraction(c) for c in coords))

    def from_power(self, p: Sequence) -> Element:
        return Element(self, self.coords_from_power(p))

    def from_int(self, k) -> Element:
        return self.from_power([Fraction(k)])

    @property
    def one(self) -> Element:
        return self.from_int(1)

    @property
    def zero(self) -> Element:
        return self.from_int(0)

    @property
    def gen(self) -> Element:
        return self.from_power([0, 1])

    def basis_elements(self) -> list[Element]:
        n = self.degree
        return [self.element([int(i == j) for j in range(n)]) for i in range(n)]

    @cached_property
    def trace_vector(self) -> tuple[Fraction, ...]:
        return tuple(sum(self.table[i][j][j] for j in range(self.degree)) for i in range(self.degree))

    @cached_property
    def discriminant(self) -> int:
        n = self.degree
        gram = [[(self.basis_elements()[i] * self.basis_elements()[j]).trace() for j in range(n)] for i in range(n)]
        return int(la.det(gram))

    @cached_property
    def poly_discriminant(self) -> int:
        x = sympy.Symbol("x")
        return int(sympy.discriminant(sympy.Poly(list(reversed(self.poly)), x)))

    @property
    def is_monogenic_basis(self) -> bool:
        """True when Z[x] is the whole ring spanned by the basis."""
        return self.poly_discriminant == self.discriminant

    # -- embeddings --------------------------------------------------------------------
    @cached_property
    def _ordered_roots(self) -> list:
        with mpmath.workprec(_ORDER_BITS):
            coeffs = [mpmath.mpf(c) for c in reversed(self.poly)]
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=2 * _ORDER_BITS)
            roots = [mpmath.mpc(r) for r in roots]
        return sorted(roots, key=lambda r: (round(float(r.real) * 1e9), float(r.imag)))

    def roots_mp(self, bits: int) -> list:
        cache = self.__dict__.setdefault("_root_cache", {})
        if bits not in cache:
            with mpmath.workprec(bits + 20):
                coeffs = [mpmath.mpf(c) for c in reversed(self.poly)]
                dcoeffs = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])]
                out = []
                for r in self._ordered_roots:
                    r = mpmath.mpc(r)
                    for _ in range(2 + max(0, (bits // _ORDER_BITS).bit_length() + 1)):
                        r = r - mpmath.polyval(coeffs, r) / mpmath.polyval(dcoeffs, r)
                    out.append(r)
            cache[bits] = out
        return cache[bits]

    def embeddings(self, prec: Precision) -> list:
        """All roots at the working precision of prec, with residual certified."""
        roots = self.roots_mp(prec.bits)
        with prec.workprec():
            coeffs = [mpmath.mpf(c) for c in reversed(self.poly)]
            for r in roots:
                if abs(mpmath.polyval(coeffs, r)) > mpmath.mpf(prec.target) * 1e-3:
                    raise PrecisionUnreachable("root refinement did not converge")
        return roots

    def embedding_values(self, bits: int) -> list[list]:
        """v[i][k] = image of basis element k under root i."""
        cache = self.__dict__.setdefault("_basis_images", {})
        if bits not in cache:
            roots = self.roots_mp(bits)
            with mpmath.workprec(bits + 20):
                cache[bits] = [[sum((mpmath.mpf(c.numerator) / c.denominator) * r ** m
                                    for m, c in enumerate(b)) for b in self.power_basis_rows] for r in roots]
        return cache[bits]

    def embed(self, a: Element, index: int, bits: int):
        vals = self.embedding_values(bits)[index]
        with mpmath.workprec(bits + 20):
            return mpmath.fsum((mpmath.mpf(c.numerator) / c.denominator) * v
                               for c, v in zip(a.coords, vals) if c)

    @cached_property
    def conj_index(self) -> tuple[int, ...]:
        roots = self._ordered_roots
        return tuple(min(range(len(roots)), key=lambda k: abs(roots[k] - mpmath.conj(r))) for r in roots)

    # -- automorphisms --------------------------------------------------------------------
    @cached_property
    def automorphisms(self) -> list[Automorphism]:
        """All automorphisms (found numerically, certified exactly)."""
        n = self.degree
        found: list[Automorphism] = []
        with mpmath.workprec(_ORDER_BITS):
            roots = self._ordered_roots
            vander = mpmath.matrix([[r ** k for k in range(n)] for r in roots])
            for perm in itertools.permutations(range(n)):
                rhs = mpmath.matrix([roots[p] for p in perm])
                try:
                    c = mpmath.lu_solve(vander, rhs)
                except ZeroDivisionError:
                    continue
                coeffs = []
                for k in range(n):
                    if abs(c[k].imag) > 1e-40:
                        break
                    q = Fraction(str(mpmath.nstr(c[k].real, 60))).limit_denominator(10**6)
                    if abs(c[k].real - mpmath.mpf(q.numerator) / q.denominator) > 1e-40:
                        break
                    coeffs.append(q)
                else:
                    image = coeffs
                    if all(v == 0 for v in _poly_compose_mod(list(self.poly), image, self.poly)):
                        aut = Automorphism(self, image)
                        if aut not in found:
                            found.append(aut)
        found.sort(key=lambda s: s.root_map[0])
        return found

    @property
    def is_galois(self) -> bool:
        return len(self.automorphisms) == self.degree

    def automorphism_for(self, reference: int, target: int) -> Automorphism:
        """The sigma with (root reference) o sigma = root target."""
        for s in self.automorphisms:
            if s.root_map[reference] == target:
                return s
        raise UnsupportedField(f"{self.label}: no automorphism maps root {reference} to root {target}")

    @cached_property
    def complex_conjugation(self) -> Automorphism:
        return self.automorphism_for(0, self.conj_index[0])

    def conj(self, a: Element) -> Element:
        return self.complex_conjugation(a)

    def identity_automorphism(self) -> Automorphism:
        return Automorphism(self, [int(i == 1) for i in range(self.degree)])

    # -- helpers ------------------------------------------------------------------------------
    @cached_property
    def imaginary_basis(self) -> list[Element]:
        """A Z-basis of {x in O_K : conj(x) = -x}."""
        n = self.degree
        rho = self.complex_conjugation.matrix
        m = [[int(rho[i][j]) + int(i == j) for j in range(n)] for i in range(n)]
        return [self.element(v) for v in integer_kernel(m)]

    def to_json(self) -> dict:
        def enc(row):
            return [str(x) for x in row]
        return {"label": self.label, "poly": list(self.poly),
                "basis": [enc(b) for b in self.power_basis_rows],
                "units": [enc(u.coords) for u in self.units],
                "class_number": self.class_number, "cm_type": list(self.cm_type_indices)}

    def __repr__(self):
        return f"CMField({self.label!r})"


def integer_kernel(m: Sequence[Sequence[int]]) -> list[list[int]]:
    """Z-basis of {x in Z^n : m x = 0}, via the HNF of [m^T | I]."""
    n = len(m[0])
    k = len(m)
    aug = [[m[r][i] for r in range(k)] + [int(i == j) for j in range(n)] for i in range(n)]
    return [r[k:] for r in la.hnf_rows(aug, k + n) if not any(r[:k])]


@dataclass(frozen=True, eq=False)
class Element:
    field: CMField
    coords: tuple[Fraction, ...]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.from_int(other)
        return isinstance(other, Element) and other.field is self.field and other.coords == self.coords

    def __hash__(self):
        return hash(self.coords)

    def _coerce(self, other) -> Element:
        if isinstance(other, Element):
            if other.field is not self.field:
                raise ValueError("elements of different fields")
            return other
        return self.field.from_int(other)

    def __add__(self, other):
        o = self._coerce(other)
        return Element(self.field, tuple(x + y for x, y in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return Element(self.field, tuple(-x for x in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Element(self.field, tuple(x * other for x in self.coords))
        o = self._coerce(other)
        n = self.field.degree
        t = self.field.table
        acc = [Fraction(0)] * n
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    if b:
                        ab = a * b
                        row = t[i][j]
                        for k in range(n):
                            if row[k]:
                                acc[k] += ab * row[k]
        return Element(self.field, tuple(acc))

    __rmul__ = __mul__

    def mult_matrix(self) -> list[list[Fraction]]:
        """Matrix of y -> self*y on integral coordinates (columns = images)."""
        cols = [(self * b).coords for b in self.field.basis_elements()]
        n = self.field.degree
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def inverse(self) -> Element:
        sol = la.solve(self.mult_matrix(), [[c] for c in self.field.one.coords])
        if sol is None:
            raise ZeroDivisionError("zero element has no inverse")
        return Element(self.field, tuple(r[0] for r in sol))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Element(self.field, tuple(x / other for x in self.coords))
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result, base = self.field.one, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def norm(self) -> Fraction:
        return la.det(self.mult_matrix())

    def trace(self) -> Fraction:
        return sum((c * t for c, t in zip(self.coords, self.field.trace_vector)), Fraction(0))

    def conj(self) -> Element:
        return self.field.conj(self)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def embed(self, index: int, bits: int):
        return self.field.embed(self, index, bits)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coords]

    def __repr__(self):
        return f"Element({self.field.label}, [{', '.join(str(c) for c in self.coords)}])"


# -- loading ---------------------------------------------------------------------------------

DATA_FILES = {"gaussian": "gaussian.json", "eisenstein": "eisenstein.json", "cyclotomic5": "cyclotomic5.json"}


def _parse_frac(x) -> Fraction:
    return Fraction(x) if not isinstance(x, float) else Fraction(str(x))


def load_field(spec: dict | str | Path) -> CMField:
    """Build and validate a field from a JSON document, a path, or a shipped name."""
    if isinstance(spec, (str, Path)):
        name = str(spec)
        if name in DATA_FILES:
            text = resources.files("cmsiegel.data").joinpath(DATA_FILES[name]).read_text()
        else:
            text = Path(spec).read_text()
        spec = json.loads(text)
    for key in ("label", "poly", "basis", "units", "class_number", "cm_type"):
        if key not in spec:
            raise ValidationFailed("schema", f"missing key /{key}")
    poly = spec["poly"]
    if not all(isinstance(c, int) or (isinstance(c, str) and c.lstrip("-").isdigit()) for c in poly):
        raise ValidationFailed("poly_integral", "coefficients must be integers")
    poly = [int(c) for c in poly]
    if len(poly) < 3 or poly[-1] != 1:
        raise ValidationFailed("poly_monic", "polynomial must be monic of degree >= 2")
    deg = len(poly) - 1
    if deg % 2:
        raise ValidationFailed("even_degree", f"degree {deg} is odd")
    x = sympy.Symbol("x")
    p = sympy.Poly(list(reversed(poly)), x)
    if sympy.gcd(p, p.diff(x)).degree() > 0:
        raise ValidationFailed("squarefree", "polynomial has repeated roots")
    if not p.is_irreducible:
        raise ValidationFailed("irreducible", "polynomial factors over Q")
    if p.count_roots() != 0:
        raise ValidationFailed("totally_imaginary", "polynomial has real roots")
    basis = [[_parse_frac(c) for c in b] for b in spec["basis"]]
    if len(basis) != deg or any(len(b) > deg for b in basis):
        raise ValidationFailed("basis_shape", f"expected {deg} basis vectors of length <= {deg}")
    basis = [b + [Fraction(0)] * (deg - len(b)) for b in basis]
    if int(spec["class_number"]) != 1:
        raise ValidationFailed("class_number", "only class number one is supported")
    cm_type = spec["cm_type"]
    if len(cm_type) != deg // 2 or any(not 0 <= int(i) < deg for i in cm_type):
        raise ValidationFailed("cm_type", f"expected {deg // 2} root indices in [0, {deg})")
    units = [[_parse_frac(c) for c in u] for u in spec["units"]]
    field = CMField(spec["label"], poly, basis, units, 1, cm_type)
    if any(c.denominator != 1 for row in field.table for v in row for c in v):
        raise ValidationFailed("integral_basis", "structure constants are not integral")
    if field.discriminant == 0:
        raise ValidationFailed("discriminant", "basis discriminant vanishes")
    if field.one.coords != tuple(Fraction(int(i == 0)) for i in range(deg)) and not field.one.is_integral():
        raise ValidationFailed("integral_basis", "1 is not in the lattice")
    for k, u in enumerate(field.units):
        if not u.is_integral() or abs(u.norm()) != 1:
            raise ValidationFailed("units", f"unit {k} is not an integral element of norm +-1")
    return field


# -- CM types and reflex ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CMType:
    field: CMField
    embeddings: tuple[int, ...]

    def __post_init__(self):
        f = self.field
        emb = tuple(self.embeddings)
        object.__setattr__(self, "embeddings", emb)
        if len(emb) != f.degree // 2 or len(set(emb)) != len(emb):
            raise NotACMType(f"need {f.degree // 2} distinct embeddings, got {emb}")
        chosen = set(emb)
        if any(f.conj_index[i] in chosen for i in emb):
            raise NotACMType(f"embeddings {emb} contain a complex-conjugate pair")

    @property
    def reference(self) -> int:
        return self.embeddings[0]

    def automorphisms(self) -> list[Automorphism]:
        """sigma_i with (reference root) o sigma_i = phi_i."""
        return [self.field.automorphism_for(self.reference, k) for k in self.embeddings]

    def __eq__(self, other):
        return isinstance(other, CMType) and other.field is self.field and set(other.embeddings) == set(self.embeddings)

    def __hash__(self):
        return hash(frozenset(self.embeddings))


def cm_type(field: CMField, embeddings: Sequence[int] | None = None) -> CMType:
    return CMType(field, tuple(field.cm_type_indices if embeddings is None else embeddings))


@dataclass(frozen=True)
class ReflexData:
    reflex_field: CMField
    reflex_type: CMType
    source_type: CMType
    identification: str

    @property
    def genus(self) -> int:
        return self.reflex_field.degree // 2

    def psi_indices(self) -> tuple[int, ...]:
        return self.reflex_type.embeddings


def _check_supported(field: CMField) -> None:
    if field.degree == 2:
        return
    if field.degree == 4 and field.is_galois and any(s.order() == 4 for s in field.automorphisms):
        return
    raise UnsupportedField(f"{field.label}: only imaginary quadratic and cyclic quartic CM fields are supported")


def reflex(t: CMType) -> ReflexData:
    f = t.field
    _check_supported(f)
    S = t.automorphisms()
    S_star = [next(g for g in f.automorphisms if g.compose(s).is_identity()) for s in S]
    S_star_set = set(S_star)
    H_star = [g for g in f.automorphisms if {g.compose(s) for s in S_star} == S_star_set]
    if len(H_star) != 1:
        raise UnsupportedField(f"CM type {t.embeddings} is not primitive")
    psi = tuple(s.root_map[t.reference] for s in S_star)
    return ReflexData(f, CMType(f, psi), t, f"K* = K via root {t.reference}")


def type_norm_elem(t: CMType, d: Element) -> Element:
    if d.is_zero():
        raise ValueError("type norm of zero")
    out = t.field.one
    for s in t.automorphisms():
        out = out * s(d)
    return out


def reflex_norm_ideal(t: CMType, a: FractionalIdeal) -> FractionalIdeal:
    _check_supported(t.field)
    out = FractionalIdeal.unit(t.field)
    for s in t.automorphisms():
        out = out * a.conjugate(s)
    return out


# -- ideals ---------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FractionalIdeal:
    """(1/denominator) * Z-span of the rows (integral-basis coordinates), rows in HNF."""

    field: CMField
    rows: tuple[tuple[int, ...], ...]
    denominator: int

    def __eq__(self, other):
        return (isinstance(other, FractionalIdeal) and other.field is self.field
                and other.rows == self.rows and other.denominator == self.denominator)

    def __hash__(self):
        return hash((self.rows, self.denominator))

    @classmethod
    def from_lattice(cls, field: CMField, vectors: Iterable[Sequence[Fraction]]) -> FractionalIdeal:
        vectors = [list(v) for v in vectors]
        d = la.common_denominator(x for v in vectors for x in v)
        ints = [[int(x * d) for x in v] for v in vectors]
        rows = la.hnf_rows(ints, field.degree)
        if len(rows) != field.degree:
            raise ValueError("generators do not span a full lattice")
        c = gcd(la.content(x for r in rows for x in r), d)
        rows = tuple(tuple(x // c for x in r) for r in rows)
        return cls(field, rows, d // c)

    @classmethod
    def from_generators(cls, field: CMField, gens: Iterable[Element]) -> FractionalIdeal:
        basis = field.basis_elements()
        return cls.from_lattice(field, [(g * b).coords for g in gens for b in basis])

    @classmethod
    def principal(cls, field: CMField, a: Element) -> FractionalIdeal:
        return cls.from_generators(field, [a])

    @classmethod
    def unit(cls, field: CMField) -> FractionalIdeal:
        n = field.degree
        return cls(field, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), 1)

    def elements(self) -> list[Element]:
        return [self.field.element([Fraction(x, self.denominator) for x in r]) for r in self.rows]

    @property
    def basis(self) -> list[list[Fraction]]:
        """Columns are the Z-basis in integral-basis coordinates."""
        n = self.field.degree
        return [[Fraction(self.rows[j][i], self.denominator) for j in range(n)] for i in range(n)]

    def __mul__(self, other):
        if isinstance(other, Element):
            return FractionalIdeal.from_lattice(self.field, [(other * e).coords for e in self.elements()])
        if isinstance(other, (int, Fraction)):
            return FractionalIdeal.from_lattice(self.field, [(e * Fraction(other)).coords for e in self.elements()])
        a, b = self.elements(), other.elements()
        return FractionalIdeal.from_lattice(self.field, [(x * y).coords for x in a for y in b])

    __rmul__ = __mul__

    def conjugate(self, s: Automorphism) -> FractionalIdeal:
        return FractionalIdeal.from_lattice(self.field, [s(e).coords for e in self.elements()])

    def norm(self) -> Fraction:
        n = self.field.degree
        return Fraction(abs(int(la.det(self.rows))), self.denominator ** n)

    def inverse(self) -> FractionalIdeal:
        f = self.field
        if not f.is_galois:
            raise UnsupportedField("ideal inversion needs a Galois field")
        prod = FractionalIdeal.unit(f)
        for s in f.automorphisms:
            if not s.is_identity():
                prod = prod * self.conjugate(s)
        return prod * (1 / self.norm())

    def __truediv__(self, other: FractionalIdeal) -> FractionalIdeal:
        return self * other.inverse()

    def __contains__(self, a: Element) -> bool:
        sol = la.unimodular_solve([[Fraction(x, self.denominator) for x in r] for r in self.rows], a.coords)
        return sol is not None and all(c.denominator == 1 for c in sol)

    def coordinates(self, a: Element) -> list[Fraction]:
        """Coordinates of a in the HNF Z-basis."""
        return la.unimodular_solve([[Fraction(x, self.denominator) for x in r] for r in self.rows], a.coords)

    def is_integral(self) -> bool:
        return self.denominator == 1

    def contains_ideal(self, other: FractionalIdeal) -> bool:
        return all(e in self for e in other.elements())

    def to_json(self) -> dict:
        return {"rows": [[str(x) for x in r] for r in self.rows], "denominator": str(self.denominator)}

    def __repr__(self):
        return f"FractionalIdeal({self.field.label}, rows={self.rows}, den={self.denominator})"


def prime_ideals_above(field: CMField, p: int) -> list[tuple[FractionalIdeal, int, int]]:
    """(P, ramification e, residue degree f) over p by Dedekind-Kummer."""
    if field.discriminant and field.poly_discriminant // field.discriminant % p == 0:
        raise UnsupportedField(f"p = {p} divides the index of Z[x]")
    x = sympy.Symbol("x")
    fp = sympy.Poly(list(reversed(field.poly)), x, modulus=p)
    out = []
    for fac, e in fp.factor_list()[1]:
        coeffs = [int(c) % p for c in reversed(fac.all_coeffs())]
        gen = field.from_power(coeffs)
        P = FractionalIdeal.from_generators(field, [field.from_int(p), gen])
        out.append((P, e, fac.degree()))
    return out


def _primes_below(bound: int) -> list[int]:
    return [int(q) for q in sympy.primerange(2, bound)]


def ideals_of_norm_below(field: CMField, bound: int) -> list[FractionalIdeal]:
    """Every integral ideal with absolute norm < bound (including O_K)."""
    primes = []
    for p in _primes_below(bound):
        for P, _, f in prime_ideals_above(field, p):
            if p ** f < bound:
                primes.append((P, p ** f))
    found = {FractionalIdeal.unit(field): 1}
    frontier = [(FractionalIdeal.unit(field), 1, 0)]
    while frontier:
        ideal, norm, start = frontier.pop()
        for k in range(start, len(primes)):
            P, q = primes[k]
            if norm * q < bound:
                nxt = ideal * P
                if nxt not in found:
                    found[nxt] = norm * q
                frontier.append((nxt, norm * q, k))
    return sorted(found, key=lambda a: (found[a], a.rows))


def random_element(field: CMField, rng, bound: int = 5) -> Element:
    return field.element([rng.randint(-bound, bound) for _ in range(field.degree)])
