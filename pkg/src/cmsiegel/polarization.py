"""Riemann forms on ideal lattices, symplectic bases and CM points.

The Gram matrix of E_c on elements l_k is computed exactly from the trace
identity E_c(Psi(a), Psi(b)) = Tr(c a conj(b)); floating point enters only
when the symplectic basis is pushed into C^g to build the period matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from . import _linalg as la
from .cmfield import Element, FractionalIdeal, ReflexData
from .errors import Degenerate, NotFound, NotInSiegelSpace, NotIntegral, NotPrincipal
from .modfun.precision import Precision
from .zmatrix import IntMatrix, as_matrix, eta, extend_to_symplectic, transpose

_GUARD_BITS = 32


@dataclass(frozen=True)
class RiemannForm:
    xi: Element
    scale: int = 1

    def __post_init__(self):
        if self.xi.conj() != -self.xi:
            raise ValueError("xi must be purely imaginary")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def scaled(self, k: int) -> RiemannForm:
        return RiemannForm(self.xi, self.scale * k)

    def to_json(self) -> dict:
        return {"xi": self.xi.to_json(), "scale": self.scale}


def riemann_gram(r: RiemannForm, elements: Sequence[Element]) -> IntMatrix:
    """[Tr(xi * scale * l_k * conj(l_l))]_{k,l}, exactly."""
    c = r.xi * r.scale
    conj = [e.conj() for e in elements]
    rows = []
    for a in elements:
        ca = c * a
        row = []
        for b in conj:
            t = (ca * b).trace()
            if t.denominator != 1:
                raise NotIntegral(f"trace {t} is not an integer")
            row.append(int(t))
        rows.append(row)
    return as_matrix(rows)


def frobenius_basis(gram: Sequence[Sequence[int]]) -> tuple[IntMatrix, tuple[int, ...]]:
    """Unimodular U with U^T gram U = [[O, -E], [E, O]], E = diag(eps), eps_1 | ... | eps_g."""
    n = len(gram)
    if n % 2 or any(len(r) != n for r in gram):
        raise ValueError("gram must be square of even size")
    if any(gram[i][j] != -gram[j][i] for i in range(n) for j in range(n)):
        raise ValueError("gram must be alternating")
    if la.det(gram) == 0:
        raise Degenerate("alternating form is degenerate")

    def form(u, v):
        return sum(u[i] * gram[i][j] * v[j] for i in range(n) for j in range(n) if u[i] and v[j])

    def add(u, v, k):
        return [x + k * y for x, y in zip(u, v)]

    rest = [[int(i == j) for j in range(n)] for i in range(n)]
    pairs = []
    while rest:
        while True:
            _, i, j = min((abs(form(rest[i], rest[j])), i, j)
                          for i in range(len(rest)) for j in range(len(rest))
                          if form(rest[i], rest[j]) != 0)
            e, f = rest[i], rest[j]
            d = form(e, f)
            if d < 0:
                e, f, d = f, e, -d
            others = [v for k, v in enumerate(rest) if k not in (i, j)]
            restart = False
            cleared = []
            for v in others:
                a, b = form(e, v), form(f, v)
                v = add(add(v, f, -(a // d)), e, b // d)
                if form(e, v) or form(f, v):
                    restart = True
                cleared.append(v)
            if restart:
                rest = [e, f] + cleared
                continue
            bad = next(((v, w) for v, w in itertools.combinations(cleared, 2) if form(v, w) % d), None)
            if bad is not None:
                e = add(e, bad[0], 1)
                rest = [e, f] + cleared
                continue
            break
        pairs.append((e, f, d))
        rest = cleared
    pairs.sort(key=lambda p: p[2])
    cols = [f for _, f, _ in pairs] + [e for e, _, _ in pairs]
    U = as_matrix(transpose(cols))
    divisors = tuple(d for _, _, d in pairs)
    return U, divisors


def _is_frobenius_form(m: Sequence[Sequence[int]], divisors: Sequence[int]) -> bool:
    g = len(divisors)
    for i in range(2 * g):
        for j in range(2 * g):
            want = 0
            if j == i + g:
                want = -divisors[i]
            elif i == j + g:
                want = divisors[j]
            if m[i][j] != want:
                return False
    return True


@dataclass(frozen=True)
class SymplecticBasis:
    elements: tuple[Element, ...]
    lattice: FractionalIdeal
    form: RiemannForm
    reflex: ReflexData

    @property
    def genus(self) -> int:
        return len(self.elements) // 2

    def gram(self) -> IntMatrix:
        return riemann_gram(self.form, self.elements)

    def vectors(self, bits: int) -> list[list]:
        """Psi(b_j) as columns: v[i][j] = psi_i(b_j)."""
        psi = self.reflex.psi_indices()
        return [[b.embed(k, bits) for b in self.elements] for k in psi]

    def transformed(self, beta: Sequence[Sequence[int]]) -> SymplecticBasis:
        """The basis [b_1 ... b_2g] beta."""
        n = len(self.elements)
        new = []
        for j in range(n):
            acc = self.elements[0].field.zero
            for i in range(n):
                if beta[i][j]:
                    acc = acc + self.elements[i] * beta[i][j]
            new.append(acc)
        return SymplecticBasis(tuple(new), self.lattice, self.form, self.reflex)

    def to_json(self) -> dict:
        return {"elements": [e.to_json() for e in self.elements], "lattice": self.lattice.to_json(),
                "form": self.form.to_json()}


def symplectic_basis_of_ideal(rd: ReflexData, r: RiemannForm, lat: FractionalIdeal,
                              normalize_one: bool = False) -> SymplecticBasis:
    """A symplectic Z-basis of lat for E_{xi*scale}; NotPrincipal unless all eps_i = 1.

    With normalize_one the last basis vector is made equal to 1 (requires 1 to be
    primitive in lat, as for lat = O).
    """
    elems = lat.elements()
    gram = riemann_gram(r, elems)
    U, divisors = frobenius_basis(gram)
    if any(d != 1 for d in divisors):
        raise NotPrincipal(f"elementary divisors {divisors}")
    basis = SymplecticBasis(tuple(elems), lat, r, rd).transformed(U)
    if normalize_one:
        one = lat.field.one
        coords = la.unimodular_solve([b.coords for b in basis.elements], one.coords)
        if coords is None or any(c.denominator != 1 for c in coords):
            raise ValueError("1 is not in the lattice")
        v = [int(c) for c in coords]
        S = extend_to_symplectic(v, len(v) - 1)
        basis = basis.transformed(S)
    assert basis.gram() == eta(len(elems) // 2)
    return basis


def find_xi(rd: ReflexData, search_bound: int = 3) -> RiemannForm:
    """Smallest purely imaginary xi (in a fixed search order) giving a principal,
    positive Riemann form on O_{K*}."""
    f = rd.reflex_field
    units = f.imaginary_basis
    disc = abs(f.discriminant)
    denominators = [q for q in range(1, disc + 1) if disc % q == 0]
    O = FractionalIdeal.unit(f).elements()
    psi = rd.psi_indices()
    coeff_range = range(-search_bound, search_bound + 1)
    candidates = sorted((c for c in itertools.product(coeff_range, repeat=len(units)) if any(c)),
                        key=lambda c: (max(map(abs, c)), sum(map(abs, c)), [-x for x in c]))
    for q in denominators:
        for c in candidates:
            xi = sum((u * k for u, k in zip(units, c)), f.zero) / q
            try:
                gram = riemann_gram(RiemannForm(xi), O)
            except NotIntegral:
                continue
            if abs(la.det(gram)) != 1:
                continue
            if all(xi.embed(k, 64).imag > 0 for k in psi):
                return RiemannForm(xi)
    raise NotFound(f"no xi with coordinates bounded by {search_bound}")


@dataclass(frozen=True)
class CMPoint:
    Z: mpmath.matrix
    genus: int
    error_bound: mpmath.mpf
    bits: int

    def entry(self, i: int, j: int):
        return self.Z[i, j]

    def to_json(self) -> dict:
        digits = int(self.bits * 0.30103) + 1
        g = self.genus
        return {"genus": g,
                "re": [[mpmath.nstr(self.Z[i, j].real, digits) for j in range(g)] for i in range(g)],
                "im": [[mpmath.nstr(self.Z[i, j].imag, digits) for j in range(g)] for i in range(g)],
                "error_bound": mpmath.nstr(self.error_bound, 6)}


def siegel_eigen_min(im: mpmath.matrix):
    """Smallest eigenvalue of a real symmetric matrix."""
    if im.rows == 1:
        return im[0, 0]
    ev = mpmath.eigsy(im, eigvals_only=True)
    return min(ev[k] for k in range(im.rows))


def cm_point(b: SymplecticBasis, prec: Precision) -> CMPoint:
    """Z = [b_{g+1} ... b_2g]^{-1} [b_1 ... b_g] with a propagated error bound."""
    g = b.genus
    bits = prec.bits + _GUARD_BITS
    v = b.vectors(bits)
    with mpmath.workprec(bits):
        X1 = mpmath.matrix([[v[i][j] for j in range(g)] for i in range(g)])
        X2 = mpmath.matrix([[v[i][g + j] for j in range(g)] for i in range(g)])
        X2inv = mpmath.inverse(X2)
        Z = X2inv * X1
        defect = max(abs(Z[i, j] - Z[j, i]) for i in range(g) for j in range(g))
        Zs = mpmath.matrix(g, g)
        for i in range(g):
            for j in range(g):
                Zs[i, j] = (Z[i, j] + Z[j, i]) / 2
        eps = mpmath.ldexp(1, -bits + 4)
        cond = mpmath.mnorm(X2, 1) * mpmath.mnorm(X2inv, 1)
        err = defect + 4 * g * cond * eps * (1 + mpmath.mnorm(Zs, 1))
        im = mpmath.matrix([[Zs[i, j].imag for j in range(g)] for i in range(g)])
        lam = siegel_eigen_min(im)
        if lam <= err:
            raise NotInSiegelSpace(f"Im(Z) has eigenvalue {mpmath.nstr(lam, 5)}")
    return CMPoint(Zs, g, err, prec.bits)


def change_of_basis(source: SymplecticBasis, target_elements: Sequence[Element]) -> list[list[Fraction]]:
    """Exact alpha with [t_1 ... t_2g] = [b_1 ... b_2g] alpha."""
    B = transpose([e.coords for e in source.elements])
    A = transpose([e.coords for e in target_elements])
    sol = la.solve(B, A)
    if sol is None:
        raise Degenerate("source basis is singular")
    return sol


def standard_basis(rd: ReflexData, r: RiemannForm) -> SymplecticBasis:
    """The symplectic basis {a_j} of O_{K*} for E_xi, normalized so a_2g = 1 and
    with the real part of the period matrix in (-1/2, 1/2]."""
    f = rd.reflex_field
    basis = symplectic_basis_of_ideal(rd, r, FractionalIdeal.unit(f), normalize_one=True)
    g = basis.genus
    Z = cm_point(basis, Precision(bits=64)).Z
    shift = [[-math.ceil(float(Z[i, j].real) - 0.5) for j in range(g)] for i in range(g)]
    S = [[int(i == j) for j in range(2 * g)] for i in range(2 * g)]
    for i in range(g):
        for j in range(g):
            S[g + i][j] = shift[i][j]
    return basis.transformed(S)
