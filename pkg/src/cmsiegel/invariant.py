"""Class invariants h_f(C), their well-definedness audits, class polynomials and
recognition of the coefficients as exact field elements.

The value attached to a ray class C = [(d)] is computed as follows:

1. the ideal c = (d) coprime to N,
2. the lattice G(c)^{-1} in K* (reflex type norm, then inverse),
3. a symplectic basis {b_j} of that lattice for E_{xi N(c)},
4. the exact integral matrix alpha with [a_1 .. a_2g] = [b_1 .. b_2g] alpha,
   {a_j} being the fixed standard basis of O_{K*},
5. the check alpha^T eta alpha = N(c) eta,
6. the index (1/N)[B; D] built from the right block column of alpha,
7. the period point Z of {b_j},
8. the family member with that index at Z.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, lcm

import mpmath
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from . import _linalg as la
from .cmfield import CMField, CMType, Element, FractionalIdeal, ReflexData, cm_type, reflex, reflex_norm_ideal
from .errors import MathematicalFailure, PoleDetected, StageError, ValidationFailed
from .family import FamilyDescriptor, FamilyIndex, evaluate_member, normalize_index
from .modfun.ball import Ball
from .modfun.kernels import siegel_ball
from .modfun.precision import Precision
from .modfun.space import reduce_point
from .polarization import (CMPoint, RiemannForm, SymplecticBasis, change_of_basis, cm_point, find_xi,
                           standard_basis, symplectic_basis_of_ideal)
from .rayclass import RayClass, RayClassGroup, alternate_generators
from .zmatrix import (IntMatrix, as_matrix, blocks, eta, mat_mul, random_sp_integral, scale,
                      similitude_form, transpose)

# period points whose smallest Im-eigenvalue falls below this are moved by a
# symplectic change of basis before evaluation (harmless by basis independence)
REDUCE_BELOW = 0.4


@dataclass(frozen=True, eq=False)
class CMSetup:
    """Everything about a field that does not depend on the class: type, reflex, xi, {a_j}."""

    field: CMField
    cmtype: CMType
    reflex: ReflexData
    form: RiemannForm
    standard: SymplecticBasis

    @classmethod
    def build(cls, f: CMField, embeddings=None) -> CMSetup:
        t = cm_type(f, embeddings)
        rd = reflex(t)
        r = find_xi(rd)
        return cls(f, t, rd, r, standard_basis(rd, r))

    @property
    def genus(self) -> int:
        return self.reflex.genus

    def to_json(self) -> dict:
        return {"field": self.field.label, "cm_type": list(self.cmtype.embeddings),
                "reflex_type": list(self.reflex.psi_indices()), "xi": self.form.xi.to_json(),
                "standard_basis": [e.to_json() for e in self.standard.elements]}


@dataclass(frozen=True)
class InvariantValue:
    value: mpmath.mpc
    error_bound: mpmath.mpf
    class_label: tuple[int, ...]
    index_used: FamilyIndex
    cm_point_used: CMPoint
    alpha: IntMatrix
    generator: Element
    bits: int

    def to_json(self) -> dict:
        digits = int(self.bits * 0.30103) + 1
        return {"label": list(self.class_label), "generator": self.generator.to_json(),
                "value": {"re": mpmath.nstr(self.value.real, digits), "im": mpmath.nstr(self.value.imag, digits)},
                "bound": mpmath.nstr(self.error_bound, 6), "index": self.index_used.to_json(),
                "cm_point": self.cm_point_used.to_json()}


def _stage(name: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except PoleDetected:
        raise
    except MathematicalFailure as exc:
        raise StageError(name, exc) from exc


def _reduced_basis(b: SymplecticBasis, prec: Precision) -> SymplecticBasis:
    """b itself when its period point is comfortably inside H_g, else b . gamma^T with gamma reducing Z."""
    Z = cm_point(b, Precision(bits=64)).Z
    Y = mpmath.matrix([[Z[i, j].imag for j in range(Z.cols)] for i in range(Z.rows)])
    lam = min(mpmath.eigsy(Y, eigvals_only=True)) if Z.rows > 1 else Y[0, 0]
    if lam >= REDUCE_BELOW:
        return b
    with mpmath.workprec(64):
        gamma, _, _ = reduce_point(Z)
    return b.transformed(transpose(gamma))


def basis_for_class(setup: CMSetup, d: Element, reduce: bool = True, prec: Precision | None = None
                    ) -> tuple[SymplecticBasis, int]:
    """A symplectic basis of G((d))^{-1} for E_{xi N(d)}, and N(d)."""
    f = setup.field
    c = FractionalIdeal.principal(f, d)
    n = abs(int(d.norm()))
    if c == FractionalIdeal.unit(f):
        return setup.standard, n
    lat = _stage("reflex_norm", lambda: reflex_norm_ideal(setup.cmtype, c).inverse())
    b = _stage("symplectic_basis", symplectic_basis_of_ideal, setup.reflex, setup.form.scaled(n), lat)
    if reduce:
        b = _stage("reduce_basis", _reduced_basis, b, prec or Precision())
    return b, n


def index_from_alpha(alpha: IntMatrix, N: int) -> FamilyIndex:
    """normalize((1/N) [B; D]) for alpha = [[A, B], [C, D]]."""
    _, B, _, D = blocks(alpha)
    return normalize_index(FamilyIndex(N, len(B), B + D))


def alpha_for_basis(setup: CMSetup, b: SymplecticBasis, n: int) -> IntMatrix:
    sol = change_of_basis(b, setup.standard.elements)
    if any(x.denominator != 1 for row in sol for x in row):
        raise ValidationFailed("alpha_integral", "O_{K*} is not contained in the class lattice")
    alpha = as_matrix([[int(x) for x in row] for row in sol])
    if similitude_form(alpha) != scale(eta(len(alpha) // 2), n):
        raise ValidationFailed("alpha_multiplier", f"alpha^T eta alpha != {n} eta")
    return alpha


def invariant_value(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, C: RayClass,
                    prec: Precision | None = None, beta: IntMatrix | None = None,
                    generator: Element | None = None, reduce: bool = True) -> InvariantValue:
    """h_f(C).  ``beta`` replaces the symplectic basis b by b . beta; ``generator`` replaces
    the class representative (d) by another generator in the same ray class."""
    prec = prec or Precision()
    N = G.level
    if d.level != N:
        raise ValueError("descriptor level differs from the ray class modulus")
    if d.genus != setup.genus:
        raise ValueError("descriptor genus differs from the CM type's genus")
    gen = C.generator if generator is None else generator
    if G.class_of(gen).index != C.index:
        raise ValueError("generator does not lie in the requested class")
    if gcd(abs(int(gen.norm())), N) != 1:
        raise ValueError("representative is not coprime to N")
    b, n = basis_for_class(setup, gen, reduce=reduce and beta is None, prec=prec)
    if beta is not None:
        b = b.transformed(beta)
    alpha = _stage("change_of_basis", alpha_for_basis, setup, b, n)
    M = _stage("index", index_from_alpha, alpha, N)
    Z = _stage("cm_point", cm_point, b, prec)

    def point(bits: int):
        # the CM point is rebuilt at every precision the evaluation asks for
        P = cm_point(b, replace(prec, bits=bits))
        return P.Z, P.error_bound
    v = _stage("evaluate", evaluate_member, d, M, point, prec)
    return InvariantValue(v.value, v.error_bound, C.label, M, Z, alpha, gen, v.bits)


def all_values(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, prec: Precision | None = None
               ) -> list[InvariantValue]:
    return [invariant_value(setup, G, d, C, prec) for C in G]


# -- audits --------------------------------------------------------------------

@dataclass
class AuditReport:
    name: str
    trials: int
    max_defect: float
    tolerance: float
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_defect < self.tolerance

    def to_json(self) -> dict:
        return {"audit": self.name, "trials": self.trials, "max_defect": self.max_defect,
                "tolerance": self.tolerance, "result": "PASS" if self.passed else "FAIL",
                "details": self.details}


def audit_basis_independence(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, trials: int = 25,
                             prec: Precision | None = None, seed: int = 0, classes=None,
                             length: int = 3) -> AuditReport:
    """Recompute h_f(C) with b replaced by b . beta for random beta in Sp_2g(Z)."""
    prec = prec or Precision()
    rng = random.Random(seed)
    classes = list(classes if classes is not None else G)
    base = {C.index: invariant_value(setup, G, d, C, prec) for C in classes}
    worst = 0.0
    details = []
    for t in range(trials):
        C = classes[t % len(classes)]
        beta = random_sp_integral(setup.genus, rng, length=length, bound=1)
        ref = base[C.index]
        b, _ = basis_for_class(setup, C.generator, prec=prec)
        v = invariant_value(setup, G, d, C, prec, beta=_compose_beta(b, beta, setup, C))
        defect = float(abs(v.value - ref.value))
        worst = max(worst, defect)
        details.append({"class": list(C.label), "beta": [list(r) for r in beta], "defect": defect})
    return AuditReport("basis_independence", trials, worst, 100 * prec.target, details)


def _compose_beta(b: SymplecticBasis, beta: IntMatrix, setup: CMSetup, C: RayClass) -> IntMatrix:
    """beta relative to the unreduced basis, so the audited basis is (reduced basis) . beta."""
    raw, _ = basis_for_class(setup, C.generator, reduce=False)
    if raw is b:
        return beta
    # b = raw . rho for a symplectic rho; recover it exactly
    sol = change_of_basis(raw, b.elements)
    rho = as_matrix([[int(x) for x in row] for row in sol])
    return mat_mul(rho, beta)


def audit_ideal_independence(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, trials: int = 25,
                             prec: Precision | None = None, seed: int = 0, classes=None) -> AuditReport:
    """Recompute h_f(C) from other principal representatives (d') of the same ray class."""
    prec = prec or Precision()
    rng = random.Random(seed)
    classes = list(classes if classes is not None else G)
    base = {C.index: invariant_value(setup, G, d, C, prec) for C in classes}
    worst = 0.0
    details = []
    for t in range(trials):
        C = classes[t % len(classes)]
        alt = alternate_generators(G, C, 1, rng)[0]
        v = invariant_value(setup, G, d, C, prec, generator=alt)
        defect = float(abs(v.value - base[C.index].value))
        worst = max(worst, defect)
        details.append({"class": list(C.label), "generator": alt.to_json(), "norm": str(alt.norm()),
                        "defect": defect})
    return AuditReport("ideal_independence", trials, worst, 100 * prec.target, details)


def audit_subgroup_H(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, H, prec: Precision | None = None
                     ) -> AuditReport:
    """Every class in H carries the identity-class value."""
    prec = prec or Precision()
    ref = invariant_value(setup, G, d, G.identity_class, prec)
    worst = 0.0
    details = []
    for C in H:
        v = invariant_value(setup, G, d, C, prec)
        defect = float(abs(v.value - ref.value))
        worst = max(worst, defect)
        details.append({"class": list(C.label), "defect": defect})
    return AuditReport("subgroup_H", len(H), worst, 100 * prec.target, details)


# -- recognition -----------------------------------------------------------------

class NoMatch:
    """Sentinel result of a failed recognition."""

    def __init__(self, reason: str = ""):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NoMatch({self.reason!r})"

    def to_json(self):
        return None


def recognize_rational(x, bound, denom_bound: int = 10**6):
    """Nearest p/q with q <= denom_bound to the real x, or NoMatch if the residual exceeds 10 bound."""
    x = mpmath.mpf(x)
    cand = _to_fraction(x).limit_denominator(denom_bound)
    resid = abs(x - mpmath.mpf(cand.numerator) / cand.denominator)
    if resid > 10 * mpmath.mpf(bound):
        return NoMatch(f"residual {mpmath.nstr(resid, 5)}")
    return cand


def _to_fraction(x) -> Fraction:
    x = mpmath.mpf(x)
    man, exp = x.man_exp
    sign = -1 if x < 0 else 1
    return sign * Fraction(int(man)) * Fraction(2) ** int(exp)


def recognize_in_K(z, bound, f: CMField, denom_bound: int = 10**6, embedding: int | None = None,
                   bits: int = 256):
    """The element c/q (c integral coordinates, q <= denom_bound) whose image under the
    given embedding (default: the first CM-type embedding) is within 10 bound of z, or NoMatch."""
    if embedding is None:
        embedding = f.cm_type_indices[0]
    z = mpmath.mpc(z)
    bound = mpmath.mpf(bound)
    if 2 * bound * denom_bound ** 2 * 4 >= 1:
        return NoMatch("error bound too large for the denominator bound")
    with mpmath.workprec(bits):
        if f.degree == 2:
            e = [f.embed(b, embedding, bits) for b in f.basis_elements()]
            m = mpmath.matrix([[e[0].real, e[1].real], [e[0].imag, e[1].imag]])
            c = mpmath.lu_solve(m, mpmath.matrix([z.real, z.imag]))
            fracs = [_to_fraction(c[k]).limit_denominator(denom_bound) for k in range(2)]
            q = lcm(*(x.denominator for x in fracs))
            if q > denom_bound:
                return NoMatch("denominator exceeds bound")
            cand = f.element(fracs)
        elif abs(z.imag) <= 10 * bound and recognize_rational(z.real, bound, denom_bound):
            cand = f.one * recognize_rational(z.real, bound, denom_bound)
        else:
            cand = _recognize_lll(z, bound, f, denom_bound, embedding, bits)
            if cand is None:
                return NoMatch("no short relation")
        resid = abs(z - cand.embed(embedding, bits))
        if resid > 10 * bound + mpmath.ldexp(1, -bits + 8) * (1 + abs(z)):
            return NoMatch(f"residual {mpmath.nstr(resid, 5)}")
        return cand


def _recognize_lll(z, bound, f: CMField, denom_bound: int, embedding: int, bits: int):
    n = f.degree
    e = [f.embed(b, embedding, bits) for b in f.basis_elements()]
    scale_c = mpmath.mpf(1) / max(bound, mpmath.ldexp(1, -bits // 2))
    rows = []
    vecs = [z] + [-x for x in e]
    for k, v in enumerate(vecs):
        row = [int(k == j) for j in range(n + 1)]
        row += [int(mpmath.nint(scale_c * v.real)), int(mpmath.nint(scale_c * v.imag))]
        rows.append(row)
    red = DomainMatrix([[ZZ(x) for x in r] for r in rows], (n + 1, n + 3), ZZ).lll().to_Matrix().tolist()
    best = None
    for r in red:
        q = int(r[0])
        if q == 0:
            continue
        if q < 0:
            r = [-x for x in r]
            q = -q
        if q > denom_bound:
            continue
        cand = f.element([Fraction(int(x), q) for x in r[1:n + 1]])
        resid = abs(z - cand.embed(embedding, bits))
        if best is None or resid < best[0]:
            best = (resid, cand)
    return None if best is None else best[1]


# -- class polynomials -------------------------------------------------------------

@dataclass
class ClassPolynomial:
    values: list[InvariantValue]
    coefficients: list[Ball]
    recognized: list

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "coeffs": [{"re": mpmath.nstr(c.mid.real, 30), "im": mpmath.nstr(c.mid.imag, 30),
                            "bound": mpmath.nstr(c.rad, 6)} for c in self.coefficients],
                "recognized": [r.to_json() if r else None for r in self.recognized]}


def _sort_key(v: InvariantValue):
    return (float(v.value.real), float(v.value.imag))


def class_polynomial(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, prec: Precision | None = None,
                     denom_bound: int = 10**6, values: list[InvariantValue] | None = None,
                     recognize_tol: float | None = None) -> ClassPolynomial:
    """prod_C (X - h_f(C)) in ascending coefficient order, with propagated bounds."""
    prec = prec or Precision()
    if values is None:
        values, poles = [], []
        for C in G:
            try:
                values.append(invariant_value(setup, G, d, C, prec))
            except PoleDetected:
                poles.append(list(C.label))
        if poles:
            raise PoleDetected(f"h_f(C) is infinite (numerically) for classes {poles}")
    values = sorted(values, key=_sort_key)
    with mpmath.workprec(prec.bits + 64):
        coeffs = [Ball.exact(1)]
        for v in values:
            root = Ball(mpmath.mpc(v.value), mpmath.mpf(v.error_bound))
            nxt = [Ball.exact(0)] * (len(coeffs) + 1)
            for k, c in enumerate(coeffs):
                nxt[k + 1] = nxt[k + 1] + c
                nxt[k] = nxt[k] - c * root
            coeffs = nxt
    # values are built from the reflex-type embeddings, so read coefficients through the first one
    emb = setup.reflex.psi_indices()[0]
    recognized = []
    for c in coeffs:
        tol = c.rad if recognize_tol is None else max(c.rad, mpmath.mpf(recognize_tol))
        recognized.append(recognize_in_K(c.mid, tol, setup.field, denom_bound, embedding=emb))
    return ClassPolynomial(values, coeffs, recognized)


# -- genus-1 cross-check ---------------------------------------------------------

def classical_value(setup: CMSetup, C: RayClass, N: int, prec: Precision | None = None) -> Ball:
    """g_{(a/N, b/N)}(w1/w2)^m for the oriented HNF basis (w1, w2) of c^{-1}, 1 = a w1 + b w2.

    This route never touches symplectic bases, reflex norms or family indices.
    """
    from .modfun.catalog import siegel_exponent
    prec = prec or Precision()
    f = setup.field
    if f.degree != 2:
        raise ValueError("classical route needs an imaginary quadratic field")
    emb = setup.reflex.psi_indices()[0]
    inv = FractionalIdeal.principal(f, C.generator).inverse()
    w1, w2 = inv.elements()
    bits = prec.bits + 64
    with mpmath.workprec(bits):
        if (w1.embed(emb, bits) / w2.embed(emb, bits)).imag < 0:
            w1 = -w1
        sol = la.solve(transpose([w1.coords, w2.coords]), [[x] for x in f.one.coords])
        a, b = sol[0][0], sol[1][0]
        if a.denominator != 1 or b.denominator != 1:
            raise ValidationFailed("classical_basis", "1 is not in the inverse ideal")
        tau = w1.embed(emb, bits) / w2.embed(emb, bits)
        m = siegel_exponent(N)
        ball = siegel_ball((Fraction(int(a), N), Fraction(int(b), N)), tau)
        return ball ** m


@dataclass
class CrossCheckReport:
    max_discrepancy: float
    tolerance: float
    rows: list

    @property
    def passed(self) -> bool:
        return self.max_discrepancy < self.tolerance

    def to_json(self) -> dict:
        return {"max_discrepancy": self.max_discrepancy, "tolerance": self.tolerance,
                "result": "PASS" if self.passed else "FAIL", "classes": self.rows}


def galois_cross_check_genus1(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor,
                              prec: Precision | None = None) -> CrossCheckReport:
    """Compare the Siegel-family pipeline with the classical Fricke route, class by class."""
    prec = prec or Precision()
    if d.base.name != "siegel_power":
        raise ValueError("the classical route is implemented for siegel_power only")
    rows = []
    worst = 0.0
    for C in G:
        v = invariant_value(setup, G, d, C, prec)
        with mpmath.workprec(prec.bits + 64):
            w = classical_value(setup, C, G.level, prec)
            diff = float(abs(v.value - w.mid))
        worst = max(worst, diff)
        rows.append({"label": list(C.label), "pipeline": mpmath.nstr(v.value, 20),
                     "classical": mpmath.nstr(w.mid, 20), "discrepancy": diff})
    return CrossCheckReport(worst, 100 * prec.target, rows)


# -- output ------------------------------------------------------------------------

def results_json(setup: CMSetup, G: RayClassGroup, d: FamilyDescriptor, values: list[InvariantValue],
                 poly: ClassPolynomial | None = None) -> dict:
    out = {"field": setup.field.label, "N": G.level, "function": d.base.name,
           "classes": [v.to_json() for v in values]}
    if poly is not None:
        out["polynomial"] = poly.to_json()
    return out


def results_csv(values: list[InvariantValue]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "re", "im", "bound"])
    for v in values:
        w.writerow([" ".join(map(str, v.class_label)), mpmath.nstr(v.value.real, 30),
                    mpmath.nstr(v.value.imag, 30), mpmath.nstr(v.error_bound, 6)])
    return buf.getvalue()
