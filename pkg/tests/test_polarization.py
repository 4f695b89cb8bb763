import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from cmsiegel import _linalg as la
from cmsiegel.cmfield import FractionalIdeal, cm_type, load_field, reflex, reflex_norm_ideal
from cmsiegel.errors import Degenerate, NotIntegral, NotPrincipal
from cmsiegel.modfun import act
from cmsiegel.modfun.precision import Precision
from cmsiegel.polarization import (
    RiemannForm, SymplecticBasis, cm_point, find_xi, frobenius_basis, riemann_gram, standard_basis, symplectic_basis_of_ideal,
)
from cmsiegel.zmatrix import eta, is_symplectic, mat_mul, transpose


def _setup(name):
    f = load_field(name)
    t = cm_type(f)
    rd = reflex(t)
    return f, t, rd, find_xi(rd)


def _normal_form(divisors):
    g = len(divisors)
    m = [[0] * (2 * g) for _ in range(2 * g)]
    for i, e in enumerate(divisors):
        m[i][g + i] = -e
        m[g + i][i] = e
    return tuple(tuple(r) for r in m)


def test_gram_gaussian_example():
    f = load_field("gaussian")
    r = RiemannForm(f.element([0, Fraction(1, 2)]))
    assert riemann_gram(r, [f.element([0, 1]), f.one]) == ((0, -1), (1, 0))


def test_gram_scaling_and_integrality():
    f, _, _, r = _setup("gaussian")
    els = FractionalIdeal.unit(f).elements()
    g1 = riemann_gram(r, els)
    g5 = riemann_gram(r.scaled(5), els)
    assert g5 == tuple(tuple(5 * x for x in row) for row in g1)
    with pytest.raises(NotIntegral):
        riemann_gram(RiemannForm(f.element([0, Fraction(1, 3)])), els)
    with pytest.raises(ValueError):
        RiemannForm(f.one)


@pytest.mark.parametrize("name", ["gaussian", "eisenstein", "cyclotomic5"])
def test_find_xi_is_valid(name):
    f, _, rd, r = _setup(name)
    gram = riemann_gram(r, FractionalIdeal.unit(f).elements())
    assert abs(la.det(gram)) == 1
    assert all(r.xi.embed(k, 64).imag > 0 for k in rd.psi_indices())


def test_find_xi_known_values():
    f, _, _, r = _setup("gaussian")
    assert r.xi == f.element([0, Fraction(1, 2)])
    f, _, _, r = _setup("eisenstein")
    # xi = +-1/sqrt(-3): xi^2 = -1/3
    assert r.xi * r.xi == f.from_int(Fraction(-1, 3))


def test_zeta5_gram_is_eta():
    f, _, rd, r = _setup("cyclotomic5")
    b = standard_basis(rd, r)
    assert b.gram() == eta(2)
    assert b.elements[-1] == f.one


def test_frobenius_examples():
    U, d = frobenius_basis(eta(2))
    assert d == (1, 1)
    assert mat_mul(mat_mul(transpose(U), eta(2)), U) == eta(2)
    U, d = frobenius_basis(((0, -2), (2, 0)))
    assert d == (2,)
    with pytest.raises(Degenerate):
        frobenius_basis(((0, 0), (0, 0)))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=6, max_size=6))
def test_frobenius_random_alternating(upper):
    A = [[0] * 4 for _ in range(4)]
    k = 0
    for i in range(4):
        for j in range(i + 1, 4):
            A[i][j], A[j][i] = upper[k], -upper[k]
            k += 1
    det = la.det(A)
    if det == 0:
        with pytest.raises(Degenerate):
            frobenius_basis(A)
        return
    U, d = frobenius_basis(A)
    assert abs(la.det(U)) == 1
    assert mat_mul(mat_mul(transpose(U), A), U) == _normal_form(d)
    assert all(e > 0 for e in d) and d[1] % d[0] == 0
    assert (d[0] * d[1]) ** 2 == det


def test_principality_examples():
    f, t, rd, r = _setup("gaussian")
    c = FractionalIdeal.principal(f, f.element([2, 1]))
    lat = reflex_norm_ideal(t, c).inverse()
    b = symplectic_basis_of_ideal(rd, r.scaled(5), lat)
    assert b.gram() == eta(1)
    with pytest.raises(NotPrincipal):
        symplectic_basis_of_ideal(rd, r.scaled(2), FractionalIdeal.unit(f))

    f, t, rd, r = _setup("cyclotomic5")
    c = FractionalIdeal.principal(f, f.one - f.gen)
    lat = reflex_norm_ideal(t, c).inverse()
    b = symplectic_basis_of_ideal(rd, r.scaled(int(c.norm())), lat)
    assert int(c.norm()) == 5 and b.gram() == eta(2)


@pytest.mark.parametrize("name,N", [("gaussian", 5), ("eisenstein", 4), ("cyclotomic5", 3)])
def test_principal_for_every_small_coprime_ideal(name, N):
    from cmsiegel.cmfield import ideals_of_norm_below
    from math import gcd
    f, t, rd, r = _setup(name)
    bound = 40 if f.degree == 2 else 12
    for c in ideals_of_norm_below(f, bound):
        n = int(c.norm())
        if gcd(n, N) != 1:
            continue
        b = symplectic_basis_of_ideal(rd, r.scaled(n), reflex_norm_ideal(t, c).inverse())
        assert b.gram() == eta(f.degree // 2)


def test_cm_points():
    with mpmath.workprec(128):
        f, _, rd, r = _setup("gaussian")
        b = SymplecticBasis((f.element([0, 1]), f.one), FractionalIdeal.unit(f), r, rd)
        assert b.gram() == eta(1)
        P = cm_point(b, Precision(target=1e-30, bits=160))
        assert abs(P.Z[0, 0] - 1j) < 1e-30
        assert abs(cm_point(standard_basis(rd, r), Precision()).Z[0, 0] - 1j) < 1e-30

        f, _, rd, r = _setup("eisenstein")
        Z = cm_point(standard_basis(rd, r), Precision(target=1e-30, bits=160)).Z[0, 0]
        # j-invariant 0 point: Z in the SL2(Z)-orbit of rho, so Z^2 - Z + 1 = 0 after shifting
        assert abs(Z.imag - mpmath.sqrt(3) / 2) < 1e-30 and abs(abs(Z.real) - 0.5) < 1e-30

        f, _, rd, r = _setup("cyclotomic5")
        P = cm_point(standard_basis(rd, r), Precision(target=1e-30, bits=160))
        assert P.genus == 2
        assert abs(P.Z[0, 1] - P.Z[1, 0]) <= P.error_bound < 1e-25
        im = mpmath.matrix([[P.Z[i, j].imag for j in range(2)] for i in range(2)])
        assert im[0, 0] > 0 and mpmath.det(im) > 0


def _random_sp(g, rng, steps=6):
    from cmsiegel.zmatrix import identity
    n = 2 * g
    M = [list(r) for r in identity(n)]
    for _ in range(steps):
        S = [[0] * g for _ in range(g)]
        i, j = rng.randrange(g), rng.randrange(g)
        k = rng.choice([-1, 1])
        S[i][j] += k
        S[j][i] += k if i != j else 0
        E = [list(r) for r in identity(n)]
        upper = rng.random() < 0.5
        for a in range(g):
            for b in range(g):
                if upper:
                    E[a][g + b] = S[a][b]
                else:
                    E[g + a][b] = S[a][b]
        M = [list(r) for r in mat_mul(M, E)]
    assert is_symplectic(M)
    return M


@pytest.mark.parametrize("name", ["gaussian", "cyclotomic5"])
def test_basis_change_moves_point_by_transpose(name):
    rng = random.Random(7)
    prec = Precision(target=1e-30, bits=160)
    f, _, rd, r = _setup(name)
    b = standard_basis(rd, r)
    Z = cm_point(b, prec)
    g = b.genus
    for _ in range(5):
        beta = _random_sp(g, rng)
        Zb = cm_point(b.transformed(beta), prec)
        with mpmath.workprec(prec.bits + 32):
            W, err = act(transpose(beta), Z.Z, Z.error_bound)
            defect = max(abs(W[i, j] - Zb.Z[i, j]) for i in range(g) for j in range(g))
        assert defect < 10 * prec.target + err + Zb.error_bound


def test_cm_point_json_roundtrip():
    f, _, rd, r = _setup("gaussian")
    P = cm_point(standard_basis(rd, r), Precision(target=1e-20))
    js = P.to_json()
    assert set(js) == {"genus", "re", "im", "error_bound"}
    assert mpmath.mpf(js["im"][0][0]) == pytest.approx(1.0)
