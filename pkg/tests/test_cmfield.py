import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from cmsiegel.cmfield import (
    CMType, FractionalIdeal, cm_type, ideals_of_norm_below, load_field, prime_ideals_above, reflex,
    reflex_norm_ideal, type_norm_elem,
)
from cmsiegel.errors import NotACMType, ValidationFailed

FIELDS = ["gaussian", "eisenstein", "cyclotomic5"]


@pytest.fixture(scope="module", params=FIELDS)
def field(request):
    return load_field(request.param)


def test_discriminants():
    assert load_field("gaussian").discriminant == -4
    assert load_field("eisenstein").discriminant == -3
    assert load_field("cyclotomic5").discriminant == 125


def test_roots_are_roots(field):
    with mpmath.workprec(200):
        for r in field.roots_mp(200):
            assert abs(mpmath.polyval([mpmath.mpf(c) for c in reversed(field.poly)], r)) < mpmath.mpf(10) ** -50


def test_embeddings_are_ring_maps(field):
    rng = random.Random(4)
    with mpmath.workprec(128):
        for _ in range(20):
            a = field.element([rng.randint(-5, 5) for _ in range(field.degree)])
            b = field.element([rng.randint(-5, 5) for _ in range(field.degree)])
            for k in range(field.degree):
                lhs = (a * b).embed(k, 128)
                assert abs(lhs - a.embed(k, 128) * b.embed(k, 128)) < 1e-30
                assert abs((a + b).embed(k, 128) - a.embed(k, 128) - b.embed(k, 128)) < 1e-30


def test_complex_conjugation_matches_embeddings(field):
    a = field.element(list(range(1, field.degree + 1)))
    with mpmath.workprec(100):
        for k in range(field.degree):
            assert abs(a.conj().embed(k, 100) - mpmath.conj(a.embed(k, 100))) < 1e-25


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FIELDS), st.data())
def test_field_arithmetic_properties(name, data):
    f = load_field(name)
    coords = st.lists(st.integers(-9, 9), min_size=f.degree, max_size=f.degree)
    a, b, c = (f.element(data.draw(coords)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).norm() == a.norm() * b.norm()
    if not a.is_zero():
        assert a * a.inverse() == f.one
        assert a.norm() > 0


def test_cm_types_and_reflex():
    f = load_field("cyclotomic5")
    t = cm_type(f)
    rd = reflex(t)
    assert set(rd.psi_indices()) == {3, 0}
    assert set(reflex(rd.reflex_type).psi_indices()) == set(t.embeddings)
    with pytest.raises(NotACMType):
        CMType(f, (3, 2))      # roots 2 and 3 are complex conjugates
    with pytest.raises(NotACMType):
        CMType(f, (1,))


def test_reflex_quadratic_is_identity():
    for name in ("gaussian", "eisenstein"):
        f = load_field(name)
        rd = reflex(cm_type(f))
        assert rd.psi_indices() == cm_type(f).embeddings
        d = f.element([2, 3])
        assert type_norm_elem(rd.source_type, d) == d


def test_type_norm_relation():
    """g(d) conj(g(d)) = N(d) for the type norm of a CM type."""
    f = load_field("cyclotomic5")
    t = cm_type(f)
    rng = random.Random(2)
    for _ in range(10):
        d = f.element([rng.randint(-4, 4) for _ in range(4)])
        if d.is_zero():
            continue
        g = type_norm_elem(t, d)
        assert g * g.conj() == f.one * d.norm()


def test_reflex_norm_of_principal_ideal():
    f = load_field("cyclotomic5")
    t = cm_type(f)
    d = f.element([1, 2, 0, 1])
    lhs = reflex_norm_ideal(t, FractionalIdeal.principal(f, d))
    assert lhs == FractionalIdeal.principal(f, type_norm_elem(t, d))


def test_ideal_inverse_and_norm(field):
    for a in ideals_of_norm_below(field, 30):
        assert a * a.inverse() == FractionalIdeal.unit(field)
        assert a.is_integral()
        assert (a * a).norm() == a.norm() ** 2


def test_prime_splitting():
    f = load_field("gaussian")
    assert [(e, fd) for _, e, fd in prime_ideals_above(f, 5)] == [(1, 1), (1, 1)]
    [(P3, e, fd)] = prime_ideals_above(f, 3)
    assert (e, fd) == (1, 2) and P3 == FractionalIdeal.principal(f, f.from_int(3))
    assert [(e, fd) for _, e, fd in prime_ideals_above(f, 2)] == [(2, 1)]
    z = load_field("cyclotomic5")
    assert sorted(fd for _, _, fd in prime_ideals_above(z, 11)) == [1, 1, 1, 1]
    assert [fd for _, _, fd in prime_ideals_above(z, 2)] == [4]


def test_ideal_counts_gaussian():
    # ideals of Z[i] with norm n are counted by r_2(n)/4
    f = load_field("gaussian")
    ideals = ideals_of_norm_below(f, 30)
    counts = {}
    for a in ideals:
        counts[a.norm()] = counts.get(a.norm(), 0) + 1
    r2 = {n: sum(1 for x in range(-6, 7) for y in range(-6, 7) if x * x + y * y == n) // 4 for n in range(1, 30)}
    assert {n: c for n, c in counts.items()} == {Fraction(n): c for n, c in r2.items() if c}


def test_membership():
    f = load_field("gaussian")
    P = FractionalIdeal.principal(f, f.element([2, 1]))
    assert f.element([2, 1]) in P
    assert f.element([5, 0]) in P
    assert f.element([1, 0]) not in P


def _spec(**kw):
    base = {"label": "t", "poly": [1, 0, 1], "basis": [[1, 0], [0, 1]], "units": [[0, 1]],
            "class_number": 1, "cm_type": [1]}
    base.update(kw)
    return base


@pytest.mark.parametrize("kw,invariant", [
    ({"poly": [-2, 0, 1]}, "totally_imaginary"),
    ({"poly": [1, 2, 1]}, "squarefree"),
    ({"poly": [4, 0, 0, 0, 1], "basis": [[1], [0, 1], [0, 0, 1], [0, 0, 0, 1]], "units": [], "cm_type": [0, 1]},
     "irreducible"),
    ({"units": [[1, 1]]}, "units"),
    ({"class_number": 2}, "class_number"),
    ({"basis": [[1, 0], ["1/2", "1/2"]]}, "integral_basis"),
    ({"poly": [1, 1]}, "poly_monic"),
])
def test_load_field_rejects(kw, invariant):
    with pytest.raises(ValidationFailed) as err:
        load_field(_spec(**kw))
    assert err.value.invariant == invariant


def test_missing_key():
    spec = _spec()
    del spec["units"]
    with pytest.raises(ValidationFailed):
        load_field(spec)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n),
                                                    min_size=n, max_size=n)))
def test_integer_determinant_matches_rational(m):
    from cmsiegel import _linalg as la
    assert la.int_det(m) == la.det(m)
