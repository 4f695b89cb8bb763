import itertools
import random
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from cmsiegel.errors import BudgetExceeded, NotExtendable, NotSimilitude, NotSp
from cmsiegel.zmatrix import (
    GSpElement, ModMatrix, all_residue_matrices, complete_block_row, decompose,
    enumerate_gsp, eta, gsp_check, identity, is_symplectic, mat_mod, mat_mul,
    matrix_from_json, matrix_to_json, random_gsp_mod, random_sp_mod, sp_lift,
    symplectic_inverse,
)


def sl2_order(N):
    """|SL_2(Z/N)| = N^3 prod_{p | N} (1 - 1/p^2)."""
    order = N ** 3
    for p in range(2, N + 1):
        if N % p == 0 and all(p % q for q in range(2, p)):
            order = order * (p * p - 1) // (p * p)
    return order


def euler_phi(N):
    return sum(1 for k in range(1, N + 1) if gcd(k, N) == 1)


def naive_similitude(m, N):
    """Direct membership test: search all units nu with m^T eta m = nu eta."""
    g = len(m) // 2
    e = eta(g)
    form = mat_mod(mat_mul(mat_mul(list(zip(*m)), e), m), N)
    for nu in range(1, N):
        if gcd(nu, N) == 1 and form == mat_mod([[nu * x for x in r] for r in e], N):
            return nu
    return None


def test_gsp_check_examples():
    assert gsp_check(ModMatrix(eta(1), 5)).multiplier == 1
    assert gsp_check(ModMatrix(((1, 0), (0, 2)), 5)).multiplier == 2
    m = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 3, 0), (0, 0, 0, 3))
    assert gsp_check(ModMatrix(m, 7)).multiplier == 3
    assert naive_similitude(m, 7) == 3


def test_gsp_check_rejects():
    with pytest.raises(NotSimilitude):
        gsp_check(ModMatrix(((2, 0), (0, 2)), 4))
    with pytest.raises(NotSimilitude):
        gsp_check(ModMatrix(((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)), 3))


@pytest.mark.parametrize("g,N", [(1, 2), (1, 3), (1, 4), (1, 5), (2, 2)])
def test_enumeration_matches_oracles(g, N):
    elems = enumerate_gsp(g, N)
    found = {e.entries: e.multiplier for e in elems}
    if g == 1:
        # GSp_2 = GL_2, multiplier = det
        expected = {}
        for m in all_residue_matrices(2, 2, N):
            d = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % N
            if gcd(d, N) == 1:
                expected[m] = d
        assert found == expected
        assert len(elems) == euler_phi(N) * sl2_order(N)
    else:
        assert len(elems) == 720
        assert all(e.multiplier == 1 for e in elems)
        sample = random.Random(0).sample(list(all_residue_matrices(4, 4, 2)), 3000)
        for m in sample:
            assert (naive_similitude(m, 2) is not None) == (m in found)


@pytest.mark.parametrize("g,N", [(1, 2), (1, 3), (1, 4), (2, 2)])
def test_enumeration_closed(g, N):
    elems = enumerate_gsp(g, N)
    found = {e.entries: e.multiplier for e in elems}
    rng = random.Random(N)
    pairs = itertools.product(elems, elems) if len(elems) <= 96 else (
        (rng.choice(elems), rng.choice(elems)) for _ in range(20000))
    for a, b in pairs:
        c = a @ b
        assert found[c.entries] == c.multiplier == a.multiplier * b.multiplier % N
    for a in elems:
        inv = a.inverse()
        assert found[inv.entries] == inv.multiplier
        assert (a @ inv).entries == identity(2 * g)


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_gsp(2, 5)
    with pytest.raises(BudgetExceeded):
        enumerate_gsp(1, 4, budget=100)


def test_decompose_examples():
    ident = gsp_check(ModMatrix(identity(2), 5))
    d, s = decompose(ident)
    assert d.entries == identity(2) and s.entries == identity(2)
    d, s = decompose(gsp_check(ModMatrix(((1, 0), (0, 2)), 5)))
    assert d.entries == ((1, 0), (0, 2)) and s.entries == identity(2)


def test_decompose_roundtrip_random():
    rng = random.Random(7)
    for _ in range(500):
        e = random_gsp_mod(2, 4, rng)
        d, s = decompose(e)
        assert s.multiplier == 1
        assert gsp_check(s.matrix).multiplier == 1
        assert (d @ s).entries == e.entries
        assert (d @ s).multiplier == e.multiplier


def test_canonical_sign_class():
    rng = random.Random(3)
    for N in (2, 3, 4, 6):
        for _ in range(50):
            e = random_gsp_mod(2, N, rng)
            neg = GSpElement(e.matrix.negate(), e.multiplier)
            assert e.canonical() == neg.canonical()
            first = next(x for r in e.canonical().entries for x in r if x)
            assert 1 <= first <= N // 2


def test_lift_examples():
    assert sp_lift(GSpElement(ModMatrix(((1, 1), (0, 1)), 4), 1)) == ((1, 1), (0, 1))
    for N in range(3, 9):
        assert sp_lift(GSpElement(ModMatrix(((0, N - 1), (1, 0)), N), 1)) == ((0, -1), (1, 0))
    lift = sp_lift(GSpElement(ModMatrix(((0, 1), (1, 0)), 2), 1))
    assert is_symplectic(lift) and mat_mod(lift, 2) == ((0, 1), (1, 0))
    with pytest.raises(NotSp):
        sp_lift(gsp_check(ModMatrix(((1, 0), (0, 2)), 5)))


def test_lift_roundtrip_random():
    rng = random.Random(11)
    for _ in range(1000):
        g, N = rng.randint(1, 2), rng.randint(2, 7)
        b = random_sp_mod(g, N, rng)
        lift = sp_lift(b)
        assert is_symplectic(lift)
        assert mat_mod(lift, N) == b.entries


def test_lift_every_element_small_groups():
    for g, N in [(1, 2), (1, 3), (1, 4), (1, 5), (2, 2)]:
        for e in enumerate_gsp(g, N):
            if e.multiplier == 1:
                lift = sp_lift(e)
                assert is_symplectic(lift) and mat_mod(lift, N) == e.entries


def test_symplectic_inverse():
    rng = random.Random(5)
    for _ in range(50):
        m = sp_lift(random_sp_mod(2, 5, rng))
        assert mat_mul(m, symplectic_inverse(m)) == identity(4)


def test_complete_block_row_examples():
    for N in (2, 5, 9):
        assert complete_block_row([[1]], [[0]], N) == identity(2)
        assert complete_block_row(identity(2), ((0, 0), (0, 0)), N) == identity(4)
    gamma = complete_block_row([[2]], [[1]], 5)
    (a, b), (c, d) = gamma
    assert (a % 5, b % 5) == (2, 1)
    assert a * d - b * c == 1 and (2 * d - c) % 5 == 1


def test_complete_block_row_exhaustive_g1():
    N = 3
    for a, b in itertools.product(range(N), repeat=2):
        if gcd(gcd(a, b), N) == 1:
            gamma = complete_block_row([[a]], [[b]], N)
            assert is_symplectic(gamma)
            assert (gamma[0][0] % N, gamma[0][1] % N) == (a, b)
        else:
            with pytest.raises(NotExtendable):
                complete_block_row([[a]], [[b]], N)


def test_complete_block_row_exhaustive_g2_mod2():
    tops = {tuple(r[:4] for r in e.entries[:2]) for e in enumerate_gsp(2, 2)}
    for flat in itertools.product(range(2), repeat=8):
        A = (flat[0:2], flat[4:6])
        B = (flat[2:4], flat[6:8])
        top = (flat[0:4], flat[4:8])
        if top in tops:
            gamma = complete_block_row(A, B, 2)
            assert is_symplectic(gamma)
            assert tuple(tuple(x % 2 for x in r) for r in gamma[:2]) == top
        else:
            with pytest.raises(NotExtendable):
                complete_block_row(A, B, 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2), st.integers(2, 12), st.integers(0, 10**6))
def test_complete_block_row_property(g, N, seed):
    b = random_gsp_mod(g, N, random.Random(seed))
    A = tuple(r[:g] for r in b.entries[:g])
    B = tuple(r[g:] for r in b.entries[:g])
    gamma = complete_block_row(A, B, N)
    assert is_symplectic(gamma)
    assert mat_mod(tuple(r[:g] for r in gamma[:g]), N) == A
    assert mat_mod(tuple(r[g:] for r in gamma[:g]), N) == B


def test_json_roundtrip():
    m = ((10**30, -1), (2, 3))
    assert matrix_from_json(matrix_to_json(m)) == m
    assert all(isinstance(x, str) for r in matrix_to_json(m) for x in r)
