import random
from fractions import Fraction

import mpmath
import pytest

from cmsiegel.errors import NotExtendable
from cmsiegel.family import (
    FamilyDescriptor, FamilyIndex, act_on_index, check_completion, evaluate_member, index_set, normalize_index,
    validate_index,
)
from cmsiegel.modfun import Precision
from cmsiegel.modfun.kernels import siegel_ball
from cmsiegel.modfun.modularity import random_point
from cmsiegel.modfun.space import act
from cmsiegel.zmatrix import (
    ModMatrix, GSpElement, diag_similitude, enumerate_gsp, identity, mat_mul, random_gamma1, random_gsp_mod,
    random_sp_mod, scale, sp_lift,
)

PREC = Precision()


@pytest.fixture(scope="module")
def siegel5():
    return FamilyDescriptor.from_catalog("siegel_power", 5)


def _random_index(g, N, rng):
    return act_on_index(random_gsp_mod(g, N, rng), normalize_index(FamilyIndex.identity(g, N)))


def test_identity_is_canonical():
    for g, N in [(1, 3), (1, 5), (2, 2), (2, 5)]:
        M = FamilyIndex.identity(g, N)
        assert normalize_index(M) == M


def test_sign_and_lattice_quotient():
    rng = random.Random(0)
    for g, N in [(1, 5), (2, 3), (2, 5)]:
        for _ in range(20):
            M = _random_index(g, N, rng)
            neg = FamilyIndex(N, g, scale(M.numerator, -1))
            shifted = FamilyIndex(N, g, [[x + N * rng.randint(-3, 3) for x in row] for row in M.numerator])
            assert normalize_index(neg) == normalize_index(M) == normalize_index(shifted)


def test_non_isotropic_rejected():
    with pytest.raises(NotExtendable):
        FamilyIndex(5, 2, [[1, 0], [0, 1], [0, 0], [1, 0]])     # A = I, B = E12: A B^T not symmetric
    with pytest.raises(NotExtendable):
        validate_index(FamilyIndex(5, 1, [[0], [5]]))          # [A B] = [0 0] is not primitive


def test_json_roundtrip():
    M = _random_index(2, 5, random.Random(1))
    assert FamilyIndex.from_json(M.to_json()) == M
    assert M.to_json()["level"] == 5


def test_act_identity_and_minus_identity():
    rng = random.Random(2)
    for g, N in [(1, 5), (2, 3)]:
        one = GSpElement(ModMatrix(identity(2 * g), N), 1)
        minus = GSpElement(ModMatrix(scale(identity(2 * g), -1), N), 1)
        for _ in range(10):
            M = _random_index(g, N, rng)
            assert act_on_index(one, M) == M
            assert act_on_index(minus, M) == M


def test_right_action():
    rng = random.Random(3)
    for _ in range(500):
        g = rng.choice([1, 2])
        N = rng.choice([2, 3, 4, 5])
        s1, s2 = random_gsp_mod(g, N, rng), random_gsp_mod(g, N, rng)
        M = _random_index(g, N, rng)
        assert act_on_index(s2, act_on_index(s1, M)) == act_on_index(s1 @ s2, M)


def test_transitive_on_index_set_g1_N3():
    everything = {normalize_index(FamilyIndex(3, 1, [[a], [b]])).numerator
                  for a in range(3) for b in range(3) if (a, b) != (0, 0)}
    orbit = {M.numerator for M in index_set(1, 3)}
    assert orbit == everything and len(orbit) == 4
    assert len(index_set(1, 5)) == 12


def test_diagonal_similitude_fixes_identity_index():
    for g, N in [(1, 5), (2, 5), (2, 3)]:
        M = normalize_index(FamilyIndex.identity(g, N))
        for nu in range(1, N):
            if nu % N and all(nu % p for p in range(2, N + 1) if N % p == 0):
                assert act_on_index(diag_similitude(g, nu, N), M) == M


def test_member_at_identity_is_generator(siegel5):
    tau = mpmath.mpc(0.1, 1.1)
    v = evaluate_member(siegel5, FamilyIndex.identity(1, 5), tau, PREC)
    with mpmath.workprec(160):
        direct = siegel_ball((Fraction(1, 5), 0), tau).mid ** 60
    assert abs(v.value - direct) < 10 * PREC.target * max(1, abs(direct))


def test_lift_independence(siegel5):
    rng = random.Random(4)
    for _ in range(10):
        M = _random_index(1, 5, rng)
        gamma = M.completion()
        other = mat_mul(random_gamma1(1, 5, rng), gamma)
        check_completion(other, M)
        tau = random_point(1, rng)
        a = evaluate_member(siegel5, M, tau, PREC)
        b = evaluate_member(siegel5, M, tau, PREC, gamma=other)
        assert abs(a.value - b.value) <= 10 * PREC.target + a.error_bound + b.error_bound


def test_genus1_fricke_oracle(siegel5):
    """h_M(tau) = g_{(a/5, b/5)}(tau)^60 for M = (1/5)[a; b]."""
    rng = random.Random(5)
    for _ in range(100):
        M = _random_index(1, 5, rng)
        tau = random_point(1, rng)[0, 0]
        got = evaluate_member(siegel5, M, tau, PREC)
        a, b = M.numerator[0][0], M.numerator[1][0]
        with mpmath.workprec(200):
            want = siegel_ball((Fraction(a, 5), Fraction(b, 5)), tau).mid ** 60
        assert abs(got.value - want) < 10 * PREC.target * max(1, abs(want))


def test_sp_action_matches_point_transform():
    d = FamilyDescriptor.from_catalog("scaled_igusa_j1", 2)
    rng = random.Random(6)
    for _ in range(3):
        s = random_sp_mod(2, 2, rng)
        M = _random_index(2, 2, rng)
        Z = random_point(2, rng)
        with mpmath.workprec(PREC.bits + 64):
            W, err = act(sp_lift(s), Z)
        lhs = evaluate_member(d, act_on_index(s, M), Z, PREC)
        rhs = evaluate_member(d, M, W, PREC)
        tol = 10 * PREC.target * max(1, abs(lhs.value))
        assert abs(lhs.value - rhs.value) <= tol + lhs.error_bound + rhs.error_bound


def test_well_defined_on_classes(siegel5):
    rng = random.Random(7)
    M = _random_index(1, 5, rng)
    neg = FamilyIndex(5, 1, scale(M.numerator, -1))
    tau = mpmath.mpc(-0.2, 0.9)
    a = evaluate_member(siegel5, M, tau, PREC)
    b = evaluate_member(siegel5, neg, tau, PREC)
    assert abs(a.value - b.value) < 10 * PREC.target * max(1, abs(a.value))


def test_descriptor_certificate_and_errors(siegel5):
    assert siegel5.certificate.passed
    assert siegel5.to_json()["modularity"]["result"] == "PASS"
    with pytest.raises(ValueError):
        evaluate_member(siegel5, FamilyIndex.identity(1, 3), 1j, PREC)
    with pytest.raises(ValueError):
        evaluate_member(siegel5, FamilyIndex.identity(1, 5), 1j, PREC, gamma=[[0, -1], [1, 0]])


def test_enumerated_group_acts_within_index_set():
    idx = {M.numerator for M in index_set(1, 3)}
    start = index_set(1, 3)[0]
    for s in enumerate_gsp(1, 3):
        assert act_on_index(s, start).numerator in idx
