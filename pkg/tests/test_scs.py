import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zkparametric.algebra import DeterministicRng
from zkparametric.poly import LaurentPoly
from zkparametric.scs import (
    ConstraintError,
    ConstraintSystem,
    SKPolys,
    UnsatisfiedError,
    Witness,
    binary_check_system,
    binary_check_witness,
    build_r_poly,
    compute_t,
    is_satisfied,
    range_check_system,
    range_check_witness,
    t_constant_term,
    unsatisfied_constraints,
)

P = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001


def oracle_s_x(cs, y):
    # s[X, y] straight from the definition, term by term
    p, N = cs.p, cs.N
    out = {}

    def put(e, c):
        out[e] = (out.get(e, 0) + c) % p

    for i in range(1, N + 1):
        put(i + N, -pow(y, i, p) - pow(y, -i, p))
    for q, lc in enumerate(cs.linear, 1):
        yq = pow(y, q + N, p)
        for i, c in lc.u.items():
            put(-i, c * yq)
        for i, c in lc.v.items():
            put(i, c * yq)
        for i, c in lc.w.items():
            put(i + N, c * yq)
    return LaurentPoly(out, p)


def oracle_constant_term(cs, wit, y):
    p = cs.p
    R = build_r_poly(wit, p).poly
    rxy = {e: c * pow(y, e, p) for e, c in R.coeffs.items()}
    s = oracle_s_x(cs, y).coeffs
    acc = 0
    for e, c in R.coeffs.items():
        acc += c * (rxy.get(-e, 0) + s.get(-e, 0))
    k_hat = sum(lc.k * pow(y, q + cs.N, p) for q, lc in enumerate(cs.linear, 1))
    return (acc - k_hat) % p


def random_system(rng, p, N=None, Q=None):
    N = N or rng.randint(1, 32)
    Q = Q or rng.randint(1, 64)
    a = [rng.scalar(p) for _ in range(N)]
    b = [rng.scalar(p) for _ in range(N)]
    wit = Witness.of(a, b, [x * y for x, y in zip(a, b)], p)
    cs = ConstraintSystem(p)
    cs.add_multiplication(N)
    for _ in range(Q):
        vecs = [{rng.randint(1, N): rng.scalar(p) for _ in range(rng.randint(0, 3))} for _ in range(3)]
        k = sum(c * xs[i - 1] for vec, xs in zip(vecs, (wit.a, wit.b, wit.c)) for i, c in vec.items())
        cs.add_linear(*vecs, k=k)
    return cs, wit


def test_builder_counts():
    cs = ConstraintSystem(P)
    assert cs.add_multiplication() == 1
    assert cs.N == 1 and cs.Q == 0
    with pytest.raises(ConstraintError):
        cs.add_linear(u={2: 1})
    ex1 = binary_check_system(1, P)
    assert (ex1.N, ex1.Q) == (1, 3)
    for k in (1, 3, 8):
        ex2 = range_check_system(5, k, P)
        assert (ex2.N, ex2.Q) == (k, 2 * k + 1)


def test_json_round_trip():
    cs = range_check_system(5, 3, P)
    again = ConstraintSystem.from_json(cs.to_json(), P)
    assert again.N == cs.N and again.linear == cs.linear


def test_binary_check():
    for w in (0, 1):
        assert is_satisfied(binary_check_system(w, P), binary_check_witness(w, P))
    assert not is_satisfied(binary_check_system(2, P), binary_check_witness(2, P))


def test_binary_check_brute_force():
    # over a tiny field only w in {0, 1} has a satisfying assignment at all
    p = 7
    for w in range(p):
        cs = binary_check_system(w, p)
        found = any(is_satisfied(cs, Witness.of([a], [b], [c], p)) for a, b, c in itertools.product(range(p), repeat=3))
        assert found == (w in (0, 1))


def test_range_check():
    cs = range_check_system(5, 3, P)
    wit = range_check_witness(5, 3, P)
    assert wit.a == (1, 0, 4)
    assert is_satisfied(cs, wit)
    assert not is_satisfied(cs, Witness.of([1, 2, 2], [1, 2, 2], [1, 4, 4], P))
    assert unsatisfied_constraints(cs, Witness.of([1, 2, 2], [1, 2, 2], [1, 4, 4], P)) == ["lin:6"]
    with pytest.raises(ConstraintError):
        range_check_witness(8, 3, P)
    with pytest.raises(ConstraintError):
        is_satisfied(cs, binary_check_witness(1, P))


def test_r_poly_placement():
    R = build_r_poly(Witness.of([2], [3], [6], P), P)
    assert R.poly == LaurentPoly({1: 2, -1: 3, -2: 6}, P)
    assert R.poly.constant_term() == 0
    z, y = 11, 13
    assert R.eval_xy(z, y) == R.poly.eval(z * y)
    assert R.at_y(y).eval(z) == R.poly.eval(z * y)


def test_k_hat_support():
    cs = binary_check_system(1, P)
    sk = SKPolys(cs)
    # only the third constraint has k != 0; constraint q sits at Y^(q + N)
    assert sk.k_hat.coeffs == {4: 1}
    assert sk.k_hat.constant_term() == 0
    assert sk.s_y.constant_term() == 0


def test_s_consistency_and_oracle():
    rng = DeterministicRng("s")
    for _ in range(20):
        cs, _ = random_system(rng, P)
        sk = SKPolys(cs)
        for _ in range(5):
            y = rng.scalar(P, (0,))
            sx = sk.s_x(y)
            assert sx == oracle_s_x(cs, y)
            assert sx.eval(1) == sk.s_y.eval(y)
            assert sx.constant_term() == 0


def test_t_examples():
    rng = DeterministicRng("t")
    cs = binary_check_system(1, P)
    sk = SKPolys(cs)
    good = build_r_poly(binary_check_witness(1, P), P)
    forged = build_r_poly(Witness.of([1], [1], [0], P), P)
    for _ in range(100):
        y = rng.scalar(P, (0,))
        assert compute_t(good, sk, y, strict=False).constant_term() == 0
        assert compute_t(forged, sk, y, strict=False).constant_term() != 0
    with pytest.raises(UnsatisfiedError):
        compute_t(forged, sk, 5)
    y, z = rng.scalar(P, (0,)), rng.scalar(P, (0,))
    t = compute_t(good, sk, y)
    R = good.poly
    assert t.eval(z) == (R.eval(z) * (R.eval(z * y) + sk.eval_s(z, y)) - sk.k_hat.eval(y)) % P


def test_t_constant_term_three_ways():
    rng = DeterministicRng("three")
    for _ in range(10):
        cs, wit = random_system(rng, P, N=rng.randint(1, 8), Q=rng.randint(1, 10))
        bad = Witness.of(wit.a, wit.b, (wit.c[0] + 1,) + wit.c[1:], P)
        for w in (wit, bad):
            y = rng.scalar(P, (0,))
            direct = compute_t(build_r_poly(w, P), SKPolys(cs), y, strict=False).constant_term()
            assert direct == t_constant_term(cs, w, y) == oracle_constant_term(cs, w, y)
        assert t_constant_term(cs, wit, y) == 0


def test_t_degree_envelope():
    rng = DeterministicRng("env")
    cs, wit = random_system(rng, P, N=16, Q=20)
    sk = SKPolys(cs)
    t = compute_t(build_r_poly(wit, P), sk, rng.scalar(P, (0,)))
    assert -4 * cs.N <= t.min_exp() and t.max_exp() <= 3 * cs.N
    assert sk.degree_needed() >= 4 * cs.N


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**8 - 1), st.integers(1, 2**64))
def test_range_check_property(w, seed):
    cs = range_check_system(w, 8, P)
    wit = range_check_witness(w, 8, P)
    assert is_satisfied(cs, wit)
    y = DeterministicRng(seed).scalar(P, (0,))
    assert t_constant_term(cs, wit, y) == 0
