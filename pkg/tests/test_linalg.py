import random
from fractions import Fraction

import sympy
from hypothesis import given, settings, strategies as st

from symscan.linalg import (
    canonical_basis, make_ring, nullspace_GF2, nullspace_poly, nullspace_Q, rank, rank_GF2,
)

from oracles import gf2_kernel_by_enumeration, gf2_span


def _matmul_zero(m, basis):
    return all(sum(Fraction(a) * b for a, b in zip(row, v)) == 0 for row in m for v in basis)


def _random_matrix(rng, rows, cols, density=0.5, lo=-3, hi=3):
    return [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(cols)]
            for _ in range(rows)]


def test_sum_times_system_has_expected_kernel():
    m = [[1, 0, -1, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, 1, -1], [0, 0, 0, 0, 1]]
    assert nullspace_Q(m, 5) == [(1, 1, 1, -1, 0)]


def test_fifty_random_rational_matrices_against_sympy():
    rng = random.Random(7)
    for _ in range(50):
        r, c = rng.randint(1, 12), rng.randint(1, 20)
        m = _random_matrix(rng, r, c, density=rng.choice([0.2, 0.5, 0.9]))
        basis = nullspace_Q(m, c)
        assert _matmul_zero(m, basis)
        oracle = sympy.Matrix(m)
        assert rank(m, c) == oracle.rank()
        assert len(basis) == c - oracle.rank()
        assert rank(basis, c) == len(basis)
        # same space: stacking the oracle kernel must not raise the rank
        ref = [[Fraction(int(x.p), int(x.q)) for x in v] for v in oracle.nullspace()]
        assert rank(basis + ref, c) == len(basis)


def test_six_by_nine_rank_nullity():
    rng = random.Random(1)
    m = _random_matrix(rng, 6, 9, density=1.0, lo=-9, hi=9)
    basis = nullspace_Q(m, 9)
    assert len(basis) + sympy.Matrix(m).rank() == 9
    assert _matmul_zero(m, basis)


def test_canonical_basis_independent_of_spanning_set():
    a = canonical_basis([[1, 2, 0], [0, 1, 1]], 3)
    b = canonical_basis([[1, 3, 1], [2, 5, 1], [0, 2, 2]], 3)
    assert a == b


@given(st.lists(st.lists(st.integers(-2, 2), min_size=4, max_size=4), min_size=1, max_size=5))
@settings(max_examples=60, deadline=None)
def test_rational_kernel_property(m):
    basis = nullspace_Q(m, 4)
    assert _matmul_zero(m, basis)
    assert len(basis) + rank(m, 4) == 4


def test_gf2_small_example():
    assert nullspace_GF2([[1, 1, 0], [0, 1, 1]], 3) == [(1, 1, 1)]


def test_fifty_random_gf2_matrices_against_enumeration():
    rng = random.Random(11)
    for i in range(50):
        c = 16 if i < 5 else rng.randint(1, 16)
        r = rng.randint(1, 12)
        m = [[int(rng.random() < 0.4) for _ in range(c)] for _ in range(r)]
        basis = nullspace_GF2(m, c)
        oracle = gf2_kernel_by_enumeration(m, c)
        assert gf2_span(basis) == oracle
        assert len(oracle) == 2 ** len(basis)
        assert rank_GF2(m, c) + len(basis) == c


def test_poly_kernel_of_times_translation_row():
    R = make_ring(["a", "b"])
    a, b = R.gens
    # t_c - b t_a - a t_b = 0 over columns (a, b, c)
    ns = nullspace_poly([[-b, -a, R(1)]], 3, R)
    assert ns.rank == 1
    for v in ns.basis:
        assert -b * v[0] - a * v[1] + v[2] == 0
    assert len(ns.basis) == 2


def test_poly_genericity_reports_symbolic_pivot():
    R = make_ring(["x"])
    (x,) = R.gens
    ns = nullspace_poly([[x, R(1)], [x, R(1)]], 2, R)
    assert ns.rank == 1 and len(ns.basis) == 1
    v = ns.basis[0]
    assert x * v[0] + v[1] == 0


def test_poly_rank_drops_on_dependent_rows():
    R = make_ring(["p", "q"])
    p, q = R.gens
    m = [[p, q, R(0)], [p * q, q * q, R(0)], [R(0), R(0), p]]
    ns = nullspace_poly(m, 3, R)
    assert ns.rank == 2
    (v,) = ns.basis
    assert p * v[0] + q * v[1] == 0 and v[2] == 0


def test_bases_are_deterministic_and_row_order_free():
    rng = random.Random(3)
    for _ in range(20):
        m = _random_matrix(rng, 5, 8)
        shuffled = m[:]
        rng.shuffle(shuffled)
        assert nullspace_Q(m, 8) == nullspace_Q([r[:] for r in m], 8) == nullspace_Q(shuffled, 8)
        bits = [[abs(x) % 2 for x in r] for r in m]
        assert nullspace_GF2(bits, 8) == nullspace_GF2(bits[::-1], 8)
