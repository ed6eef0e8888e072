import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from dgcat.field import QQ, PrimeField
from dgcat.linalg import (
    Matrix, rref, rank, kernel_basis, image_basis, rref_rank_kernel,
    solve_linear, solve_many, invert, Solver, random_matrix,
)


def M(rows):
    return Matrix.from_rows(QQ, [[Fraction(v) for v in r] for r in rows])


def test_zero_matrix_rank_kernel():
    m = Matrix.zero(QQ, 2, 2)
    r, ker, im = rref_rank_kernel(m)
    assert r == 0
    assert len(ker) == 2
    assert im == []


def test_identity_rank():
    m = Matrix.identity(QQ, 3)
    r, ker, im = rref_rank_kernel(m)
    assert r == 3 and ker == []


def test_rank_one_kernel():
    # independent hand row-reduction: [[1,2],[2,4]] ~ [[1,2],[0,0]]
    m = M([[1, 2], [2, 4]])
    r, ker, im = rref_rank_kernel(m)
    assert r == 1
    assert len(ker) == 1
    # kernel spanned by (-2, 1)
    v = ker[0]
    assert m.apply(v) == [Fraction(0), Fraction(0)]
    assert v[1] != 0 and v[0] / v[1] == Fraction(-2)


def test_solve_identity():
    m = Matrix.identity(QQ, 3)
    b = [Fraction(5), Fraction(-1), Fraction(7)]
    assert solve_linear(m, b) == b


def test_solve_zero_inconsistent():
    m = Matrix.zero(QQ, 2, 2)
    assert solve_linear(m, [Fraction(1), Fraction(0)]) is None


def test_solve_back_substitution():
    # back-substitution oracle: x1 + x2 = 3, 2 x2 = 4 -> (1, 2)
    m = M([[1, 1], [0, 2]])
    assert solve_linear(m, [Fraction(3), Fraction(4)]) == [Fraction(1), Fraction(2)]


def test_solve_residual_exact():
    rng = random.Random(0)
    for _ in range(25):
        m = random_matrix(QQ, rng.randint(1, 5), rng.randint(1, 5), rng)
        b = [QQ.of_int(rng.randint(-3, 3)) for _ in range(m.rows)]
        x = solve_linear(m, b)
        aug = m.hstack(Matrix.column(QQ, b))
        if x is None:
            assert rank(aug) == rank(m) + 1
        else:
            assert m.apply(x) == b
            assert rank(aug) == rank(m)


def test_rank_transpose():
    rng = random.Random(1)
    for _ in range(30):
        m = random_matrix(QQ, rng.randint(1, 6), rng.randint(1, 6), rng)
        assert rank(m) == rank(m.transpose())


def test_rref_idempotent():
    rng = random.Random(2)
    for _ in range(20):
        m = random_matrix(QQ, rng.randint(1, 5), rng.randint(1, 6), rng)
        r1, p1 = rref(m)
        r2, p2 = rref(r1)
        assert r1 == r2 and p1 == p2


def test_rank_nullity():
    rng = random.Random(3)
    for _ in range(20):
        m = random_matrix(QQ, rng.randint(1, 6), rng.randint(1, 6), rng)
        assert rank(m) + len(kernel_basis(m)) == m.cols


@given(st.integers(min_value=0, max_value=40))
@settings(max_examples=30, deadline=None)
def test_prime_field_inverse(seed):
    f = PrimeField(7)
    rng = random.Random(seed)
    a = rng.randint(1, 6)
    assert f.mul(a, f.inv(a)) == 1


def test_prime_field_rejects_composite():
    with pytest.raises(ValueError):
        PrimeField(6)


def test_prime_field_matrix_solve():
    f = PrimeField(5)
    m = Matrix.from_rows(f, [[1, 2], [3, 4]])
    b = [1, 2]
    x = solve_linear(m, b)
    assert x is not None
    assert m.apply(x) == [v % 5 for v in b]


def test_invert_and_solver():
    m = M([[1, 1], [0, 1]])
    mi = invert(m)
    assert mi is not None
    assert m * mi == Matrix.identity(QQ, 2)
    s = Solver(m)
    for b in ([Fraction(1), Fraction(2)], [Fraction(0), Fraction(3)]):
        x = s.solve(b)
        assert x is not None and m.apply(x) == b


def test_solver_detects_inconsistency():
    m = M([[1, 0], [1, 0]])
    s = Solver(m)
    assert s.solve([Fraction(1), Fraction(2)]) is None
    assert s.solve([Fraction(1), Fraction(1)]) is not None


def test_solve_many():
    m = M([[2, 0], [0, 4]])
    b = Matrix.identity(QQ, 2)
    x = solve_many(m, b)
    assert x is not None and m * x == b


def test_image_basis_echelon():
    m = M([[1, 2], [2, 4], [0, 0]])
    im = image_basis(m)
    assert len(im) == 1
    assert im[0][0] == 1  # echelon-normalized leading one


def test_block_assembly():
    a = Matrix.identity(QQ, 2)
    b = M([[7], [8]])
    blk = Matrix.block(QQ, [[a, b], [None, Matrix.identity(QQ, 1)]])
    assert blk.rows == 3 and blk.cols == 3
    assert blk[0, 2] == 7 and blk[2, 2] == 1 and blk[2, 0] == 0
