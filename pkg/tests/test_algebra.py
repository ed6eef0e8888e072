import pytest

from dgcat.algebra import (
    Quiver, StructuralError, check_dg_algebra, dual_numbers, path_algebra,
    product_algebra, trivial_algebra, with_diff,
)
from dgcat.field import QQ, PrimeField
from dgcat.zoo import zigzag


def test_ground_field_passes():
    rep = check_dg_algebra(trivial_algebra(QQ))
    assert rep.passed


def test_acyclic_dual_numbers_pass(D):
    assert check_dg_algebra(D).passed


def test_degree_violation_detected():
    # d(x) = x instead of 1: wrong degree and d^2 != 0 patterns
    bad = with_diff(dual_numbers(QQ, degree=-1), [("x", "x", 1)])
    rep = check_dg_algebra(bad)
    assert not rep.passed
    assert any(v[0] == "differential-degree" for v in rep.violations)


def test_leibniz_violation_detected():
    # d(x) = 1 with |x| = 0 breaks the degree axiom and Leibniz on (x, x)
    bad = with_diff(dual_numbers(QQ, degree=0), [("x", "e", 1)])
    rep = check_dg_algebra(bad)
    assert not rep.passed


def test_path_algebra_point():
    a = path_algebra(Quiver(["1"], []), name="pt")
    assert a.dim == 1 and check_dg_algebra(a).passed


def test_path_algebra_dual_numbers():
    q = Quiver(["1"], [("x", "1", "1")])
    a = path_algebra(q, relations=[[(1, ("x", "x"))]])
    assert a.dim == 2
    assert check_dg_algebra(a).passed


def test_path_algebra_infinite_detected():
    q = Quiver(["1"], [("x", "1", "1")])
    with pytest.raises(StructuralError):
        path_algebra(q, relations=[], max_length=6)


def test_zigzag_two_basis():
    z = zigzag(2)
    assert z.space.labels == ("e1", "e2", "(1|2)", "(2|1)", "(1|2|1)", "(2|1|2)")
    assert check_dg_algebra(z).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_zigzag_dimension(n):
    z = zigzag(n)
    assert z.dim == 4 * n - 2
    assert check_dg_algebra(z).passed


def test_zigzag_rejects_one_vertex():
    with pytest.raises(StructuralError):
        zigzag(1)


def test_path_algebra_deterministic():
    def build():
        q = Quiver([1, 2], [("u1", 1, 2), ("d1", 2, 1)])
        return path_algebra(q, relations=[[(1, ("u1", "d1", "u1"))],
                                          [(1, ("d1", "u1", "d1"))]])
    a, b = build(), build()
    assert a.space.labels == b.space.labels
    assert a.space.degrees == b.space.degrees
    assert a.mult == b.mult


def test_product_single_factor(D):
    assert product_algebra([D]) is D


def test_product_k_k():
    a = product_algebra([trivial_algebra(QQ, "kx"), trivial_algebra(QQ, "ky")])
    assert a.dim == 2
    assert check_dg_algebra(a).passed


def test_product_d_k(D):
    f = QQ
    p = product_algebra([D, trivial_algebra(QQ)])
    assert p.dim == 3
    assert check_dg_algebra(p).passed
    # differential supported on the first block
    for j in range(p.dim):
        for i in range(p.dim):
            if not f.is_zero(p.diff[i, j]):
                assert i < 2 and j < 2


def test_product_central_idempotents(D):
    p = product_algebra([D, trivial_algebra(QQ), zigzag(2)])
    assert p.dim == D.dim + 1 + 6
    f = QQ
    idems = p.idempotents
    total = [f.zero()] * p.dim
    for e in idems:
        # closed, degree-0, idempotent, central
        de = p.diff.apply(e)
        assert all(f.is_zero(c) for c in de)
        assert p.mul_vec(e, e) == e
        for i in range(p.dim):
            b = p.basis_vector(i)
            assert p.mul_vec(e, b) == p.mul_vec(b, e)
        total = [f.add(u, v) for u, v in zip(total, e)]
    assert total == p.unit
    for s, e1 in enumerate(idems):
        for t, e2 in enumerate(idems):
            if s != t:
                prod = p.mul_vec(e1, e2)
                assert all(f.is_zero(c) for c in prod)


def test_prime_field_zigzag():
    z = zigzag(2, field=PrimeField(5))
    assert z.dim == 6 and check_dg_algebra(z).passed
