from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stokeslab.errors import ParseError, ValidationError
from stokeslab.exactcore import (
    GR,
    QMatrix,
    Ray,
    ccw_strictly_between,
    column_basis,
    coordinates,
    dominance,
    extend_basis,
    format_rational,
    intersect_spaces,
    parse_rational,
    preimage_space,
    rank_and_kernel,
    ray_cyclic_position,
    ray_normalize,
    solve_or_invert,
)

small = st.integers(-4, 4)


def matrices(n, m):
    return st.lists(st.lists(small, min_size=m, max_size=m), min_size=n, max_size=n).map(QMatrix)


def test_parse_and_format():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-2") == Fraction(-2)
    assert format_rational(Fraction(-3, 4)) == "-3/4"
    assert format_rational(2) == "2/1"
    with pytest.raises(ParseError):
        parse_rational("1/0")
    with pytest.raises(ParseError):
        parse_rational("x")


@given(st.fractions(max_denominator=50))
def test_format_parse_roundtrip(x):
    assert parse_rational(format_rational(x)) == x


def test_gaussian_arithmetic():
    a, b = GR(1, 2), GR(Fraction(1, 2), -1)
    assert a * b == GR(Fraction(5, 2), 0)
    assert (a / b) * b == a
    assert a.conj() == GR(1, -2)
    assert a.norm() == 5
    assert str(GR(1, -2)) == "1-2i"


def test_ray_normalization_and_order():
    assert ray_normalize(GR(2, 4)) == Ray(1, 2)
    assert Ray(-3, 0) == Ray(-1, 0)
    rays = [Ray(1, 0), Ray(1, 1), Ray(0, 1), Ray(-1, 1), Ray(-1, 0), Ray(-1, -1), Ray(0, -1), Ray(1, -1)]
    assert sorted(reversed(rays), key=ray_cyclic_position) == rays
    assert ccw_strictly_between(Ray(1, 0), Ray(0, 1), Ray(-1, 0))
    assert not ccw_strictly_between(Ray(1, 0), Ray(0, -1), Ray(-1, 0))
    assert ccw_strictly_between(Ray(0, -1), Ray(1, 0), Ray(0, 1))


def test_dominance():
    # 0 <_u 1 for u pointing right, reversed for u pointing left
    assert dominance(0, 1, Ray(1, 0)) == -1
    assert dominance(0, 1, Ray(-1, 0)) == 1
    assert dominance(0, 1, Ray(0, 1)) == 0


def test_inverse_and_rank():
    M = QMatrix([[2, 1], [1, 1]])
    assert M.inverse() == QMatrix([[1, -1], [-1, 2]])
    assert M.det() == 1
    S = QMatrix([[1, 2], [2, 4]])
    assert S.rank() == 1
    with pytest.raises(ValidationError):
        solve_or_invert(S)


@settings(max_examples=60, deadline=None)
@given(matrices(3, 3))
def test_inverse_property(M):
    if M.det() == 0:
        assert not M.is_invertible()
        return
    assert (M @ M.inverse()).is_identity()
    assert (M.inverse() @ M).is_identity()


@settings(max_examples=60, deadline=None)
@given(matrices(3, 4))
def test_rank_nullity(M):
    r, ker = rank_and_kernel(M)
    assert r + len(ker) == M.cols
    for v in ker:
        assert all(x == 0 for x in M @ v)
    assert r == M.T.rank()


@settings(max_examples=40, deadline=None)
@given(matrices(3, 2), matrices(3, 2))
def test_subspace_operations(A, B):
    I = intersect_spaces(A, B)
    for j in range(I.cols):
        col = I.submatrix(range(3), [j])
        assert column_basis(A.hstack(col)).cols == column_basis(A).cols
        assert column_basis(B.hstack(col)).cols == column_basis(B).cols
    assert I.cols == column_basis(A).cols + column_basis(B).cols - column_basis(A.hstack(B)).cols
    ext = extend_basis(column_basis(A), A.hstack(B))
    assert column_basis(A).cols + ext.cols == column_basis(A.hstack(B)).cols


def test_preimage_and_coordinates():
    T = QMatrix([[1, 0], [0, 0]])
    P = preimage_space(T, QMatrix([[0], [1]]))
    assert P.cols == 1 and (T @ P).is_zero()
    basis = QMatrix([[1, 0], [1, 1]])
    assert coordinates(basis, QMatrix([[2], [3]])) == QMatrix([[2], [1]])
