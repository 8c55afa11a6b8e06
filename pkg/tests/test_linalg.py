"""Exact F_p linear algebra, checked against brute-force enumeration."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallforge.linalg import (
    Field,
    Matrix,
    hstack,
    is_invertible,
    kernel_basis,
    kron,
    rank,
    rref,
    solve,
    solve_matrix,
    vstack,
)


def mat(p, rows):
    return Matrix.from_rows(Field(p), rows)


def test_field_validates_prime():
    Field(2), Field(97)
    with pytest.raises(ValueError):
        Field(4)
    with pytest.raises(ValueError):
        Field(1)


def test_field_inverse():
    f = Field(7)
    for a in range(1, 7):
        assert (a * f.inv(a)) % 7 == 1
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


def test_rref_frozen_example():
    # over F_3 the second row is 2x the first, so rank 1
    m = mat(3, [[1, 2], [2, 1]])
    red, piv = rref(m)
    assert red.entries() == ((1, 2), (0, 0))
    assert piv == (0,)
    assert rank(m) == 1


def test_entries_are_row_tuples():
    m = mat(5, [[1, 2, 3], [4, 0, 1]])
    assert m.entries() == ((1, 2, 3), (4, 0, 1))


def test_kernel_frozen_example():
    # kernel of [[1,1],[1,1]] over F_2: checked against all 4 vectors
    m = mat(2, [[1, 1], [1, 1]])
    ker = kernel_basis(m)
    assert len(ker) == 1
    assert tuple(ker[0]) == (1, 1)
    members = [
        v
        for v in itertools.product(range(2), repeat=2)
        if tuple(np.dot(m.a, v) % 2) == (0, 0)
    ]
    assert members == [(0, 0), (1, 1)]


def test_solve_frozen_example():
    m = mat(2, [[1, 1]])
    x = solve(m, np.array([1], dtype=np.int64))
    assert x is not None and tuple(np.dot(m.a, x) % 2) == (1,)
    # all solutions over F_2, by enumeration: (1,0) and (0,1)
    sols = [
        v
        for v in itertools.product(range(2), repeat=2)
        if tuple(np.dot(m.a, v) % 2) == (1,)
    ]
    assert tuple(x) in sols


def test_solve_inconsistent():
    m = mat(2, [[1, 1], [1, 1]])
    assert solve(m, np.array([1, 0], dtype=np.int64)) is None


def test_solve_matrix_multi_rhs():
    m = mat(3, [[1, 0], [0, 1], [1, 1]])
    b = mat(3, [[1], [2], [0]])
    x = solve_matrix(m, b)
    assert x is not None
    assert (m @ x).entries() == b.entries()


def test_matrix_ops_mod_p():
    a = mat(5, [[2, 3], [4, 1]])
    b = mat(5, [[1, 1], [1, 1]])
    assert (a + b).entries() == ((3, 4), (0, 2))
    assert (a - b).entries() == ((1, 2), (3, 0))
    assert (a @ b).entries() == ((0, 0), (0, 0))
    assert a.scale(2).entries() == ((4, 1), (3, 2))
    assert a.transpose().entries() == ((2, 4), (3, 1))


def test_stack_and_kron():
    a = mat(2, [[1]])
    b = mat(2, [[0]])
    assert hstack([a, b]).entries() == ((1, 0),)
    assert vstack([a, b]).entries() == ((1,), (0,))
    k = kron(Field(2), mat(2, [[1, 1]]), mat(2, [[1], [0]]))
    assert k.entries() == ((1, 1), (0, 0))


def test_is_invertible():
    assert is_invertible(mat(2, [[1, 1], [0, 1]]))
    assert not is_invertible(mat(2, [[1, 1], [1, 1]]))


small_primes = st.sampled_from([2, 3, 5])
dims = st.integers(min_value=0, max_value=4)


@st.composite
def random_matrix(draw, p=None, rows=None, cols=None):
    p = p if p is not None else draw(small_primes)
    r = rows if rows is not None else draw(dims)
    c = cols if cols is not None else draw(dims)
    entries = draw(
        st.lists(
            st.lists(st.integers(0, p - 1), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        )
    )
    return Matrix(Field(p), np.array(entries, dtype=np.int64).reshape(r, c))


@given(random_matrix())
@settings(max_examples=120, deadline=None)
def test_rank_nullity(m):
    assert rank(m) + len(kernel_basis(m)) == m.cols


@given(random_matrix())
@settings(max_examples=120, deadline=None)
def test_kernel_vectors_annihilate(m):
    for v in kernel_basis(m):
        assert not np.any(np.dot(m.a, v) % m.field.p)


@given(random_matrix(), st.data())
@settings(max_examples=100, deadline=None)
def test_solve_agrees_with_enumeration(m, data):
    p = m.field.p
    b = np.array(
        data.draw(st.lists(st.integers(0, p - 1), min_size=m.rows, max_size=m.rows)),
        dtype=np.int64,
    )
    x = solve(m, b)
    if x is not None:
        assert np.array_equal(np.dot(m.a, x) % p, b % p)
    elif p**m.cols <= 625:
        for v in itertools.product(range(p), repeat=m.cols):
            assert not np.array_equal(
                np.dot(m.a, np.array(v, dtype=np.int64)) % p, b % p
            )


@given(random_matrix())
@settings(max_examples=80, deadline=None)
def test_rref_is_row_equivalent_and_reduced(m):
    red, piv = rref(m)
    assert rank(red) == rank(m) == len(piv)
    a = red.a
    for k, c in enumerate(piv):
        row = k
        assert a[row, c] == 1
        assert not np.any(np.delete(a[:, c], row))
        if k:
            assert c > piv[k - 1]
