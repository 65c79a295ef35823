import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frustop.gf2 import (
    ColumnSolver,
    Gf2Matrix,
    bits,
    image_basis,
    int_to_mask,
    kernel_basis,
    mask_to_int,
    rank,
    rank_of,
    solve,
)
from frustop.lattice import Chain, Lattice, build_complex
from frustop.topology import RelativeChains, Subcomplex

from conftest import dense_boundary, gf2_rank_dense

matrices = st.integers(1, 9).flatmap(
    lambda r: st.integers(1, 9).flatmap(
        lambda c: st.lists(st.lists(st.booleans(), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


def test_identity_and_zero_rank():
    assert rank(Gf2Matrix.identity(4)) == 4
    assert rank(Gf2Matrix.zeros(3, 5)) == 0
    assert kernel_basis(Gf2Matrix.identity(4)) == []


def test_boundary_rank_of_2x2_grid():
    cx = build_complex(Lattice.free(2, 2))
    m = Gf2Matrix.from_dense(dense_boundary(cx, 1))
    assert (m.rows, m.cols) == (9, 12)
    assert rank(m) == 8
    assert len(kernel_basis(m)) == 4


def test_single_square_cycle():
    cx = build_complex(Lattice.free(1, 1))
    kb = kernel_basis(Gf2Matrix.from_dense(dense_boundary(cx, 1)))
    assert kb == [0b1111]


def test_solve_trivial_cases():
    e2 = 1 << 2
    assert solve(Gf2Matrix.identity(4), e2) == e2
    assert solve(Gf2Matrix.identity(4), 0) == 0
    assert solve(Gf2Matrix.from_dense(np.array([[1, 1], [0, 0]])), 0b10) is None
    with pytest.raises(ValueError):
        solve(Gf2Matrix.identity(2), 0b100)


def test_solve_recovers_surface():
    cx = build_complex(Lattice.free(3, 3))
    rc = RelativeChains(Subcomplex.full(cx))
    d2 = rc.boundary(2)
    surface = 0b101100101
    rhs = d2.matvec(surface)
    x = solve(d2, rhs)
    assert x is not None and d2.matvec(x) == rhs


def test_row_width_validated():
    with pytest.raises(ValueError):
        Gf2Matrix(1, 2, (0b100,))
    with pytest.raises(ValueError):
        Gf2Matrix(2, 2, (1,))


def test_bit_helpers_round_trip():
    m = np.array([1, 0, 0, 1, 1, 0, 0, 0, 0, 1], dtype=bool)
    v = mask_to_int(m)
    assert bits(v) == [0, 3, 4, 9]
    assert np.array_equal(int_to_mask(v, 10), m)


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_rank_matches_dense_reference_and_transpose(rows):
    a = np.array(rows, dtype=bool)
    m = Gf2Matrix.from_dense(a)
    assert rank(m) == gf2_rank_dense(a)
    assert rank(m) == rank(m.transpose())
    assert np.array_equal(m.to_dense(), a)


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_kernel_is_independent_and_annihilated(rows):
    m = Gf2Matrix.from_dense(np.array(rows, dtype=bool))
    kb = kernel_basis(m)
    assert len(kb) == m.cols - rank(m)
    assert rank_of(kb) == len(kb)
    assert all(m.matvec(x) == 0 for x in kb)
    assert rank_of(image_basis(m)) == rank(m)


@settings(max_examples=150, deadline=None)
@given(matrices, st.integers(0, 2**9 - 1))
def test_solve_consistent_with_rank(rows, rhs_bits):
    m = Gf2Matrix.from_dense(np.array(rows, dtype=bool))
    rhs = rhs_bits & ((1 << m.rows) - 1)
    x = solve(m, rhs)
    augmented = m.hstack(rhs)
    assert (x is not None) == (rank(augmented) == rank(m))
    if x is not None:
        assert m.matvec(x) == rhs
        assert ColumnSolver(m).solve(rhs) == x


@settings(max_examples=50, deadline=None)
@given(matrices, matrices)
def test_matmul_matches_dense(a_rows, b_rows):
    a = np.array(a_rows, dtype=bool)
    b = np.array(b_rows, dtype=bool)
    if a.shape[1] != b.shape[0]:
        with pytest.raises(ValueError):
            Gf2Matrix.from_dense(a).matmul(Gf2Matrix.from_dense(b))
        return
    prod = (a.astype(int) @ b.astype(int)) % 2
    assert np.array_equal(Gf2Matrix.from_dense(a).matmul(Gf2Matrix.from_dense(b)).to_dense(), prod.astype(bool))
