import itertools

import numpy as np
import pytest

from frustop.lattice import Lattice, build_complex


def gf2_rank_dense(a: np.ndarray) -> int:
    """Plain row reduction on a boolean array, independent of the bit-packed code."""
    a = np.array(a, dtype=bool)
    r = 0
    rows, cols = a.shape
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i, c]), None)
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def dense_boundary(cx, k, rows=None, cols=None) -> np.ndarray:
    """Incidence matrix from the faces table (rows (k-1)-cells, columns k-cells)."""
    m = np.zeros((cx.counts[k - 1], cx.counts[k]), dtype=bool)
    for j, faces in enumerate(cx.faces[k]):
        for f in faces:
            m[f, j] ^= True
    if rows is not None:
        m = m[rows]
    if cols is not None:
        m = m[:, cols]
    return m


def betti_dense(cx, masks, k) -> int:
    """dim H_k of a subcomplex by dense rank-nullity."""
    cells = [np.flatnonzero(m) for m in masks]
    n_k = len(cells[k])
    r_out = gf2_rank_dense(dense_boundary(cx, k, cells[k - 1], cells[k])) if k >= 1 and n_k else 0
    r_in = (
        gf2_rank_dense(dense_boundary(cx, k + 1, cells[k], cells[k + 1]))
        if k < cx.d and len(cells[k + 1]) and n_k
        else 0
    )
    return n_k - r_out - r_in


def all_spin_configs(n):
    for bits in itertools.product((1, -1), repeat=n):
        yield np.array(bits, dtype=np.int8)


@pytest.fixture
def square():
    return build_complex(Lattice.free(1, 1))


@pytest.fixture
def grid3():
    return build_complex(Lattice.free(3, 3))


@pytest.fixture
def cube():
    return build_complex(Lattice.free(1, 1, 1))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
