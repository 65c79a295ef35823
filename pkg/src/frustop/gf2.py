"""Linear algebra over GF(2) with Python ints as packed bit vectors.

Bit ``j`` of a row is the entry in column ``j``.  Elimination always pivots on
the lowest set bit, so bases and solutions are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def low_bit(v: int) -> int:
    return (v & -v).bit_length() - 1


def parity(v: int) -> int:
    return v.bit_count() & 1


def mask_to_int(mask: np.ndarray) -> int:
    packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def int_to_mask(v: int, n: int) -> np.ndarray:
    nbytes = (n + 7) // 8
    raw = np.frombuffer(v.to_bytes(max(nbytes, 1), "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


def bits(v: int) -> list[int]:
    out = []
    while v:
        lb = v & -v
        out.append(lb.bit_length() - 1)
        v ^= lb
    return out


@dataclass(frozen=True)
class Gf2Matrix:
    rows: int
    cols: int
    row_data: tuple[int, ...]

    def __post_init__(self) -> None:
        data = tuple(int(r) for r in self.row_data)
        object.__setattr__(self, "row_data", data)
        if len(data) != self.rows:
            raise ValueError("row count mismatch")
        limit = 1 << self.cols
        for r in data:
            if r < 0 or r >= limit:
                raise ValueError("row wider than the column count")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[int]) -> "Gf2Matrix":
        data = [0] * rows
        for j, col in enumerate(columns):
            for i in bits(col):
                data[i] |= 1 << j
        return cls(rows, len(columns), tuple(data))

    @classmethod
    def from_dense(cls, array: np.ndarray) -> "Gf2Matrix":
        a = np.asarray(array).astype(bool)
        if a.ndim != 2:
            raise ValueError("need a 2-d array")
        return cls(a.shape[0], a.shape[1], tuple(mask_to_int(r) for r in a))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=bool)
        for i, r in enumerate(self.row_data):
            out[i] = int_to_mask(r, self.cols)
        return out

    def columns(self) -> list[int]:
        cols = [0] * self.cols
        for i, r in enumerate(self.row_data):
            for j in bits(r):
                cols[j] |= 1 << i
        return cols

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix(self.cols, self.rows, tuple(self.columns()))

    def matvec(self, x: int) -> int:
        out = 0
        for i, r in enumerate(self.row_data):
            if parity(r & x):
                out |= 1 << i
        return out

    def matmul(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = [self.matvec(c) for c in other.columns()]
        return Gf2Matrix.from_columns(self.rows, cols)

    def hstack(self, column: int) -> "Gf2Matrix":
        data = tuple(r | (((column >> i) & 1) << self.cols) for i, r in enumerate(self.row_data))
        return Gf2Matrix(self.rows, self.cols + 1, data)

    def is_zero(self) -> bool:
        return not any(self.row_data)


class Reducer:
    """Incremental column reduction keyed by lowest set bit.

    Each stored pivot vector carries a tag recording which inserted vectors
    were summed to produce it.
    """

    def __init__(self) -> None:
        self.pivots: dict[int, tuple[int, int]] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, v: int, tag: int = 0) -> tuple[int, int]:
        pivots = self.pivots
        while v:
            lb = low_bit(v)
            hit = pivots.get(lb)
            if hit is None:
                break
            v ^= hit[0]
            tag ^= hit[1]
        return v, tag

    def add(self, v: int, tag: int = 0) -> tuple[int, int]:
        """Reduce ``v`` and keep it as a pivot if it is independent.

        Returns the reduced vector and tag; a zero vector means ``v`` was dependent.
        """
        v, tag = self.reduce(v, tag)
        if v:
            self.pivots[low_bit(v)] = (v, tag)
        return v, tag

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0


def _column_reduction(m: Gf2Matrix) -> tuple[Reducer, list[int]]:
    red = Reducer()
    kernel = []
    for j, col in enumerate(m.columns()):
        v, tag = red.add(col, 1 << j)
        if not v:
            kernel.append(tag)
    return red, kernel


def rank(m: Gf2Matrix) -> int:
    red = Reducer()
    for r in m.row_data:
        red.add(r)
    return len(red)


def rank_of(vectors: Iterable[int]) -> int:
    red = Reducer()
    for v in vectors:
        red.add(v)
    return len(red)


def kernel_basis(m: Gf2Matrix) -> list[int]:
    """Basis of {x : m x = 0}; vector ``i`` has its highest bit at a distinct free column."""
    return _column_reduction(m)[1]


def image_basis(m: Gf2Matrix) -> list[int]:
    red, _ = _column_reduction(m)
    return [v for _, (v, _) in sorted(red.pivots.items())]


def solve(m: Gf2Matrix, rhs: int) -> int | None:
    """Some x with m x = rhs, or None when rhs is outside the column space."""
    if rhs >> m.rows:
        raise ValueError("rhs longer than the row count")
    red, _ = _column_reduction(m)
    rest, x = red.reduce(rhs)
    return None if rest else x


class ColumnSolver:
    """Reusable solver for many right-hand sides against one matrix."""

    def __init__(self, m: Gf2Matrix):
        self.matrix = m
        self._red, self.kernel = _column_reduction(m)

    @property
    def rank(self) -> int:
        return len(self._red)

    def solve(self, rhs: int) -> int | None:
        rest, x = self._red.reduce(rhs)
        return None if rest else x
