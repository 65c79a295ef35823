"""Finite cubical cell complexes on boxes of Z^d with mod-2 incidence.

A k-cell is a pair (base position, axes) where ``axes`` is a sorted tuple of
k distinct coordinate axes; the cell spans ``base + sum_{a in axes} t_a e_a``
for ``t_a`` in [0, 1].  Cells of each dimension are indexed lexicographically
by (position, orientation), so chains are comparable bit-for-bit across runs.

Every complex can also build its dual.  The dual of a box with free axes is a
box with one more cell per free axis whose outer layer is not dual to any
primal cell; that outer layer is the boundary of the dual lattice.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

FREE = "free"
PERIODIC = "periodic"


@dataclass(frozen=True)
class Lattice:
    d: int
    extents: tuple[int, ...]
    bc: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        extents = tuple(int(n) for n in self.extents)
        bc = tuple(self.bc) if self.bc else (FREE,) * len(extents)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "bc", bc)
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if len(extents) != self.d or len(bc) != self.d:
            raise ValueError("extents and bc need one entry per axis")
        for n, b in zip(extents, bc):
            if b not in (FREE, PERIODIC):
                raise ValueError(f"unknown boundary condition {b!r}")
            if n < 1:
                raise ValueError("every extent must be >= 1")
            if b == PERIODIC and n < 3:
                raise ValueError("periodic axes need extent >= 3")

    @classmethod
    def free(cls, *extents: int) -> "Lattice":
        return cls(len(extents), tuple(extents))

    def to_dict(self) -> dict:
        return {"d": self.d, "extents": list(self.extents), "bc": list(self.bc)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Lattice":
        extents = tuple(doc["extents"])
        bc = tuple(doc.get("bc") or (FREE,) * len(extents))
        return cls(int(doc["d"]), extents, bc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        return cls.from_dict(json.loads(text))

    def vertex_counts(self) -> tuple[int, ...]:
        return tuple(n + 1 if b == FREE else n for n, b in zip(self.extents, self.bc))


def _orientations(d: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(d), k))


class CellComplex:
    """Cubical complex with cells of dimension 0..d.

    ``faces[k]`` is an int array of shape (n_k, 2k) listing the (k-1)-faces of
    every k-cell (``faces[0]`` is empty).  ``cofaces[k]`` lists, for every
    k-cell, the (k+1)-cells containing it, padded with -1.
    """

    def __init__(self, lattice: Lattice, offset: Sequence[int] | None = None):
        self.lattice = lattice
        self.d = lattice.d
        # coordinate of stored vertex 0 along each axis; the dual uses -1 on free axes
        self.offset = tuple(offset) if offset is not None else (0,) * self.d
        self.positions: list[np.ndarray] = []
        self.axes: list[np.ndarray] = []
        self._build_cells()
        self.faces: list[np.ndarray] = [np.zeros((self.counts[0], 0), dtype=np.int64)]
        for k in range(1, self.d + 1):
            self.faces.append(self._build_faces(k))
        self.cofaces = [self._build_cofaces(k) for k in range(self.d + 1)]

    # construction -------------------------------------------------------

    def _cell_ranges(self, orient: tuple[int, ...]) -> list[int]:
        sizes = []
        for a, (n, b) in enumerate(zip(self.lattice.extents, self.lattice.bc)):
            sizes.append(n if (b == PERIODIC or a in orient) else n + 1)
        return sizes

    def _keys(self, pos: np.ndarray, orient_index: np.ndarray | int, k: int) -> np.ndarray:
        key = np.zeros(len(pos), dtype=np.int64)
        for a in range(self.d):
            key = key * self._radix[a] + pos[:, a]
        return key * len(self._orients[k]) + orient_index

    def _build_cells(self) -> None:
        d = self.d
        self._radix = [n + 1 for n in self.lattice.extents]
        self._orients = [_orientations(d, k) for k in range(d + 1)]
        self._orient_index = [{o: i for i, o in enumerate(os)} for os in self._orients]
        self._sorted_keys: list[np.ndarray] = []
        for k in range(d + 1):
            pos_parts, oi_parts = [], []
            for oi, orient in enumerate(self._orients[k]):
                grid = np.indices(self._cell_ranges(orient)).reshape(d, -1).T
                pos_parts.append(grid)
                oi_parts.append(np.full(len(grid), oi, dtype=np.int64))
            pos = np.concatenate(pos_parts).astype(np.int64)
            oi = np.concatenate(oi_parts)
            keys = self._keys(pos, oi, k)
            order = np.argsort(keys, kind="stable")
            self.positions.append(pos[order])
            orient_arr = np.array(self._orients[k], dtype=np.int64).reshape(len(self._orients[k]), k)
            self.axes.append(orient_arr[oi[order]])
            self._sorted_keys.append(keys[order])

    def _wrap_array(self, pos: np.ndarray) -> np.ndarray:
        out = pos.copy()
        for a, (n, b) in enumerate(zip(self.lattice.extents, self.lattice.bc)):
            if b == PERIODIC:
                out[:, a] %= n
        return out

    def _find(self, k: int, pos: np.ndarray, orient_index: np.ndarray | int) -> np.ndarray:
        pos = self._wrap_array(pos)
        if len(pos) and ((pos < 0).any() or (pos >= np.array(self._radix)).any()):
            raise KeyError("cell outside the complex")
        keys = self._keys(pos, orient_index, k)
        idx = np.searchsorted(self._sorted_keys[k], keys)
        idx = np.minimum(idx, len(self._sorted_keys[k]) - 1)
        if len(idx) and not np.array_equal(self._sorted_keys[k][idx], keys):
            raise KeyError("cell outside the complex")
        return idx

    def _build_faces(self, k: int) -> np.ndarray:
        n = self.counts[k]
        out = np.empty((n, 2 * k), dtype=np.int64)
        pos = self.positions[k]
        axes = self.axes[k]
        for orient in self._orients[k]:
            sel = np.flatnonzero(np.all(axes == np.array(orient), axis=1))
            for col, a in enumerate(orient):
                rest = tuple(b for b in orient if b != a)
                ri = self._orient_index[k - 1][rest]
                shifted = pos[sel].copy()
                shifted[:, a] += 1
                out[sel, 2 * col] = self._find(k - 1, pos[sel], ri)
                out[sel, 2 * col + 1] = self._find(k - 1, shifted, ri)
        return out

    def _build_cofaces(self, k: int) -> np.ndarray:
        if k == self.d:
            return np.full((self.counts[k], 0), -1, dtype=np.int64)
        faces = self.faces[k + 1]
        owners = np.repeat(np.arange(len(faces)), faces.shape[1])
        flat = faces.ravel()
        order = np.lexsort((owners, flat))
        flat, owners = flat[order], owners[order]
        counts = np.bincount(flat, minlength=self.counts[k])
        width = int(counts.max()) if len(counts) else 0
        out = np.full((self.counts[k], width), -1, dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        slot = np.arange(len(flat)) - starts[flat]
        out[flat, slot] = owners
        return out

    # queries -----------------------------------------------------------------

    @cached_property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.positions)

    @property
    def n_sites(self) -> int:
        return self.counts[0]

    @property
    def n_bonds(self) -> int:
        return self.counts[1]

    @property
    def n_plaquettes(self) -> int:
        return self.counts[2]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.counts))

    def index(self, pos: Sequence[int], axes: Sequence[int] = ()) -> int:
        """Index of the cell with the given base position and spanned axes."""
        orient = tuple(sorted(int(a) for a in axes))
        k = len(orient)
        pos_arr = np.array([[int(p) for p in pos]], dtype=np.int64)
        return int(self._find(k, pos_arr, self._orient_index[k][orient])[0])

    def site(self, *pos: int) -> int:
        return self.index(pos)

    def bond(self, pos: Sequence[int], axis: int) -> int:
        return self.index(pos, (axis,))

    def plaquette(self, pos: Sequence[int], axes: Sequence[int]) -> int:
        return self.index(pos, axes)

    def cell(self, k: int, i: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(int(v) for v in self.positions[k][i]), tuple(int(v) for v in self.axes[k][i])

    def coordinates(self, k: int) -> np.ndarray:
        """Base positions shifted by the complex offset."""
        return self.positions[k] + np.asarray(self.offset, dtype=np.int64)

    def bond_sites(self) -> np.ndarray:
        return self.faces[1]

    def cofaces_of(self, k: int, i: int) -> list[int]:
        return [int(c) for c in self.cofaces[k][i] if c >= 0]

    def vertices_of(self, k: int, i: int) -> list[int]:
        """All 0-cells in the closure of cell (k, i)."""
        cells = {i}
        for j in range(k, 0, -1):
            cells = {int(f) for c in cells for f in self.faces[j][c]}
        return sorted(cells)

    def cell_vertices(self, k: int) -> np.ndarray:
        """Array of shape (n_k, 2**k) with the corner sites of every k-cell."""
        cur = np.arange(self.counts[k])[:, None]
        for j in range(k, 0, -1):
            cur = self.faces[j][cur].reshape(len(cur), -1)
        cur = np.sort(cur, axis=1)
        keep = np.ones_like(cur, dtype=bool)
        keep[:, 1:] = cur[:, 1:] != cur[:, :-1]
        return cur[keep].reshape(len(cur), 2**k)

    def boundary_mask(self, k: int, mask: np.ndarray) -> np.ndarray:
        if k < 1:
            raise ValueError("0-chains have no boundary")
        idx = self.faces[k][np.asarray(mask, dtype=bool)].ravel()
        return (np.bincount(idx, minlength=self.counts[k - 1]) & 1).astype(bool)

    def coboundary_mask(self, k: int, mask: np.ndarray) -> np.ndarray:
        if k >= self.d:
            raise ValueError(f"{self.d}-cochains have no coboundary")
        m = np.asarray(mask, dtype=bool)
        return (m[self.faces[k + 1]].sum(axis=1) & 1).astype(bool)

    def closure(self, k: int, mask: np.ndarray) -> list[np.ndarray]:
        """Masks for every dimension of the smallest subcomplex containing the k-cells."""
        masks = [np.zeros(n, dtype=bool) for n in self.counts]
        masks[k] = np.asarray(mask, dtype=bool).copy()
        for j in range(k, 0, -1):
            masks[j - 1][self.faces[j][masks[j]].ravel()] = True
        return masks

    # duality -----------------------------------------------------------------

    @cached_property
    def dual(self) -> "DualLattice":
        return DualLattice(self)

    def __repr__(self) -> str:
        return f"CellComplex({self.lattice.to_dict()}, counts={self.counts})"


def build_complex(lattice: Lattice) -> CellComplex:
    return CellComplex(lattice)


@dataclass
class DualLattice:
    """The dual complex together with the cell bijection primal k <-> dual (d-k).

    ``to_dual[k][i]`` is the dual (d-k)-cell of primal k-cell ``i``;
    ``to_primal[j][m]`` inverts it and is -1 on the outer layer.
    ``outer[j]`` marks dual j-cells that are not dual to any primal cell
    (the boundary of the dual lattice).
    """

    primal: CellComplex
    complex: CellComplex = field(init=False)
    to_dual: list[np.ndarray] = field(init=False)
    to_primal: list[np.ndarray] = field(init=False)

    def __post_init__(self) -> None:
        lat = self.primal.lattice
        extents = tuple(n + 1 if b == FREE else n for n, b in zip(lat.extents, lat.bc))
        offset = tuple(-1 if b == FREE else 0 for b in lat.bc)
        self.complex = CellComplex(Lattice(lat.d, extents, lat.bc), offset=offset)
        d = lat.d
        self.to_dual = []
        self.to_primal = [np.full(n, -1, dtype=np.int64) for n in self.complex.counts]
        shift = np.array([1 if b == FREE else 0 for b in lat.bc], dtype=np.int64)
        n_axis = np.array(lat.extents, dtype=np.int64)
        periodic = np.array([b == PERIODIC for b in lat.bc])
        for k in range(d + 1):
            pos = self.primal.positions[k]
            axes = self.primal.axes[k]
            out = np.empty(len(pos), dtype=np.int64)
            for i in range(len(pos)):
                spanned = np.zeros(d, dtype=bool)
                spanned[axes[i]] = True
                # spanned primal axis -> dual point at x+1/2; unspanned -> dual segment from x-1/2
                y = np.where(spanned, pos[i], pos[i] - 1) + shift
                y = np.where(periodic, y % n_axis, y)
                dual_axes = tuple(int(a) for a in np.flatnonzero(~spanned))
                out[i] = self.complex.index(tuple(int(v) for v in y), dual_axes)
            self.to_dual.append(out)
            self.to_primal[d - k][out] = np.arange(len(pos))
        self.outer = [tp < 0 for tp in self.to_primal]

    def dual_mask(self, k: int, primal_mask: np.ndarray) -> np.ndarray:
        """Dual (d-k)-cells of the selected primal k-cells."""
        out = np.zeros(self.complex.counts[self.primal.d - k], dtype=bool)
        out[self.to_dual[k][np.asarray(primal_mask, dtype=bool)]] = True
        return out

    def primal_mask(self, j: int, dual_mask: np.ndarray) -> np.ndarray:
        """Primal (d-j)-cells of the selected dual j-cells; outer cells are dropped."""
        d = self.primal.d
        out = np.zeros(self.primal.counts[d - j], dtype=bool)
        idx = self.to_primal[j][np.asarray(dual_mask, dtype=bool)]
        out[idx[idx >= 0]] = True
        return out


@dataclass(frozen=True)
class Chain:
    """A mod-2 chain (or cochain) of fixed dimension as a dense bit vector."""

    dim: int
    support: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", np.asarray(self.support, dtype=bool))

    @classmethod
    def zeros(cls, dim: int, n: int) -> "Chain":
        return cls(dim, np.zeros(n, dtype=bool))

    @classmethod
    def from_indices(cls, dim: int, indices: Iterable[int], n: int) -> "Chain":
        m = np.zeros(n, dtype=bool)
        for i in indices:
            m[int(i)] ^= True
        return cls(dim, m)

    def indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.support)]

    def __len__(self) -> int:
        return len(self.support)

    def __bool__(self) -> bool:
        return bool(self.support.any())

    def weight(self) -> int:
        return int(self.support.sum())

    def __add__(self, other: "Chain") -> "Chain":
        if other.dim != self.dim or len(other) != len(self):
            raise ValueError("chains live in different groups")
        return Chain(self.dim, self.support ^ other.support)

    __xor__ = __add__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.support, other.support)

    def __hash__(self) -> int:
        return hash((self.dim, self.support.tobytes()))

    def dot(self, other: "Chain") -> int:
        return int(np.count_nonzero(self.support & other.support) & 1)

    def to_list(self) -> list[int]:
        return self.indices()

    def __repr__(self) -> str:
        return f"Chain(dim={self.dim}, cells={self.indices()})"


def _check(chain: Chain, complex: CellComplex) -> None:
    if len(chain) != complex.counts[chain.dim]:
        raise ValueError(
            f"chain of length {len(chain)} does not match {complex.counts[chain.dim]} {chain.dim}-cells"
        )


def boundary(chain: Chain, complex: CellComplex) -> Chain:
    if chain.dim < 1:
        raise ValueError("0-chains have no boundary")
    _check(chain, complex)
    return Chain(chain.dim - 1, complex.boundary_mask(chain.dim, chain.support))


def coboundary(chain: Chain, complex: CellComplex) -> Chain:
    if chain.dim >= complex.d:
        raise ValueError(f"{complex.d}-cochains have no coboundary")
    _check(chain, complex)
    return Chain(chain.dim + 1, complex.coboundary_mask(chain.dim, chain.support))
