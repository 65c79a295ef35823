"""Coupling signs, frustration, and the split into frustrated/unfrustrated networks."""

from __future__ import annotations

import base64
from dataclasses import dataclass, field
from typing import NamedTuple

import networkx as nx
import numpy as np

from .clusters import group, point_clusters
from .lattice import CellComplex, Chain, Lattice, build_complex


class CocycleError(ValueError):
    """Input violates a required cocycle or cycle condition."""


@dataclass
class BondConfig:
    """Signs of J_ij (+1/-1) on every bond with common magnitude ``j0``."""

    signs: np.ndarray
    j0: float = 1.0
    x: float | None = None
    seed: int | None = None
    trial: int = 0

    def __post_init__(self) -> None:
        self.signs = np.asarray(self.signs, dtype=np.int8)
        if not np.all((self.signs == 1) | (self.signs == -1)):
            raise ValueError("signs must be +1 or -1")
        if not self.j0 > 0:
            raise ValueError("j0 must be positive")

    @property
    def negative(self) -> np.ndarray:
        return self.signs < 0

    @property
    def couplings(self) -> np.ndarray:
        return self.signs * self.j0

    def __len__(self) -> int:
        return len(self.signs)

    def with_signs(self, signs: np.ndarray) -> "BondConfig":
        return BondConfig(signs, self.j0, self.x, self.seed, self.trial)

    def to_dict(self) -> dict:
        packed = np.packbits(self.negative, bitorder="little").tobytes()
        return {
            "j0": self.j0,
            "x": self.x,
            "seed": self.seed,
            "trial": self.trial,
            "n_bonds": len(self.signs),
            "signs": base64.b64encode(packed).decode("ascii"),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BondConfig":
        n = int(doc["n_bonds"])
        raw = np.frombuffer(base64.b64decode(doc["signs"]), dtype=np.uint8)
        neg = np.unpackbits(raw, bitorder="little")[:n].astype(bool)
        if len(neg) != n:
            raise ValueError("sign bit vector shorter than n_bonds")
        signs = np.where(neg, -1, 1).astype(np.int8)
        return cls(signs, float(doc.get("j0", 1.0)), doc.get("x"), doc.get("seed"), int(doc.get("trial", 0)))


def _check_bonds(bonds: BondConfig, complex: CellComplex) -> None:
    if len(bonds) != complex.n_bonds:
        raise ValueError(f"{len(bonds)} signs for {complex.n_bonds} bonds")


def bond_stream(seed: int, trial: int, n: int) -> np.ndarray:
    """Uniforms in [0, 1); value ``b`` depends only on (seed, trial, b)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).random(n)


def sample_couplings(
    complex: CellComplex, x: float, j0: float = 1.0, seed: int = 0, trial: int = 0
) -> BondConfig:
    """Each bond is +j0 with probability ``x`` and -j0 otherwise."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if not j0 > 0:
        raise ValueError("j0 must be positive")
    u = bond_stream(int(seed), int(trial), complex.n_bonds)
    signs = np.where(u < x, 1, -1).astype(np.int8)
    return BondConfig(signs, float(j0), float(x), int(seed), int(trial))


def frustration_of_loop(bonds: BondConfig, loop: Chain, complex: CellComplex) -> int:
    """Product of coupling signs around a cycle: +1 or -1."""
    if loop.dim != 1:
        raise ValueError("a loop is a 1-chain")
    _check_bonds(bonds, complex)
    if complex.boundary_mask(1, loop.support).any():
        raise CocycleError("chain is not a cycle")
    return -1 if np.count_nonzero(bonds.negative & loop.support) & 1 else 1


def plaquette_frustration(bonds: BondConfig, complex: CellComplex) -> np.ndarray:
    """Boolean mask over plaquettes, True where the plaquette is frustrated."""
    _check_bonds(bonds, complex)
    return (bonds.negative[complex.faces[2]].sum(axis=1) & 1).astype(bool)


def gauge_transform(bonds: BondConfig, eps: np.ndarray, complex: CellComplex) -> BondConfig:
    eps = np.asarray(eps, dtype=np.int8)
    if len(eps) != complex.n_sites:
        raise ValueError("need one gauge sign per site")
    ends = complex.faces[1]
    return bonds.with_signs(bonds.signs * eps[ends[:, 0]] * eps[ends[:, 1]])


@dataclass
class NetworkSplit:
    frustrated_plaquettes: np.ndarray
    unfrustrated_plaquettes: np.ndarray
    components_minus: list[np.ndarray]
    components_plus: list[np.ndarray]
    pairs: list[tuple[int, int, int]] = field(default_factory=list)
    unmatched: list[int] = field(default_factory=list)
    bplus_bonds: np.ndarray | None = None

    @property
    def n_frustrated(self) -> int:
        return int(self.frustrated_plaquettes.sum())


def shared_bond(complex: CellComplex, p: int, q: int) -> int | None:
    common = set(complex.faces[2][p].tolist()) & set(complex.faces[2][q].tolist())
    return common.pop() if len(common) == 1 else None


def pair_cover(
    complex: CellComplex, frustrated: np.ndarray, bonds: BondConfig | None = None
) -> tuple[list[tuple[int, int, int]], list[int]]:
    """Match frustrated plaquettes into pairs sharing one bond.

    Maximum-cardinality matching; among those, pairs whose common bond is
    negative are preferred.  Returns sorted (p, q, common bond) triples and
    the unmatched plaquettes.
    """
    nodes = [int(p) for p in np.flatnonzero(frustrated)]
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    for b in range(complex.n_bonds):
        owners = [int(c) for c in complex.cofaces[1][b] if c >= 0 and frustrated[c]]
        for i, p in enumerate(owners):
            for q in owners[i + 1 :]:
                weight = 2 if bonds is not None and bonds.signs[b] < 0 else 1
                graph.add_edge(p, q, weight=weight, bond=b)
    matching = nx.max_weight_matching(graph, maxcardinality=True)
    pairs = sorted((min(p, q), max(p, q), graph.edges[p, q]["bond"]) for p, q in matching)
    matched = {p for pr in pairs for p in pr[:2]}
    return pairs, [p for p in nodes if p not in matched]


def split_networks(bonds: BondConfig, complex: CellComplex, with_pairs: bool = True) -> NetworkSplit:
    frustrated = plaquette_frustration(bonds, complex)
    unfrustrated = ~frustrated
    comp_minus = group(point_clusters(complex, 2, frustrated))
    comp_plus = group(point_clusters(complex, 2, unfrustrated))
    split = NetworkSplit(frustrated, unfrustrated, comp_minus, comp_plus)
    if with_pairs:
        split.pairs, split.unmatched = pair_cover(complex, frustrated, bonds)
        in_minus = complex.closure(2, frustrated)[1]
        common = np.zeros(complex.n_bonds, dtype=bool)
        common[[b for _, _, b in split.pairs]] = True
        split.bplus_bonds = in_minus & ~common
    return split


class AllFrustrated(NamedTuple):
    complex: CellComplex
    bonds: BondConfig
    bminus: np.ndarray
    bplus: np.ndarray


def bminus_mask(complex: CellComplex) -> np.ndarray:
    """Bonds of the staggered pattern that frustrates every plaquette of Z^3.

    x-bonds based at (even y, even z); y-bonds at (odd x, odd z);
    z-bonds at (even x, odd y).
    """
    if complex.d != 3:
        raise ValueError("the construction lives on a 3-d lattice")
    pos = complex.coordinates(1)
    axis = complex.axes[1][:, 0]
    x, y, z = pos[:, 0] % 2, pos[:, 1] % 2, pos[:, 2] % 2
    return (
        ((axis == 0) & (y == 0) & (z == 0))
        | ((axis == 1) & (x == 1) & (z == 1))
        | ((axis == 2) & (x == 0) & (y == 1))
    )


def build_all_frustrated_3d(extents, j0: float = 1.0) -> AllFrustrated:
    complex = build_complex(Lattice(3, tuple(extents)))
    bminus = bminus_mask(complex)
    bonds = BondConfig(np.where(bminus, -1, 1).astype(np.int8), j0)
    return AllFrustrated(complex, bonds, bminus, ~bminus)
