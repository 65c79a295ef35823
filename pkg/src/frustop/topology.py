"""Z2 homology and cohomology of networks, duality maps, and exactness checks.

Networks are face-closed subcomplexes of a host :class:`CellComplex` (the
primal lattice or its dual).  All linear algebra runs over GF(2) on local
cell numberings; chains handed back to callers are full-length masks over the
host complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .disorder import BondConfig, CocycleError, frustration_of_loop, plaquette_frustration
from .gf2 import (
    ColumnSolver,
    Gf2Matrix,
    Reducer,
    bits,
    int_to_mask,
    kernel_basis,
    mask_to_int,
    parity,
    rank,
    rank_of,
)
from .lattice import CellComplex, Chain


class NotFaceClosed(ValueError):
    pass


class NoSpanningSurface(ValueError):
    """No (d-1)-chain of the dual lattice bounds the given curve unambiguously."""


# ---------------------------------------------------------------------------
# subcomplexes


@dataclass(frozen=True)
class Subcomplex:
    complex: CellComplex
    masks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        masks = tuple(np.asarray(m, dtype=bool) for m in self.masks)
        if len(masks) != self.complex.d + 1:
            raise ValueError("need one mask per dimension")
        for k, m in enumerate(masks):
            if len(m) != self.complex.counts[k]:
                raise ValueError(f"mask for dimension {k} has wrong length")
        object.__setattr__(self, "masks", masks)

    @classmethod
    def full(cls, complex: CellComplex) -> "Subcomplex":
        return cls(complex, tuple(np.ones(n, dtype=bool) for n in complex.counts))

    @classmethod
    def empty(cls, complex: CellComplex) -> "Subcomplex":
        return cls(complex, tuple(np.zeros(n, dtype=bool) for n in complex.counts))

    @classmethod
    def closure_of(cls, complex: CellComplex, k: int, mask: np.ndarray) -> "Subcomplex":
        return cls(complex, tuple(complex.closure(k, mask)))

    @classmethod
    def from_plaquettes(cls, complex: CellComplex, mask: np.ndarray, fill: bool = True) -> "Subcomplex":
        """Closure of a plaquette set; with ``fill``, cubes whose faces all lie in it are added."""
        sub = cls.closure_of(complex, 2, mask)
        return sub.filled() if fill else sub

    def filled(self) -> "Subcomplex":
        masks = [m.copy() for m in self.masks]
        for k in range(3, self.complex.d + 1):
            masks[k] |= masks[k - 1][self.complex.faces[k]].all(axis=1)
        return Subcomplex(self.complex, tuple(masks))

    def cells(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.masks[k])

    def count(self, k: int) -> int:
        return int(self.masks[k].sum())

    def is_face_closed(self) -> bool:
        for k in range(1, self.complex.d + 1):
            faces = self.complex.faces[k][self.masks[k]]
            if not self.masks[k - 1][faces].all():
                return False
        return True

    def __or__(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(self.complex, tuple(a | b for a, b in zip(self.masks, other.masks)))

    def __and__(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(self.complex, tuple(a & b for a, b in zip(self.masks, other.masks)))

    def issubset(self, other: "Subcomplex") -> bool:
        return all(not (a & ~b).any() for a, b in zip(self.masks, other.masks))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subcomplex):
            return NotImplemented
        return self.complex is other.complex and all(
            np.array_equal(a, b) for a, b in zip(self.masks, other.masks)
        )

    __hash__ = None  # type: ignore[assignment]


def _require_closed(*subs: Subcomplex) -> None:
    for s in subs:
        if not s.is_face_closed():
            raise NotFaceClosed("network is not closed under taking faces")


class RelativeChains:
    """Chain complex C(X, A): cells of X not in A, with the induced boundary."""

    def __init__(self, X: Subcomplex, A: Subcomplex | None = None):
        self.X = X
        self.A = A
        self.complex = X.complex
        d = self.complex.d
        self.cells: list[np.ndarray] = []
        self.local: list[np.ndarray] = []
        for k in range(d + 1):
            m = X.masks[k] & ~A.masks[k] if A is not None else X.masks[k]
            idx = np.flatnonzero(m)
            loc = np.full(self.complex.counts[k], -1, dtype=np.int64)
            loc[idx] = np.arange(len(idx))
            self.cells.append(idx)
            self.local.append(loc)
        self._bd: dict[int, Gf2Matrix] = {}

    def size(self, k: int) -> int:
        return len(self.cells[k]) if 0 <= k <= self.complex.d else 0

    def to_local(self, k: int, mask: np.ndarray, strict: bool = True) -> int:
        mask = np.asarray(mask, dtype=bool)
        if strict and (mask & (self.local[k] < 0)).any():
            raise ValueError(f"{k}-chain has support outside the chain group")
        return mask_to_int(mask[self.cells[k]])

    def to_global(self, k: int, v: int) -> np.ndarray:
        out = np.zeros(self.complex.counts[k], dtype=bool)
        out[self.cells[k]] = int_to_mask(v, self.size(k))
        return out

    def boundary(self, k: int) -> Gf2Matrix:
        """Matrix of the boundary C_k -> C_{k-1} (rows (k-1)-cells, columns k-cells)."""
        if k not in self._bd:
            rows = self.size(k - 1) if k >= 1 else 0
            columns = []
            if 1 <= k <= self.complex.d:
                loc = self.local[k - 1]
                for c in self.cells[k]:
                    v = 0
                    for f in self.complex.faces[k][c]:
                        p = loc[f]
                        if p >= 0:
                            v ^= 1 << int(p)
                    columns.append(v)
            else:
                columns = [0] * self.size(k)
            self._bd[k] = Gf2Matrix.from_columns(rows, columns)
        return self._bd[k]

    def homology(self, k: int) -> "Quotient":
        out = self.boundary(k) if k >= 1 else None
        incoming = self.boundary(k + 1).columns() if k < self.complex.d else []
        return Quotient(self.size(k), out, incoming)

    def cohomology(self, k: int) -> "Quotient":
        out = self.boundary(k + 1).transpose() if k < self.complex.d else None
        incoming = list(self.boundary(k).row_data) if k >= 1 else []
        return Quotient(self.size(k), out, incoming)


class Quotient:
    """Z / B with Z = ker(out) and B = span(incoming) in GF(2)^n.

    ``basis`` holds representatives of a basis of the quotient; ``coords``
    expresses any element of Z in that basis.
    """

    def __init__(self, n: int, out: Gf2Matrix | None, incoming: Sequence[int]):
        self.n = n
        kernel = kernel_basis(out) if out is not None else [1 << i for i in range(n)]
        self.dim_Z = len(kernel)
        red = Reducer()
        for v in incoming:
            red.add(v)
        self.dim_B = len(red)
        self.basis: list[int] = []
        for z in kernel:
            v, _ = red.add(z, 1 << len(self.basis))
            if v:
                self.basis.append(z)
        self._red = red
        if len(self.basis) != self.dim_Z - self.dim_B:
            raise ArithmeticError("incoming vectors do not lie in the kernel")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, z: int) -> int:
        rest, tag = self._red.reduce(z)
        if rest:
            raise ValueError("element is not a cycle")
        return tag

    def is_zero(self, z: int) -> bool:
        return self.coords(z) == 0

    def contains(self, z: int) -> bool:
        return self._red.reduce(z)[0] == 0


@dataclass
class HomologySummary:
    k: int
    dim_Z: int
    dim_B: int
    dim_H: int
    basis: list[Chain]


def _summary(rc: RelativeChains, k: int, q: Quotient) -> HomologySummary:
    basis = [Chain(k, rc.to_global(k, v)) for v in q.basis]
    return HomologySummary(k, q.dim_Z, q.dim_B, q.dim, basis)


def homology(network: Subcomplex, k: int) -> HomologySummary:
    if not 0 <= k <= network.complex.d:
        raise ValueError("dimension out of range")
    _require_closed(network)
    rc = RelativeChains(network)
    return _summary(rc, k, rc.homology(k))


def relative_homology(pair: tuple[Subcomplex, Subcomplex], k: int) -> HomologySummary:
    X, A = pair
    _require_closed(X, A)
    if not A.issubset(X):
        raise ValueError("sub-network is not contained in the network")
    rc = RelativeChains(X, A)
    return _summary(rc, k, rc.homology(k))


def cohomology(network: Subcomplex, k: int, sub: Subcomplex | None = None) -> HomologySummary:
    """H^k(network) or, with ``sub``, H^k(network, sub): cochains vanishing on ``sub``."""
    _require_closed(network)
    if sub is not None:
        _require_closed(sub)
        if not sub.issubset(network):
            raise ValueError("sub-network is not contained in the network")
    rc = RelativeChains(network, sub)
    return _summary(rc, k, rc.cohomology(k))


def loops_homologous(l1: Chain, l2: Chain, network: Subcomplex) -> bool:
    """True when l1 + l2 bounds a surface made of plaquettes of ``network``."""
    cx = network.complex
    for loop in (l1, l2):
        if loop.dim != 1:
            raise ValueError("loops are 1-chains")
        if (loop.support & ~network.masks[1]).any():
            raise ValueError("loop leaves the network")
        if cx.boundary_mask(1, loop.support).any():
            raise CocycleError("input is not a cycle")
    rc = RelativeChains(network)
    return rc.homology(1).is_zero(rc.to_local(1, l1.support ^ l2.support))


# ---------------------------------------------------------------------------
# frustration as a class on H_1


@dataclass
class FrustrationClass:
    basis: list[Chain]
    basis_values: tuple[int, ...]

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(-1 if v else 1 for v in self.basis_values)

    def is_trivial(self) -> bool:
        return not any(self.basis_values)


def frustration_class(bonds: BondConfig, nplus: Subcomplex) -> FrustrationClass:
    cx = nplus.complex
    frustrated = plaquette_frustration(bonds, cx)
    if (frustrated & nplus.masks[2]).any():
        bad = int(np.flatnonzero(frustrated & nplus.masks[2])[0])
        raise CocycleError(f"plaquette {bad} of the network is frustrated")
    h1 = homology(nplus, 1)
    values = []
    plaqs = nplus.cells(2)
    for i, loop in enumerate(h1.basis):
        phi = frustration_of_loop(bonds, loop, cx)
        if len(plaqs):
            # a homologous representative must carry the same frustration
            moved = loop.support ^ cx.boundary_mask(2, _one_hot(cx.n_plaquettes, plaqs[i % len(plaqs)]))
            if frustration_of_loop(bonds, Chain(1, moved), cx) != phi:
                raise ArithmeticError("frustration differs between homologous loops")
        values.append(1 if phi < 0 else 0)
    return FrustrationClass(h1.basis, tuple(values))


def _one_hot(n: int, i: int) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[i] = True
    return m


# ---------------------------------------------------------------------------
# duality maps


def kappa(signs: np.ndarray | BondConfig) -> Chain:
    """Multiplicative +-1 bond variables -> additive 1-cochain (1 where the sign is -1)."""
    if isinstance(signs, BondConfig):
        signs = signs.signs
    signs = np.asarray(signs)
    return Chain(1, signs < 0)


def kappa_inverse(alpha: Chain) -> np.ndarray:
    return np.where(alpha.support, -1, 1).astype(np.int8)


@dataclass
class DomainWallSet:
    """Connected walls as dual (d-1)-chains with their (d-2)-boundaries."""

    walls: list[Chain]
    boundaries: list[Chain]
    bonds: list[Chain]

    def __len__(self) -> int:
        return len(self.walls)

    def total_size(self) -> int:
        return sum(w.weight() for w in self.walls)

    def union_bonds(self, n_bonds: int) -> np.ndarray:
        out = np.zeros(n_bonds, dtype=bool)
        for b in self.bonds:
            out |= b.support
        return out

    def sorted_cells(self) -> list[list[int]]:
        return [w.indices() for w in self.walls]


def bond_components(complex: CellComplex, bond_mask: np.ndarray) -> list[np.ndarray]:
    """Group bonds that are linked through shared plaquettes (dual cells sharing a face)."""
    chosen = np.flatnonzero(bond_mask)
    if len(chosen) == 0:
        return []
    if complex.d < 2 or complex.cofaces[1].shape[1] == 0:
        return [np.array([b]) for b in chosen]
    co = complex.cofaces[1][chosen]
    rows = np.repeat(np.arange(len(chosen)), co.shape[1])
    cols = co.ravel()
    keep = cols >= 0
    rows, cols = rows[keep], cols[keep] + len(chosen)
    size = len(chosen) + complex.n_plaquettes
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    _, comp = connected_components(graph, directed=False)
    comp = comp[: len(chosen)]
    groups: dict[int, list[int]] = {}
    for b, c in zip(chosen, comp):
        groups.setdefault(int(c), []).append(int(b))
    return [np.array(g) for g in sorted(groups.values(), key=lambda g: g[0])]


def walls_from_bonds(complex: CellComplex, bond_mask: np.ndarray) -> DomainWallSet:
    dual = complex.dual
    D = dual.complex
    d = complex.d
    walls, bounds, bond_chains = [], [], []
    for comp in bond_components(complex, bond_mask):
        bm = np.zeros(complex.n_bonds, dtype=bool)
        bm[comp] = True
        wall = dual.dual_mask(1, bm)
        walls.append(Chain(d - 1, wall))
        bounds.append(Chain(d - 2, D.boundary_mask(d - 1, wall)))
        bond_chains.append(Chain(1, bm))
    return DomainWallSet(walls, bounds, bond_chains)


def _check_cocycle_on(network: Subcomplex, alpha: np.ndarray) -> None:
    cx = network.complex
    odd = cx.coboundary_mask(1, alpha) & network.masks[2]
    if odd.any():
        raise CocycleError(f"cocycle condition fails on plaquette {int(np.flatnonzero(odd)[0])}")


def vartheta(alpha: Chain, nplus: Subcomplex) -> DomainWallSet:
    """Walls dual to the bonds where a 1-cocycle on the network is 1."""
    if alpha.dim != 1:
        raise ValueError("alpha must be a 1-cochain")
    cx = nplus.complex
    if (alpha.support & ~nplus.masks[1]).any():
        raise ValueError("cochain is supported outside the network")
    _check_cocycle_on(nplus, alpha.support)
    return walls_from_bonds(cx, alpha.support)


def zeta(eta: np.ndarray, complex: CellComplex, region: Subcomplex | None = None) -> Chain:
    """Dual (d-2)-cells of the plaquettes where a 2-cocycle takes the value -1.

    ``eta`` is a boolean mask over plaquettes (True meaning eta_p = -1).
    """
    eta = np.asarray(eta, dtype=bool)
    if len(eta) != complex.n_plaquettes:
        raise ValueError("need one entry per plaquette")
    if complex.d >= 3:
        odd = complex.coboundary_mask(2, eta)
        if region is not None:
            odd &= region.masks[3]
        if odd.any():
            raise CocycleError(f"cube {int(np.flatnonzero(odd)[0])} has an odd count")
    return Chain(complex.d - 2, complex.dual.dual_mask(2, eta))


def two_cochain_phi(bonds: BondConfig, surface: Chain, complex: CellComplex) -> int:
    """Product of plaquette frustrations over a surface; equals the frustration of its boundary."""
    if surface.dim != 2:
        raise ValueError("surface must be a 2-chain")
    eta = plaquette_frustration(bonds, complex)
    value = -1 if np.count_nonzero(eta & surface.support) & 1 else 1
    edge = Chain(1, complex.boundary_mask(2, surface.support))
    if frustration_of_loop(bonds, edge, complex) != value:
        raise ArithmeticError("two-cochain disagrees with the frustration of the boundary")
    return value


def crossing_parity(loop: Chain, wall: Chain, complex: CellComplex) -> int:
    """Parity of loop bonds whose dual cell lies in the wall."""
    dual_loop = complex.dual.dual_mask(1, loop.support)
    return int(np.count_nonzero(dual_loop & wall.support) & 1)


def link_mod2(loop: Chain, gamma: Chain, complex: CellComplex) -> int:
    """Linking parity of a primal loop with a dual (d-2)-cycle.

    Found by spanning ``gamma`` with a dual (d-1)-chain and counting
    crossings.  Raises :class:`NoSpanningSurface` when no spanning chain
    exists or when the answer depends on which one is chosen.
    """
    if loop.dim != 1 or complex.boundary_mask(1, loop.support).any():
        raise CocycleError("loop must be a 1-cycle")
    d = complex.d
    D = complex.dual.complex
    if gamma.dim != d - 2 or len(gamma) != D.counts[d - 2]:
        raise ValueError("gamma must be a dual (d-2)-chain")
    rc = RelativeChains(Subcomplex.full(D))
    solver = ColumnSolver(rc.boundary(d - 1))
    sigma = solver.solve(mask_to_int(gamma.support))
    if sigma is None:
        raise NoSpanningSurface("no dual surface has this boundary")
    dual_loop = mask_to_int(complex.dual.dual_mask(1, loop.support))
    for closed in solver.kernel:
        if parity(closed & dual_loop):
            raise NoSpanningSurface("a closed dual surface crosses the loop an odd number of times")
    return parity(sigma & dual_loop)


# ---------------------------------------------------------------------------
# duality between a network and its dual region


def dual_region(network: Subcomplex) -> tuple[Subcomplex, Subcomplex]:
    """(closure of the dual cells of ``network``, its boundary part) in the dual lattice."""
    cx = network.complex
    dual = cx.dual
    D = dual.complex
    d = cx.d
    inner = [np.zeros(n, dtype=bool) for n in D.counts]
    for k in range(d + 1):
        inner[d - k] = dual.dual_mask(k, network.masks[k])
    closed = [m.copy() for m in inner]
    for j in range(d, 0, -1):
        closed[j - 1][D.faces[j][closed[j]].ravel()] = True
    rim = [c & ~i for c, i in zip(closed, inner)]
    return Subcomplex(D, tuple(closed)), Subcomplex(D, tuple(rim))


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    name: str
    dims: dict[str, int] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    witnesses: dict[str, list[int]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail) -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "dims": dict(sorted(self.dims.items())),
            "checks": [
                {"name": c.name, "passed": c.passed, **({"detail": c.detail} if c.detail else {})}
                for c in self.checks
            ],
            "witnesses": dict(sorted(self.witnesses.items())),
        }


def _map_matrix(rows: int, columns: Iterable[int]) -> Gf2Matrix:
    return Gf2Matrix.from_columns(rows, list(columns))


def verify_duality(nplus: Subcomplex) -> Report:
    """H^1(N) against H_{d-1}(N*, dN*) computed on the dual lattice, plus the wall map."""
    _require_closed(nplus)
    cx = nplus.complex
    d = cx.d
    rep = Report("duality")
    primal = RelativeChains(nplus)
    h1 = primal.cohomology(1)
    region, rim = dual_region(nplus)
    rep.add("dual region is a subcomplex pair", region.is_face_closed() and rim.is_face_closed())
    dual_rc = RelativeChains(region, rim)
    hd = dual_rc.homology(d - 1)
    rep.dims.update({"H^1(N)": h1.dim, "H_{d-1}(N*,dN*)": hd.dim})
    rep.add("dimensions agree", h1.dim == hd.dim)
    images = []
    for v in h1.basis:
        alpha = Chain(1, primal.to_global(1, v))
        walls = vartheta(alpha, nplus)
        union = np.zeros(dual_rc.complex.counts[d - 1], dtype=bool)
        for w in walls.walls:
            union |= w.support
        images.append(hd.coords(dual_rc.to_local(d - 1, union)))
    m = _map_matrix(hd.dim, images)
    rep.add("wall classes independent", rank(m) == h1.dim, rank=rank(m))
    return rep


def cohomologous_gauge(tau: Chain, network: Subcomplex) -> np.ndarray | None:
    """Site signs eps with tau_ij = eps_i eps_j on the network bonds, if they exist."""
    rc = RelativeChains(network)
    delta0 = rc.boundary(1).transpose()
    x = ColumnSolver(delta0).solve(rc.to_local(1, tau.support & network.masks[1]))
    if x is None:
        return None
    eps = np.ones(network.complex.n_sites, dtype=np.int8)
    eps[rc.to_global(0, x)] = -1
    return eps


def walls_homologous(w1: DomainWallSet | Chain, w2: DomainWallSet | Chain, network: Subcomplex) -> bool:
    """Compare two wall sets as classes in H_{d-1}(N*, dN*)."""
    cx = network.complex
    d = cx.d
    region, rim = dual_region(network)
    rc = RelativeChains(region, rim)

    def chain_of(w) -> np.ndarray:
        if isinstance(w, Chain):
            return w.support
        out = np.zeros(cx.dual.complex.counts[d - 1], dtype=bool)
        for c in w.walls:
            out |= c.support
        return out

    diff = chain_of(w1) ^ chain_of(w2)
    return rc.homology(d - 1).is_zero(rc.to_local(d - 1, diff, strict=False))


# ---------------------------------------------------------------------------
# exact sequences


def _union(nminus: Subcomplex, nplus: Subcomplex) -> Subcomplex:
    return (nminus | nplus).filled()


def _rank_exact(rep: Report, label: str, first: Gf2Matrix, second: Gf2Matrix, middle: int,
                middle_chain=None) -> None:
    """Check Im(first) = Ker(second) for maps into/out of a space of dimension ``middle``."""
    comp = second.matmul(first)
    rep.add(f"{label}: composition vanishes", comp.is_zero())
    r1, r2 = rank(first), rank(second)
    ok = rep.add(f"{label}: rank Im = dim Ker", r1 == middle - r2, rank_im=r1, dim_ker=middle - r2)
    solver = ColumnSolver(first)
    missing = [v for v in kernel_basis(second) if solver.solve(v) is None]
    rep.add(f"{label}: Ker contained in Im", not missing)
    if (missing or not ok) and middle_chain is not None and missing:
        rep.witnesses[label] = middle_chain(missing[0])


def verify_homology_exactness(nminus: Subcomplex, nplus: Subcomplex) -> Report:
    """H2(X) -> H2(X, N+) -> H1(N+) -> H1(X) with X the union of both networks."""
    X = _union(nminus, nplus)
    A = nplus
    _require_closed(X, A)
    cx = X.complex
    rep = Report("homology exact sequence")
    cX, cXA, cA = RelativeChains(X), RelativeChains(X, A), RelativeChains(A)
    h2X, h2XA, h1A, h1X = cX.homology(2), cXA.homology(2), cA.homology(1), cX.homology(1)
    rep.dims.update({"H2(X)": h2X.dim, "H2(X,A)": h2XA.dim, "H1(A)": h1A.dim, "H1(X)": h1X.dim})
    j_cols = [h2XA.coords(cXA.to_local(2, cX.to_global(2, z), strict=False)) for z in h2X.basis]
    d_cols = []
    for s in h2XA.basis:
        edge = cx.boundary_mask(2, cXA.to_global(2, s))
        d_cols.append(h1A.coords(cA.to_local(1, edge)))
    i_cols = [h1X.coords(cX.to_local(1, cA.to_global(1, z))) for z in h1A.basis]
    mj = _map_matrix(h2XA.dim, j_cols)
    md = _map_matrix(h1A.dim, d_cols)
    mi = _map_matrix(h1X.dim, i_cols)

    def rel_chain(v: int) -> list[int]:
        rep_chain = 0
        for i in bits(v):
            rep_chain ^= h2XA.basis[i]
        return [int(c) for c in np.flatnonzero(cXA.to_global(2, rep_chain))]

    def loop_chain(v: int) -> list[int]:
        rep_chain = 0
        for i in bits(v):
            rep_chain ^= h1A.basis[i]
        return [int(c) for c in np.flatnonzero(cA.to_global(1, rep_chain))]

    _rank_exact(rep, "Im j* = Ker d", mj, md, h2XA.dim, rel_chain)
    _rank_exact(rep, "Im d = Ker i*", md, mi, h1A.dim, loop_chain)
    return rep


def verify_cohomology_exactness(nminus: Subcomplex, nplus: Subcomplex) -> Report:
    """H^1(X) -> H^1(N+) -> H^2(X, N+) -> H^2(X)."""
    X = _union(nminus, nplus)
    A = nplus
    _require_closed(X, A)
    cx = X.complex
    rep = Report("cohomology exact sequence")
    cX, cXA, cA = RelativeChains(X), RelativeChains(X, A), RelativeChains(A)
    h1X, h1A, h2XA, h2X = cX.cohomology(1), cA.cohomology(1), cXA.cohomology(2), cX.cohomology(2)
    rep.dims.update({"H^1(X)": h1X.dim, "H^1(A)": h1A.dim, "H^2(X,A)": h2XA.dim, "H^2(X)": h2X.dim})
    i_cols = [h1A.coords(cA.to_local(1, cX.to_global(1, a), strict=False)) for a in h1X.basis]
    d_cols = []
    vanish = True
    for t in h1A.basis:
        eta = cx.coboundary_mask(1, cA.to_global(1, t)) & X.masks[2]
        vanish &= not (eta & A.masks[2]).any()
        d_cols.append(h2XA.coords(cXA.to_local(2, eta, strict=False)))
    rep.add("coboundary of an N+ cocycle vanishes on N+", vanish)
    j_cols = [h2X.coords(cX.to_local(2, cXA.to_global(2, e))) for e in h2XA.basis]
    mi = _map_matrix(h1A.dim, i_cols)
    md = _map_matrix(h2XA.dim, d_cols)
    mj = _map_matrix(h2X.dim, j_cols)

    def cocycle_chain(v: int) -> list[int]:
        c = 0
        for i in bits(v):
            c ^= h1A.basis[i]
        return [int(b) for b in np.flatnonzero(cA.to_global(1, c))]

    def rel_cochain(v: int) -> list[int]:
        c = 0
        for i in bits(v):
            c ^= h2XA.basis[i]
        return [int(p) for p in np.flatnonzero(cXA.to_global(2, c))]

    _rank_exact(rep, "Im i* = Ker d*", mi, md, h1A.dim, cocycle_chain)
    _rank_exact(rep, "Im d* = Ker j*", md, mj, h2XA.dim, rel_cochain)
    return rep


def verify_commutative_diagram(
    bonds: BondConfig, nminus: Subcomplex, nplus: Subcomplex, spins: np.ndarray | None = None
) -> Report:
    """Compare zeta(d* tau) with the boundary of vartheta(kappa(tau)) for every H^1(N+) basis class.

    The comparison is modulo the outer layer of the dual lattice and modulo
    boundaries of dual cells of bonds outside N+.
    """
    X = _union(nminus, nplus)
    A = nplus
    _require_closed(X, A)
    cx = X.complex
    d = cx.d
    dual = cx.dual
    D = dual.complex
    rep = Report("commutative diagram")
    cA = RelativeChains(A)
    h1A = cA.cohomology(1)
    rep.dims["H^1(N+)"] = h1A.dim

    keep = ~dual.outer[d - 2]
    # boundaries of dual cells of bonds in X but not in N+, with outer cells dropped
    fillers = np.flatnonzero(X.masks[1] & ~A.masks[1])
    filler_cols = []
    local = np.full(D.counts[d - 2], -1, dtype=np.int64)
    kept = np.flatnonzero(keep)
    local[kept] = np.arange(len(kept))
    for b in fillers:
        cell = dual.to_dual[1][b]
        v = 0
        for f in D.faces[d - 1][cell]:
            if local[f] >= 0:
                v ^= 1 << int(local[f])
        filler_cols.append(v)
    solver = ColumnSolver(Gf2Matrix.from_columns(len(kept), filler_cols))

    def compare(label: str, tau: np.ndarray) -> None:
        eta = cx.coboundary_mask(1, tau) & X.masks[2] & ~A.masks[2]
        route_a = zeta(eta, cx, X).support
        walls = vartheta(Chain(1, tau), A)
        route_b = np.zeros(D.counts[d - 2], dtype=bool)
        for g in walls.boundaries:
            route_b ^= g.support
        diff = (route_a ^ route_b)[kept]
        ok = solver.solve(mask_to_int(diff)) is not None
        rep.add(label, ok, route_a=int(route_a.sum()), route_b=int((route_b & keep).sum()))
        if not ok:
            rep.witnesses[label] = [int(c) for c in kept[np.flatnonzero(diff)]]

    rep.add("zero class gives empty routes", not zeta(np.zeros(cx.n_plaquettes, bool), cx).support.any())
    for i, t in enumerate(h1A.basis):
        compare(f"basis class {i}", cA.to_global(1, t))
    tau = bonds.negative & A.masks[1]
    if spins is not None:
        ends = cx.faces[1]
        tau = (bonds.signs * spins[ends[:, 0]] * spins[ends[:, 1]] < 0) & A.masks[1]
    compare("class of the couplings", tau)
    return rep


def _coords_in(basis: Sequence[int], vectors: Iterable[int]) -> list[int]:
    red = Reducer()
    for i, b in enumerate(basis):
        red.add(b, 1 << i)
    out = []
    for v in vectors:
        rest, tag = red.reduce(v)
        if rest:
            raise ValueError("vector outside the span")
        out.append(tag)
    return out


def oriented_boundary(complex: CellComplex, k: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Integer boundary matrix restricted to the given cells."""
    loc = np.full(complex.counts[k - 1], -1, dtype=np.int64)
    loc[rows] = np.arange(len(rows))
    out = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for j, c in enumerate(cols):
        faces = complex.faces[k][c]
        for i in range(k):
            sign = 1 if i % 2 == 0 else -1
            lo, hi = loc[faces[2 * i]], loc[faces[2 * i + 1]]
            if hi >= 0:
                out[hi, j] += sign
            if lo >= 0:
                out[lo, j] -= sign
    return out


def verify_universal_coefficients(network: Subcomplex, rational_cap: int = 3000) -> Report:
    """Build p#, i#, d#, j#, j-bar explicitly and check the three short exact sequences.

    Coefficients are Z2 throughout.  When the network is small enough the
    rational first Betti number is compared as well, which detects 2-torsion.
    """
    _require_closed(network)
    cx = network.complex
    rep = Report("universal coefficients")
    rc = RelativeChains(network)
    n1 = rc.size(1)
    d1, d2 = rc.boundary(1), rc.boundary(2)
    z1 = kernel_basis(d1)
    b1 = [v for _, (v, _) in sorted(_pivots(d2.columns()).items())]
    b0 = [v for _, (v, _) in sorted(_pivots(d1.columns()).items())]
    h1 = rc.homology(1)
    dz, db, dh, d0 = len(z1), len(b1), h1.dim, len(b0)
    rep.dims.update({"Z1": dz, "B1": db, "H1": dh, "B0": d0, "C1": n1})

    p = _map_matrix(dh, [h1.coords(z) for z in z1])
    i = _map_matrix(dz, _coords_in(z1, b1))
    p_sharp, i_sharp = p.transpose(), i.transpose()
    rep.add("p# injective", rank(p_sharp) == dh)
    rep.add("i# p# = 0", i_sharp.matmul(p_sharp).is_zero())
    rep.add("Im p# = Ker i#", rank(p_sharp) == dz - rank(i_sharp))

    j = _map_matrix(n1, z1)
    bd = _map_matrix(d0, _coords_in(b0, d1.columns()))
    bd_sharp, j_sharp = bd.transpose(), j.transpose()
    d1_solver = ColumnSolver(d1)
    lifts = [d1_solver.solve(b) for b in b0]
    rep.add("every boundary generator has a preimage", all(c is not None for c in lifts))
    jbar_cols = []
    for e in range(n1):
        chain = 1 << e
        for lam in bits(bd.transpose().row_data[e] if n1 else 0):
            chain ^= lifts[lam]
        jbar_cols.append(chain)
    jbar = _map_matrix(dz, _coords_in(z1, jbar_cols))
    rep.add("d# injective", rank(bd_sharp) == d0)
    rep.add("j# d# = 0", j_sharp.matmul(bd_sharp).is_zero())
    rep.add("Im d# = Ker j#", rank(bd_sharp) == n1 - rank(j_sharp))
    rep.add("j-bar j = 1", jbar.matmul(j) == Gf2Matrix.identity(dz))
    rep.add("j# j-bar# = 1 (j# surjective)", j_sharp.matmul(jbar.transpose()) == Gf2Matrix.identity(dz))

    hc = rc.cohomology(1)
    rep.dims["H^1"] = hc.dim
    jstar = Gf2Matrix(dz, hc.dim, tuple(
        sum(parity(z & a) << c for c, a in enumerate(hc.basis)) for z in z1
    ))
    rep.add("j* injective", rank(jstar) == hc.dim)
    rep.add("i# j* = 0", i_sharp.matmul(jstar).is_zero())
    rep.add("Im j* = Ker i#", rank(jstar) == dz - rank(i_sharp))
    rep.add("dim H^1 = dim Hom(H1, Z2)", hc.dim == dz - rank(i_sharp) == dh)

    sites, bonds_, plaqs = network.cells(0), network.cells(1), network.cells(2)
    if len(bonds_) + len(plaqs) <= rational_cap:
        r1 = np.linalg.matrix_rank(oriented_boundary(cx, 1, sites, bonds_).astype(float)) if len(bonds_) else 0
        r2 = np.linalg.matrix_rank(oriented_boundary(cx, 2, bonds_, plaqs).astype(float)) if len(plaqs) else 0
        betti = len(bonds_) - int(r1) - int(r2)
        rep.dims["b1(Q)"] = betti
        rep.add("no 2-torsion: Z2 and rational Betti numbers agree", betti == dh)
    return rep


def _pivots(columns: Iterable[int]) -> dict[int, tuple[int, int]]:
    red = Reducer()
    for c in columns:
        red.add(c)
    return red.pivots
