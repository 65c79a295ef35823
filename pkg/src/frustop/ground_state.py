"""Exact ground states on small lattices, domain walls, and stability checks.

Energies are handled as exact integers in units of J0 and only converted to
floats at the API boundary.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .disorder import AllFrustrated, BondConfig
from .gf2 import Gf2Matrix, mask_to_int, solve
from .lattice import CellComplex, Chain
from .topology import (
    DomainWallSet,
    Report,
    Subcomplex,
    cohomologous_gauge,
    homology,
    walls_from_bonds,
)

DEFAULT_SITE_CAP = 24
_CHUNK = 1 << 18


class FrustrationDetected(RuntimeError):
    """Propagation hit a frustrated cycle; ``loop`` is that cycle as a 1-chain."""

    def __init__(self, loop: Chain):
        super().__init__(f"frustrated loop through {loop.weight()} bonds")
        self.loop = loop


class SiteCapExceeded(ValueError):
    pass


def as_spins(values, complex: CellComplex) -> np.ndarray:
    spins = np.asarray(values, dtype=np.int8)
    if spins.shape != (complex.n_sites,):
        raise ValueError(f"need {complex.n_sites} spins, got shape {spins.shape}")
    if not np.all((spins == 1) | (spins == -1)):
        raise ValueError("spins must be +1 or -1")
    return spins


def _check_sizes(spins: np.ndarray, bonds: BondConfig, complex: CellComplex) -> np.ndarray:
    if len(bonds) != complex.n_bonds:
        raise ValueError(f"{len(bonds)} couplings for {complex.n_bonds} bonds")
    return as_spins(spins, complex)


def bond_energy_signs(spins: np.ndarray, bonds: BondConfig, complex: CellComplex) -> np.ndarray:
    """J-hat_ij sigma_i sigma_j per bond; -1 marks an unsatisfied bond."""
    ends = complex.faces[1]
    return bonds.signs * spins[ends[:, 0]] * spins[ends[:, 1]]


def energy_units(spins, bonds: BondConfig, complex: CellComplex, bond_mask: np.ndarray | None = None) -> int:
    spins = _check_sizes(spins, bonds, complex)
    e = bond_energy_signs(spins, bonds, complex)
    if bond_mask is not None:
        e = e[np.asarray(bond_mask, dtype=bool)]
    return -int(e.sum(dtype=np.int64))


def energy(spins, bonds: BondConfig, complex: CellComplex, bond_mask: np.ndarray | None = None) -> float:
    """H = -sum J_ij s_i s_j over the bonds (all bonds unless ``bond_mask`` is given)."""
    return bonds.j0 * energy_units(spins, bonds, complex, bond_mask)


# ---------------------------------------------------------------------------
# propagation on frustration-free networks


def _region_sites(complex: CellComplex, bond_mask: np.ndarray) -> np.ndarray:
    return np.unique(complex.faces[1][bond_mask].ravel())


def site_components(complex: CellComplex, bond_mask: np.ndarray) -> tuple[int, np.ndarray]:
    ends = complex.faces[1][bond_mask]
    n = complex.n_sites
    graph = coo_matrix((np.ones(len(ends), dtype=np.int8), (ends[:, 0], ends[:, 1])), shape=(n, n))
    return connected_components(graph, directed=False)


def propagate_ground_state(
    bond_mask: np.ndarray, bonds: BondConfig, complex: CellComplex, root: int | None = None, root_spin: int = 1
) -> np.ndarray:
    """Fix spins along a breadth-first tree so every bond of the region is satisfied.

    Sites outside the region are set to +1.  Raises
    :class:`FrustrationDetected` with the offending cycle if some bond closes a
    frustrated loop.
    """
    bond_mask = np.asarray(bond_mask, dtype=bool)
    if len(bond_mask) != complex.n_bonds:
        raise ValueError("bond mask has the wrong length")
    if root_spin not in (1, -1):
        raise ValueError("root spin must be +1 or -1")
    sites = _region_sites(complex, bond_mask)
    if len(sites) == 0:
        raise ValueError("empty region")
    if root is None:
        root = int(sites[0])
    _, comp = site_components(complex, bond_mask)
    if root not in set(sites.tolist()) or len(np.unique(comp[sites])) != 1:
        raise ValueError("region is not connected or does not contain the root")

    ends = complex.faces[1]
    incident: dict[int, list[int]] = {}
    for b in np.flatnonzero(bond_mask):
        for s in ends[b]:
            incident.setdefault(int(s), []).append(int(b))
    spins = np.ones(complex.n_sites, dtype=np.int8)
    parent_bond = {root: -1}
    spins[root] = root_spin
    queue = deque([root])
    tree = set()
    while queue:
        i = queue.popleft()
        for b in incident[i]:
            j = int(ends[b][1] if ends[b][0] == i else ends[b][0])
            if j not in parent_bond:
                parent_bond[j] = b
                tree.add(b)
                spins[j] = bonds.signs[b] * spins[i]
                queue.append(j)
    for b in np.flatnonzero(bond_mask):
        if b in tree:
            continue
        i, j = int(ends[b][0]), int(ends[b][1])
        if bonds.signs[b] * spins[i] * spins[j] < 0:
            loop = np.zeros(complex.n_bonds, dtype=bool)
            loop[b] = True
            for s in (i, j):
                while parent_bond[s] >= 0:
                    pb = parent_bond[s]
                    loop[pb] ^= True
                    s = int(ends[pb][1] if ends[pb][0] == s else ends[pb][0])
            raise FrustrationDetected(Chain(1, loop))
    return spins


# ---------------------------------------------------------------------------
# brute force


@dataclass
class GroundStateResult:
    energy: float
    energy_units: int
    states: list[np.ndarray]
    sites: np.ndarray
    j0: float = 1.0

    @property
    def degeneracy(self) -> int:
        return len(self.states)

    @property
    def canonical(self) -> np.ndarray:
        return self.states[0]

    def to_dict(self) -> dict:
        return {
            "energy": {"numerator": self.energy_units, "denominator": 1, "unit": "J0"},
            "j0": self.j0,
            "degeneracy": self.degeneracy,
            "states": [spin_string(s[self.sites]) for s in self.states],
            "sites": [int(s) for s in self.sites],
        }


def spin_string(spins: np.ndarray) -> str:
    return "".join("1" if s < 0 else "0" for s in spins)


def brute_force_ground_states(
    complex: CellComplex,
    bonds: BondConfig,
    site_cap: int = DEFAULT_SITE_CAP,
    bond_mask: np.ndarray | None = None,
) -> GroundStateResult:
    """Every minimum-energy configuration, found by exhaustive enumeration.

    Without ``bond_mask`` all sites and bonds take part.  With a mask only the
    selected bonds enter the Hamiltonian and only their endpoints are
    enumerated; other sites are reported as +1.  States are listed with the
    lowest active site at +1 first (lexicographic), followed by their global
    flips in the same order.
    """
    if len(bonds) != complex.n_bonds:
        raise ValueError("bond config does not match the complex")
    if bond_mask is None:
        mask = np.ones(complex.n_bonds, dtype=bool)
        sites = np.arange(complex.n_sites)
    else:
        mask = np.asarray(bond_mask, dtype=bool)
        sites = _region_sites(complex, mask)
    n = len(sites)
    if n > site_cap:
        raise SiteCapExceeded(f"{n} sites exceeds the cap of {site_cap}")
    if n == 0:
        raise ValueError("no sites to enumerate")
    local = np.full(complex.n_sites, -1, dtype=np.int64)
    local[sites] = np.arange(n)
    ends = local[complex.faces[1][mask]]
    signs = bonds.signs[mask].astype(np.int64)
    base = -int(signs.sum())
    # site 0 is fixed at +1; site t>0 reads bit t-1 of k (bit set means spin -1)
    shift_i = ends[:, 0] - 1
    shift_j = ends[:, 1] - 1
    total = 1 << (n - 1)
    best = None
    winners: list[np.ndarray] = []
    for start in range(0, total, _CHUNK):
        k = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        e = np.full(len(k), base, dtype=np.int64)
        for b in range(len(signs)):
            bi = (k >> shift_i[b]) & 1 if shift_i[b] >= 0 else 0
            bj = (k >> shift_j[b]) & 1 if shift_j[b] >= 0 else 0
            e += (2 * signs[b]) * (bi ^ bj)
        m = int(e.min())
        if best is None or m < best:
            best, winners = m, [k[e == m]]
        elif m == best:
            winners.append(k[e == m])
    ks = np.concatenate(winners)
    states = []
    for kk in ks:
        s = np.ones(complex.n_sites, dtype=np.int8)
        flips = (int(kk) >> np.arange(n - 1)) & 1
        s[sites[1:]] = np.where(flips == 1, -1, 1)
        states.append(s)
    key = lambda s: tuple((s[sites] < 0).tolist())
    states.sort(key=key)
    flipped = []
    for s in states:
        f = s.copy()
        f[sites] = -f[sites]
        flipped.append(f)
    return GroundStateResult(bonds.j0 * best, best, states + flipped, sites, bonds.j0)


# ---------------------------------------------------------------------------
# domain walls


def unsatisfied_bonds(spins, bonds: BondConfig, complex: CellComplex) -> np.ndarray:
    spins = _check_sizes(spins, bonds, complex)
    return bond_energy_signs(spins, bonds, complex) < 0


def domain_walls(spins, bonds: BondConfig, complex: CellComplex, bond_mask: np.ndarray | None = None) -> DomainWallSet:
    """Dual cells of bonds with J-hat s_i s_j = -1, grouped into connected walls."""
    unsat = unsatisfied_bonds(spins, bonds, complex)
    if bond_mask is not None:
        unsat &= np.asarray(bond_mask, dtype=bool)
    return walls_from_bonds(complex, unsat)


def wall_split(spins, bonds: BondConfig, nplus: Subcomplex) -> tuple[DomainWallSet, DomainWallSet]:
    """Walls of unsatisfied bonds inside the unfrustrated network, and the rest."""
    cx = nplus.complex
    unsat = unsatisfied_bonds(spins, bonds, cx)
    inside = nplus.masks[1]
    return walls_from_bonds(cx, unsat & inside), walls_from_bonds(cx, unsat & ~inside)


@dataclass
class WallAnalysis:
    bonds: Chain
    null_homologous: bool
    crossing: tuple[int, ...]
    witness_loop: Chain | None


def analyze_wall(wall_bonds: Chain, bonds: BondConfig, nplus: Subcomplex, h1_basis=None) -> WallAnalysis:
    """Null-homology test and a frustrated loop crossing the wall an odd number of times."""
    cx = nplus.complex
    if h1_basis is None:
        h1_basis = homology(nplus, 1).basis
    null = cohomologous_gauge(wall_bonds, nplus) is not None
    crossing = tuple(int(np.count_nonzero(l.support & wall_bonds.support) & 1) for l in h1_basis)
    frustration = tuple(int(np.count_nonzero(l.support & bonds.negative) & 1) for l in h1_basis)
    witness = None
    if h1_basis:
        m = Gf2Matrix(2, len(h1_basis), (mask_to_int(np.array(crossing, bool)), mask_to_int(np.array(frustration, bool))))
        c = solve(m, 0b11)
        if c is not None:
            loop = np.zeros(cx.n_bonds, dtype=bool)
            for i, l in enumerate(h1_basis):
                if (c >> i) & 1:
                    loop ^= l.support
            witness = Chain(1, loop)
    return WallAnalysis(wall_bonds, null, crossing, witness)


@dataclass
class Decomposition:
    walls: DomainWallSet
    states: tuple[np.ndarray, np.ndarray]
    energy: float
    analyses: list[WallAnalysis]
    all_wall_sets: list[list[int]] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.walls)


def theorem31_decomposition(
    nplus: Subcomplex, bonds: BondConfig, site_cap: int = DEFAULT_SITE_CAP
) -> Decomposition:
    """Ground states of an unfrustrated network as walls plus propagation.

    The walls come from an exact ground state.  After deleting their bonds
    the remaining network is frustration free, and propagation from the
    lowest site rebuilds the state.  Among ground states with different wall
    sets the lexicographically least bond set is reported.
    """
    cx = nplus.complex
    region = nplus.masks[1]
    sites = _region_sites(cx, region)
    _, comp = site_components(cx, region)
    if len(sites) == 0 or len(np.unique(comp[sites])) != 1:
        raise ValueError("network is empty or disconnected")
    gs = brute_force_ground_states(cx, bonds, site_cap, bond_mask=region)
    sets: dict[tuple[int, ...], np.ndarray] = {}
    for s in gs.states:
        key = tuple(np.flatnonzero(unsatisfied_bonds(s, bonds, cx) & region).tolist())
        sets.setdefault(key, s)
    chosen = min(sets)
    state = sets[chosen]
    wall_mask = np.zeros(cx.n_bonds, dtype=bool)
    wall_mask[list(chosen)] = True
    root = int(sites[0])
    rebuilt = propagate_ground_state(region & ~wall_mask, bonds, cx, root, int(state[root]))
    if not np.array_equal(rebuilt[sites], state[sites]):
        raise ArithmeticError("propagation did not reproduce the ground state")
    flipped = rebuilt.copy()
    flipped[sites] = -flipped[sites]
    walls = walls_from_bonds(cx, wall_mask)
    basis = homology(nplus, 1).basis
    analyses = [analyze_wall(w, bonds, nplus, basis) for w in walls.bonds]
    return Decomposition(walls, (rebuilt, flipped), gs.energy, analyses, [list(k) for k in sorted(sets)])


def interface_check(spins, bonds: BondConfig, complex: CellComplex, nplus: Subcomplex | None = None) -> Report:
    """Unsatisfied bonds XOR negative bonds equals the bonds joining opposite spins."""
    spins = _check_sizes(spins, bonds, complex)
    region = nplus.masks[1] if nplus is not None else np.ones(complex.n_bonds, dtype=bool)
    dual = complex.dual
    ends = complex.faces[1]
    s0 = unsatisfied_bonds(spins, bonds, complex) & region
    sneg = bonds.negative & region
    interface = (spins[ends[:, 0]] != spins[ends[:, 1]]) & region
    rep = Report("interface identity")
    lhs = dual.dual_mask(1, s0 ^ sneg)
    rhs = dual.dual_mask(1, interface)
    rep.dims.update({"S0": int(s0.sum()), "S-": int(sneg.sum()), "interface": int(interface.sum())})
    if not rep.add("symmetric difference equals interface", np.array_equal(lhs, rhs)):
        rep.witnesses["mismatch"] = [int(c) for c in np.flatnonzero(lhs ^ rhs)]
    return rep


# ---------------------------------------------------------------------------
# stability of the all-frustrated construction


def flip_delta_units(spins, bonds: BondConfig, complex: CellComplex, region) -> int:
    spins = _check_sizes(spins, bonds, complex)
    inside = np.zeros(complex.n_sites, dtype=bool)
    inside[np.asarray(list(region), dtype=np.int64)] = True
    ends = complex.faces[1]
    cut = inside[ends[:, 0]] != inside[ends[:, 1]]
    return 2 * int(bond_energy_signs(spins, bonds, complex)[cut].sum(dtype=np.int64))


def local_flip_stability(spins, bonds: BondConfig, complex: CellComplex, region) -> float:
    """Energy change from reversing every spin in ``region``."""
    return bonds.j0 * flip_delta_units(spins, bonds, complex, region)


def site_neighbors(complex: CellComplex) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(complex.n_sites)]
    for i, j in complex.faces[1]:
        out[int(i)].append(int(j))
        out[int(j)].append(int(i))
    return out


def connected_regions(complex: CellComplex, allowed, max_size: int) -> Iterator[tuple[int, ...]]:
    """Each connected site set of size <= max_size inside ``allowed``, exactly once."""
    allowed = set(int(a) for a in allowed)
    nbrs = site_neighbors(complex)

    def extend(sub: list[int], ext: set[int], v: int, hood: set[int]) -> Iterator[tuple[int, ...]]:
        yield tuple(sorted(sub))
        if len(sub) == max_size:
            return
        ext = set(ext)
        while ext:
            w = min(ext)
            ext.remove(w)
            new = {u for u in nbrs[w] if u > v and u in allowed and u not in hood}
            yield from extend(sub + [w], ext | new, v, hood | new)

    for v in sorted(allowed):
        start = {u for u in nbrs[v] if u > v and u in allowed}
        yield from extend([v], start, v, start | {v})


def interior_sites(complex: CellComplex) -> np.ndarray:
    lat = complex.lattice
    pos = complex.coordinates(0)
    keep = np.ones(complex.n_sites, dtype=bool)
    for a in range(lat.d):
        if lat.bc[a] == "free":
            keep &= (pos[:, a] > 0) & (pos[:, a] < lat.extents[a])
    return np.flatnonzero(keep)


def cube_minimal_state(af: AllFrustrated) -> np.ndarray:
    """Satisfy every B+ bond by propagation, then confirm 3 unsatisfied bonds per cube."""
    cx = af.complex
    spins = propagate_ground_state(af.bplus, af.bonds, cx, 0, 1)
    unsat = unsatisfied_bonds(spins, af.bonds, cx)
    for faces in cx.faces[3]:
        edges = np.unique(cx.faces[2][faces].ravel())
        if int(unsat[edges].sum()) != 3:
            raise ArithmeticError("state is not minimal on every cube")
    return spins
