"""Probabilities that plaquette sets are unfrustrated, and cluster scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clusters import cluster_sizes, point_clusters
from .disorder import plaquette_frustration, sample_couplings
from .gf2 import Gf2Matrix, kernel_basis, rank
from .lattice import CellComplex, Lattice, build_complex

BOND_CAP = 30
MODES = ("unfrustrated-plaquettes", "negative-bonds")
_MC_STREAM = 0x6D63  # second key word for the Monte-Carlo stream


def _fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        f = x
    elif isinstance(x, int):
        f = Fraction(x)
    else:
        f = Fraction(str(x))
    if not 0 <= f <= 1:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return f


def _incidence(complex: CellComplex, plaquettes: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Bonds in the closure of the set, and each plaquette's bonds as a local bit row."""
    plaquettes = np.asarray(plaquettes, dtype=bool)
    if len(plaquettes) != complex.n_plaquettes:
        raise ValueError("need one flag per plaquette")
    edges = np.unique(complex.faces[2][plaquettes].ravel())
    local = {int(b): i for i, b in enumerate(edges)}
    rows = [sum(1 << local[int(b)] for b in complex.faces[2][p]) for p in np.flatnonzero(plaquettes)]
    return edges, rows


def negative_weight_counts(complex: CellComplex, plaquettes: np.ndarray) -> list[int]:
    """counts[k] = number of sign patterns with k negative bonds leaving every plaquette unfrustrated."""
    edges, rows = _incidence(complex, plaquettes)
    m = len(edges)
    if m > BOND_CAP:
        raise ValueError(f"{m} bonds exceeds the cap of {BOND_CAP}")
    h = Gf2Matrix(len(rows), m, tuple(rows))
    words = np.zeros(1, dtype=np.uint64)
    for g in kernel_basis(h):
        words = np.concatenate([words, words ^ np.uint64(g)])
    weights = np.bitwise_count(words)
    return np.bincount(weights, minlength=m + 1).tolist()


def exact_prob_unfrustrated(complex: CellComplex, plaquettes: np.ndarray, x) -> Fraction:
    """Exact probability that no plaquette of the set is frustrated.

    Sums x^(m-k) (1-x)^k over the sign patterns with an even number of
    negative bonds on every plaquette.  Floats are read through their
    decimal representation, so 0.3 means 3/10.
    """
    xf = _fraction(x)
    counts = negative_weight_counts(complex, plaquettes)
    m = len(counts) - 1
    return sum((c * xf ** (m - k) * (1 - xf) ** k for k, c in enumerate(counts) if c), Fraction(0))


def lower_bound(x, n: int) -> Fraction:
    xf = _fraction(x)
    return (2 * xf * (1 - xf)) ** n


@dataclass
class PercolationReport:
    x: float
    trials: int
    estimate: float
    stderr: float
    bound: float | None = None
    cluster_histogram: dict[int, int] = field(default_factory=dict)
    largest_fraction: float | None = None
    largest_stderr: float | None = None
    mode: str = "probability"
    size: tuple[int, ...] | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "x": self.x,
            "size": list(self.size) if self.size else None,
            "trials": self.trials,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "bound": self.bound,
            "largest_fraction": self.largest_fraction,
            "largest_stderr": self.largest_stderr,
            "cluster_histogram": {str(k): v for k, v in sorted(self.cluster_histogram.items())},
            "notes": list(self.notes),
        }


def _binomial(hits: int, trials: int) -> tuple[float, float]:
    p = int(hits) / trials
    return p, math.sqrt(p * (1 - p) / trials)


def mc_prob_unfrustrated(
    complex: CellComplex, plaquettes: np.ndarray, x: float, trials: int, seed: int = 0, batch: int = 1 << 16
) -> PercolationReport:
    """Monte-Carlo estimate of the probability that the set is unfrustrated.

    Trial ``t`` reads uniforms ``t*m .. t*m+m-1`` of one counter-based stream
    keyed by ``seed``; ``batch`` only changes memory use, not the result.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    xf = float(_fraction(x))
    edges, rows = _incidence(complex, plaquettes)
    m = len(edges)
    n = len(rows)
    inc = np.zeros((m, n), dtype=np.int64)
    for j, r in enumerate(rows):
        for i in range(m):
            if (r >> i) & 1:
                inc[i, j] = 1
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, _MC_STREAM], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    hits = 0
    done = 0
    while done < trials:
        k = min(batch, trials - done)
        neg = (gen.random((k, m)) >= xf).astype(np.int64)
        hits += int(((neg @ inc) % 2 == 0).all(axis=1).sum())
        done += k
    p, se = _binomial(hits, trials)
    return PercolationReport(xf, trials, p, se, float(lower_bound(x, n)), size=None)


def strip(n: int) -> tuple[CellComplex, np.ndarray]:
    """A 1 x n row of plaquettes on a free 2-d lattice."""
    if n < 1:
        raise ValueError("strip length must be positive")
    cx = build_complex(Lattice.free(n, 1))
    return cx, np.ones(cx.n_plaquettes, dtype=bool)


@dataclass
class DecompositionCheck:
    order: list[int]
    shared: list[int]
    satisfies_hypothesis: bool
    rank: int
    n: int

    @property
    def half_power_exact(self) -> bool:
        """At x = 1/2 the probability is 2^-rank, which is 2^-n exactly when rank = n."""
        return self.rank == self.n


def check_decomposition(complex: CellComplex, plaquettes: np.ndarray) -> DecompositionCheck:
    """Add plaquettes one at a time so each shares at most two bonds with the earlier ones.

    Greedy: at each step take the lowest-index plaquette, among those
    touching the current set at a point, that shares the fewest bonds.
    """
    chosen = [int(p) for p in np.flatnonzero(plaquettes)]
    if not chosen:
        return DecompositionCheck([], [], True, 0, 0)
    corners = complex.cell_vertices(2)
    faces = complex.faces[2]
    order, shared = [chosen[0]], [0]
    bonds_in = set(faces[chosen[0]].tolist())
    sites_in = set(corners[chosen[0]].tolist())
    rest = chosen[1:]
    while rest:
        def cost(p: int) -> tuple[int, int, int]:
            touching = 0 if sites_in & set(corners[p].tolist()) else 1
            return touching, len(bonds_in & set(faces[p].tolist())), p
        p = min(rest, key=cost)
        rest.remove(p)
        shared.append(len(bonds_in & set(faces[p].tolist())))
        order.append(p)
        bonds_in |= set(faces[p].tolist())
        sites_in |= set(corners[p].tolist())
    _, rows = _incidence(complex, plaquettes)
    m = len(np.unique(faces[np.asarray(plaquettes, bool)].ravel()))
    r = rank(Gf2Matrix(len(rows), m, tuple(rows)))
    return DecompositionCheck(order, shared, max(shared) <= 2, r, len(chosen))


def _spans(complex: CellComplex, k: int, cells: np.ndarray, axis: int) -> bool:
    """True when the cells reach every layer of sites along ``axis``."""
    coords = complex.coordinates(0)[:, axis]
    verts = complex.cell_vertices(k)[cells].ravel()
    layers = np.unique(coords[verts])
    lo, hi = coords.min(), coords.max()
    return len(layers) == hi - lo + 1


def cluster_scan(
    lattice: Lattice, x: float, trials: int, seed: int = 0, mode: str = "unfrustrated-plaquettes"
) -> PercolationReport:
    """Cluster statistics of the unfrustrated plaquettes or of the negative bonds.

    Plaquettes are joined when they share a site, and so are bonds.  The
    ``estimate`` field is the fraction of trials whose largest cluster
    reaches every layer along the first axis.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if trials < 1:
        raise ValueError("need at least one trial")
    cx = build_complex(lattice)
    k = 2 if mode == MODES[0] else 1
    total = cx.counts[k]
    hist: dict[int, int] = {}
    fractions = []
    spanning = 0
    for t in range(trials):
        bonds = sample_couplings(cx, x, 1.0, seed, t)
        mask = ~plaquette_frustration(bonds, cx) if k == 2 else bonds.negative
        labels = point_clusters(cx, k, mask)
        sizes = cluster_sizes(labels)
        for s, c in zip(*np.unique(sizes, return_counts=True)):
            hist[int(s)] = hist.get(int(s), 0) + int(c)
        if len(sizes):
            big = int(np.argmax(sizes))
            fractions.append(sizes[big] / total)
            spanning += int(_spans(cx, k, np.flatnonzero(labels == big), 0))
        else:
            fractions.append(0.0)
    p, se = _binomial(spanning, trials)
    f = np.asarray(fractions)
    fse = float(f.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    rep = PercolationReport(
        float(x), trials, p, se, None, hist, float(f.mean()), fse, mode, tuple(lattice.extents)
    )
    if k == 2 and float(x) in (0.0, 1.0):
        rep.notes.append("uniform signs leave every plaquette unfrustrated")
    return rep
