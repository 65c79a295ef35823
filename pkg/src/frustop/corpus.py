"""Built-in instances: the pair networks, cube constructions, annulus, cylinder, torus, random draws."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .disorder import BondConfig, build_all_frustrated_3d, gauge_transform, plaquette_frustration, sample_couplings
from .lattice import CellComplex, Lattice, build_complex
from .topology import Subcomplex


@dataclass
class Instance:
    name: str
    complex: CellComplex
    bonds: BondConfig
    expected: dict = field(default_factory=dict)

    @property
    def frustrated(self) -> np.ndarray:
        return plaquette_frustration(self.bonds, self.complex)

    @property
    def nminus(self) -> Subcomplex:
        return Subcomplex.from_plaquettes(self.complex, self.frustrated)

    @property
    def nplus(self) -> Subcomplex:
        return Subcomplex.from_plaquettes(self.complex, ~self.frustrated, fill=False)

    @property
    def small(self) -> bool:
        return self.complex.n_sites <= 24


def _signs(cx: CellComplex, negative: list[int]) -> BondConfig:
    signs = np.ones(cx.n_bonds, dtype=np.int8)
    signs[negative] = -1
    return BondConfig(signs)


FIG1_COLUMNS = ((0, 0, 5), (2, 0, 6), (4, 0, 6), (6, 1, 6))  # (left x, lowest y, top y)
FIG1_FLIPPED = tuple((x, 1) for x in range(1, 6))


def fig1_network() -> Instance:
    """Columns of horizontally adjacent frustrated pairs; each pair shares a negative vertical bond."""
    cx = build_complex(Lattice.free(8, 6))
    negative = []
    for x0, y0, y1 in FIG1_COLUMNS:
        negative += [cx.bond((x0 + 1, y), 1) for y in range(y0, y1)]
    return Instance("fig1-pairs", cx, _signs(cx, negative), {"frustrated": 44, "pairs": 22, "unmatched": 0})


def fig1_states(inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    """The uniform state (one broken bond per pair) and the five-spin flip of it."""
    cx = inst.complex
    base = np.ones(cx.n_sites, dtype=np.int8)
    flipped = base.copy()
    for x, y in FIG1_FLIPPED:
        flipped[cx.site(x, y)] = -1
    return base, flipped


def cube_instance(extents: tuple[int, int, int], name: str, **expected) -> Instance:
    af = build_all_frustrated_3d(extents)
    return Instance(name, af.complex, af.bonds, expected)


def fig2_cube() -> Instance:
    return cube_instance((1, 1, 1), "fig2-cube", frustrated=6, pairs=3, unmatched=0, negative=3)


def fig3_cubes() -> Instance:
    return cube_instance((2, 1, 1), "fig3-two-cubes", frustrated=11, pairs=5, unmatched=1)


def fig4_cubes() -> Instance:
    return cube_instance((2, 2, 1), "fig4-four-cubes", frustrated=20, pairs=10, unmatched=0)


def annulus(n: int = 3) -> Instance:
    """n x n free grid (n odd) whose centre plaquette is frustrated.

    Two negative bonds on the cut to the right of the centre keep every
    ring plaquette unfrustrated while the loop around the hole is frustrated.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("annulus needs an odd size of at least 3")
    cx = build_complex(Lattice.free(n, n))
    c = n // 2
    negative = [cx.bond((x, c), 1) for x in range(c + 1, n + 1)]
    return Instance(f"annulus-{n}", cx, _signs(cx, negative), {"frustrated": 1, "h1_nplus": 1, "phi": [-1]})


def cylinder(circumference: int = 4, height: int = 3, seam: int | None = None) -> Instance:
    """Periodic x free strip with a seam of negative bonds across the wrap."""
    cx = build_complex(Lattice(2, (circumference, height), ("periodic", "free")))
    x = circumference - 1 if seam is None else seam
    negative = [cx.bond((x, y), 0) for y in range(height + 1)]
    return Instance(
        f"cylinder-{circumference}x{height}",
        cx,
        _signs(cx, negative),
        {"frustrated": 0, "h1_nplus": 1, "degeneracy": 2 * circumference, "walls": 1},
    )


def torus(n: int = 4) -> Instance:
    """All plaquettes unfrustrated, one frustrated winding class."""
    cx = build_complex(Lattice(2, (n, n), ("periodic", "periodic")))
    negative = [cx.bond((n - 1, y), 0) for y in range(n)]
    return Instance(f"torus-{n}", cx, _signs(cx, negative), {"frustrated": 0, "h1_nplus": 2})


def single_pair(n: int = 4) -> Instance:
    cx = build_complex(Lattice.free(n, n))
    c = n // 2
    return Instance(f"pair-{n}", cx, _signs(cx, [cx.bond((c, c - 1), 1)]), {"frustrated": 2, "pairs": 1})


def ferromagnet(lattice: Lattice) -> Instance:
    cx = build_complex(lattice)
    return Instance("ferromagnet", cx, _signs(cx, []), {"frustrated": 0})


def random_instance(lattice: Lattice, x: float, seed: int, trial: int = 0) -> Instance:
    cx = build_complex(lattice)
    bonds = sample_couplings(cx, x, 1.0, seed, trial)
    dims = "x".join(map(str, lattice.extents))
    return Instance(f"random-{lattice.d}d-{dims}-x{x}-s{seed}-t{trial}", cx, bonds)


def gauged(inst: Instance, seed: int) -> Instance:
    """Same instance after a random gauge transformation (frustration unchanged)."""
    rng = np.random.default_rng(seed)
    eps = rng.choice(np.array([-1, 1], dtype=np.int8), inst.complex.n_sites)
    bonds = gauge_transform(inst.bonds, eps, inst.complex)
    return Instance(f"{inst.name}-gauge{seed}", inst.complex, bonds, dict(inst.expected))


RANDOM_LATTICES = (Lattice.free(4, 3), Lattice.free(2, 2, 1))
RANDOM_XS = (0.3, 0.5, 0.7)


def builtin_corpus(seed: int = 0) -> list[Instance]:
    """Deterministic list of every named instance plus random draws at d = 2 and 3."""
    out: list[Instance] = [
        fig1_network(),
        fig2_cube(),
        fig3_cubes(),
        fig4_cubes(),
        annulus(3),
        cylinder(4, 3),
        torus(4),
        single_pair(4),
        ferromagnet(Lattice.free(3, 3)),
    ]
    for lat in RANDOM_LATTICES:
        for x in RANDOM_XS:
            out.append(random_instance(lat, x, seed))
    return out


def planted_instances() -> list[Instance]:
    """Cylinders and annuli with a frustrated winding class, plain and gauge-transformed, all <= 24 sites."""
    base = [annulus(3), cylinder(3, 2), cylinder(4, 2), cylinder(4, 3), cylinder(5, 3), cylinder(6, 2), cylinder(3, 5)]
    out = []
    for inst in base:
        out.append(inst)
        out += [gauged(inst, s) for s in range(2)]
    return out


NAMED: dict[str, Callable[[], Instance]] = {
    "fig1": fig1_network,
    "fig2": fig2_cube,
    "fig3": fig3_cubes,
    "fig4": fig4_cubes,
    "annulus": annulus,
    "cylinder": cylinder,
    "torus": torus,
    "pair": single_pair,
}
