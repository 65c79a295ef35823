"""Topological structure of frustration in nearest-neighbour Ising spin glasses."""

__version__ = "0.1.0"

from .lattice import Chain, CellComplex, DualLattice, Lattice, boundary, build_complex, coboundary
from .gf2 import Gf2Matrix, kernel_basis, rank, solve
from .disorder import (
    BondConfig,
    CocycleError,
    NetworkSplit,
    build_all_frustrated_3d,
    frustration_of_loop,
    gauge_transform,
    plaquette_frustration,
    sample_couplings,
    split_networks,
)
from .topology import (
    DomainWallSet,
    FrustrationClass,
    HomologySummary,
    NoSpanningSurface,
    Subcomplex,
    frustration_class,
    homology,
    kappa,
    link_mod2,
    loops_homologous,
    relative_homology,
    two_cochain_phi,
    vartheta,
    verify_cohomology_exactness,
    verify_commutative_diagram,
    verify_homology_exactness,
    verify_universal_coefficients,
    zeta,
)
from .ground_state import (
    FrustrationDetected,
    GroundStateResult,
    brute_force_ground_states,
    domain_walls,
    energy,
    interface_check,
    local_flip_stability,
    propagate_ground_state,
    theorem31_decomposition,
    wall_split,
)
from .percolation import PercolationReport, cluster_scan, exact_prob_unfrustrated, mc_prob_unfrustrated
