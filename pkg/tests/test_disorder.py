import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frustop.corpus import fig1_network, fig2_cube, fig3_cubes, fig4_cubes
from frustop.disorder import (
    BondConfig,
    CocycleError,
    bminus_mask,
    build_all_frustrated_3d,
    frustration_of_loop,
    gauge_transform,
    pair_cover,
    plaquette_frustration,
    sample_couplings,
    split_networks,
)
from frustop.lattice import Chain, Lattice, build_complex


def signs_with(cx, negative):
    s = np.ones(cx.n_bonds, dtype=np.int8)
    s[list(negative)] = -1
    return BondConfig(s)


def test_sample_extremes():
    cx = build_complex(Lattice.free(4, 4))
    assert (sample_couplings(cx, 1.0, seed=3).signs == 1).all()
    assert (sample_couplings(cx, 0.0, seed=3).signs == -1).all()


def test_sample_fraction_binomial():
    cx = build_complex(Lattice.free(40, 40, 20))
    assert cx.n_bonds >= 10**5
    b = sample_couplings(cx, 0.5, seed=11)
    frac = (b.signs == 1).mean()
    assert abs(frac - 0.5) <= 3 * 0.5 / np.sqrt(cx.n_bonds)


def test_sample_is_reproducible_and_per_bond():
    cx = build_complex(Lattice.free(5, 5))
    a = sample_couplings(cx, 0.4, seed=7, trial=2)
    b = sample_couplings(cx, 0.4, seed=7, trial=2)
    c = sample_couplings(cx, 0.4, seed=7, trial=3)
    assert np.array_equal(a.signs, b.signs)
    assert not np.array_equal(a.signs, c.signs)
    # the sign of bond b does not depend on how many bonds are drawn
    small = build_complex(Lattice.free(2, 2))
    from frustop.disorder import bond_stream
    assert np.array_equal(bond_stream(7, 2, small.n_bonds), bond_stream(7, 2, cx.n_bonds)[: small.n_bonds])


@pytest.mark.parametrize("x,j0", [(-0.1, 1.0), (1.5, 1.0), (0.5, 0.0), (0.5, -2.0)])
def test_sample_rejects_bad_parameters(x, j0):
    cx = build_complex(Lattice.free(2, 2))
    with pytest.raises(ValueError):
        sample_couplings(cx, x, j0)


def test_bondconfig_json_round_trip():
    cx = build_complex(Lattice.free(3, 3))
    b = sample_couplings(cx, 0.5, 2.5, seed=42)
    doc = b.to_dict()
    assert set(doc) >= {"j0", "x", "seed", "signs"}
    back = BondConfig.from_dict(doc)
    assert np.array_equal(back.signs, b.signs) and back.j0 == 2.5 and back.seed == 42


def test_loop_frustration_examples(square):
    b = BondConfig(np.array([1, 1, 1, -1]))
    loop = Chain(1, np.ones(4, bool))
    assert frustration_of_loop(b, loop, square) == -1
    assert frustration_of_loop(BondConfig(np.ones(4)), loop, square) == 1
    with pytest.raises(CocycleError):
        frustration_of_loop(b, Chain(1, [True, False, False, False]), square)


def test_rectangle_frustration_is_product_of_plaquettes():
    cx = build_complex(Lattice.free(2, 1))
    rect = Chain(1, cx.boundary_mask(2, np.ones(2, bool)))
    for bits in itertools.product((1, -1), repeat=cx.n_bonds):
        b = BondConfig(np.array(bits))
        eta = plaquette_frustration(b, cx)
        assert frustration_of_loop(b, rect, cx) == (-1) ** int(eta.sum())


def test_single_negative_bond_frustrates_two_plaquettes(grid3):
    bond = grid3.bond((1, 1), 0)
    eta = plaquette_frustration(signs_with(grid3, [bond]), grid3)
    assert sorted(np.flatnonzero(eta)) == sorted(grid3.cofaces_of(1, bond))
    assert not plaquette_frustration(signs_with(grid3, []), grid3).any()


@pytest.mark.parametrize("x", [0.3, 0.5, 0.7])
def test_cube_parity(x):
    cx = build_complex(Lattice.free(3, 3, 3))
    for t in range(20):
        eta = plaquette_frustration(sample_couplings(cx, x, seed=5, trial=t), cx)
        assert (eta[cx.faces[3]].sum(axis=1) % 2 == 0).all()


def test_gauge_examples(grid3):
    b = sample_couplings(grid3, 0.5, seed=1)
    assert np.array_equal(gauge_transform(b, np.ones(grid3.n_sites), grid3).signs, b.signs)
    ferro = signs_with(grid3, [])
    eps = np.ones(grid3.n_sites, dtype=np.int8)
    centre = grid3.site(1, 1)
    eps[centre] = -1
    g = gauge_transform(ferro, eps, grid3)
    incident = {b for b in range(grid3.n_bonds) if centre in grid3.faces[1][b]}
    assert set(np.flatnonzero(g.negative)) == incident
    assert not plaquette_frustration(g, grid3).any()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30), st.integers(0, 2**30))
def test_gauge_preserves_frustration(seed, eps_seed):
    cx = build_complex(Lattice.free(3, 3))
    b = sample_couplings(cx, 0.5, seed=seed)
    eps = np.random.default_rng(eps_seed).choice(np.array([-1, 1], np.int8), cx.n_sites)
    assert np.array_equal(plaquette_frustration(b, cx), plaquette_frustration(gauge_transform(b, eps, cx), cx))
    loop = Chain(1, cx.boundary_mask(2, np.ones(cx.n_plaquettes, bool)))
    assert frustration_of_loop(b, loop, cx) == frustration_of_loop(gauge_transform(b, eps, cx), loop, cx)


def test_split_partition_and_components():
    cx = build_complex(Lattice.free(5, 5))
    ferro = signs_with(cx, [])
    sp = split_networks(ferro, cx)
    assert sp.n_frustrated == 0 and len(sp.components_plus) == 1
    b = sample_couplings(cx, 0.5, seed=9)
    sp = split_networks(b, cx)
    assert not (sp.frustrated_plaquettes & sp.unfrustrated_plaquettes).any()
    assert (sp.frustrated_plaquettes | sp.unfrustrated_plaquettes).all()
    assert sum(len(c) for c in sp.components_minus) == sp.n_frustrated


def test_components_use_point_contact():
    # two plaquettes touching only at a corner belong to one component
    cx = build_complex(Lattice.free(2, 2))
    b = signs_with(cx, [cx.bond((0, 0), 0), cx.bond((1, 2), 0)])
    sp = split_networks(b, cx)
    frustrated = set(np.flatnonzero(sp.frustrated_plaquettes))
    assert frustrated == {cx.plaquette((0, 0), (0, 1)), cx.plaquette((1, 1), (0, 1))}
    assert len(sp.components_minus) == 1


def test_adjacent_pair_and_bplus():
    cx = build_complex(Lattice.free(4, 4))
    shared = cx.bond((2, 1), 1)
    sp = split_networks(signs_with(cx, [shared]), cx)
    assert len(sp.pairs) == 1 and not sp.unmatched
    p, q, e = sp.pairs[0]
    assert e == shared
    assert sp.bplus_bonds.sum() == 6 and not sp.bplus_bonds[shared]


def test_pair_members_share_exactly_one_bond():
    cx = build_complex(Lattice.free(4, 4, 2))
    b = sample_couplings(cx, 0.5, seed=4)
    sp = split_networks(b, cx)
    for p, q, e in sp.pairs:
        assert sp.frustrated_plaquettes[p] and sp.frustrated_plaquettes[q]
        assert set(cx.faces[2][p]) & set(cx.faces[2][q]) == {e}


def test_fig1_cover():
    inst = fig1_network()
    sp = split_networks(inst.bonds, inst.complex)
    assert sp.n_frustrated == 44 and len(sp.pairs) == 22 and not sp.unmatched
    # each pair is joined through one of the dotted bonds
    assert all(inst.bonds.signs[e] == -1 for _, _, e in sp.pairs)


@pytest.mark.parametrize("factory,n,pairs,unmatched", [(fig2_cube, 6, 3, 0), (fig3_cubes, 11, 5, 1), (fig4_cubes, 20, 10, 0)])
def test_cube_figures(factory, n, pairs, unmatched):
    inst = factory()
    sp = split_networks(inst.bonds, inst.complex)
    assert sp.n_frustrated == n == inst.complex.n_plaquettes
    assert len(sp.pairs) == pairs and len(sp.unmatched) == unmatched


def test_all_frustrated_unit_cube():
    af = build_all_frustrated_3d((1, 1, 1))
    assert af.bminus.sum() == 3
    assert plaquette_frustration(af.bonds, af.complex).all()


def test_all_frustrated_2x2x2():
    af = build_all_frustrated_3d((2, 2, 2))
    assert af.complex.n_plaquettes == 36
    assert plaquette_frustration(af.bonds, af.complex).all()


@pytest.mark.parametrize("extents", [(1, 2, 3), (3, 3, 3), (4, 2, 5)])
def test_each_plaquette_has_one_bminus_bond(extents):
    af = build_all_frustrated_3d(extents)
    assert (af.bminus[af.complex.faces[2]].sum(axis=1) == 1).all()
    assert (af.bminus ^ af.bplus).all()


def test_bminus_requires_3d(grid3):
    with pytest.raises(ValueError):
        bminus_mask(grid3)


def test_pair_cover_odd_count_reports_unmatched():
    cx = build_complex(Lattice.free(3, 1))
    frustrated = np.array([True, True, True])
    pairs, unmatched = pair_cover(cx, frustrated)
    assert len(pairs) == 1 and len(unmatched) == 1
