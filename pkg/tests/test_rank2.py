from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from breuilkit.breuil import Morphism, is_morphism, validate
from breuilkit.errors import DomainError
from breuilkit.rank1 import Rank1Module, all_rank1, character, hom_scalars
from breuilkit.rank2 import (Rank2Ext, annihilator_bound, classify_pairs, classify_pairs_brute, ext_basis,
                             fixed_index, generic_fibre_iso, hom_rank2, is_split, kernel_has_free_part, lattice,
                             lattice_index, make_ext_eprime, normal_form_h, solve_transport, split_witness,
                             transport_eta, transport_image)
from breuilkit.upoly import TameTower, TruncPoly

from oracles import ExtSystem, generic_iso_exists, hom_space

TW3 = TameTower.eprime(3)


def random_poly(tower, rng, top=None, field_values=None):
    values = range(tower.k.q) if field_values is None else field_values
    top = tower.N if top is None else top
    return tower.poly({i: rng.choice(values) for i in range(top)})


# -- transport ---------------------------------------------------------------------------------

def test_transport_examples():
    tw = TW3
    assert solve_transport(tw.zero(), 2, 6, 1).is_zero()
    T0 = tw.monomial(4)
    H = transport_image(T0, 2, 6, 1)
    assert H == tw.monomial(10) - tw.monomial(14)
    T = solve_transport(H, 2, 6, 1)
    assert transport_image(T, 2, 6, 1) == H
    outside = next(x for x in tw.k.elements() if x not in tw.k.image_x_minus_cxl(1))
    assert fixed_index(3, 2, 6) == 8
    assert solve_transport(tw.monomial(8, outside), 2, 6, 1) is None


@given(st.integers(0, 4), st.integers(0, 4), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_transport_round_trip(rp, sp, ratio, seed):
    tw = TW3
    rng = random.Random(seed)
    r, s = 2 * rp, 2 * sp
    T0 = random_poly(tw, rng)
    H = transport_image(T0, r, s, ratio)
    T = solve_transport(H, r, s, ratio)
    assert T is not None and transport_image(T, r, s, ratio) == H


@pytest.mark.parametrize("r,s", [(6, 2), (2, 2), (8, 4), (0, 2), (4, 4), (2, 4)])
def test_uniqueness_below_s(r, s):
    """A solvable H of degree below s vanishes: exhaustive over F_9 coefficients."""
    tw = TW3
    for ratio in (1, 2):
        for coeffs in itertools.product(range(tw.k.q), repeat=s):
            H = tw.poly(list(coeffs))
            if solve_transport(H, r, s, ratio) is not None:
                assert H.is_zero()


@given(st.integers(0, 4), st.integers(1, 4), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_normal_form_round_trip(rp, sp, ratio, seed):
    tw = TW3
    rng = random.Random(seed)
    r, s = 2 * rp, 2 * sp
    H = random_poly(tw, rng)
    H_prime, eta_coeff, T = normal_form_h(H, r, s, ratio)
    assert transport_image(T, r, s, ratio) == H_prime
    rest = H - H_prime
    i0 = fixed_index(tw.l, r, s)
    if eta_coeff:
        eta = transport_eta(tw, ratio)
        rest = rest - tw.monomial(i0, tw.k.mul(eta_coeff, eta))
    assert rest.is_zero() or rest.degree() < s
    # H - (low part) - eta term is solvable
    assert solve_transport(H - (H - H_prime), r, s, ratio) is not None


def test_eta_prefers_kL():
    tw = TW3
    assert transport_eta(tw, 1) == 1
    # x + x^3 maps F_3 onto itself, so the cokernel has no representative in F_3
    eta = transport_eta(tw, 2)
    assert eta not in tw.k.image_x_minus_cxl(2) and not tw.in_kL(eta)


def test_normal_form_of_low_degree_input():
    tw = TW3
    H = tw.poly({0: 1, 3: tw.k.g0})
    H_prime, eta_coeff, _ = normal_form_h(H, 2, 6, 1)
    assert eta_coeff == 0 and H_prime.is_zero()


def test_transport_rejects_bad_arguments():
    with pytest.raises(DomainError):
        solve_transport(TW3.zero(), 9, 2, 1)
    with pytest.raises(DomainError):
        solve_transport(TW3.zero(), 2, 2, 0)


# -- extension classification ---------------------------------------------------------------------

def test_ext_basis_examples():
    tw = TW3
    for a, b in ((1, 2), (2, 1)):
        basis = ext_basis(Rank1Module(tw, 6, b, 0), Rank1Module(tw, 2, a, 0))
        assert basis.degrees == (0,) and basis.eta_slot is None and basis.dimension == 1
    for c, d in itertools.product((0, 1), repeat=2):
        basis = ext_basis(Rank1Module(tw, 2, 1, d), Rank1Module(tw, 6, 2, c))
        n = ((tw.l + 1) * (c - d) + tw.l * 1 - 3) % 8
        assert basis.degrees == ((n,) if n < 2 else ())


@pytest.mark.parametrize("tower", [TW3, TameTower(3, 2, pi_unit=1), TameTower(5, 4, pi_unit=1)], ids=repr)
def test_ext_dimension_bounded(tower):
    for sub, quot in itertools.product(list(all_rank1(tower)), repeat=2):
        basis = ext_basis(sub, quot)
        assert basis.dimension <= tower.f_L + (1 if hom_scalars(quot, sub) else 0)


@pytest.mark.parametrize("tower", [TameTower(3, 2), TameTower(3, 2, f_rel=2), TameTower(5, 4)], ids=repr)
def test_ext_basis_matches_cocycle_oracle(tower):
    rng = random.Random(11)
    mods = list(all_rank1(tower))
    pairs = list(itertools.product(mods, repeat=2))
    for sub, quot in rng.sample(pairs, min(25, len(pairs))):
        basis = ext_basis(sub, quot)
        system = ExtSystem(sub, quot)
        assert basis.dimension == system.dimension()
        units = [basis.parameter(tower, [int(i == j) for j in range(basis.dimension)])
                 for i in range(basis.dimension)]
        assert system.classes_spanned(units) == basis.dimension


def test_extension_modules_validate_on_small_tower():
    tower = TameTower(3, 2, f_rel=2)
    for sub, quot in itertools.product(list(all_rank1(tower))[:6], repeat=2):
        basis = ext_basis(sub, quot)
        for coords in itertools.product(range(tower.l), repeat=basis.dimension):
            N = Rank2Ext(quot, sub, basis.parameter(tower, coords))
            assert N.is_valid() and N.is_exact()


# -- eprime normal forms ----------------------------------------------------------------------

def test_make_ext_eprime_examples():
    for a, b in ((1, 2), (2, 1), (1, 1)):
        N = make_ext_eprime(TW3, 2, a, 0, 6, b, 1 if a == b else 0)
        assert N is not None and N.is_valid()
    N = make_ext_eprime(TW3, 2, 1, 0, 6, 2, 0)
    assert N.n == 0 and repr(N) == "M(2,1,0;6,2,0;0,1)"
    assert make_ext_eprime(TW3, 2, 1, 0, 0, 2, 0) is None
    assert make_ext_eprime(TW3, 0, 1, 0, 4, 2, 1).n == 2
    with pytest.raises(DomainError):
        make_ext_eprime(TW3, 2, 1, 0, 6, 1, 0)


def test_split_criterion_and_witness():
    tw = TW3
    for a, b in ((1, 2), (2, 1)):
        split = make_ext_eprime(tw, 6, a, 0, 2, b, 0)
        assert is_split(split)
        phi = split_witness(split)
        assert phi is not None and is_morphism(phi, Rank1Module(tw, 0, a, 0).descent, split.descent)
        nonsplit = make_ext_eprime(tw, 2, a, 0, 6, b, 0)
        assert not is_split(nonsplit) and split_witness(nonsplit) is None


def test_split_matches_morphism_search():
    """Split iff some map from M(0, a, c) is nonzero modulo u on the quotient."""
    tw = TW3
    for rp, sp in itertools.product(range(5), range(1, 5)):
        for c, d in itertools.product((0, 1), repeat=2):
            N = make_ext_eprime(tw, 2 * rp, 1, c, 2 * sp, 2, d)
            if N is None:
                continue
            source = Rank1Module(tw, 0, 1, c)
            maps = hom_space(source.module, source.descent, N.module, N.descent)
            lifts = any(not P[1][0].is_zero() and P[1][0].valuation() == 3 * rp for P in maps)
            assert is_split(N) == lifts, N


# -- rank-2 maps and lattices ---------------------------------------------------------------------

def test_hom_rank2_examples():
    tw = TW3
    N = make_ext_eprime(tw, 2, 1, 0, 6, 2, 0)
    phi = hom_rank2(N, N)
    assert phi.matrix == ((tw.one(), tw.zero()), (tw.zero(), tw.one()))
    src = make_ext_eprime(tw, 0, 1, 0, 4, 2, 1)
    dst = make_ext_eprime(tw, 4, 1, 0, 8, 2, 1)
    phi = hom_rank2(src, dst)
    assert phi is not None and is_morphism(phi, src.descent, dst.descent) and generic_fibre_iso(phi)
    assert hom_rank2(dst, src) is None


def test_generic_iso_examples():
    tw = TW3
    N = make_ext_eprime(tw, 2, 1, 0, 6, 2, 0)
    ident = hom_rank2(N, N)
    assert generic_fibre_iso(ident) and annihilator_bound(ident) == 0
    zero = Morphism(N.module, N.module, ((tw.zero(), tw.zero()), (tw.zero(), tw.zero())))
    assert not generic_fibre_iso(zero) and kernel_has_free_part(zero)


@pytest.mark.parametrize("l", [3, 5])
def test_lattice_counts_and_extremes(l):
    tw = TameTower.eprime(l)
    for k in range(1, l):
        rep = lattice(tw, k, 1, 2, 0, k % (l - 1))
        assert len(rep.modules) == (l - k + 1) ** 2
        assert classify_pairs(l, k) == classify_pairs_brute(l, k)
        d = rep.as_dict()
        assert d["maximal_matches"] and d["minimal_matches"]
        assert all(lattice_index(N) == k or (k == 1 and lattice_index(N) == l) for N in rep.modules)
        for i, j in itertools.product(range(len(rep.modules)), repeat=2):
            (r, _, _, s, _, _), (r1, _, _, s1, _, _) = rep.modules[i].params, rep.modules[j].params
            assert ((i, j) in rep.order) == (i != j and r <= r1 and s <= s1)


def test_lattice_example_l3():
    rep = lattice(TW3, 1, 1, 1, 0, 1)
    assert len(rep.modules) == 9
    assert repr(rep.modules[rep.maximal[0]]) == "M(4,1,0;8,1,1;6,1)"
    assert repr(rep.modules[rep.minimal[0]]) == "M(0,1,0;4,1,1;2,1)"
    assert rep.peu_ramifie
    assert len(lattice(TW3, 2, 1, 2, 0, 0).modules) == 4


def test_lattice_k0_and_k_equal_l():
    rep = lattice(TW3, 0, 1, 2, 0, 0)
    assert rep.pairs and all(rp > sp for rp, sp in rep.pairs)
    top = lattice(TW3, 3, 1, 1, 0, 1)
    assert [(N.quot.r_prime, N.sub.r_prime) for N in top.modules] == [(0, 4)]
    with pytest.raises(DomainError):
        lattice(TW3, 1, 1, 1, 0, 0)


def test_lattice_characters(eprime5):
    rep = lattice(eprime5, 2, 3, 2, 1, 3)
    for N in rep.modules:
        top, bottom = N.characters()
        assert (top.unit_class, top.cyclo_exp) == (3, 0)
        assert (bottom.unit_class, bottom.cyclo_exp) == (2, (1 - 3) % 4)
        assert (top, bottom) == (character(N.quot), character(N.sub))


def test_lattice_maps_against_exhaustive_search():
    rep = lattice(TW3, 2, 1, 2, 0, 0, with_maps=True)
    for i, j in itertools.product(range(len(rep.modules)), repeat=2):
        N1, N2 = rep.modules[i], rep.modules[j]
        expected = i == j or (i, j) in rep.order
        assert generic_iso_exists(N1.module, N1.descent, N2.module, N2.descent) == expected
