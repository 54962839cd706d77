from __future__ import annotations

import itertools

import pytest

from breuilkit.admissible import (RhoBarForm, TypeTau, all_types, check_relations, closed_form_admissible,
                                  enumerate_admissible, family_parameters, frobenius_relation_holds,
                                  inertia_relations_hold, rho_bar_of, swap_families, sweep_admissible,
                                  theorem_main_forms)
from breuilkit.breuil import dieudonne_reduce, direct_sum, direct_sum_descent
from breuilkit.errors import DomainError
from breuilkit.rank1 import Rank1Module
from breuilkit.rank2 import is_split, make_ext_eprime
from breuilkit.upoly import TameTower

TW3 = TameTower.eprime(3)


def test_type_decomposition():
    for l in (3, 5, 7):
        for tau in all_types(l):
            assert 1 <= tau.i <= l and 0 <= tau.j < l - 1
            assert ((l + 1) * tau.j + tau.i - tau.m) % (l * l - 1) == 0
    with pytest.raises(DomainError):
        TypeTau(3, 4)
    assert len(all_types(3)) == 6


def test_check_relations_examples():
    k = TW3.k
    for a, b in ((1, 2), (2, 1)):
        N = make_ext_eprime(TW3, 2, a, 0, 6, b, 0)
        D = N.dieudonne()
        assert check_relations(D, 1, k.mul(a, b))
        assert not check_relations(D, 2, k.mul(a, b))
    A, B = Rank1Module(TW3, 0, 1, 0), Rank1Module(TW3, 0, 2, 1)
    S = direct_sum(A.module, B.module)
    D = dieudonne_reduce(S, direct_sum_descent(TW3, A.descent, B.descent))
    assert not frobenius_relation_holds(D, k.mul(1, 2))


def exponent_set_test(N, m):
    """Diagonal inertia: the relations reduce to an equality of exponent sets."""
    l = N.tower.l
    mod = l * l - 1
    rp, sp = N.quot.r_prime, N.sub.r_prime
    have = {((l + 1) * N.quot.c - l * rp) % mod, ((l + 1) * N.sub.c - l * sp) % mod}
    want = {(-m) % mod, (-l * m) % mod}
    return have == want


@pytest.mark.parametrize("l", [3, 5])
def test_inertia_relations_equal_exponent_sets(l):
    from breuilkit.admissible import _descent_inertia

    tw = TameTower.eprime(l)
    w = l - 1
    for rp, sp, c, d in itertools.product(range(l + 2), range(1, l + 2), range(w), range(w)):
        N = make_ext_eprime(tw, rp * w, 1, c, sp * w, 1 if c != d else 2, d)
        if N is None:
            continue
        for tau in all_types(l):
            assert inertia_relations_hold(_descent_inertia(N), tw.k, tau.m) == exponent_set_test(N, tau.m)


def test_sweep_equals_closed_form_l3():
    for tau in all_types(3):
        kept, dropped = sweep_admissible(tau)
        assert set(kept) == set(closed_form_admissible(tau))
        assert {d.reason for d in dropped} <= {"no_extension", "relations", "split"}
        for N in kept:
            assert N.is_valid()
            assert check_relations(N.dieudonne(), tau.m, TW3.k.mul(N.quot.a, N.sub.a))


def test_sweep_equals_closed_form_one_type_l5(eprime5):
    tau = TypeTau(5, 3)
    assert set(enumerate_admissible(tau, brute=True)) == set(enumerate_admissible(tau, brute=False))


def test_dropped_modules_fail_a_named_predicate():
    tau = TypeTau(3, 2)
    _, dropped = sweep_admissible(tau)
    for item in dropped:
        N = make_ext_eprime(TW3, *item.params)
        if item.reason == "no_extension":
            assert N is None
        elif item.reason == "relations":
            assert not check_relations(N.dieudonne(), tau.m, TW3.k.mul(N.quot.a, N.sub.a))
        else:
            assert is_split(N)


def test_m1_example():
    mods = enumerate_admissible(TypeTau(3, 1))
    assert sorted(repr(N) for N in mods) == ["M(2,1,0;6,2,0;0,1)", "M(2,2,0;6,1,0;0,1)"]
    for N in mods:
        rho = rho_bar_of(N)
        assert rho.diag_top.cyclo_exp == rho.diag_bottom.cyclo_exp == 1
        assert rho.diag_top.unit_class != rho.diag_bottom.unit_class


def test_theorem_form_examples():
    assert theorem_main_forms(TypeTau(3, 1)) == {(1, 1, False)}
    assert theorem_main_forms(TypeTau(3, 2)) == {(0, 1, True), (1, 0, True)}
    assert theorem_main_forms(TypeTau(5, 3)) == {(3, 1, False), (1, 3, False)}


@pytest.mark.parametrize("l", [3, 5])
def test_forms_and_uniqueness(l):
    for tau in all_types(l):
        mods = closed_form_admissible(tau)
        forms = [rho_bar_of(N) for N in mods]
        assert {f.inertia_form() for f in forms} == theorem_main_forms(tau)
        keys = [(f.diag_top, f.diag_bottom) for f in forms]
        assert len(keys) == len(set(keys))


def test_split_module_has_no_rho_bar():
    with pytest.raises(DomainError):
        rho_bar_of(make_ext_eprime(TW3, 6, 1, 0, 2, 2, 0))


@pytest.mark.parametrize("l", [3, 5, 7])
def test_swap_exchanges_families(l):
    for tau in all_types(l):
        i2, j2 = swap_families(l, tau.i, tau.j)
        other = TypeTau(l, (l + 1) * j2 + i2)
        for a, b in itertools.product(range(1, l), repeat=2):
            first, second = family_parameters(tau, a, b)
            swapped_first, swapped_second = family_parameters(other, a, b)
            assert first == swapped_second and second == swapped_first


def test_rho_bar_form_serializes():
    N = enumerate_admissible(TypeTau(3, 1))[0]
    d = rho_bar_of(N).as_dict()
    assert set(d) == {"top", "bottom", "star_nonzero", "peu_ramifie"}
    assert isinstance(rho_bar_of(N), RhoBarForm)
