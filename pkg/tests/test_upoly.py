from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from breuilkit.errors import DomainError
from breuilkit.upoly import GroupElem, TameTower, TruncPoly, fixed_subring_test, group_order_check

TOWERS = [
    TameTower.eprime(3),
    TameTower(3, 2),
    TameTower(3, 4, f_rel=2),
    TameTower(5, 4),
    TameTower(3, 2, f_rel=2, f_L=2),
]


def polys(tower: TameTower):
    return st.lists(st.integers(0, tower.k.q - 1), min_size=tower.N, max_size=tower.N).map(
        lambda c: TruncPoly.make(tower, c)
    )


def naive_product(f: TruncPoly, g: TruncPoly) -> TruncPoly:
    F = f.field
    n = f.length
    out = [0] * n
    for i in range(n):
        for j in range(n - i):
            out[i + j] = F.add(out[i + j], F.mul(f[i], g[j]))
    return TruncPoly.make(f.tower, out)


def test_eprime_invariants():
    for l in (3, 5):
        tw = TameTower.eprime(l)
        assert (tw.e_K, tw.N, tw.f_K, tw.U, tw.V_param) == (l * l - 1, l * (l * l - 1), 2, 1, 0)
        inertia = {g for g in tw.elements if g.t == 0}
        assert len(inertia) == l * l - 1
        assert group_order_check(tw)
        assert tw.order == 2 * (l * l - 1)


def test_group_order_examples():
    assert group_order_check(TameTower(3, 1))
    assert len(TameTower.eprime(3).elements) == 16
    assert len(TameTower.eprime(5).elements) == 48


def test_eqK_holds_on_many_towers():
    for l in (3, 5, 7):
        for e in range(1, 50):
            for f in (1, 2):
                try:
                    tw = TameTower(l, e, f_rel=f)
                except DomainError:
                    continue
                assert tw.U * tw.lm1_prime == 1 + tw.V_param * tw.e_prime
                if e % (l - 1) == 0:
                    assert tw.U == 1


def test_prime_accessor_requires_divisibility():
    tw = TameTower.eprime(3)
    assert tw.prime(4) == 2
    with pytest.raises(DomainError):
        tw.prime(3)


def test_rejects_wild_or_missing_roots():
    with pytest.raises(DomainError):
        TameTower(3, 3)
    with pytest.raises(DomainError):
        TameTower(3, 4)  # mu_4 is not in F_3


def test_act_examples():
    tw = TameTower.eprime(3)
    u = tw.monomial(1)
    f = tw.poly({0: 2, 3: tw.k.g0})
    assert f.act(tw.identity) == f
    assert u.act(tw.sigma) == tw.monomial(1, tw.zeta0)


@pytest.mark.parametrize("tower", TOWERS, ids=repr)
@given(data=st.data())
def test_action_is_semilinear_ring_automorphism(tower, data):
    f = data.draw(polys(tower))
    h = data.draw(polys(tower))
    g1 = data.draw(st.sampled_from(tower.elements))
    g2 = data.draw(st.sampled_from(tower.elements))
    assert (f * h).act(g1) == f.act(g1) * h.act(g1)
    assert (f + h).act(g1) == f.act(g1) + h.act(g1)
    assert f.act(g2).act(g1) == f.act(tower.mul(g1, g2))
    assert f * h == naive_product(f, h)


@pytest.mark.parametrize("tower", TOWERS, ids=repr)
def test_group_law_associative_with_identity(tower):
    for g in tower.elements:
        assert tower.mul(g, tower.identity) == g == tower.mul(tower.identity, g)
        assert tower.mul(g, tower.inverse(g)) == tower.identity
        assert tower.k.pow(g.zeta, tower.e) == 1
    assert group_order_check(tower)


def test_fixed_subring_examples():
    tw = TameTower.eprime(3)
    assert fixed_subring_test(tw.one().scale(2))
    assert not fixed_subring_test(tw.monomial(1))
    assert fixed_subring_test(tw.monomial(tw.e, 2))
    assert not fixed_subring_test(tw.monomial(tw.e, tw.k.g0))


@pytest.mark.parametrize("tower", TOWERS[:3], ids=repr)
@given(data=st.data())
def test_fixed_subring_matches_description(tower, data):
    f = data.draw(polys(tower))
    described = all(c == 0 or (i % tower.e == 0 and tower.in_kL(c)) for i, c in f.items())
    assert fixed_subring_test(f) == described


@given(data=st.data())
def test_vector_round_trip_and_inverse(data):
    tw = TameTower.eprime(3)
    f = data.draw(polys(tw))
    assert TruncPoly.from_vector(tw, f.to_vector()) == f
    if f.is_unit():
        assert f * f.inverse() == tw.one()
    assert f.lth_power() == f ** 3
