from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from breuilkit.errors import DomainError
from breuilkit.gfq import Field, field, least_irreducible

SMALL = [(l, f) for l in (3, 5, 7) for f in (1, 2)]


def brute_pow(F: Field, x: int, n: int) -> int:
    acc = 1
    for _ in range(n):
        acc = F.mul(acc, x)
    return acc


@pytest.mark.parametrize("l,f", SMALL)
def test_frobenius_is_field_automorphism(l, f):
    F = field(l, f)
    for x, y in itertools.product(F.elements(), repeat=2):
        assert F.frobenius(F.add(x, y)) == F.add(F.frobenius(x), F.frobenius(y))
        assert F.frobenius(F.mul(x, y)) == F.mul(F.frobenius(x), F.frobenius(y))
    for x in F.elements():
        assert F.frobenius(x) == brute_pow(F, x, l)
        assert F.frobenius(x, f) == x


def test_frobenius_fixes_prime_field_and_moves_generator():
    F = field(3, 2)
    for x in range(3):
        assert F.frobenius(x) == x
    assert F.frobenius(F.g0) == brute_pow(F, F.g0, 3) != F.g0
    assert all(F.frobenius(F.frobenius(x)) == x for x in F.elements())


@pytest.mark.parametrize("l,f", SMALL)
def test_modulus_is_least_irreducible_and_g0_generates(l, f):
    F = field(l, f)
    mod = least_irreducible(l, f)
    assert F.modulus == mod and len(mod) == f + 1 and mod[-1] == 1
    if f == 2:
        # a quadratic is irreducible iff it has no root in F_l
        assert all(sum(c * x**i for i, c in enumerate(mod)) % l for x in range(l))
    seen = set()
    acc = 1
    for _ in range(F.q - 1):
        acc = F.mul(acc, F.g0)
        seen.add(acc)
    assert len(seen) == F.q - 1


@pytest.mark.parametrize("l,f", SMALL)
def test_power_residue_matches_search(l, f):
    F = field(l, f)
    for d in (2, l - 1, 3, F.q - 1):
        powers = {brute_pow(F, y, d) for y in F.units()}
        for x in F.units():
            assert F.is_power_residue(x, d) == (x in powers)


def test_power_residue_examples():
    F9 = field(3, 2)
    assert sum(F9.is_power_residue(x, 2) for x in F9.units()) == 4
    F3 = field(3)
    assert F3.is_power_residue(1, 2) and not F3.is_power_residue(2, 2)
    assert all(F9.is_power_residue(1, d) for d in range(1, 10))
    with pytest.raises(DomainError):
        F9.is_power_residue(0, 2)


@pytest.mark.parametrize("l,f", SMALL)
def test_x_minus_cxl_rank_nullity(l, f):
    F = field(l, f)
    for c in F.elements():
        images = [F.sub(x, F.mul(c, F.frobenius(x))) for x in F.elements()]
        kernel = sum(1 for v in images if v == 0)
        image = set(images)
        # F_l-linear: |kernel| * |image| = q
        assert kernel * len(image) == F.q
        assert image == F.image_x_minus_cxl(c)
        for h in F.elements():
            x = F.solve_x_minus_cxl(c, h)
            if h in image:
                assert x == min(y for y, v in zip(F.elements(), images) if v == h)
            else:
                assert x is None


def test_solve_x_minus_cxl_examples():
    F = field(3, 2)
    assert F.solve_x_minus_cxl(1, 0) == 0
    assert len(F.image_x_minus_cxl(1)) == 3


@given(st.sampled_from(SMALL), st.data())
def test_field_axioms(lf, data):
    F = field(*lf)
    x, y, z = (data.draw(st.integers(0, F.q - 1)) for _ in range(3))
    assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
    assert F.mul(F.mul(x, y), z) == F.mul(x, F.mul(y, z))
    assert F.add(x, F.neg(x)) == 0
    if x:
        assert F.mul(x, F.inv(x)) == 1
        assert F.exp(F.log(x)) == x


def test_rejects_bad_characteristic():
    with pytest.raises(DomainError):
        Field(4)
    with pytest.raises(DomainError):
        Field(2)
