"""Rank-1 Breuil modules with tame descent data.

The normal form M(r, a, c) is M = <e>, M1 = <u^r e>, phi1(u^r e) = a e with
[g] e = (g(pi)/pi)^{k2} e, where k2 = e'c - U l r'.  Here r is divisible by
d0 = gcd(l-1, e), a lies in kL^x and c in Z/d0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional

from .breuil import BreuilModule, DescentData, DieudonneData, Morphism, dieudonne_reduce, g_pi_residue
from .errors import DomainError, UnsupportedTower
from .upoly import TameTower, TruncPoly


@dataclass(frozen=True)
class Character:
    """chi_unit * omega^cyclo_exp, a character of G_L with values in F_l^x.

    ``unit_class`` is the least representative of the class of the unit
    modulo (kL^x)^{l-1}; for L = Q_l it is just an element of F_l^x.
    """

    l: int
    unit_class: int
    cyclo_exp: int

    def __str__(self) -> str:
        return f"chi_{self.unit_class} * omega^{self.cyclo_exp}"

    def inertia(self) -> int:
        """Exponent of omega on inertia."""
        return self.cyclo_exp

    def as_dict(self) -> dict:
        return {"unit_class": self.unit_class, "cyclo_exp": self.cyclo_exp, "text": str(self)}


def unit_class_rep(tower: TameTower, x: int) -> int:
    """Least element of kL^x in the class of x modulo (kL^x)^{l-1}."""
    k = tower.k
    for cand in tower.kL_units:
        ratio = k.div(x, cand)
        if any(k.pow(y, tower.l - 1) == ratio for y in tower.kL_units):
            return cand
    raise DomainError("unit class has no representative in kL")  # unreachable


class Rank1Module:
    """The normal form M(r, a, c) over a tower."""

    def __init__(self, tower: TameTower, r: int, a: int, c: int):
        if not 0 <= r <= tower.e_K:
            raise DomainError(f"r = {r} must lie in [0, e_K = {tower.e_K}]")
        if r % tower.d0:
            raise DomainError(f"r = {r} must be divisible by gcd(l-1, e) = {tower.d0}")
        if a == 0 or not tower.in_kL(a):
            raise DomainError("a must be a nonzero element of kL")
        self.tower = tower
        self.r = r
        self.a = a
        self.c = c % tower.d0

    @property
    def params(self) -> tuple[int, int, int]:
        return (self.r, self.a, self.c)

    def __repr__(self) -> str:
        return f"M({self.r},{self.a},{self.c})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Rank1Module) and self.tower == other.tower and self.params == other.params

    def __hash__(self) -> int:
        return hash((self.tower, self.params))

    @property
    def r_prime(self) -> int:
        return self.tower.prime(self.r)

    @property
    def k2(self) -> int:
        """Exponent of g(pi)/pi in the descent data, reduced mod e."""
        tw = self.tower
        return (tw.e_prime * self.c - tw.U * tw.l * self.r_prime) % tw.e

    @cached_property
    def module(self) -> BreuilModule:
        tw = self.tower
        return BreuilModule(tw, 1, [(tw.monomial(self.r),)], [(tw.poly({0: self.a}),)])

    @cached_property
    def descent(self) -> DescentData:
        return DescentData.diagonal(self.tower, [self.k2])

    def dieudonne(self) -> DieudonneData:
        return dieudonne_reduce(self.module, self.descent)


def all_rank1(tower: TameTower) -> Iterator[Rank1Module]:
    """Every normal form (r, a, c); a runs over kL^x."""
    for r in range(0, tower.e_K + 1, tower.d0):
        for a in tower.kL_units:
            for c in range(tower.d0):
                yield Rank1Module(tower, r, a, c)


def class_representatives(tower: TameTower) -> list[Rank1Module]:
    """One normal form per isomorphism class (a modulo (kL^x)^{l-1})."""
    reps = sorted({unit_class_rep(tower, a) for a in tower.kL_units})
    return [
        Rank1Module(tower, r, a, c)
        for r in range(0, tower.e_K + 1, tower.d0)
        for a in reps
        for c in range(tower.d0)
    ]


def admits_descent(tower: TameTower, r: int, a: TruncPoly) -> bool:
    """Whether M(r, a) carries generic fibre descent data from K to L.

    The condition on a is a(0) in kL^x (k^x)^{l-1}: units 1 + u(...) are
    always (l-1)-st powers because l-1 is prime to l.
    """
    if not 0 <= r <= tower.e_K:
        raise DomainError(f"r = {r} must lie in [0, e_K]")
    if r % tower.d0:
        return False
    if not a.is_unit():
        raise DomainError("a must be a unit")
    k = tower.k
    a0 = a.constant()
    powers = {k.pow(y, tower.l - 1) for y in k.units()}
    return any(k.div(a0, x) in powers for x in tower.kL_units)


def hom_scalars(M: Rank1Module, N: Rank1Module) -> list[int]:
    """All alpha in kL^x giving a nonzero map M -> N, e' -> alpha u^{l(s-r)/(l-1)} e."""
    if M.tower != N.tower:
        raise DomainError("modules live over different towers")
    tw = M.tower
    l = tw.l
    r, s = M.r, N.r
    if r > s or (s - r) % (l - 1):
        return []
    shift = (r - s) // (l - 1)
    if (M.c - N.c - tw.V_param * shift) % tw.d0:
        return []
    k = tw.k
    ratio = k.div(M.a, N.a)
    return [x for x in tw.kL_units if k.pow(x, l - 1) == ratio]


def homs(M: Rank1Module, N: Rank1Module) -> list[Morphism]:
    tw = M.tower
    scal = hom_scalars(M, N)
    if not scal:
        return []
    t = tw.l * (N.r - M.r) // (tw.l - 1)
    return [Morphism(M.module, N.module, ((tw.monomial(t, x),),)) for x in scal]


def hom_degree(M: Rank1Module, N: Rank1Module) -> int:
    return M.tower.l * (N.r - M.r) // (M.tower.l - 1)


def is_isomorphic(M: Rank1Module, N: Rank1Module) -> bool:
    """An isomorphism is a hom of u-degree 0 whose inverse is also a hom."""
    return bool(hom_scalars(M, N)) and bool(hom_scalars(N, M)) and hom_degree(M, N) == 0


def character(M: Rank1Module) -> Character:
    """The character of G_L on the descended generic fibre.

    Only L = Q_l with a declared relation pi^e = -l * eps is supported.  Then
    lambda = -l a (pi^e)^x with x = V r' - (l-1)' c equals a eps^x (-l)^{1+x},
    whose Kummer character is chi_{a eps^x} omega^{1+x}.
    """
    tw = M.tower
    if tw.pi_unit is None:
        raise UnsupportedTower("character needs a tower with declared pi^e = -l * unit")
    if tw.e_L != 1 or tw.f_L != 1:
        raise UnsupportedTower("character is implemented for L = Q_l only")
    k = tw.k
    x = tw.V_param * M.r_prime - tw.lm1_prime * M.c
    unit = k.mul(M.a, k.pow(tw.pi_unit, x))
    return Character(tw.l, unit_class_rep(tw, unit), (1 + x) % (tw.l - 1))


def oort_tate_param(M: Rank1Module) -> tuple[int, int]:
    """(valuation, unit residue) of C = pi^{e_K - r} a / G_pi(pi)."""
    tw = M.tower
    g = g_pi_residue(tw)
    return tw.e_K - M.r, tw.k.div(M.a, g)
