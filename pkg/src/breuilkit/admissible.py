"""Rank-2 modules over the eprime tower compatible with a tame Galois type.

A type is given by m modulo l^2 - 1, written m = (l+1) j + i with
1 <= i <= l.  A module is admissible for m when its closed-fibre Dieudonne
module satisfies

* [z] + [z]^l = z^{-m} + z^{-lm} and [z]^{l+1} = z^{-(l+1)m}, for the
  fixed generator z of mu_{l^2-1};
* F + T V = 0 with T = a b.

The sweep builds every nonsplit normal form M(r,a,c;s,b,d;n,1), reduces it
and applies the relations; the closed form lists the two surviving families
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .breuil import DieudonneData, k_matmul
from .errors import DomainError
from .rank1 import Character, character
from .rank2 import Rank2Ext, is_split, make_ext_eprime
from .upoly import TameTower


@dataclass(frozen=True)
class TypeTau:
    """tau = omega_2^m + omega_2^{lm} with m = (l+1) j + i, 1 <= i <= l."""

    l: int
    m: int

    def __post_init__(self):
        l = self.l
        object.__setattr__(self, "m", self.m % (l * l - 1))
        if self.m % (l + 1) == 0:
            raise DomainError(f"m = {self.m} is divisible by l + 1 = {l + 1}; the type is not of the required shape")

    @property
    def i(self) -> int:
        return self.m % (self.l + 1)

    @property
    def j(self) -> int:
        return ((self.m - self.i) // (self.l + 1)) % (self.l - 1)

    def __str__(self) -> str:
        return f"tau(m={self.m}; i={self.i}, j={self.j})"


def all_types(l: int) -> list[TypeTau]:
    return [TypeTau(l, m) for m in range(l * l - 1) if m % (l + 1)]


@dataclass(frozen=True)
class RhoBarForm:
    """Upper-triangular residual form: diag_top over diag_bottom."""

    diag_top: Character
    diag_bottom: Character
    star_nonzero: bool
    peu_ramifie_flag: Optional[bool] = None

    def inertia_form(self) -> tuple[int, int, bool]:
        """(omega exponent top, omega exponent bottom, peu-ramifie constraint)."""
        return (self.diag_top.cyclo_exp, self.diag_bottom.cyclo_exp, bool(self.peu_ramifie_flag))

    def as_dict(self) -> dict:
        return {
            "top": self.diag_top.as_dict(),
            "bottom": self.diag_bottom.as_dict(),
            "star_nonzero": self.star_nonzero,
            "peu_ramifie": self.peu_ramifie_flag,
        }


# -- the relation filter ------------------------------------------------------------

def _mat_pow(F, A, n: int):
    size = len(A)
    out = tuple(tuple(1 if i == j else 0 for j in range(size)) for i in range(size))
    for _ in range(n):
        out = k_matmul(F, out, A)
    return out


def _is_scalar(A, value: int) -> bool:
    return all(A[i][j] == (value if i == j else 0) for i in range(len(A)) for j in range(len(A)))


def inertia_relations_hold(inertia, field, m: int) -> bool:
    """The two conditions on [z] alone."""
    l = field.l
    z = field.root_of_unity(l * l - 1)
    target_sum = field.add(field.pow(z, -m), field.pow(z, -l * m))
    power_l = _mat_pow(field, inertia, l)
    total = tuple(tuple(field.add(x, y) for x, y in zip(r1, r2)) for r1, r2 in zip(inertia, power_l))
    if not _is_scalar(total, target_sum):
        return False
    return _is_scalar(k_matmul(field, power_l, inertia), field.pow(z, -(l + 1) * m))


def frobenius_relation_holds(D: DieudonneData, T: int) -> bool:
    """F + T V = 0."""
    F = D.field
    return all(
        F.add(x, F.mul(T, y)) == 0
        for row_f, row_v in zip(D.F_matrix, D.V_matrix)
        for x, y in zip(row_f, row_v)
    )


def check_relations(D: DieudonneData, m: int, T: int) -> bool:
    return inertia_relations_hold(D.inertia_scalars, D.field, m) and frobenius_relation_holds(D, T)


def _descent_inertia(N: Rank2Ext):
    """[z] on M/uM read from the descent data (row convention)."""
    tw = N.tower
    A = N.descent.matrices[tw.generators.index(tw.sigma)]
    return tuple(tuple(A[j][i].constant() for j in range(2)) for i in range(2))


# -- enumeration ----------------------------------------------------------------------

@dataclass(frozen=True)
class Dropped:
    params: tuple
    reason: str


def _candidates(tower: TameTower) -> Iterator[tuple]:
    l = tower.l
    for rp in range(l + 2):
        for sp in range(l + 2):
            for c in range(l - 1):
                for d in range(l - 1):
                    for a in range(1, l):
                        for b in range(1, l):
                            if (a, c) != (b, d):
                                yield (rp * (l - 1), a, c, sp * (l - 1), b, d)


def sweep_admissible(tau: TypeTau) -> tuple[list[Rank2Ext], list[Dropped]]:
    """Brute-force pass over every parameter tuple, recording why each is dropped."""
    tower = TameTower.eprime(tau.l)
    kept: list[Rank2Ext] = []
    dropped: list[Dropped] = []
    for params in _candidates(tower):
        N = make_ext_eprime(tower, *params)
        if N is None:
            dropped.append(Dropped(params, "no_extension"))
            continue
        if not inertia_relations_hold(_descent_inertia(N), tower.k, tau.m):
            dropped.append(Dropped(params, "relations"))
            continue
        D = N.dieudonne()
        T = tower.k.mul(N.quot.a, N.sub.a)
        if not check_relations(D, tau.m, T):
            dropped.append(Dropped(params, "relations"))
            continue
        if is_split(N):
            # covers the extra i in {1, l} candidate M(l(l-1),a,-j;(l-1),b,-j;0,1)
            dropped.append(Dropped(params, "split"))
            continue
        kept.append(N)
    return kept, dropped


def family_parameters(tau: TypeTau, a: int, b: int) -> list[tuple]:
    """Both closed-form families for fixed (a, b), before any filtering."""
    l, i, j = tau.l, tau.i, tau.j
    w = l - 1
    first = ((l - 1) * (l + 1 - i), a, (1 - i - j) % w, (l - 1) * i, b, (-j) % w)
    second = ((l - 1) * i, a, (-j) % w, (l - 1) * (l + 1 - i), b, (1 - i - j) % w)
    return [first, second]


def closed_form_admissible(tau: TypeTau) -> list[Rank2Ext]:
    tower = TameTower.eprime(tau.l)
    out = []
    seen = set()
    for a in range(1, tau.l):
        for b in range(1, tau.l):
            for params in family_parameters(tau, a, b):
                r, a_, c, s, b_, d = params
                if (a_, c) == (b_, d) or params in seen:
                    continue
                seen.add(params)
                if r > s and c == d:
                    continue
                N = make_ext_eprime(tower, *params)
                if N is None or N.n != 0:
                    raise DomainError(f"closed-form family member {params} has no n = 0 normal form")
                out.append(N)
    return out


def enumerate_admissible(tau: TypeTau, brute: bool = True) -> list[Rank2Ext]:
    if brute:
        return sweep_admissible(tau)[0]
    return closed_form_admissible(tau)


def rho_bar_of(N: Rank2Ext) -> RhoBarForm:
    """Quotient character on top, sub character below."""
    if is_split(N):
        raise DomainError("the descended representation of a split module has no nonzero *")
    l = N.tower.l
    top, bottom = character(N.quot), character(N.sub)
    peu = True if (N.sub.c - N.quot.c - 1) % (l - 1) == 0 else None
    return RhoBarForm(top, bottom, True, peu)


def theorem_main_forms(tau: TypeTau) -> set[tuple[int, int, bool]]:
    """Inertia shapes allowed for the type: (top exponent, bottom exponent, peu-ramifie)."""
    l, i, j = tau.l, tau.i, tau.j
    w = l - 1
    return {
        ((i + j) % w, (1 + j) % w, i == 2),
        ((1 + j) % w, (i + j) % w, i == l - 1),
    }


def swap_families(l: int, i: int, j: int) -> tuple[int, int]:
    """The change of variables exchanging the two families."""
    return l + 1 - i, (i + j - 1) % (l - 1)
