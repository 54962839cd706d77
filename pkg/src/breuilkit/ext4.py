"""Self-extensions of the admissible rank-2 modules over the eprime tower.

For M = M(r,a,c;s,b,d;0,1) with r' + s' = l + 1, every self-extension with
descent data has the normal form N = <e, e', f, f'> with

    N1 = <u^s e, u^r e' + e, u^s f, u^r f' + f>,
    phi1 = (b e, a e', b f + v e, a f' + z e'),   v, z in F_l,

and diagonal descent data repeating that of M.  ``oracle_ext_dim`` recomputes
the dimension of Ext^1(M, M) from scratch as cocycles modulo basis changes.
"""

from __future__ import annotations

from functools import cached_property
from typing import Optional

import numpy as np

from . import exactlin
from .breuil import BreuilModule, DescentData, DieudonneData, Morphism, check_exact, dieudonne_reduce, validate
from .errors import DomainError, GuardError, guard_limit
from .rank2 import Rank2Ext, is_split
from .upoly import GroupElem, LinPoly, TameTower, TruncPoly

ORACLE_UNKNOWNS = 5000


def _require_shape(M: Rank2Ext) -> None:
    tw = M.tower
    if not tw.is_eprime:
        raise DomainError("self-extensions are implemented for the eprime tower only")
    l = tw.l
    rp, sp = M.quot.r_prime, M.sub.r_prime
    if M.n != 0 or rp + sp != l + 1 or (M.sub.c - M.quot.c - 1 + rp) % (l - 1) or is_split(M):
        raise DomainError(f"{M} is not a nonsplit admissible module with r' + s' = l + 1 and n = 0")


class Rank4Module:
    """The normal form N(M; v, z); internal basis order (e, e', f, f')."""

    def __init__(self, base: Rank2Ext, v: int, z: int):
        _require_shape(base)
        self.base = base
        self.tower = base.tower
        self.v = v % self.tower.l
        self.z = z % self.tower.l

    def __repr__(self) -> str:
        return f"N({self.base!r}; v={self.v}, z={self.z})"

    @cached_property
    def module(self) -> BreuilModule:
        tw = self.tower
        M = self.base
        r, s = M.quot.r, M.sub.r
        a, b = M.quot.a, M.sub.a
        z0 = tw.zero()

        def vec(**kw):
            order = ("e", "e2", "f", "f2")
            return tuple(kw.get(name, z0) for name in order)

        gens = [
            vec(e=tw.monomial(s)),
            vec(e=tw.one(), e2=tw.monomial(r)),
            vec(f=tw.monomial(s)),
            vec(f=tw.one(), f2=tw.monomial(r)),
        ]
        imgs = [
            vec(e=tw.poly({0: b})),
            vec(e2=tw.poly({0: a})),
            vec(f=tw.poly({0: b}), e=tw.poly({0: self.v})),
            vec(f2=tw.poly({0: a}), e2=tw.poly({0: self.z})),
        ]
        return BreuilModule(tw, 4, gens, imgs, labels=("e", "e'", "f", "f'"))

    @cached_property
    def descent(self) -> DescentData:
        M = self.base
        return DescentData.diagonal(self.tower, [M.k1, M.k2, M.k1, M.k2])

    def problems(self):
        return validate(self.module, self.descent)

    def is_valid(self) -> bool:
        return not self.problems()

    def inclusion(self) -> Morphism:
        tw = self.tower
        o, z = tw.one(), tw.zero()
        return Morphism(self.base.module, self.module, ((o, z), (z, o), (z, z), (z, z)))

    def projection(self) -> Morphism:
        tw = self.tower
        o, z = tw.one(), tw.zero()
        return Morphism(self.module, self.base.module, ((z, z, o, z), (z, z, z, o)))

    def is_exact(self) -> bool:
        dd = self.base.descent
        return check_exact(self.base.module, self.module, self.base.module, self.inclusion(), self.projection(),
                           (dd, self.descent, dd))


def self_ext(M: Rank2Ext, v: int, z: int) -> Rank4Module:
    return Rank4Module(M, v, z)


def dieudonne_rank4(N: Rank4Module) -> DieudonneData:
    """F, V, [z] on the basis of images of (e, f, e', f')."""
    return dieudonne_reduce(N.module, N.descent).permuted([0, 2, 1, 3])


def expected_matrices(N: Rank4Module) -> tuple[tuple, tuple]:
    """The closed-form F and V on the basis (e, f, e', f'), rows are images."""
    k = N.tower.k
    a, b = N.base.quot.a, N.base.sub.a
    neg = k.neg
    inv_a = k.inv(a)
    F = ((0, 0, 0, 0), (0, 0, 0, 0), (neg(b), 0, 0, 0), (neg(N.v), neg(b), 0, 0))
    V = ((0, 0, 0, 0), (0, 0, 0, 0), (inv_a, 0, 0, 0), (neg(k.mul(N.z, k.mul(inv_a, inv_a))), inv_a, 0, 0))
    return F, V


def constrained_subspace(M: Rank2Ext) -> tuple[int, list[tuple[int, int]]]:
    """The (v, z) with v + (b/a) z = 0, as (dimension, basis)."""
    _require_shape(M)
    k = M.tower.k
    ratio = k.div(M.sub.a, M.quot.a)
    return 1, [(k.neg(ratio), 1)]


def constrained_subspace_brute(M: Rank2Ext) -> list[tuple[int, int]]:
    """Every (v, z) in F_l^2 whose reduction satisfies F + abV = 0."""
    from .admissible import frobenius_relation_holds

    k = M.tower.k
    T = k.mul(M.quot.a, M.sub.a)
    l = M.tower.l
    return [(v, z) for v in range(l) for z in range(l)
            if frobenius_relation_holds(dieudonne_rank4(Rank4Module(M, v, z)), T)]


# -- the independent Ext oracle -----------------------------------------------------------

class _Layout:
    """Block positions of the unknown polynomials."""

    def __init__(self, names: list[str], block: int):
        self.names = names
        self.block = block
        self.index = {n: i for i, n in enumerate(names)}
        self.D = len(names) * block

    def offset(self, name: str) -> int:
        return self.index[name] * self.block


def _unknowns(tw: TameTower, layout: _Layout) -> dict[str, LinPoly]:
    return {n: LinPoly.unknown(tw, layout.D, layout.offset(n))[0] for n in layout.names}


class SelfExtOracle:
    """Ext^1(M, M) with descent data by F_l-linear algebra.

    N1 is fixed to <u^s e, u^r e' + e, u^s f, u^r f' + f>; the unknowns are
    phi1(u^s f) = b f + V e + W e', phi1(u^r f' + f) = a f' + Y e + Z e' and
    the corrections [g] f = z^{k1} f + A_g e + B_g e',
    [g] f' = z^{k2} f' + E_g e + F_g e'.
    """

    def __init__(self, M: Rank2Ext):
        _require_shape(M)
        tw = M.tower
        self.M = M
        self.tower = tw
        self.block = tw.N * tw.k.f
        ng = len(tw.generators)
        self.params = ["V", "W", "Y", "Z"] + [f"{x}{g}" for g in range(ng) for x in "ABEF"]
        self.aux = [f"X{g}{i}{j}" for g in range(ng) for i in (3, 4) for j in (1, 2)]
        self.layout = _Layout(self.params + self.aux, self.block)
        if self.layout.D > guard_limit(ORACLE_UNKNOWNS):
            raise GuardError(f"oracle needs {self.layout.D} unknowns, over the limit")

    # sub-module helpers: vectors are (e, e') pairs of LinPoly
    def _sub_combo(self, X1: LinPoly, X2: LinPoly) -> tuple[LinPoly, LinPoly]:
        """X1 (u^s e) + X2 (u^r e' + e)."""
        r, s = self.M.quot.r, self.M.sub.r
        return X1.shift(s) + X2, X2.shift(r)

    def _sub_phi1(self, X1: LinPoly, X2: LinPoly) -> tuple[LinPoly, LinPoly]:
        a, b = self.M.quot.a, self.M.sub.a
        return X1.lth_power().scale(b), X2.lth_power().scale(a)

    def cocycle_rows(self) -> np.ndarray:
        tw = self.tower
        k = tw.k
        M = self.M
        r, s = M.quot.r, M.sub.r
        a, b = M.quot.a, M.sub.a
        k1, k2 = M.k1, M.k2
        U = _unknowns(tw, self.layout)
        rows = []
        for gi, g in enumerate(tw.generators):
            zeta = g.zeta
            A, B, E, F = (U[f"{x}{gi}"] for x in "ABEF")
            # [g](u^s f) - z^{s+k1} u^s f and [g](u^r f' + f) - z^{r+k2}(u^r f' + f), sub parts
            moved3 = (A.shift(s).scale(k.pow(zeta, s)), B.shift(s).scale(k.pow(zeta, s)))
            moved4 = (E.shift(r).scale(k.pow(zeta, r)) + A, F.shift(r).scale(k.pow(zeta, r)) + B)
            if k.pow(zeta, k1) != k.pow(zeta, r + k2):
                raise DomainError("base module has inconsistent descent exponents")
            for i, moved, c_i, (P1, P2) in (
                (3, moved3, k.pow(zeta, s + k1), (U["V"], U["W"])),
                (4, moved4, k.pow(zeta, r + k2), (U["Y"], U["Z"])),
            ):
                X1, X2 = U[f"X{gi}{i}1"], U[f"X{gi}{i}2"]
                combo = self._sub_combo(X1, X2)
                rows.append((moved[0] - combo[0]).rows())
                rows.append((moved[1] - combo[1]).rows())
                # phi1([g] m_i) = c_i^l phi1(m_i) + phi1(X1 m1 + X2 m2)
                ph = self._sub_phi1(X1, X2)
                cl = k.frobenius(c_i)
                lhs_e = P1.scale(cl) + ph[0]
                lhs_e2 = P2.scale(cl) + ph[1]
                # [g] of phi1(m_i): quotient coefficient q, sub coefficients (P1, P2)
                if i == 3:
                    q, corner = b, (A, B)
                else:
                    q, corner = a, (E, F)
                rhs_e = corner[0].scale(q) + P1.act(g).scale(k.pow(zeta, k1))
                rhs_e2 = corner[1].scale(q) + P2.act(g).scale(k.pow(zeta, k2))
                rows.append((lhs_e - rhs_e).rows())
                rows.append((lhs_e2 - rhs_e2).rows())
        for left, right in tw.relations():
            wl, wr = self._word_corner(U, left), self._word_corner(U, right)
            for x, y in zip(wl, wr):
                rows.append((x - y).rows())
        return np.concatenate(rows, axis=0)

    def _word_corner(self, U: dict[str, LinPoly], word) -> tuple[LinPoly, ...]:
        """Corner (A, B, E, F) of the product of generator matrices along ``word``."""
        tw = self.tower
        k = tw.k
        k1, k2 = self.M.k1, self.M.k2
        x = tw.identity
        corner = tuple(LinPoly.zeros(tw, self.layout.D) for _ in range(4))
        for gi in word:
            h = tw.generators[gi]
            zh = k.frobenius(h.zeta, x.t * tw.f_L)
            dq = (k.pow(zh, k1), k.pow(zh, k2))  # x applied to diag of h, on f and f'
            ds = (k.pow(x.zeta, k1), k.pow(x.zeta, k2))  # diag of x on e and e'
            hA, hB, hE, hF = (U[f"{n}{gi}"].act(x) for n in "ABEF")
            A, B, E, F = corner
            corner = (
                hA.scale(ds[0]) + A.scale(dq[0]),
                hB.scale(ds[1]) + B.scale(dq[0]),
                hE.scale(ds[0]) + E.scale(dq[1]),
                hF.scale(ds[1]) + F.scale(dq[1]),
            )
            x = tw.mul(x, h)
        return corner

    def coboundary_rows(self) -> np.ndarray:
        """Parameter changes from f -> f + alpha e + beta e', f' -> f' + gamma e + delta e'
        that keep N1 in normal form.  Rows span the coboundary space."""
        tw = self.tower
        k = tw.k
        M = self.M
        r, s = M.quot.r, M.sub.r
        a, b = M.quot.a, M.sub.a
        k1, k2 = M.k1, M.k2
        names = ["al", "be", "ga", "de", "Y1", "Y2", "Y3", "Y4"]
        lay = _Layout(names, self.block)
        U = _unknowns(tw, lay)
        al, be, ga, de = U["al"], U["be"], U["ga"], U["de"]
        c3 = self._sub_combo(U["Y1"], U["Y2"])
        c4 = self._sub_combo(U["Y3"], U["Y4"])
        cons = [
            (al.shift(s) - c3[0]).rows(), (be.shift(s) - c3[1]).rows(),
            (ga.shift(r) + al - c4[0]).rows(), (de.shift(r) + be - c4[1]).rows(),
        ]
        kernel = exactlin.kernel_matrix(np.concatenate(cons, axis=0), tw.l)
        if kernel.size == 0:
            return np.zeros((0, self.layout.D - len(self.aux) * self.block), dtype=np.int64)
        p3 = self._sub_phi1(U["Y1"], U["Y2"])
        p4 = self._sub_phi1(U["Y3"], U["Y4"])
        deltas = {
            "V": p3[0] - al.scale(b), "W": p3[1] - be.scale(b),
            "Y": p4[0] - ga.scale(a), "Z": p4[1] - de.scale(a),
        }
        for gi, g in enumerate(tw.generators):
            z1, z2 = k.pow(g.zeta, k1), k.pow(g.zeta, k2)
            deltas[f"A{gi}"] = (al.act(g) - al).scale(z1)
            deltas[f"B{gi}"] = be.act(g).scale(z2) - be.scale(z1)
            deltas[f"E{gi}"] = ga.act(g).scale(z1) - ga.scale(z2)
            deltas[f"F{gi}"] = (de.act(g) - de).scale(z2)
        linear = np.concatenate([deltas[n].rows() for n in self.params], axis=0) % tw.l
        return (kernel @ linear.T) % tw.l

    def parameter_vector(self, v: int, z: int) -> np.ndarray:
        """The normal form N(M; v, z) in parameter coordinates."""
        vec = np.zeros(len(self.params) * self.block, dtype=np.int64)
        f = self.tower.k.f
        vec[self.layout.offset("V") : self.layout.offset("V") + f] = self.tower.k.to_digits(v % self.tower.l)
        vec[self.layout.offset("Z") : self.layout.offset("Z") + f] = self.tower.k.to_digits(z % self.tower.l)
        return vec

    @cached_property
    def cocycle_space(self) -> np.ndarray:
        kernel = exactlin.kernel_matrix(self.cocycle_rows(), self.tower.l)
        width = len(self.params) * self.block
        return exactlin.row_space(kernel[:, :width], self.tower.l) if kernel.size else np.zeros((0, width), dtype=np.int64)

    @cached_property
    def coboundary_space(self) -> np.ndarray:
        B = self.coboundary_rows()
        return exactlin.row_space(B, self.tower.l) if B.size else B

    def dimension(self) -> int:
        l = self.tower.l
        Z, B = self.cocycle_space, self.coboundary_space
        if B.shape[0] and exactlin.rank(np.vstack([Z, B]), l) != Z.shape[0]:
            raise DomainError("a basis change produced a non-cocycle")
        return Z.shape[0] - B.shape[0]

    def classes_spanned(self, pairs: list[tuple[int, int]]) -> int:
        l = self.tower.l
        B = self.coboundary_space
        extra = np.array([self.parameter_vector(v, z) for v, z in pairs])
        stacked = np.vstack([B, extra]) if B.shape[0] else extra
        return exactlin.rank(stacked, l) - B.shape[0]

    def is_cocycle(self, v: int, z: int) -> bool:
        Z = self.cocycle_space
        return exactlin.rank(np.vstack([Z, self.parameter_vector(v, z)]), self.tower.l) == Z.shape[0]


def oracle_ext_dim(M: Rank2Ext) -> int:
    return SelfExtOracle(M).dimension()


def admissible_bases(l: int, i: int, j: int, a: int, b: int) -> list[Rank2Ext]:
    """Nonsplit admissible rank-2 modules of type (i, j) with Frobenius scalars a, b."""
    from .admissible import TypeTau, check_relations, family_parameters
    from .rank2 import make_ext_eprime

    tw = TameTower.eprime(l)
    k = tw.k
    if not (1 <= a < l and 1 <= b < l):
        raise DomainError("a and b must be nonzero elements of F_l")
    tau = TypeTau(l, (l + 1) * j + i)
    found = []
    for params in family_parameters(tau, a, b):
        _, a_, c, _, b_, d = params
        if (a_, c) == (b_, d):
            continue
        N = make_ext_eprime(tw, *params)
        if N is None or is_split(N) or not check_relations(N.dieudonne(), tau.m, k.mul(a, b)):
            continue
        found.append(N)
    return found
