"""Brute-force references used by the tests.

Nothing here calls the closed-form classifications in the package: hom
spaces and extension groups are computed as kernels of F_l-linear systems
assembled directly from the module axioms.
"""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

from breuilkit import exactlin
from breuilkit.breuil import BreuilModule, DescentData, Morphism
from breuilkit.rank1 import Rank1Module
from breuilkit.upoly import GroupElem, LinPoly, TameTower, TruncPoly


def _shift_down(p: LinPoly, k: int) -> LinPoly:
    out = np.zeros_like(p.data)
    out[: p.length - k] = p.data[k:]
    return LinPoly(p.tower, out)


# -- hom spaces -------------------------------------------------------------------------

def hom_space(M: BreuilModule, ddM: Optional[DescentData], N: BreuilModule,
              ddN: Optional[DescentData]) -> list[tuple[tuple[TruncPoly, ...], ...]]:
    """An F_l-basis of all maps M -> N (matrices P with P[i][j] = f_i-coefficient of P(e_j))."""
    tw = M.tower
    block = tw.N * tw.k.f
    nM, nN = M.rank, N.rank
    gensM, gensN = M.m1_gens, N.m1_gens
    n_p = nN * nM
    D = (n_p + len(gensM) * len(gensN)) * block
    P = [[LinPoly.unknown(tw, D, (i * nM + j) * block)[0] for j in range(nM)] for i in range(nN)]
    X = [[LinPoly.unknown(tw, D, (n_p + a * len(gensN) + b) * block)[0] for b in range(len(gensN))]
         for a in range(len(gensM))]

    def apply(vec):
        out = []
        for i in range(nN):
            acc = LinPoly.zeros(tw, D)
            for j in range(nM):
                if not vec[j].is_zero():
                    acc = acc + P[i][j].mul_known(vec[j])
            out.append(acc)
        return out

    rows = []
    for a, (m, img) in enumerate(zip(gensM, M.phi1_images)):
        image = apply(m)
        combo = [LinPoly.zeros(tw, D) for _ in range(nN)]
        phi_combo = [LinPoly.zeros(tw, D) for _ in range(nN)]
        for b, (n_gen, n_img) in enumerate(zip(gensN, N.phi1_images)):
            xl = X[a][b].lth_power()
            for i in range(nN):
                if not n_gen[i].is_zero():
                    combo[i] = combo[i] + X[a][b].mul_known(n_gen[i])
                if not n_img[i].is_zero():
                    phi_combo[i] = phi_combo[i] + xl.mul_known(n_img[i])
        mapped_img = apply(img)
        for i in range(nN):
            rows.append((image[i] - combo[i]).rows())
            rows.append((phi_combo[i] - mapped_img[i]).rows())
    if ddM is not None and ddN is not None:
        for gi, g in enumerate(tw.generators):
            A, B = ddM.matrices[gi], ddN.matrices[gi]
            for i in range(nN):
                for j in range(nM):
                    lhs = LinPoly.zeros(tw, D)
                    rhs = LinPoly.zeros(tw, D)
                    for t in range(nM):
                        if not A[t][j].is_zero():
                            lhs = lhs + P[i][t].mul_known(A[t][j])
                    for t in range(nN):
                        if not B[i][t].is_zero():
                            rhs = rhs + P[t][j].act(g).mul_known(B[i][t])
                    rows.append((lhs - rhs).rows())
    system = np.concatenate(rows, axis=0)
    kernel = exactlin.kernel_basis(system, tw.l, cols=D)
    if not kernel:
        return []
    proj = exactlin.row_space(np.array([v[: n_p * block] for v in kernel]), tw.l)
    out = []
    for vec in proj:
        mat = tuple(
            tuple(TruncPoly.from_vector(tw, vec[(i * nM + j) * block : (i * nM + j + 1) * block]) for j in range(nM))
            for i in range(nN)
        )
        out.append(mat)
    return out


def span_elements(basis, l: int, limit: int = 6):
    """Every nonzero F_l-combination of a small basis."""
    if len(basis) > limit:
        raise ValueError("hom space too large to enumerate")
    for coeffs in itertools.product(range(l), repeat=len(basis)):
        if not any(coeffs):
            continue
        acc = None
        for c, mat in zip(coeffs, basis):
            if c == 0:
                continue
            term = tuple(tuple(p.scale(c) for p in row) for row in mat)
            acc = term if acc is None else tuple(tuple(x + y for x, y in zip(r1, r2)) for r1, r2 in zip(acc, term))
        yield acc


def has_free_kernel(M: BreuilModule, N: BreuilModule, P) -> bool:
    """u^{N-1} ker(P) != 0, tested directly on a kernel basis."""
    tw = M.tower
    block = tw.N * tw.k.f
    phi = Morphism(M, N, P)
    mat = phi.flat_matrix()
    for vec in exactlin.kernel_basis(mat, tw.l, cols=mat.shape[1]):
        top = [TruncPoly.from_vector(tw, vec[j * block : (j + 1) * block]).shift(tw.N - 1) for j in range(M.rank)]
        if any(not p.is_zero() for p in top):
            return True
    return False


def generic_iso_exists(M, ddM, N, ddN) -> bool:
    basis = hom_space(M, ddM, N, ddN)
    return any(not has_free_kernel(M, N, P) for P in span_elements(basis, M.tower.l))


# -- extension groups ------------------------------------------------------------------------

class ExtSystem:
    """Extensions of quot = M(r,a,c) by sub = M(s,b,d) as cocycles modulo coboundaries.

    Unknowns are h and the off-diagonal descent coefficients A_g, one per
    group generator.  Cocycle conditions: M1 contains u^{e_K} M, every [g]
    preserves M1 and commutes with phi1, and the A_g satisfy the group
    relations.
    """

    def __init__(self, sub: Rank1Module, quot: Rank1Module):
        tw = sub.tower
        self.tower = tw
        self.sub, self.quot = sub, quot
        self.block = tw.N * tw.k.f
        gens = tw.generators
        self.D = (1 + len(gens)) * self.block
        self.h = LinPoly.unknown(tw, self.D, 0)[0]
        self.A = [LinPoly.unknown(tw, self.D, (1 + i) * self.block)[0] for i in range(len(gens))]

    def _zeta_pow(self, g: GroupElem, e: int) -> int:
        return self.tower.k.pow(g.zeta, e)

    def cocycle_rows(self) -> np.ndarray:
        tw = self.tower
        k = tw.k
        r, s = self.quot.r, self.sub.r
        k1, k2 = self.sub.k2, self.quot.k2
        a, b = self.quot.a, self.sub.a
        f = k.f
        rows = []
        low = s - (tw.e_K - r)
        if low > 0:
            rows.append(self.h.rows()[: low * f])
        for gi, g in enumerate(tw.generators):
            A = self.A[gi]
            delta = (A.shift(r).scale(self._zeta_pow(g, r)) + self.h.act(g).scale(self._zeta_pow(g, k1))
                     - self.h.scale(self._zeta_pow(g, r + k2)))
            rows.append(delta.rows()[: s * f])
            quotient = _shift_down(delta, s)
            rows.append((quotient.lth_power().scale(b) - A.scale(a)).rows())
        for left, right in tw.relations():
            rows.append((self._word_corner(left) - self._word_corner(right)).rows())
        return np.concatenate(rows, axis=0) if rows else np.zeros((0, self.D), dtype=np.int64)

    def _word_corner(self, word) -> LinPoly:
        tw = self.tower
        k = tw.k
        k1, k2 = self.sub.k2, self.quot.k2
        x = tw.identity
        corner = LinPoly.zeros(tw, self.D)
        for gi in word:
            h = tw.generators[gi]
            zeta_h = k.frobenius(h.zeta, x.t * tw.f_L)
            corner = corner.scale(k.pow(zeta_h, k2)) + self.A[gi].act(x).scale(self._zeta_pow(x, k1))
            x = tw.mul(x, h)
        return corner

    def coboundary_rows(self) -> np.ndarray:
        """Images of the basis of t under t -> (u^s t - (b/a) u^r t^l, zeta^k1 g(x) - zeta^k2 x)."""
        tw = self.tower
        k = tw.k
        ratio = k.div(self.sub.a, self.quot.a)
        t = LinPoly.unknown(tw, self.block, 0)[0]
        x = t.lth_power().scale(ratio)
        parts = [(t.shift(self.sub.r) - x.shift(self.quot.r)).rows()]
        for g in tw.generators:
            parts.append((x.act(g).scale(self._zeta_pow(g, self.sub.k2)) - x.scale(self._zeta_pow(g, self.quot.k2))).rows())
        # columns of this matrix are images of basis vectors of t
        return np.concatenate(parts, axis=0).T % tw.l

    def cocycles(self) -> np.ndarray:
        return exactlin.kernel_matrix(self.cocycle_rows(), self.tower.l)

    def dimension(self) -> int:
        l = self.tower.l
        Z = self.cocycles()
        B = self.coboundary_rows()
        dz = exactlin.rank(Z, l) if Z.size else 0
        db = exactlin.rank(B, l) if B.size else 0
        if Z.size and B.size and exactlin.rank(np.vstack([Z, B]), l) != dz:
            raise AssertionError("a coboundary fails the cocycle conditions")
        return dz - db

    def parameter_vector(self, h: TruncPoly) -> np.ndarray:
        """Unknown vector for the normal form (h, A_g = 0)."""
        vec = np.zeros(self.D, dtype=np.int64)
        vec[: self.block] = h.to_vector()
        return vec

    def classes_spanned(self, hs: list[TruncPoly]) -> int:
        """Dimension of the span of the given normal forms in Z/B."""
        l = self.tower.l
        B = self.coboundary_rows()
        base = exactlin.rank(B, l) if B.size else 0
        if not hs:
            return 0
        extra = np.array([self.parameter_vector(h) for h in hs])
        stacked = np.vstack([B, extra]) if B.size else extra
        return exactlin.rank(stacked, l) - base


# -- small power searches ------------------------------------------------------------------

def brute_power_residue(q_field, x: int, d: int) -> bool:
    return any(q_field.pow(y, d) == x for y in q_field.units())


# -- naive first cohomology ------------------------------------------------------------------

def naive_h1(tower: TameTower, n: int, multiplicative: bool) -> int:
    """#H^1 by listing generator values, testing the cocycle law, and listing coboundaries."""
    from breuilkit.cohom import Cocycle

    k = tower.k
    ring = [TruncPoly.make(tower, c, n) for c in itertools.product(range(k.q), repeat=n)]
    if multiplicative:
        ring = [p for p in ring if p.is_unit()]
    gens = tower.generators
    if not gens:
        return 1
    kind = "multiplicative" if multiplicative else "additive"
    cocycles = 0
    for values in itertools.product(ring, repeat=len(gens)):
        if Cocycle(tower, tuple(values), kind).is_valid():
            cocycles += 1
    boundaries = set()
    for b in ring:
        if multiplicative:
            inv = b.inverse()
            boundaries.add(tuple(b.act(g) * inv for g in gens))
        else:
            boundaries.add(tuple(b.act(g) - b for g in gens))
    assert cocycles % len(boundaries) == 0
    return cocycles // len(boundaries)
