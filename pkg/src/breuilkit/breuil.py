"""Generic Breuil modules with descent data.

A module of rank n is the free module (k[u]/u^N)^n with standard basis
e_1..e_n, a list of generators of the submodule M1 and the phi1-image of
each generator.  Elements are tuples of n TruncPoly coordinates.

Descent data assigns to every generator g of G a matrix A_g with
[g] e_j = sum_i A_g[i][j] e_i; on a vector x, [g] x = A_g * g(x).

Everything semilinear is decided by flattening to F_l: the map
(h_1..h_m) -> sum h_i m_i is F_l-linear, its kernel is the syzygy space,
and phi1 extends to (h_i) -> sum h_i^l phi1(m_i), which is F_l-linear too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import exactlin
from .errors import DomainError, InvariantViolation, UnsupportedTower
from .gfq import Field
from .upoly import GroupElem, LinPoly, TameTower, TruncPoly

Vector = tuple[TruncPoly, ...]
Matrix = tuple[tuple[TruncPoly, ...], ...]


# -- small helpers on vectors and matrices -------------------------------------------

def vec_zero(tower: TameTower, n: int) -> Vector:
    return tuple(tower.zero() for _ in range(n))


def basis_vector(tower: TameTower, n: int, j: int, poly: Optional[TruncPoly] = None) -> Vector:
    out = [tower.zero() for _ in range(n)]
    out[j] = tower.one() if poly is None else poly
    return tuple(out)


def vec_add(x: Vector, y: Vector) -> Vector:
    return tuple(a + b for a, b in zip(x, y))


def vec_sub(x: Vector, y: Vector) -> Vector:
    return tuple(a - b for a, b in zip(x, y))


def vec_scale(h: TruncPoly, x: Vector) -> Vector:
    return tuple(h * a for a in x)


def vec_act(g: GroupElem, x: Vector) -> Vector:
    return tuple(a.act(g) for a in x)


def vec_flat(x: Vector) -> np.ndarray:
    return np.concatenate([a.to_vector() for a in x])


def vec_unflat(tower: TameTower, flat: np.ndarray, n: int) -> Vector:
    size = tower.N * tower.k.f
    return tuple(TruncPoly.from_vector(tower, flat[i * size : (i + 1) * size]) for i in range(n))


def mat_vec(A: Matrix, x: Vector) -> Vector:
    n = len(A)
    out = []
    for i in range(n):
        acc = None
        for j in range(len(x)):
            term = A[i][j] * x[j]
            acc = term if acc is None else acc + term
        out.append(acc)
    return tuple(out)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    rows, inner, cols = len(A), len(B), len(B[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = A[i][0] * B[0][j]
            for t in range(1, inner):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_act(g: GroupElem, A: Matrix) -> Matrix:
    return tuple(tuple(p.act(g) for p in row) for row in A)


def identity_matrix(tower: TameTower, n: int) -> Matrix:
    return tuple(tuple(tower.one() if i == j else tower.zero() for j in range(n)) for i in range(n))


def diagonal_matrix(tower: TameTower, scalars: Sequence[int]) -> Matrix:
    n = len(scalars)
    return tuple(
        tuple(tower.poly({0: scalars[i]}) if i == j else tower.zero() for j in range(n)) for i in range(n)
    )


def apply_descent(A: Matrix, g: GroupElem, x: Vector) -> Vector:
    """[g] x = A_g * g(x)."""
    return mat_vec(A, vec_act(g, x))


# -- linear algebra over the residue field k ------------------------------------------

def k_rank(F: Field, rows: Sequence[Sequence[int]]) -> int:
    """Rank over k, computed as F_l-rank of all k-multiples divided by f."""
    if not rows:
        return 0
    flat = []
    for row in rows:
        for t in range(F.f):
            c = F.l**t
            flat.append(np.concatenate([F.to_digits(F.mul(c, x)) for x in row]))
    return exactlin.rank(np.array(flat), F.l) // F.f


def k_solve(F: Field, cols: Sequence[Sequence[int]], target: Sequence[int]) -> Optional[list[int]]:
    """Coefficients mu with sum mu_i cols[i] = target over k (least solution by elimination)."""
    n = len(target)
    m = len(cols)
    # augmented matrix rows = coordinates, columns = unknowns
    a = [[cols[j][i] for j in range(m)] + [target[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, n) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = F.inv(a[r][c])
        a[r] = [F.mul(inv, x) for x in a[r]]
        for i in range(n):
            if i != r and a[i][c]:
                fac = a[i][c]
                a[i] = [F.sub(x, F.mul(fac, y)) for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
    if any(a[i][m] for i in range(r, n)):
        return None
    mu = [0] * m
    for row, c in enumerate(piv_cols):
        mu[c] = a[row][m]
    return mu


# -- the data types ---------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    axiom: str
    detail: str


@dataclass(frozen=True)
class DescentData:
    """Matrices A_g for each generator g of the tower's group (same order)."""

    matrices: tuple[Matrix, ...]

    @classmethod
    def diagonal(cls, tower: TameTower, exponents: Sequence[int]) -> "DescentData":
        """[g] e_i = (g(pi)/pi)^{exponents[i]} e_i."""
        k = tower.k
        mats = tuple(
            diagonal_matrix(tower, [k.pow(g.zeta, x) for x in exponents]) for g in tower.generators
        )
        return cls(mats)


@dataclass(frozen=True)
class DieudonneData:
    """F, V and an inertia generator on M/uM, all in the row convention.

    ``F_matrix[i][j]`` is the coefficient of b_j in F(b_i).  ``T`` records
    the scalar used by relation checks when known.
    """

    dim: int
    F_matrix: tuple[tuple[int, ...], ...]
    V_matrix: tuple[tuple[int, ...], ...]
    inertia_scalars: tuple[tuple[int, ...], ...]
    field: Field
    T: Optional[int] = None

    def FV(self) -> tuple[tuple[int, ...], ...]:
        return k_matmul(self.field, self.F_matrix, self.V_matrix)

    def VF(self) -> tuple[tuple[int, ...], ...]:
        return k_matmul(self.field, self.V_matrix, self.F_matrix)

    def permuted(self, order: Sequence[int]) -> "DieudonneData":
        """Same data on the reordered basis (b_order[0], b_order[1], ...)."""
        def perm(m):
            return tuple(tuple(m[i][j] for j in order) for i in order)

        return DieudonneData(self.dim, perm(self.F_matrix), perm(self.V_matrix),
                             perm(self.inertia_scalars), self.field, self.T)


def k_matmul(F: Field, A, B) -> tuple[tuple[int, ...], ...]:
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = 0
            for t in range(m):
                acc = F.add(acc, F.mul(A[i][t], B[t][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


class BreuilModule:
    """Free module of rank n with M1 generators and their phi1 images."""

    def __init__(self, tower: TameTower, rank: int, m1_gens: Sequence[Vector], phi1_images: Sequence[Vector],
                 labels: Optional[Sequence[str]] = None):
        self.tower = tower
        self.rank = rank
        self.m1_gens = tuple(tuple(v) for v in m1_gens)
        self.phi1_images = tuple(tuple(v) for v in phi1_images)
        self.labels = tuple(labels) if labels else tuple(f"e{i}" for i in range(rank))

    def __repr__(self) -> str:
        return f"BreuilModule(rank={self.rank}, gens={len(self.m1_gens)}, {self.tower!r})"

    # -- flattened linear maps -------------------------------------------------------
    @property
    def _block(self) -> int:
        return self.tower.N * self.tower.k.f

    def shape_problems(self) -> list[Violation]:
        out = []
        n, N = self.rank, self.tower.N
        if len(self.m1_gens) != len(self.phi1_images):
            out.append(Violation("shape", "generator and phi1-image counts differ"))
        for label, vecs in (("generator", self.m1_gens), ("phi1 image", self.phi1_images)):
            for idx, v in enumerate(vecs):
                if len(v) != n:
                    out.append(Violation("shape", f"{label} {idx} has {len(v)} coordinates, expected {n}"))
                elif any(p.length != N or p.tower != self.tower for p in v):
                    out.append(Violation("shape", f"{label} {idx} has a coordinate outside k[u]/u^{N}"))
        return out

    @cached_property
    def generator_matrix(self) -> np.ndarray:
        """F_l matrix of (h_1..h_m) -> sum h_i m_i."""
        tw = self.tower
        D = len(self.m1_gens) * self._block
        comps = []
        unknowns = [LinPoly.unknown(tw, D, i * self._block)[0] for i in range(len(self.m1_gens))]
        for c in range(self.rank):
            acc = LinPoly.zeros(tw, D)
            for h, m in zip(unknowns, self.m1_gens):
                if not m[c].is_zero():
                    acc = acc + h.mul_known(m[c])
            comps.append(acc.rows())
        return np.concatenate(comps, axis=0)

    @cached_property
    def phi1_matrix(self) -> np.ndarray:
        """F_l matrix of (h_1..h_m) -> sum h_i^l phi1(m_i)."""
        tw = self.tower
        D = len(self.m1_gens) * self._block
        powers = [LinPoly.unknown(tw, D, i * self._block)[0].lth_power() for i in range(len(self.m1_gens))]
        comps = []
        for c in range(self.rank):
            acc = LinPoly.zeros(tw, D)
            for hl, img in zip(powers, self.phi1_images):
                if not img[c].is_zero():
                    acc = acc + hl.mul_known(img[c])
            comps.append(acc.rows())
        return np.concatenate(comps, axis=0)

    @cached_property
    def _solver(self) -> exactlin.LinearSolver:
        return exactlin.LinearSolver(self.generator_matrix, self.tower.l)

    @cached_property
    def syzygy_basis(self) -> np.ndarray:
        return _syzygies(self.generator_matrix, self.tower.l)

    def coordinates(self, x: Vector) -> Optional[np.ndarray]:
        """Flattened (h_i) with sum h_i m_i = x, or None if x is not in M1."""
        return self._solver.solve(vec_flat(x))

    def in_m1(self, x: Vector) -> bool:
        return self.coordinates(x) is not None

    def phi1(self, x: Vector) -> Vector:
        coords = self.coordinates(x)
        if coords is None:
            raise DomainError("vector is not in M1")
        flat = (self.phi1_matrix @ coords) % self.tower.l
        return vec_unflat(self.tower, flat, self.rank)

    def m1_dimension(self) -> int:
        """F_l-dimension of M1."""
        return self._solver.rank

    # -- axioms ----------------------------------------------------------------------
    def problems(self) -> list[Violation]:
        out = self.shape_problems()
        if out:
            return out
        tw = self.tower
        n = self.rank
        for j in range(n):
            target = basis_vector(tw, n, j, tw.monomial(tw.e_K))
            if not self.in_m1(target):
                out.append(Violation("filtration", f"u^{tw.e_K} e{j} is not in M1"))
        syz = self.syzygy_basis
        if syz.size:
            bad = np.any((self.phi1_matrix @ syz.T) % tw.l, axis=0)
            if np.any(bad):
                out.append(Violation("phi1", f"phi1 is not well defined on {int(bad.sum())} syzygies"))
        consts = [[p.constant() for p in img] for img in self.phi1_images]
        if k_rank(tw.k, consts) != n:
            out.append(Violation("phi1_span", "phi1(M1) does not span M modulo u"))
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def minimal_generators(self) -> list[int]:
        """Indices of n generators whose phi1 images are independent mod u."""
        F = self.tower.k
        chosen: list[int] = []
        rows: list[list[int]] = []
        for i, img in enumerate(self.phi1_images):
            cand = rows + [[p.constant() for p in img]]
            if k_rank(F, cand) == len(cand):
                rows = cand
                chosen.append(i)
            if len(chosen) == self.rank:
                break
        if len(chosen) != self.rank:
            raise DomainError("phi1 modulo u is not bijective")
        return chosen


_SYZ_CACHE: dict[tuple, np.ndarray] = {}


def _syzygies(mat: np.ndarray, l: int) -> np.ndarray:
    key = (mat.tobytes(), mat.shape, l)
    hit = _SYZ_CACHE.get(key)
    if hit is None:
        hit = exactlin.kernel_matrix(mat, l)
        if len(_SYZ_CACHE) > 512:
            _SYZ_CACHE.clear()
        _SYZ_CACHE[key] = hit
    return hit


# -- descent data ---------------------------------------------------------------------

def descent_matrices_all(tower: TameTower, dd: DescentData) -> tuple[dict[GroupElem, Matrix], list[str]]:
    """Extend generator matrices to all of G; report Cayley edges that disagree."""
    n = len(dd.matrices[0]) if dd.matrices else 0
    full: dict[GroupElem, Matrix] = {tower.identity: identity_matrix(tower, n)}
    for elem, (parent, gi) in tower.cayley_tree().items():
        g = tower.generators[gi]
        full[elem] = mat_mul(full[parent], mat_act(parent, dd.matrices[gi]))
    bad = []
    for x, Ax in full.items():
        for gi, g in enumerate(tower.generators):
            y = tower.mul(x, g)
            if full[y] != mat_mul(Ax, mat_act(x, dd.matrices[gi])):
                bad.append(f"[{x}][{g}] != [{y}]")
    return full, bad


def validate(M: BreuilModule, dd: Optional[DescentData] = None) -> list[Violation]:
    """All axiom failures of M (and of its descent data when given)."""
    out = M.problems()
    if dd is None or any(v.axiom == "shape" for v in out):
        return out
    tw = M.tower
    n = M.rank
    if len(dd.matrices) != len(tw.generators):
        return out + [Violation("shape", "descent data needs one matrix per generator")]
    for A in dd.matrices:
        if len(A) != n or any(len(row) != n for row in A) or any(p.length != tw.N for row in A for p in row):
            return out + [Violation("shape", "descent matrix has the wrong size")]
    m1_ok = not any(v.axiom in ("filtration",) for v in out)
    for gi, g in enumerate(tw.generators):
        A = dd.matrices[gi]
        for idx, (m, img) in enumerate(zip(M.m1_gens, M.phi1_images)):
            moved = apply_descent(A, g, m)
            coords = M.coordinates(moved)
            if coords is None:
                out.append(Violation("descent_filtration", f"[{g}] moves generator {idx} outside M1"))
                continue
            lhs = vec_unflat(tw, (M.phi1_matrix @ coords) % tw.l, n)
            rhs = apply_descent(A, g, img)
            if lhs != rhs:
                out.append(Violation("descent_phi1", f"[{g}] does not commute with phi1 on generator {idx}"))
    _, bad = descent_matrices_all(tw, dd)
    if bad:
        out.append(Violation("descent_cocycle", "; ".join(bad[:3]) + (" ..." if len(bad) > 3 else "")))
    del m1_ok
    return out


# -- morphisms --------------------------------------------------------------------------

@dataclass(frozen=True)
class Morphism:
    """k[u]-linear map given by matrix P with P[i][j] = coefficient of f_i in P(e_j)."""

    source: BreuilModule
    target: BreuilModule
    matrix: Matrix

    def __call__(self, x: Vector) -> Vector:
        return mat_vec(self.matrix, x)

    def flat_matrix(self) -> np.ndarray:
        """F_l matrix of the underlying map (k[u]/u^N)^n -> (k[u]/u^N)^m."""
        tw = self.source.tower
        block = tw.N * tw.k.f
        n = self.source.rank
        D = n * block
        unknowns = [LinPoly.unknown(tw, D, j * block)[0] for j in range(n)]
        comps = []
        for i in range(self.target.rank):
            acc = LinPoly.zeros(tw, D)
            for j in range(n):
                if not self.matrix[i][j].is_zero():
                    acc = acc + unknowns[j].mul_known(self.matrix[i][j])
            comps.append(acc.rows())
        return np.concatenate(comps, axis=0)


def morphism_problems(phi: Morphism, dd_source: Optional[DescentData] = None,
                      dd_target: Optional[DescentData] = None) -> list[Violation]:
    M, N = phi.source, phi.target
    out = []
    for idx, (m, img) in enumerate(zip(M.m1_gens, M.phi1_images)):
        pm = phi(m)
        if not N.in_m1(pm):
            out.append(Violation("morphism_filtration", f"image of generator {idx} is not in M1"))
            continue
        if N.phi1(pm) != phi(img):
            out.append(Violation("morphism_phi1", f"map does not commute with phi1 on generator {idx}"))
    if dd_source is not None and dd_target is not None:
        tw = M.tower
        for gi, g in enumerate(tw.generators):
            lhs = mat_mul(phi.matrix, dd_source.matrices[gi])
            rhs = mat_mul(dd_target.matrices[gi], mat_act(g, phi.matrix))
            if lhs != rhs:
                out.append(Violation("morphism_descent", f"map does not commute with [{g}]"))
    return out


def is_morphism(phi: Morphism, dd_source=None, dd_target=None) -> bool:
    return not morphism_problems(phi, dd_source, dd_target)


def check_exact(sub: BreuilModule, mid: BreuilModule, quot: BreuilModule, inc: Morphism, proj: Morphism,
                descent: Optional[tuple[DescentData, DescentData, DescentData]] = None) -> bool:
    """Whether 0 -> sub -> mid -> quot -> 0 is a short exact sequence of Breuil modules."""
    dds = descent or (None, None, None)
    if not is_morphism(inc, dds[0], dds[1]) or not is_morphism(proj, dds[1], dds[2]):
        return False
    l = sub.tower.l
    a = inc.flat_matrix()
    b = proj.flat_matrix()
    dim_sub, dim_quot = a.shape[1], b.shape[0]
    if exactlin.rank(a, l) != dim_sub or exactlin.rank(b, l) != dim_quot:
        return False
    if np.any((b @ a) % l):
        return False
    return b.shape[1] == dim_sub + dim_quot


# -- Dieudonne reduction ------------------------------------------------------------------

def c_pi(tower: TameTower) -> int:
    """Residue of c_pi = -G_pi^l where the minimal polynomial is u^{e_K} - l G_pi."""
    if tower.pi_unit is None:
        raise UnsupportedTower("the tower declares no relation pi^{e_K} = -l * unit")
    k = tower.k
    g_pi = k.neg(tower.pi_unit)
    return k.neg(k.frobenius(g_pi))


def g_pi_residue(tower: TameTower) -> int:
    if tower.pi_unit is None:
        raise UnsupportedTower("the tower declares no relation pi^{e_K} = -l * unit")
    return tower.k.neg(tower.pi_unit)


def dieudonne_reduce(M: BreuilModule, dd: Optional[DescentData] = None, T: Optional[int] = None) -> DieudonneData:
    """F, V and the inertia action on M/uM (row convention)."""
    tw = M.tower
    k = tw.k
    n = M.rank
    cpi_inv = k.inv(c_pi(tw))
    rows_F = []
    for j in range(n):
        img = M.phi1(basis_vector(tw, n, j, tw.monomial(tw.e_K)))
        rows_F.append(tuple(k.mul(cpi_inv, p.constant()) for p in img))
    chosen = M.minimal_generators()
    cols = [[p.constant() for p in M.phi1_images[i]] for i in chosen]
    rows_V = []
    for j in range(n):
        target = [1 if t == j else 0 for t in range(n)]
        mu = k_solve(k, cols, target)
        if mu is None:
            raise InvariantViolation("phi1 modulo u is not bijective")
        lam = [k.frob_inverse(x) for x in mu]
        acc = [0] * n
        for coeff, gi in zip(lam, chosen):
            for t, p in enumerate(M.m1_gens[gi]):
                acc[t] = k.add(acc[t], k.mul(coeff, p.constant()))
        rows_V.append(tuple(acc))
    if dd is not None and tw.e > 1:
        A = dd.matrices[tw.generators.index(tw.sigma)]
        inertia = tuple(tuple(A[j][i].constant() for j in range(n)) for i in range(n))
    else:
        inertia = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    return DieudonneData(n, tuple(rows_F), tuple(rows_V), inertia, k, T)


def reduce_morphism(phi: Morphism) -> tuple[tuple[int, ...], ...]:
    """Matrix of phi modulo u in the row convention (row i = image of b_i)."""
    n, m = phi.source.rank, phi.target.rank
    return tuple(tuple(phi.matrix[j][i].constant() for j in range(m)) for i in range(n))


# -- direct sums ---------------------------------------------------------------------------

def direct_sum(M: BreuilModule, N: BreuilModule) -> BreuilModule:
    tw = M.tower
    zM = [tw.zero() for _ in range(N.rank)]
    zN = [tw.zero() for _ in range(M.rank)]
    gens = [tuple(v) + tuple(zM) for v in M.m1_gens] + [tuple(zN) + tuple(v) for v in N.m1_gens]
    imgs = [tuple(v) + tuple(zM) for v in M.phi1_images] + [tuple(zN) + tuple(v) for v in N.phi1_images]
    return BreuilModule(tw, M.rank + N.rank, gens, imgs, M.labels + N.labels)


def direct_sum_descent(tower: TameTower, dd1: DescentData, dd2: DescentData) -> DescentData:
    mats = []
    for A, B in zip(dd1.matrices, dd2.matrices):
        n, m = len(A), len(B)
        rows = []
        for i in range(n + m):
            row = []
            for j in range(n + m):
                if i < n and j < n:
                    row.append(A[i][j])
                elif i >= n and j >= n:
                    row.append(B[i - n][j - n])
                else:
                    row.append(tower.zero())
            rows.append(tuple(row))
        mats.append(tuple(rows))
    return DescentData(tuple(mats))


# -- fault injection ------------------------------------------------------------------------

FAULT_SITES = ("phi1", "m1", "descent")


@dataclass(frozen=True)
class Fault:
    """One perturbed coefficient: ``delta`` is added at u^degree.

    For "phi1" and "m1", ``index`` is the generator and ``coord`` the
    coordinate.  For "descent", ``index`` is the group generator and
    ``coord`` = (row, column) flattened as row * rank + column.
    """

    site: str
    index: int
    coord: int
    degree: int
    delta: int

    def as_dict(self) -> dict:
        return {"site": self.site, "index": self.index, "coord": self.coord,
                "degree": self.degree, "delta": self.delta}


def _bump(p: TruncPoly, degree: int, delta: int) -> TruncPoly:
    arr = p.coeffs.copy()
    arr[degree] = p.field.add(int(arr[degree]), delta)
    return TruncPoly(p.tower, arr)


def inject_fault(M: BreuilModule, dd: DescentData, fault: Fault) -> tuple[BreuilModule, DescentData]:
    gens = [list(v) for v in M.m1_gens]
    imgs = [list(v) for v in M.phi1_images]
    mats = [[list(row) for row in A] for A in dd.matrices]
    if fault.site == "phi1":
        imgs[fault.index][fault.coord] = _bump(imgs[fault.index][fault.coord], fault.degree, fault.delta)
    elif fault.site == "m1":
        gens[fault.index][fault.coord] = _bump(gens[fault.index][fault.coord], fault.degree, fault.delta)
    elif fault.site == "descent":
        i, j = divmod(fault.coord, M.rank)
        mats[fault.index][i][j] = _bump(mats[fault.index][i][j], fault.degree, fault.delta)
    else:
        raise DomainError(f"unknown fault site {fault.site!r}")
    out = BreuilModule(M.tower, M.rank, gens, imgs, M.labels)
    return out, DescentData(tuple(tuple(tuple(row) for row in A) for A in mats))


def random_fault(M: BreuilModule, dd: DescentData, rng) -> Fault:
    """Draw one coefficient perturbation.

    delta is taken outside kL and M1 generators are perturbed below u^{e_K}
    only, since higher terms already lie in u^{e_K} M.  Even so a descent
    perturbation can land on another valid descent datum (a diagonal entry
    times a unit of kL, or a high-degree term that the axioms tolerate);
    ``validate_flat`` tells those apart from genuine faults.
    """
    tw = M.tower
    outside = [x for x in range(1, tw.k.q) if not tw.in_kL(x)]
    if not outside:
        raise UnsupportedTower("fault injection needs a residue field strictly larger than kL")
    site = rng.choice(FAULT_SITES)
    delta = rng.choice(outside)
    if site == "descent":
        return Fault(site, rng.randrange(len(dd.matrices)), rng.randrange(M.rank * M.rank),
                     rng.randrange(tw.N), delta)
    index = rng.randrange(len(M.m1_gens))
    degree = rng.randrange(tw.e_K) if site == "m1" else rng.randrange(tw.N)
    return Fault(site, index, rng.randrange(M.rank), degree, delta)


# -- flat reference check -------------------------------------------------------------------

def validate_flat(M: BreuilModule, dd: Optional[DescentData] = None) -> bool:
    """Slow second validator working on M as an F_l-vector space.

    Unlike ``validate`` it never reasons with generators: M1 is the F_l-span
    of every lambda u^i m_j, phi1 is tested for well-definedness on that
    spanning set, and each of the |G| operators [g] is built as a flat
    matrix and checked against the full group law and against phi1.
    """
    tw = M.tower
    l = tw.l
    n = M.rank
    block = tw.N * tw.k.f
    dim = n * block
    if M.shape_problems():
        return False

    def unit(idx: int) -> TruncPoly:
        v = np.zeros(block, dtype=np.int64)
        v[idx] = 1
        return TruncPoly.from_vector(tw, v)

    def flat(x: Sequence[TruncPoly]) -> np.ndarray:
        return np.concatenate([p.to_vector() for p in x]) % l

    scalars = [unit(idx) for idx in range(block)]
    span = np.array([flat([s * c for c in m]) for m in M.m1_gens for s in scalars]).T
    images = np.array([flat([s.lth_power() * c for c in img]) for img in M.phi1_images for s in scalars]).T
    # phi1 must vanish on relations among the spanning vectors
    relations = exactlin.kernel_matrix(span, l, cols=span.shape[1])
    if relations.size and np.any((images @ relations.T) % l):
        return False
    solver = exactlin.LinearSolver(span, l)
    shifted = np.array([flat([tw.monomial(tw.e_K) * s if i == j else tw.zero() for j in range(n)])
                        for i in range(n) for s in scalars]).T
    if not solver.solve_many(shifted)[1].all():
        return False
    generated = np.array([flat([s * c for c in img]) for img in M.phi1_images for s in scalars])
    if exactlin.rank(generated, l) != dim:
        return False
    if dd is None:
        return True
    if len(dd.matrices) != len(tw.generators):
        return False

    basis = [tuple(unit(idx) if i == j else tw.zero() for j in range(n)) for i in range(n) for idx in range(block)]

    def operator(A: Matrix, g: GroupElem) -> np.ndarray:
        cols = []
        for x in basis:
            gx = [p.act(g) for p in x]
            cols.append(flat([sum((A[i][j] * gx[j] for j in range(1, n)), A[i][0] * gx[0]) for i in range(n)]))
        return np.array(cols).T

    ops = {tw.identity: np.eye(dim, dtype=np.int64)}
    frontier = [tw.identity]
    gen_ops = [operator(A, g) for A, g in zip(dd.matrices, tw.generators)]
    while frontier:
        nxt = []
        for x in frontier:
            for g, op in zip(tw.generators, gen_ops):
                y = tw.mul(x, g)
                if y not in ops:
                    ops[y] = (ops[x] @ op) % l
                    nxt.append(y)
        frontier = nxt
    elems = tw.elements
    if len(ops) != len(elems):
        return False
    for x in elems:
        for y in elems:
            if not np.array_equal((ops[x] @ ops[y]) % l, ops[tw.mul(x, y)]):
                return False
    for op in ops.values():
        coords, ok = solver.solve_many((op @ span) % l)
        if not ok.all():
            return False
        if not np.array_equal((images @ coords) % l, (op @ images) % l):
            return False
    return True
