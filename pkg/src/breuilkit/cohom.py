"""Group cohomology of k[u]/u^n under the tame Galois action.

The group acts by g(sum a_i u^i) = sum g(a_i) zeta_g^i u^i, optionally
twisted by zeta_g^w.  Cocycles are stored on the generators of G and
extended along a spanning tree of the Cayley graph; a cocycle is valid when
every Cayley edge agrees with the extension.

Coboundary equations are solved by flattening to F_l-linear systems, since
the action is F_l-linear.  :func:`h1_sizes_bruteforce` counts cocycles and
coboundaries by exhaustive enumeration and is meant as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from . import exactlin
from .errors import GuardError, InvariantViolation, DomainError, guard_limit
from .upoly import GroupElem, TameTower, TruncPoly

Kind = Literal["additive", "multiplicative"]

BRUTE_FORCE_BUDGET = 10**7


@dataclass(frozen=True)
class Cocycle:
    """Values on ``tower.generators`` (same order) of a 1-cocycle.

    Additive cocycles satisfy c_{gh} = c_g + g.c_h with the twisted action
    g.f = zeta_g^twist * g(f); multiplicative ones c_{gh} = c_g * g(c_h).
    """

    tower: TameTower
    values: tuple[TruncPoly, ...]
    kind: Kind = "additive"
    twist: int = 0

    def __post_init__(self):
        if len(self.values) != len(self.tower.generators):
            raise DomainError("one value per group generator is required")
        if self.kind == "multiplicative" and not all(v.is_unit() for v in self.values):
            raise DomainError("multiplicative cocycle values must be units")

    @property
    def length(self) -> int:
        if self.values:
            return self.values[0].length
        return self.tower.N

    def _combine(self, left: TruncPoly, g: GroupElem, right: TruncPoly) -> TruncPoly:
        if self.kind == "additive":
            return left + right.twisted_act(g, self.twist)
        return left * right.act(g)

    def _unit(self, n: int) -> TruncPoly:
        return self.tower.zero(n) if self.kind == "additive" else self.tower.one(n)

    def extend(self) -> dict[GroupElem, TruncPoly]:
        """Values on all of G along a breadth-first spanning tree."""
        tw = self.tower
        n = self.length
        out = {tw.identity: self._unit(n)}
        for elem, (parent, gi) in _tree_order(tw):
            out[elem] = self._combine(out[parent], parent, self.values[gi])
        return out

    def is_valid(self) -> bool:
        tw = self.tower
        full = self.extend()
        for x, cx in full.items():
            for gi, g in enumerate(tw.generators):
                if full[tw.mul(x, g)] != self._combine(cx, x, self.values[gi]):
                    return False
        return True

    def __mul__(self, other: "Cocycle") -> "Cocycle":
        if self.kind != "multiplicative" or other.kind != "multiplicative":
            raise DomainError("product is defined for multiplicative cocycles")
        return Cocycle(self.tower, tuple(a * b for a, b in zip(self.values, other.values)), "multiplicative")


def _tree_order(tower: TameTower) -> list[tuple[GroupElem, tuple[GroupElem, int]]]:
    # BFS insertion order guarantees parents come first
    return list(tower.cayley_tree().items())


def additive_coboundary(tower: TameTower, b: TruncPoly, twist: int = 0) -> Cocycle:
    return Cocycle(tower, tuple(b.twisted_act(g, twist) - b for g in tower.generators), "additive", twist)


def multiplicative_coboundary(tower: TameTower, b: TruncPoly) -> Cocycle:
    inv = b.inverse()
    return Cocycle(tower, tuple(b.act(g) * inv for g in tower.generators), "multiplicative")


def power_cocycle(tower: TameTower, i: int, length: Optional[int] = None) -> Cocycle:
    """The cocycle g -> (g(pi)/pi)^i."""
    k = tower.k
    vals = tuple(tower.poly({0: k.pow(g.zeta, i)}, length) for g in tower.generators)
    return Cocycle(tower, vals, "multiplicative")


def action_matrix(tower: TameTower, g: GroupElem, twist: int, n: int) -> np.ndarray:
    """F_l matrix of b -> zeta_g^twist * g(b) on k[u]/u^n in digit coordinates."""
    k = tower.k
    f = k.f
    frob = k.frob_matrix(g.t * tower.f_L)
    mat = np.zeros((n * f, n * f), dtype=np.int64)
    for i in range(n):
        scal = k.pow(g.zeta, i + twist)
        mat[i * f : (i + 1) * f, i * f : (i + 1) * f] = (k.mul_matrix(scal) @ frob) % k.l
    return mat


def additive_coboundary_solve(c: Cocycle, twist: Optional[int] = None) -> TruncPoly:
    """Some b with c_g = g.b - b on every generator (0 when c is zero)."""
    if c.kind != "additive":
        raise DomainError("additive_coboundary_solve needs an additive cocycle")
    w = c.twist if twist is None else twist
    tw = c.tower
    n = c.length
    size = n * tw.k.f
    if not tw.generators:
        return tw.zero(n)
    eye = np.eye(size, dtype=np.int64)
    blocks = [action_matrix(tw, g, w, n) - eye for g in tw.generators]
    mat = np.concatenate(blocks, axis=0)
    rhs = np.concatenate([v.to_vector() for v in c.values])
    x = exactlin.solve(mat, rhs, tw.l)
    if x is None:
        raise InvariantViolation("additive cocycle is not a coboundary")
    return TruncPoly.from_vector(tw, x, n)


def mult_cocycle_class(c: Cocycle) -> tuple[int, TruncPoly]:
    """Class i in Z/e and a unit b with c_g * g(b) / b = zeta_g^i on generators.

    The constant term is handled by search over k^x, after which the
    remaining cocycle is 1 mod u and is killed one degree at a time with
    the additive solver.
    """
    if c.kind != "multiplicative":
        raise DomainError("mult_cocycle_class needs a multiplicative cocycle")
    tw = c.tower
    k = tw.k
    n = c.length
    gens = tw.generators
    if not gens:
        return 0, tw.one(n)
    consts = [v.constant() for v in c.values]
    found = None
    for i in range(tw.e):
        targets = [k.pow(g.zeta, i) for g in gens]
        for b0 in k.units():
            inv_b0 = k.inv(b0)
            if all(
                k.mul(k.mul(cg, tw.frob_L(b0, g.t)), inv_b0) == tg
                for cg, g, tg in zip(consts, gens, targets)
            ):
                found = (i, b0)
                break
        if found:
            break
    if found is None:
        raise InvariantViolation("constant term of the cocycle has no class")
    cls, b0 = found
    witness = tw.poly({0: b0}, n)
    cur = [v * witness.act(g) * witness.inverse() for v, g in zip(c.values, gens)]
    cur = [v.scale(k.inv(k.pow(g.zeta, cls))) for v, g in zip(cur, gens)]
    for m in range(1, n):
        part = [tw.poly({m: v[m]}, n) for v in cur]
        if all(p.is_zero() for p in part):
            continue
        beta = additive_coboundary_solve(Cocycle(tw, tuple(-p for p in part), "additive", 0))
        beta = tw.poly({m: beta[m]}, n)
        corr = tw.one(n) + beta
        corr_inv = corr.inverse()
        cur = [v * corr.act(g) * corr_inv for v, g in zip(cur, gens)]
        witness = witness * corr
    if any(v != tw.one(n) for v in cur):
        raise InvariantViolation("degree-by-degree lifting did not trivialize the cocycle")
    return cls, witness


# -- exhaustive counting --------------------------------------------------------------

class _Batch:
    """All elements of k[u]/u^n (or its units) as a (M, n) array of field codes."""

    def __init__(self, tower: TameTower, n: int, units_only: bool):
        k = tower.k
        q = k.q
        idx = np.arange(q**n, dtype=np.int64)
        coeffs = np.zeros((q**n, n), dtype=np.int64)
        for i in range(n):
            coeffs[:, i] = (idx // q**i) % q
        if units_only:
            coeffs = coeffs[coeffs[:, 0] != 0]
        self.tower = tower
        self.n = n
        self.coeffs = coeffs

    def act(self, arr: np.ndarray, g: GroupElem, twist: int = 0) -> np.ndarray:
        tw = self.tower
        k = tw.k
        out = arr
        for _ in range((g.t * tw.f_L) % k.f):
            out = k.frob_table[out]
        zp = np.array([k.pow(g.zeta, i + twist) for i in range(self.n)], dtype=np.int64)
        return k.mul_table[zp[None, :], out]

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.tower.k.add_table[a, b]

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        k = self.tower.k
        return k.add_table[a, k.neg_table[b]]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        k = self.tower.k
        out = np.zeros_like(a)
        for i in range(self.n):
            for j in range(self.n - i):
                out[:, i + j] = k.add_table[out[:, i + j], k.mul_table[a[:, i], b[:, j]]]
        return out

    def inv(self, a: np.ndarray) -> np.ndarray:
        k = self.tower.k
        out = np.zeros_like(a)
        inv0 = k.inv_table[a[:, 0]]
        out[:, 0] = inv0
        for i in range(1, self.n):
            acc = np.zeros(a.shape[0], dtype=np.int64)
            for j in range(1, i + 1):
                acc = k.add_table[acc, k.mul_table[a[:, j], out[:, i - j]]]
            out[:, i] = k.mul_table[k.neg_table[acc], inv0]
        return out

    def code(self, a: np.ndarray) -> np.ndarray:
        q = self.tower.k.q
        return a @ (q ** np.arange(self.n, dtype=np.int64))


def _word_value(batch: _Batch, word: Sequence[int], values: dict[int, np.ndarray], mult: bool, twist: int) -> np.ndarray:
    """Cocycle value on a generator word, vectorized over the batch."""
    tw = batch.tower
    rows = next(iter(values.values())).shape[0]
    if mult:
        acc = np.zeros((rows, batch.n), dtype=np.int64)
        acc[:, 0] = 1
    else:
        acc = np.zeros((rows, batch.n), dtype=np.int64)
    prefix = tw.identity
    for gi in word:
        moved = batch.act(values[gi], prefix, 0 if mult else twist)
        acc = batch.mul(acc, moved) if mult else batch.add(acc, moved)
        prefix = tw.mul(prefix, tw.generators[gi])
    return acc


def _count_cocycles(batch: _Batch, mult: bool, twist: int) -> int:
    tw = batch.tower
    gens = tw.generators
    space = batch.coeffs
    rels = tw.relations()
    if len(gens) == 1:
        ok = np.ones(space.shape[0], dtype=bool)
        for lhs, rhs in rels:
            a = _word_value(batch, lhs, {0: space}, mult, twist)
            b = _word_value(batch, rhs, {0: space}, mult, twist)
            ok &= np.all(a == b, axis=1)
        return int(ok.sum())
    # two generators: sigma (index 0) and phi (index 1); single-generator
    # relations filter each factor, the mixed relation is matched by codes
    single = {0: np.ones(space.shape[0], bool), 1: np.ones(space.shape[0], bool)}
    mixed = []
    for lhs, rhs in rels:
        used = set(lhs) | set(rhs)
        if len(used) == 1:
            gi = used.pop()
            a = _word_value(batch, lhs, {gi: space}, mult, twist)
            b = _word_value(batch, rhs, {gi: space}, mult, twist)
            single[gi] &= np.all(a == b, axis=1)
        else:
            mixed.append((lhs, rhs))
    s_vals = space[single[0]]
    p_vals = space[single[1]]
    if not mixed:
        return int(s_vals.shape[0] * p_vals.shape[0])
    if len(mixed) != 1:
        raise InvariantViolation("unexpected presentation shape")
    lhs, rhs = mixed[0]
    # lhs = [phi, sigma], rhs = [sigma]*m + [phi]; separate phi and sigma parts:
    # c_phi + phi.c_sigma = S(c_sigma) + sigma^m.c_phi  (additively), i.e.
    # c_phi - sigma^m.c_phi = S(c_sigma) - phi.c_sigma.
    m = len(rhs) - 1
    sig, ph = tw.generators
    sig_m = tw.power(sig, m)
    if mult:
        left = batch.mul(p_vals, batch.inv(batch.act(p_vals, sig_m)))
        s_word = _word_value(batch, [0] * m, {0: s_vals}, True, 0)
        right = batch.mul(s_word, batch.inv(batch.act(s_vals, ph)))
    else:
        left = batch.sub(p_vals, batch.act(p_vals, sig_m, twist))
        s_word = _word_value(batch, [0] * m, {0: s_vals}, False, twist)
        right = batch.sub(s_word, batch.act(s_vals, ph, twist))
    lc = batch.code(left)
    rc = batch.code(right)
    lu, lcount = np.unique(lc, return_counts=True)
    ru, rcount = np.unique(rc, return_counts=True)
    common, li, ri = np.intersect1d(lu, ru, return_indices=True)
    return int(np.sum(lcount[li] * rcount[ri]))


def _count_coboundaries(batch: _Batch, mult: bool, twist: int) -> int:
    tw = batch.tower
    b = batch.coeffs
    codes = []
    for g in tw.generators:
        if mult:
            val = batch.mul(batch.act(b, g), batch.inv(b))
        else:
            val = batch.sub(batch.act(b, g, twist), b)
        codes.append(batch.code(val))
    if not codes:
        return 1
    stacked = np.stack(codes, axis=1)
    return int(np.unique(stacked, axis=0).shape[0])


def h1_sizes_bruteforce(tower: TameTower, n: int, twist: int = 0, budget: Optional[int] = None) -> tuple[int, int]:
    """(#H^1 additive, #H^1 multiplicative) of k[u]/u^n by exhaustive search."""
    if n < 1:
        raise DomainError("truncation length must be positive")
    limit = guard_limit(BRUTE_FORCE_BUDGET if budget is None else budget)
    ngens = len(tower.generators)
    space = (tower.k.q**n) ** ngens
    if space > limit:
        raise GuardError(f"search space {space} exceeds the budget {limit}")
    if ngens == 0:
        return 1, 1
    sizes = []
    for mult in (False, True):
        batch = _Batch(tower, n, units_only=mult)
        z = _count_cocycles(batch, mult, twist)
        b = _count_coboundaries(batch, mult, twist)
        if z % b:
            raise InvariantViolation(f"coboundaries ({b}) do not divide cocycles ({z})")
        sizes.append(z // b)
    return sizes[0], sizes[1]


def cocycle_representatives(tower: TameTower, n: int) -> list[Cocycle]:
    """The cocycles g -> (g(pi)/pi)^i for 0 <= i < e."""
    return [power_cocycle(tower, i, n) for i in range(tower.e)]
