"""Extensions of rank-1 Breuil modules with descent data.

An extension of M(r, a, c) (the quotient, basis e') by M(s, b, d) (the
sub, basis e) is M = <e, e'> with M1 = <u^s e, u^r e' + h e>, phi1 sending
the generators to b e and a e'.  Descent data is diagonal in the normal
form, with an optional off-diagonal term A_g on e' for general extensions.

Changing e' to e' + (b/a) t^l e replaces h by h + u^s t - (b/a) u^r t^l, so
extension classes are governed by the transport equation
H = u^s T - ratio * u^r T^l, solved coefficientwise in order of distance
from the fixed index i0 = (l s - r)/(l - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import exactlin
from .breuil import (
    BreuilModule,
    DescentData,
    DieudonneData,
    Morphism,
    Violation,
    check_exact,
    dieudonne_reduce,
    morphism_problems,
    validate,
)
from .errors import DomainError, InvariantViolation, UnsupportedTower
from .rank1 import Character, Rank1Module, character, hom_scalars
from .upoly import TameTower, TruncPoly


# -- the extension module -------------------------------------------------------------

class Rank2Ext:
    """Extension of ``quot`` = M(r, a, c) by ``sub`` = M(s, b, d) with parameter h.

    Basis order is (e, e'): index 0 spans the sub, index 1 lifts the quotient.
    ``off_diagonal`` gives, per group generator, the coefficient A_g of e in
    [g] e'; None means the diagonal normal form.
    """

    def __init__(self, quot: Rank1Module, sub: Rank1Module, h: TruncPoly,
                 off_diagonal: Optional[Sequence[TruncPoly]] = None, n: Optional[int] = None):
        if quot.tower != sub.tower or h.tower != quot.tower:
            raise DomainError("quotient, sub and h must live over the same tower")
        tw = quot.tower
        if off_diagonal is not None and len(off_diagonal) != len(tw.generators):
            raise DomainError("off_diagonal needs one polynomial per group generator")
        self.tower = tw
        self.quot = quot
        self.sub = sub
        self.h = h
        self.off_diagonal = tuple(off_diagonal) if off_diagonal is not None else None
        self.n = n

    @property
    def params(self) -> tuple:
        return (self.quot.r, self.quot.a, self.quot.c, self.sub.r, self.sub.a, self.sub.c)

    def __repr__(self) -> str:
        r, a, c, s, b, d = self.params
        tail = f"{self.n},1" if self.n is not None else f"h={self.h}"
        return f"M({r},{a},{c};{s},{b},{d};{tail})"

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Rank2Ext) and self.tower == other.tower and self.params == other.params
                and self.h == other.h and self.off_diagonal == other.off_diagonal)

    def __hash__(self) -> int:
        return hash((self.tower, self.params, self.h))

    @property
    def k1(self) -> int:
        return self.sub.k2

    @property
    def k2(self) -> int:
        return self.quot.k2

    @cached_property
    def module(self) -> BreuilModule:
        tw = self.tower
        zero = tw.zero()
        gens = [(tw.monomial(self.sub.r), zero), (self.h, tw.monomial(self.quot.r))]
        imgs = [(tw.poly({0: self.sub.a}), zero), (zero, tw.poly({0: self.quot.a}))]
        return BreuilModule(tw, 2, gens, imgs, labels=("e", "e'"))

    @cached_property
    def descent(self) -> DescentData:
        tw = self.tower
        k = tw.k
        mats = []
        for gi, g in enumerate(tw.generators):
            corner = self.off_diagonal[gi] if self.off_diagonal is not None else tw.zero()
            mats.append((
                (tw.poly({0: k.pow(g.zeta, self.k1)}), corner),
                (tw.zero(), tw.poly({0: k.pow(g.zeta, self.k2)})),
            ))
        return DescentData(tuple(mats))

    def problems(self) -> list[Violation]:
        return validate(self.module, self.descent)

    def is_valid(self) -> bool:
        return not self.problems()

    def inclusion(self) -> Morphism:
        tw = self.tower
        return Morphism(self.sub.module, self.module, ((tw.one(),), (tw.zero(),)))

    def projection(self) -> Morphism:
        tw = self.tower
        return Morphism(self.module, self.quot.module, ((tw.zero(), tw.one()),))

    def is_exact(self) -> bool:
        return check_exact(self.sub.module, self.module, self.quot.module, self.inclusion(), self.projection(),
                           (self.sub.descent, self.descent, self.quot.descent))

    def dieudonne(self) -> DieudonneData:
        return dieudonne_reduce(self.module, self.descent)

    def characters(self) -> tuple[Character, Character]:
        """(quotient character, sub character)."""
        return character(self.quot), character(self.sub)


# -- the transport equation --------------------------------------------------------------

def fixed_index(l: int, r: int, s: int) -> Optional[int]:
    """i0 = (l s - r)/(l - 1) when integral."""
    num = l * s - r
    return num // (l - 1) if num % (l - 1) == 0 else None


def transport_eta(tower: TameTower, ratio: int) -> Optional[int]:
    """Least element of kL outside the image of x -> x - ratio x^l on k.

    None when the map is onto.  When it is not, the image has F_l-codimension
    one and the returned element represents the cokernel.  If all of kL lies
    in the image (possible only when ratio is not an (l-1)-st power of kL,
    so never for extension classes) the least element of k outside the image
    is used instead.
    """
    k = tower.k
    image = k.image_x_minus_cxl(ratio)
    if len(image) == k.q:
        return None
    for x in tower.kL_elements:
        if x not in image:
            return x
    return min(x for x in k.elements() if x not in image)


def _transport(H: TruncPoly, r: int, s: int, ratio: int, normalize: bool):
    tw = H.tower
    k = tw.k
    l = tw.l
    N = H.length
    T = [0] * N
    known = [False] * N
    reduced = [0] * N
    eta_coeff = 0
    i0 = fixed_index(l, r, s)
    target = l * s - r
    for i in sorted(range(N), key=lambda i: (abs((l - 1) * i - target), i)):
        h_i = H[i]
        j1 = i - s
        j2 = (i - r) // l if i >= r and (i - r) % l == 0 else None
        if i == i0 and j1 >= 0 and j2 == j1:
            x = k.solve_x_minus_cxl(ratio, h_i)
            if x is None:
                if not normalize:
                    return None
                eta = transport_eta(tw, ratio)
                if eta is None:
                    raise InvariantViolation("unsolvable base case for an onto map")
                for coeff in range(1, l):
                    x = k.solve_x_minus_cxl(ratio, k.sub(h_i, k.mul(coeff, eta)))
                    if x is not None:
                        eta_coeff = coeff
                        break
                else:
                    raise InvariantViolation("eta does not span the cokernel")
            T[j1] = x
            known[j1] = True
            reduced[i] = k.sub(x, k.mul(ratio, k.frobenius(x)))
            continue
        carry = 0
        if j2 is not None and j2 < N:
            if not known[j2] and j2 + s < N:
                raise InvariantViolation(f"transport order reached T_{j2} before it was fixed")
            carry = k.mul(ratio, k.frobenius(T[j2]))
        if j1 >= 0:
            T[j1] = k.add(h_i, carry)
            known[j1] = True
            reduced[i] = h_i
        elif normalize:
            reduced[i] = k.neg(carry)
        elif k.add(h_i, carry) != 0:
            return None
    t_poly = TruncPoly.make(tw, T, N)
    lhs = transport_image(t_poly, r, s, ratio)
    goal = TruncPoly.make(tw, reduced, N) if normalize else H
    if lhs != goal:
        raise InvariantViolation("transport solution fails substitution")
    if normalize:
        return goal, eta_coeff, t_poly
    return t_poly


def transport_image(T: TruncPoly, r: int, s: int, ratio: int) -> TruncPoly:
    """u^s T - ratio u^r T^l."""
    return T.shift(s) - T.lth_power().scale(ratio).shift(r)


def solve_transport(H: TruncPoly, r: int, s: int, ratio: int) -> Optional[TruncPoly]:
    """Some T with u^s T - ratio u^r T^l = H, or None."""
    _check_transport_args(H, r, s, ratio)
    return _transport(H, r, s, ratio, normalize=False)


def normal_form_h(H: TruncPoly, r: int, s: int, ratio: int) -> tuple[TruncPoly, int, TruncPoly]:
    """(H', eta_coeff, T) with H' = u^s T - ratio u^r T^l and
    H - H' - eta_coeff * eta * u^{i0} of degree below s."""
    _check_transport_args(H, r, s, ratio)
    return _transport(H, r, s, ratio, normalize=True)


def _check_transport_args(H: TruncPoly, r: int, s: int, ratio: int) -> None:
    e_K = H.tower.e_K
    if not (0 <= r <= e_K and 0 <= s <= e_K):
        raise DomainError(f"r and s must lie in [0, {e_K}]")
    if ratio == 0:
        raise DomainError("ratio must be nonzero")


def reduced_parameter(ext: Rank2Ext) -> TruncPoly:
    """Canonical representative of the class of h: low part plus the eta term."""
    ratio = ext.tower.k.div(ext.sub.a, ext.quot.a)
    H_prime, _, _ = normal_form_h(ext.h, ext.quot.r, ext.sub.r, ratio)
    return ext.h - H_prime


# -- the Ext classification ----------------------------------------------------------------

@dataclass(frozen=True)
class ExtBasis:
    """Allowed degrees of h (kL coefficients) and the optional eta slot."""

    degrees: tuple[int, ...]
    eta_slot: Optional[int]
    eta: Optional[int]
    f_L: int
    kL_basis: tuple[int, ...] = dc_field(default=())

    @property
    def dimension(self) -> int:
        return len(self.degrees) * self.f_L + (1 if self.eta_slot is not None else 0)

    def parameter(self, tower: TameTower, coords: Sequence[int]) -> TruncPoly:
        """h for F_l coordinates (degree-major over the kL basis, eta last)."""
        if len(coords) != self.dimension:
            raise DomainError(f"need {self.dimension} coordinates, got {len(coords)}")
        k = tower.k
        terms: dict[int, int] = {}
        pos = 0
        for deg in self.degrees:
            acc = 0
            for w in self.kL_basis:
                acc = k.add(acc, k.mul(coords[pos] % tower.l, w))
                pos += 1
            terms[deg] = acc
        if self.eta_slot is not None:
            terms[self.eta_slot] = k.add(terms.get(self.eta_slot, 0), k.mul(coords[pos] % tower.l, self.eta))
        return tower.poly(terms)


def kL_basis(tower: TameTower) -> tuple[int, ...]:
    """An F_l-basis of kL, picked greedily in enumeration order."""
    k = tower.k
    chosen: list[int] = []
    rows: list[np.ndarray] = []
    for x in tower.kL_elements:
        if x == 0:
            continue
        trial = rows + [k.to_digits(x)]
        if exactlin.rank(np.array(trial), tower.l) == len(trial):
            chosen.append(x)
            rows = trial
        if len(chosen) == tower.f_L:
            break
    return tuple(chosen)


def ext_basis(sub: Rank1Module, quot: Rank1Module) -> ExtBasis:
    if sub.tower != quot.tower:
        raise DomainError("modules live over different towers")
    tw = sub.tower
    r, s = quot.r, sub.r
    residue = (r + quot.k2 - sub.k2) % tw.e
    low = max(0, r + s - tw.e_K)
    degrees = tuple(k for k in range(low, s) if (k - residue) % tw.e == 0)
    eta_slot = eta = None
    if hom_scalars(quot, sub):
        eta_slot = fixed_index(tw.l, r, s)
        eta = transport_eta(tw, tw.k.div(sub.a, quot.a))
        if eta_slot is None or eta is None:
            raise InvariantViolation("a hom exists but the transport map is onto")
    return ExtBasis(degrees, eta_slot, eta, tw.f_L, kL_basis(tw))


# -- the E' specialization ---------------------------------------------------------------------

def _require_eprime(tower: TameTower) -> None:
    if not tower.is_eprime:
        raise UnsupportedTower("this operation is implemented for the eprime tower only")


def eprime_degree(tower: TameTower, r: int, c: int, s: int, d: int) -> Optional[int]:
    """The n in [max(0, r+s-e_K), s) with n = (l+1)(c-d) + l s' - r' mod l^2-1."""
    _require_eprime(tower)
    l = tower.l
    e_K = tower.e_K
    target = ((l + 1) * (c - d) + l * (s // (l - 1)) - r // (l - 1)) % e_K
    for n in range(max(0, r + s - e_K), s):
        if n % e_K == target:
            return n
    return None


def make_ext_eprime(tower: TameTower, r: int, a: int, c: int, s: int, b: int, d: int) -> Optional[Rank2Ext]:
    """The nonsplit normal form M(r,a,c;s,b,d;n,1), or None if no n fits."""
    _require_eprime(tower)
    quot = Rank1Module(tower, r, a, c)
    sub = Rank1Module(tower, s, b, d)
    if (quot.a, quot.c) == (sub.a, sub.c):
        raise DomainError("(a, c) = (b, d) is excluded: the two characters must differ")
    n = eprime_degree(tower, r, quot.c, s, sub.c)
    if n is None:
        return None
    return Rank2Ext(quot, sub, tower.monomial(n), n=n)


def lattice_index(N: Rank2Ext) -> int:
    """k with n = (l s' - r') - k (l + 1)."""
    l = N.tower.l
    r, _, _, s, _, _ = N.params
    if N.n is None:
        raise DomainError("lattice index needs an eprime normal form")
    diff = l * (s // (l - 1)) - r // (l - 1) - N.n
    if diff % (l + 1):
        raise InvariantViolation("n does not differ from l s' - r' by a multiple of l + 1")
    return diff // (l + 1)


def is_split(N: Rank2Ext) -> bool:
    """Whether the descended representation of the normal form is split."""
    _require_eprime(N.tower)
    return N.quot.r > N.sub.r and N.quot.c == N.sub.c


def split_witness(N: Rank2Ext) -> Optional[Morphism]:
    """The map M(0,a,c) -> N, f -> u^{l s'} e + (1 - a/b) u^{l r'} e', when it is one."""
    tw = N.tower
    k = tw.k
    l = tw.l
    source = Rank1Module(tw, 0, N.quot.a, N.quot.c)
    coeff = k.sub(1, k.div(N.quot.a, N.sub.a))
    P = ((tw.monomial(l * N.sub.r_prime),), (tw.monomial(l * N.quot.r_prime, coeff),))
    phi = Morphism(source.module, N.module, P)
    if morphism_problems(phi, source.descent, N.descent):
        return None
    return phi


def _is_top_corner(N: Rank2Ext) -> bool:
    """The module M(0, a, d-1; l^2-1, b, d; 0, 1) sitting at index k = l."""
    return N.quot.r == 0 and N.sub.r == N.tower.e_K and N.n == 0


def hom_rank2(N1: Rank2Ext, N2: Rank2Ext) -> Optional[Morphism]:
    """A generic-fibre isomorphism N1 -> N2 between eprime normal forms, or None."""
    _require_eprime(N1.tower)
    if N1.tower != N2.tower:
        raise DomainError("modules live over different towers")
    tw = N1.tower
    k = tw.k
    l = tw.l
    (r, a, c, s, b, d), (r1, a1, c1, s1, b1, d1) = N1.params, N2.params
    if (a, c, b, d) != (a1, c1, b1, d1) or r > r1 or s > s1:
        return None
    k_src, k_dst = lattice_index(N1), lattice_index(N2)
    rp, sp = r // (l - 1), s // (l - 1)
    rp1, sp1 = r1 // (l - 1), s1 // (l - 1)
    if k_src == k_dst:
        P = ((tw.monomial(l * (sp1 - sp)), tw.zero()),
             (tw.zero(), tw.monomial(l * (rp1 - rp))))
    elif _is_top_corner(N2) and r == 0:
        ba = k.div(b, a)
        P = ((tw.monomial(l * (l + 1 - sp)), tw.poly({0: ba})),
             (tw.zero(), tw.poly({0: ba})))
    elif _is_top_corner(N1) and s1 == tw.e_K:
        P = ((tw.one(), tw.poly({0: k.neg(1)})),
             (tw.zero(), tw.monomial(l * rp1, k.div(a, b))))
    else:
        return None
    phi = Morphism(N1.module, N2.module, P)
    bad = morphism_problems(phi, N1.descent, N2.descent)
    if bad:
        if is_split(N1) or is_split(N2):
            return None
        raise InvariantViolation(f"constructed map {N1} -> {N2} fails: {bad[0].detail}")
    return phi


# -- generic fibre isomorphisms ------------------------------------------------------------------

def _monomial(p: TruncPoly) -> Optional[tuple[int, int]]:
    """(degree, coeff) for a monomial, (-1, 0) for zero, None otherwise."""
    terms = list(p.items())
    if not terms:
        return (-1, 0)
    if len(terms) == 1:
        return terms[0]
    return None


def annihilator_bound(phi: Morphism) -> Optional[int]:
    """max(gamma, alpha + gamma - beta) for e -> v u^alpha f, e' -> y u^beta f + z u^gamma f'.

    None when phi does not have this triangular monomial shape.
    """
    P = phi.matrix
    if len(P) != 2 or len(P[0]) != 2 or not P[1][0].is_zero():
        return None
    shapes = [_monomial(P[0][0]), _monomial(P[0][1]), _monomial(P[1][1])]
    if any(x is None for x in shapes):
        return None
    (alpha, v), (beta, y), (gamma, z) = shapes
    if v == 0 or z == 0:
        return None
    if y == 0:
        return max(alpha, gamma)
    return max(gamma, alpha + gamma - beta)


def kernel_has_free_part(phi: Morphism) -> bool:
    """Whether ker(phi) contains a free k[u]/u^N-submodule, i.e. u^{N-1} ker != 0."""
    tw = phi.source.tower
    block = tw.N * tw.k.f
    mat = phi.flat_matrix()
    for vec in exactlin.kernel_basis(mat, tw.l, cols=mat.shape[1]):
        for j in range(phi.source.rank):
            if np.any(vec[j * block : j * block + tw.k.f] % tw.l):
                return True
    return False


def generic_fibre_iso(phi: Morphism) -> bool:
    """Sufficient test from the kernel annihilator, falling back to the kernel itself."""
    if phi.source.rank != phi.target.rank:
        raise DomainError("generic fibre isomorphisms need equal ranks")
    bound = annihilator_bound(phi)
    if bound is not None and bound < phi.source.tower.N:
        return True
    return not kernel_has_free_part(phi)


# -- lattices of integral models -------------------------------------------------------------------

@dataclass
class LatticeReport:
    l: int
    k: int
    pairs: list[tuple[int, int]]
    modules: list[Rank2Ext]
    order: list[tuple[int, int]]
    maximal: list[int]
    minimal: list[int]
    expected_max: Optional[tuple[int, int, int]]
    expected_min: Optional[tuple[int, int, int]]
    peu_ramifie: Optional[bool]

    def module_triples(self) -> list[tuple[int, int, int]]:
        return [(N.quot.r, N.sub.r, N.n) for N in self.modules]

    def as_dict(self) -> dict:
        trip = self.module_triples()
        return {
            "l": self.l,
            "k": self.k,
            "count": len(self.modules),
            "modules": [repr(N) for N in self.modules],
            "points": [{"r_prime": N.quot.r_prime, "s_prime": N.sub.r_prime, "n": N.n} for N in self.modules],
            "maps": [[i, j] for i, j in self.order],
            "maximal": [repr(self.modules[i]) for i in self.maximal],
            "minimal": [repr(self.modules[i]) for i in self.minimal],
            "maximal_matches": [trip[i] for i in self.maximal] == [self.expected_max] if self.expected_max else None,
            "minimal_matches": [trip[i] for i in self.minimal] == [self.expected_min] if self.expected_min else None,
            "peu_ramifie": self.peu_ramifie,
        }


def classify_pairs(l: int, k: int) -> list[tuple[int, int]]:
    """(r', s') pairs of the k-lattice from the closed-form region."""
    out = []
    for rp in range(0, l - k + 1):
        for sp in range(k + 1, l + 2):
            if k == 0 and rp <= sp:
                continue
            if k == 1 and (rp, sp) == (0, l + 1):
                continue
            out.append((rp, sp))
    return out


def classify_pairs_brute(l: int, k: int) -> list[tuple[int, int]]:
    """Same pairs by testing the window inequalities for every (r', s')."""
    e_K = l * l - 1
    out = []
    for rp in range(l + 2):
        for sp in range(l + 2):
            r, s = rp * (l - 1), sp * (l - 1)
            n = l * sp - rp - k * (l + 1)
            if max(0, r + s - e_K) <= n < s:
                out.append((rp, sp))
    return out


def lattice(tower: TameTower, k: int, a: int, b: int, c: int, d: int, brute: bool = False,
            with_maps: bool = True) -> LatticeReport:
    """All normal forms M(r,a,c;s,b,d;n,1) with n = l s' - r' - k(l+1), ordered by maps."""
    _require_eprime(tower)
    l = tower.l
    if not 0 <= k <= l:
        raise DomainError(f"k must lie in [0, {l}]")
    if (d - c - k) % (l - 1):
        raise DomainError(f"k = {k} does not represent d - c = {(d - c) % (l - 1)} mod {l - 1}")
    pairs = classify_pairs_brute(l, k) if brute else classify_pairs(l, k)
    points = list(pairs)
    if k == 1:
        points.append((0, l + 1))
    modules = []
    for rp, sp in points:
        N = make_ext_eprime(tower, rp * (l - 1), a, c, sp * (l - 1), b, d)
        if N is None:
            raise InvariantViolation(f"no normal form at (r', s') = ({rp}, {sp})")
        modules.append(N)
    order = []
    if with_maps:
        for i, N1 in enumerate(modules):
            for j, N2 in enumerate(modules):
                if i != j and hom_rank2(N1, N2) is not None:
                    order.append((i, j))
    size = len(modules)
    maximal = [i for i in range(size) if all((i, j) not in order for j in range(size) if j != i)] if with_maps else []
    minimal = [j for j in range(size) if all((i, j) not in order for i in range(size) if i != j)] if with_maps else []
    expected_max = expected_min = None
    if 1 <= k <= l - 1:
        expected_max = ((l - k) * (l - 1), (l + 1) * (l - 1), l * l - k * l)
        expected_min = (0, (k + 1) * (l - 1), l - k)
    peu = True if k in (1, l) else None
    return LatticeReport(l, k, pairs, modules, order, maximal, minimal, expected_max, expected_min, peu)
