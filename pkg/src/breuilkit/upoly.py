"""The coefficient ring k[u]/u^N, its tame Galois action, and the group model.

A :class:`TameTower` fixes the arithmetic of a tame extension K/L: residue
fields, ramification, the integers U and V_param, and the finite group
G = Gal(K/L) modelled as pairs (t, zeta).  Here t is a power of the
Frobenius of k over kL and zeta = g(pi)/pi lies in mu_e.

:class:`TruncPoly` is an element of k[u]/u^n (n defaults to e_K * l), and
:class:`LinPoly` is the same ring with coefficients that are F_l-linear forms
in a vector of unknowns; the latter turns semilinear conditions into
matrices for :mod:`breuilkit.exactlin`.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from math import gcd
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import DomainError
from .gfq import Field, field


@dataclass(frozen=True, order=True)
class GroupElem:
    """Element of G: t is the Frobenius power, zeta the value g(pi)/pi."""

    t: int
    zeta: int

    def __repr__(self) -> str:
        return f"GroupElem(t={self.t}, zeta={self.zeta})"


class TameTower:
    """Arithmetic context of a tame extension K/L with pi^e in L.

    Parameters
    ----------
    l:
        Odd residue characteristic.
    e, f_rel:
        Relative ramification index and residue degree of K/L.
    e_L, f_L:
        Absolute ramification index and residue degree of L.
    pi_unit:
        Optional residue eps in kL^x of the declared relation
        pi^{e_K} = -l * eps.  Needed by the character computation and by
        the Dieudonne normalization; towers without it raise
        :class:`~breuilkit.errors.UnsupportedTower` there.
    """

    def __init__(
        self,
        l: int,
        e: int,
        f_rel: int = 1,
        e_L: int = 1,
        f_L: int = 1,
        pi_unit: Optional[int] = None,
        name: Optional[str] = None,
    ):
        if min(e, f_rel, e_L, f_L) < 1:
            raise DomainError("ramification and residue degrees must be positive")
        self.l = l
        self.e = e
        self.f_rel = f_rel
        self.e_L = e_L
        self.f_L = f_L
        self.e_K = e * e_L
        self.f_K = f_rel * f_L
        self.k: Field = field(l, self.f_K)
        self.N = self.e_K * l
        if e % l == 0:
            raise DomainError(f"e = {e} is divisible by l = {l}; the extension is not tame")
        if (self.k.q - 1) % e:
            raise DomainError(f"mu_{e} is not contained in the residue field F_{self.k.q}")
        self.d0 = gcd(l - 1, e)
        self.e_prime = e // self.d0
        self.lm1_prime = (l - 1) // self.d0
        if e % (l - 1) == 0 or self.e_prime == 1:
            self.U = 1
        else:
            self.U = pow(self.lm1_prime, -1, self.e_prime)
        num = self.U * self.lm1_prime - 1
        if num % self.e_prime:
            raise DomainError("U(l-1)' = 1 + V e' has no integral solution")  # unreachable
        self.V_param = num // self.e_prime
        if pi_unit is not None:
            if pi_unit == 0 or not self.in_kL(pi_unit):
                raise DomainError("pi_unit must be a nonzero element of kL")
        self.pi_unit = pi_unit
        self.name = name
        self.zeta0 = self.k.root_of_unity(e)
        self.q_L = l**f_L

    # -- presets ------------------------------------------------------------------
    @classmethod
    def eprime(cls, l: int) -> "TameTower":
        """K = Q_{l^2}(pi), pi^{l^2-1} = -l, over L = Q_l."""
        return cls(l, e=l * l - 1, f_rel=2, e_L=1, f_L=1, pi_unit=1, name=f"eprime({l})")

    @property
    def is_eprime(self) -> bool:
        return (self.e, self.f_rel, self.e_L, self.f_L) == (self.l**2 - 1, 2, 1, 1) and self.pi_unit == 1

    def describe(self) -> dict:
        return {
            "l": self.l,
            "e": self.e,
            "f_rel": self.f_rel,
            "e_L": self.e_L,
            "f_L": self.f_L,
            "e_K": self.e_K,
            "f_K": self.f_K,
            "N": self.N,
            "U": self.U,
            "V_param": self.V_param,
            "pi_unit": self.pi_unit,
            "name": self.name,
        }

    def __repr__(self) -> str:
        if self.name:
            return f"TameTower<{self.name}>"
        return (
            f"TameTower(l={self.l}, e={self.e}, f_rel={self.f_rel}, "
            f"e_L={self.e_L}, f_L={self.f_L})"
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TameTower) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    @property
    def _key(self) -> tuple:
        return (self.l, self.e, self.f_rel, self.e_L, self.f_L, self.pi_unit)

    def prime(self, x: int) -> int:
        """x' = x / gcd(l-1, e); only defined when the division is exact."""
        if x % self.d0:
            raise DomainError(f"{x} is not divisible by d0 = {self.d0}")
        return x // self.d0

    # -- residue fields -------------------------------------------------------------
    def in_kL(self, x: int) -> bool:
        return self.k.in_subfield(x, self.f_L)

    @cached_property
    def kL_elements(self) -> list[int]:
        return self.k.subfield(self.f_L)

    @cached_property
    def kL_units(self) -> list[int]:
        return [x for x in self.kL_elements if x]

    def frob_L(self, x: int, times: int = 1) -> int:
        """The generator x -> x^{l^{f_L}} of Gal(k/kL), applied ``times`` times."""
        return self.k.frobenius(x, self.f_L * times)

    @cached_property
    def mu_e(self) -> list[int]:
        return [self.k.pow(self.zeta0, i) for i in range(self.e)]

    # -- the group -------------------------------------------------------------------
    @property
    def identity(self) -> GroupElem:
        return GroupElem(0, 1)

    def mul(self, g: GroupElem, h: GroupElem) -> GroupElem:
        return GroupElem((g.t + h.t) % self.f_rel, self.k.mul(g.zeta, self.frob_L(h.zeta, g.t)))

    def inverse(self, g: GroupElem) -> GroupElem:
        t = (-g.t) % self.f_rel
        # (t, z)^{-1} = (-t, Frob^{-t}(z)^{-1})
        return GroupElem(t, self.k.inv(self.frob_L(g.zeta, t)))

    def power(self, g: GroupElem, n: int) -> GroupElem:
        acc = self.identity
        for _ in range(n):
            acc = self.mul(acc, g)
        return acc

    @cached_property
    def sigma(self) -> GroupElem:
        """Generator of inertia: g(pi) = zeta0 * pi."""
        return GroupElem(0, self.zeta0)

    @cached_property
    def phi(self) -> GroupElem:
        """Frobenius lift fixing pi."""
        return GroupElem(1 % self.f_rel, 1)

    @cached_property
    def generators(self) -> tuple[GroupElem, ...]:
        gens = []
        if self.e > 1:
            gens.append(self.sigma)
        if self.f_rel > 1:
            gens.append(self.phi)
        return tuple(gens)

    @cached_property
    def elements(self) -> list[GroupElem]:
        return [GroupElem(t, z) for t in range(self.f_rel) for z in self.mu_e]

    @property
    def order(self) -> int:
        return self.e * self.f_rel

    def relations(self) -> list[tuple[list[int], list[int]]]:
        """Defining relations as pairs of generator-index words (lhs == rhs)."""
        rels = []
        idx = {g: i for i, g in enumerate(self.generators)}
        if self.e > 1:
            s = idx[self.sigma]
            rels.append(([s] * self.e, []))
        if self.f_rel > 1:
            p = idx[self.phi]
            rels.append(([p] * self.f_rel, []))
            if self.e > 1:
                s = idx[self.sigma]
                rels.append(([p, s], [s] * (self.q_L % self.e) + [p]))
        return rels

    def word_value(self, word: Sequence[int]) -> GroupElem:
        acc = self.identity
        for i in word:
            acc = self.mul(acc, self.generators[i])
        return acc

    def cayley_tree(self) -> dict[GroupElem, tuple[GroupElem, int]]:
        """Breadth-first spanning tree: element -> (parent, generator index), parent * gen = element."""
        tree: dict[GroupElem, tuple[GroupElem, int]] = {}
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for i, g in enumerate(self.generators):
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        tree[y] = (x, i)
                        nxt.append(y)
            frontier = nxt
        return tree

    # -- coefficient ring helpers --------------------------------------------------------
    def poly(self, coeffs: Mapping[int, int] | Sequence[int] | None = None, length: Optional[int] = None) -> "TruncPoly":
        return TruncPoly.make(self, coeffs, length)

    def monomial(self, degree: int, coeff: int = 1, length: Optional[int] = None) -> "TruncPoly":
        return TruncPoly.make(self, {degree: coeff}, length)

    def zero(self, length: Optional[int] = None) -> "TruncPoly":
        return TruncPoly.make(self, None, length)

    def one(self, length: Optional[int] = None) -> "TruncPoly":
        return TruncPoly.make(self, {0: 1}, length)


def group_order_check(tower: TameTower) -> bool:
    """Check that the generators produce a group of order e * f_rel obeying the relations."""
    reached = {tower.identity}
    frontier = [tower.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in tower.generators:
                y = tower.mul(x, g)
                if y not in reached:
                    reached.add(y)
                    nxt.append(y)
        frontier = nxt
    if len(reached) != tower.order:
        return False
    for lhs, rhs in tower.relations():
        if tower.word_value(lhs) != tower.word_value(rhs):
            return False
    # associativity on all triples is cheap at these sizes
    elems = tower.elements
    if len(elems) <= 64:
        for a in elems:
            for b in elems:
                ab = tower.mul(a, b)
                for c in elems:
                    if tower.mul(ab, c) != tower.mul(a, tower.mul(b, c)):
                        return False
    return True


class TruncPoly:
    """Element of k[u]/u^n stored as a numpy vector of field codes.

    Instances are treated as immutable; the coefficient array is marked
    read-only.
    """

    __slots__ = ("tower", "coeffs", "_hash")

    def __init__(self, tower: TameTower, coeffs: np.ndarray):
        self.tower = tower
        coeffs.flags.writeable = False
        self.coeffs = coeffs
        self._hash = None

    @classmethod
    def make(cls, tower: TameTower, coeffs=None, length: Optional[int] = None) -> "TruncPoly":
        n = tower.N if length is None else length
        arr = np.zeros(n, dtype=np.int64)
        if coeffs is None:
            pass
        elif isinstance(coeffs, Mapping):
            for deg, c in coeffs.items():
                if deg < 0:
                    raise DomainError("negative degree")
                if deg < n:
                    arr[deg] = tower.k.add(int(arr[deg]), c % tower.k.q if c < 0 else c)
        else:
            src = np.asarray(coeffs, dtype=np.int64)
            m = min(n, src.shape[0])
            arr[:m] = src[:m]
        if np.any((arr < 0) | (arr >= tower.k.q)):
            raise DomainError("coefficient is not a field element code")
        return cls(tower, arr)

    # -- basics ----------------------------------------------------------------------
    @property
    def length(self) -> int:
        return self.coeffs.shape[0]

    @property
    def field(self) -> Field:
        return self.tower.k

    def _like(self, arr: np.ndarray) -> "TruncPoly":
        return TruncPoly(self.tower, arr)

    def _check(self, other: "TruncPoly") -> None:
        if other.tower is not self.tower and other.tower != self.tower:
            raise DomainError("polynomials live over different towers")
        if other.length != self.length:
            raise DomainError("polynomials have different truncation lengths")

    def __getitem__(self, i: int) -> int:
        if 0 <= i < self.length:
            return int(self.coeffs[i])
        return 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncPoly):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.length, self.coeffs.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        terms = [f"{c}*u^{i}" for i, c in self.items()]
        return "TruncPoly(" + (" + ".join(terms) if terms else "0") + f"; n={self.length})"

    def items(self) -> Iterator[tuple[int, int]]:
        for i in np.nonzero(self.coeffs)[0]:
            yield int(i), int(self.coeffs[i])

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def valuation(self) -> int:
        """u-adic valuation; the truncation length for zero."""
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[0]) if nz.size else self.length

    def degree(self) -> int:
        """Largest degree with nonzero coefficient, -1 for zero."""
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else -1

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def constant(self) -> int:
        return int(self.coeffs[0])

    def truncate(self, n: int) -> "TruncPoly":
        """Reduce into k[u]/u^n (n may be larger, padding with zeros)."""
        arr = np.zeros(n, dtype=np.int64)
        m = min(n, self.length)
        arr[:m] = self.coeffs[:m]
        return self._like(arr)

    # -- ring operations -------------------------------------------------------------
    def __add__(self, other: "TruncPoly") -> "TruncPoly":
        self._check(other)
        return self._like(self.field.add_table[self.coeffs, other.coeffs])

    def __sub__(self, other: "TruncPoly") -> "TruncPoly":
        self._check(other)
        F = self.field
        return self._like(F.add_table[self.coeffs, F.neg_table[other.coeffs]])

    def __neg__(self) -> "TruncPoly":
        return self._like(self.field.neg_table[self.coeffs])

    def scale(self, c: int) -> "TruncPoly":
        return self._like(self.field.mul_table[c, self.coeffs])

    def __mul__(self, other: "TruncPoly") -> "TruncPoly":
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        self._check(other)
        return self._like(_poly_mul(self.field, self.coeffs, other.coeffs))

    def shift(self, k: int) -> "TruncPoly":
        """Multiply by u^k (k >= 0) or divide by u^{-k} when exact."""
        arr = np.zeros_like(self.coeffs)
        n = self.length
        if k >= 0:
            if k < n:
                arr[k:] = self.coeffs[: n - k]
        else:
            if np.any(self.coeffs[: min(-k, n)]):
                raise DomainError(f"not divisible by u^{-k}")
            arr[: n + k] = self.coeffs[-k:]
        return self._like(arr)

    def frob(self, times: int = 1) -> "TruncPoly":
        """Apply x -> x^{l^times} to each coefficient."""
        F = self.field
        arr = self.coeffs
        for _ in range(times % F.f):
            arr = F.frob_table[arr]
        return self._like(arr.copy() if arr is self.coeffs else arr)

    def lth_power(self) -> "TruncPoly":
        """self^l, which in characteristic l is sum c_i^l u^{il}."""
        n = self.length
        l = self.tower.l
        arr = np.zeros_like(self.coeffs)
        src = self.field.frob_table[self.coeffs[: (n + l - 1) // l]]
        arr[0 : l * src.shape[0] : l] = src
        return self._like(arr)

    def __pow__(self, n: int) -> "TruncPoly":
        if n < 0:
            return self.inverse() ** (-n)
        acc = TruncPoly.make(self.tower, {0: 1}, self.length)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def inverse(self) -> "TruncPoly":
        if not self.is_unit():
            raise DomainError("polynomial is not a unit")
        F = self.field
        n = self.length
        out = np.zeros(n, dtype=np.int64)
        inv0 = F.inv(int(self.coeffs[0]))
        out[0] = inv0
        # long division of 1 by self, one degree at a time
        for i in range(1, n):
            acc = 0
            for j in range(1, i + 1):
                cj = int(self.coeffs[j])
                if cj:
                    acc = F.add(acc, F.mul(cj, int(out[i - j])))
            out[i] = F.mul(F.neg(acc), inv0)
        return self._like(out)

    def act(self, g: GroupElem) -> "TruncPoly":
        """Galois action: c_i u^i -> Frob^t(c_i) zeta^i u^i."""
        tw = self.tower
        F = self.field
        arr = self.coeffs
        for _ in range((g.t * tw.f_L) % F.f):
            arr = F.frob_table[arr]
        if g.zeta != 1:
            zpow = _zeta_powers(F, g.zeta, self.length)
            arr = F.mul_table[zpow, arr]
        return self._like(arr.copy() if arr is self.coeffs else arr)

    def twisted_act(self, g: GroupElem, w: int) -> "TruncPoly":
        """(g(pi)/pi)^w * g(self)."""
        return self.act(g).scale(self.field.pow(g.zeta, w))

    def is_fixed(self) -> bool:
        return all(self.act(g) == self for g in self.tower.generators)

    # -- F_l coordinates -------------------------------------------------------------
    def to_vector(self) -> np.ndarray:
        """Flattened F_l digits, degree-major then field coordinate."""
        return self.field.digit_table[self.coeffs].reshape(-1).copy()

    @classmethod
    def from_vector(cls, tower: TameTower, vec, length: Optional[int] = None) -> "TruncPoly":
        n = tower.N if length is None else length
        F = tower.k
        digits = (np.asarray(vec, dtype=np.int64) % F.l).reshape(n, F.f)
        return cls(tower, digits @ F.weights)


def fixed_subring_test(f: TruncPoly) -> bool:
    """True iff f is fixed by every element of G."""
    return f.is_fixed()


def _zeta_powers(F: Field, zeta: int, n: int) -> np.ndarray:
    return np.array([F.pow(zeta, i) for i in range(n)], dtype=np.int64)


def _poly_mul(F: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated product of two coefficient-code vectors."""
    n = a.shape[0]
    if F.f == 1:
        return np.convolve(a, b)[:n] % F.l
    l, f = F.l, F.f
    da = F.digit_table[a]
    db = F.digit_table[b]
    acc = np.zeros((n, 2 * f - 1), dtype=np.int64)
    for i in range(f):
        if not np.any(da[:, i]):
            continue
        for j in range(f):
            acc[:, i + j] += np.convolve(da[:, i], db[:, j])[:n]
    acc %= l
    mod = F.modulus
    for top in range(2 * f - 2, f - 1, -1):
        c = acc[:, top]
        if np.any(c):
            for t in range(f):
                if mod[t]:
                    acc[:, top - f + t] -= c * mod[t]
        acc[:, top] = 0
    acc %= l
    return acc[:, :f] @ F.weights


def vector_frob_act(tower: TameTower, vec: Sequence[TruncPoly], g: GroupElem) -> list[TruncPoly]:
    return [p.act(g) for p in vec]


class LinPoly:
    """Polynomial in k[u]/u^n whose coefficient digits are F_l-linear forms.

    ``data`` has shape (n, f, D): digit t of the degree-i coefficient equals
    sum_j data[i, t, j] * x_j for an unknown vector x in F_l^D.  Constant
    terms are carried as an extra last unknown when callers want affine
    forms.
    """

    __slots__ = ("tower", "data")

    def __init__(self, tower: TameTower, data: np.ndarray):
        self.tower = tower
        self.data = data

    @classmethod
    def zeros(cls, tower: TameTower, D: int, length: Optional[int] = None) -> "LinPoly":
        n = tower.N if length is None else length
        return cls(tower, np.zeros((n, tower.k.f, D), dtype=np.int64))

    @classmethod
    def unknown(cls, tower: TameTower, D: int, offset: int, length: Optional[int] = None,
                degrees: Optional[Iterable[int]] = None) -> tuple["LinPoly", int]:
        """A polynomial whose listed coefficients are fresh unknowns.

        Unknowns are numbered from ``offset`` in degree-major, then digit
        order.  Returns the polynomial and the next free index.
        """
        n = tower.N if length is None else length
        f = tower.k.f
        out = cls.zeros(tower, D, n)
        degs = range(n) if degrees is None else degrees
        idx = offset
        for i in degs:
            for t in range(f):
                out.data[i, t, idx] = 1
                idx += 1
        return out, idx

    @classmethod
    def constant(cls, p: TruncPoly, D: int, slot: int) -> "LinPoly":
        """Embed a known polynomial, with its digits on the unknown ``slot``."""
        out = cls.zeros(p.tower, D, p.length)
        out.data[:, :, slot] = p.tower.k.digit_table[p.coeffs]
        return out

    @property
    def length(self) -> int:
        return self.data.shape[0]

    @property
    def D(self) -> int:
        return self.data.shape[2]

    def __add__(self, other: "LinPoly") -> "LinPoly":
        return LinPoly(self.tower, (self.data + other.data) % self.tower.l)

    def __sub__(self, other: "LinPoly") -> "LinPoly":
        return LinPoly(self.tower, (self.data - other.data) % self.tower.l)

    def __neg__(self) -> "LinPoly":
        return LinPoly(self.tower, (-self.data) % self.tower.l)

    def mul_known(self, p: TruncPoly) -> "LinPoly":
        """Product with a known polynomial (an F_l-linear operation)."""
        F = self.tower.k
        n = self.length
        out = np.zeros_like(self.data)
        for j, c in p.items():
            if j >= n:
                break
            m = F.mul_matrix(c)
            out[j:] += np.einsum("ab,ibd->iad", m, self.data[: n - j])
        return LinPoly(self.tower, out % F.l)

    def scale(self, c: int) -> "LinPoly":
        F = self.tower.k
        return LinPoly(self.tower, np.einsum("ab,ibd->iad", F.mul_matrix(c), self.data) % F.l)

    def shift(self, k: int) -> "LinPoly":
        out = np.zeros_like(self.data)
        if k < self.length:
            out[k:] = self.data[: self.length - k]
        return LinPoly(self.tower, out)

    def lth_power(self) -> "LinPoly":
        F = self.tower.k
        l = self.tower.l
        n = self.length
        out = np.zeros_like(self.data)
        m = (n + l - 1) // l
        out[0 : l * m : l] = np.einsum("ab,ibd->iad", F.frob_matrix(1), self.data[:m])
        return LinPoly(self.tower, out % F.l)

    def act(self, g: GroupElem) -> "LinPoly":
        tw = self.tower
        F = tw.k
        fm = F.frob_matrix(g.t * tw.f_L)
        data = np.einsum("ab,ibd->iad", fm, self.data)
        if g.zeta != 1:
            z = 1
            for i in range(self.length):
                if z != 1:
                    data[i] = F.mul_matrix(z) @ data[i]
                z = F.mul(z, g.zeta)
        return LinPoly(tw, data % F.l)

    def twisted_act(self, g: GroupElem, w: int) -> "LinPoly":
        return self.act(g).scale(self.tower.k.pow(g.zeta, w))

    def rows(self) -> np.ndarray:
        """The linear forms as a matrix with one row per (degree, digit)."""
        return self.data.reshape(-1, self.D)

    def evaluate(self, x: np.ndarray) -> TruncPoly:
        F = self.tower.k
        digits = np.einsum("itd,d->it", self.data, np.asarray(x, dtype=np.int64)) % F.l
        return TruncPoly(self.tower, digits @ F.weights)
