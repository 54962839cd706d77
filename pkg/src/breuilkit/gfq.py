"""Exact arithmetic in the finite field F_q, q = l**f.

Elements are plain integers 0..q-1.  The integer ``x`` encodes the
polynomial sum(d_t * X**t) whose base-``l`` digits are ``d_0, d_1, ...``,
reduced modulo a fixed irreducible ``modulus``.  The prime subfield is
therefore the codes ``0..l-1`` and integer order is the field's total
enumeration order.

Addition and multiplication go through precomputed tables, which keeps
per-operation cost low for the small fields used here (q <= a few hundred).
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd
from typing import Iterator, Optional

import numpy as np

from .errors import DomainError

_MAX_ORDER = 1 << 14


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _poly_mod(num: list[int], den: list[int], p: int) -> list[int]:
    """Remainder of ``num`` by monic ``den`` over F_p (low-degree first)."""
    num = list(num)
    dd = len(den) - 1
    for top in range(len(num) - 1, dd - 1, -1):
        c = num[top] % p
        if c:
            shift = top - dd
            for i, dc in enumerate(den):
                num[shift + i] = (num[shift + i] - c * dc) % p
    rem = [x % p for x in num[:dd]]
    while rem and rem[-1] == 0:
        rem.pop()
    return rem


def _monic_polys(p: int, degree: int) -> Iterator[list[int]]:
    """Monic polynomials of the given degree, lower coefficients in code order."""
    for code in range(p**degree):
        coeffs = []
        x = code
        for _ in range(degree):
            coeffs.append(x % p)
            x //= p
        yield coeffs + [1]


def least_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Least monic irreducible polynomial of degree ``f`` over F_p.

    Polynomials are compared by the integer code of their lower
    coefficients, i.e. lexicographically from the x**(f-1) coefficient down.
    Returned low-degree first, including the leading 1.
    """
    if f == 1:
        return (0, 1)
    for cand in _monic_polys(p, f):
        if cand[0] == 0:
            continue
        reducible = False
        for d in range(1, f // 2 + 1):
            for fac in _monic_polys(p, d):
                if not _poly_mod(cand, fac, p):
                    reducible = True
                    break
            if reducible:
                break
        if not reducible:
            return tuple(cand)
    raise DomainError(f"no irreducible polynomial of degree {f} over F_{p}")


class Field:
    """The field F_{l^f} with a fixed model.

    Attributes
    ----------
    l, f, q:
        Characteristic, degree over F_l and order.
    modulus:
        Low-degree-first coefficients of the defining polynomial, monic.
    g0:
        Least generator of the multiplicative group in enumeration order.
    """

    def __init__(self, l: int, f: int = 1):
        if l % 2 == 0 or not _is_prime(l):
            raise DomainError(f"l must be an odd prime, got {l}")
        if f < 1:
            raise DomainError(f"extension degree must be >= 1, got {f}")
        q = l**f
        if q > _MAX_ORDER:
            raise DomainError(f"field of order {q} is too large for table arithmetic")
        self.l = l
        self.f = f
        self.q = q
        self.modulus = least_irreducible(l, f)
        self._digits = np.array(
            [[(x // l**t) % l for t in range(f)] for x in range(q)], dtype=np.int64
        )
        self._weights = np.array([l**t for t in range(f)], dtype=np.int64)
        add = [[0] * q for _ in range(q)]
        for x in range(q):
            dx = self._digits[x]
            for y in range(q):
                add[x][y] = int(((dx + self._digits[y]) % l) @ self._weights)
        self._add = add
        self._neg = [int(((-self._digits[x]) % l) @ self._weights) for x in range(q)]
        mul = [[0] * q for _ in range(q)]
        for x in range(q):
            for y in range(x, q):
                mul[x][y] = mul[y][x] = self._mul_slow(x, y)
        self._mul = mul
        self.g0 = self._find_generator()
        self._log = [0] * q
        self._exp = [0] * (q - 1)
        acc = 1
        for k in range(q - 1):
            self._exp[k] = acc
            self._log[acc] = k
            acc = mul[acc][self.g0]
        self._inv = [0] + [self._exp[(-self._log[x]) % (q - 1)] for x in range(1, q)]
        self._frob = [self.pow(x, l) for x in range(q)]
        # numpy mirrors of the tables for vectorized polynomial code
        self.add_table = np.array(add, dtype=np.int64)
        self.mul_table = np.array(mul, dtype=np.int64)
        self.neg_table = np.array(self._neg, dtype=np.int64)
        self.inv_table = np.array(self._inv, dtype=np.int64)
        self.frob_table = np.array(self._frob, dtype=np.int64)
        for t in (self.add_table, self.mul_table, self.neg_table, self.inv_table, self.frob_table):
            t.flags.writeable = False

    # -- construction helpers ------------------------------------------------
    def _mul_slow(self, x: int, y: int) -> int:
        l, f = self.l, self.f
        a = [int(t) for t in self._digits[x]]
        b = [int(t) for t in self._digits[y]]
        prod = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        rem = _poly_mod(prod, list(self.modulus), l)
        return sum(c * l**t for t, c in enumerate(rem))

    def _find_generator(self) -> int:
        q = self.q
        if q == 2:
            return 1
        primes = [p for p in range(2, q) if (q - 1) % p == 0 and _is_prime(p)]
        for x in range(1, q):
            if all(self._pow_slow(x, (q - 1) // p) != 1 for p in primes):
                return x
        raise DomainError("multiplicative group has no generator")  # unreachable

    def _pow_slow(self, x: int, n: int) -> int:
        acc, base = 1, x
        while n:
            if n & 1:
                acc = self._mul[acc][base]
            base = self._mul[base][base]
            n >>= 1
        return acc

    # -- arithmetic -------------------------------------------------------------
    def __repr__(self) -> str:
        return f"Field(l={self.l}, f={self.f})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and (self.l, self.f) == (other.l, other.f)

    def __hash__(self) -> int:
        return hash((self.l, self.f))

    def elements(self) -> range:
        return range(self.q)

    def units(self) -> range:
        return range(1, self.q)

    def add(self, x: int, y: int) -> int:
        return self._add[x][y]

    def sub(self, x: int, y: int) -> int:
        return self._add[x][self._neg[y]]

    def neg(self, x: int) -> int:
        return self._neg[x]

    def mul(self, x: int, y: int) -> int:
        return self._mul[x][y]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._inv[x]

    def div(self, x: int, y: int) -> int:
        return self._mul[x][self.inv(y)]

    def pow(self, x: int, n: int) -> int:
        if x == 0:
            if n < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if n == 0 else 0
        return self._exp[(self._log[x] * n) % (self.q - 1)]

    def log(self, x: int) -> int:
        """Discrete log to base ``g0``."""
        if x == 0:
            raise DomainError("log of zero")
        return self._log[x]

    def exp(self, k: int) -> int:
        return self._exp[k % (self.q - 1)]

    def from_int(self, n: int) -> int:
        """Image of the integer ``n`` in the prime subfield."""
        return n % self.l

    def frobenius(self, x: int, times: int = 1) -> int:
        """x -> x**(l**times); ``times`` may be negative."""
        times %= self.f
        for _ in range(times):
            x = self._frob[x]
        return x

    def frob_inverse(self, x: int) -> int:
        return self.frobenius(x, -1)

    def root_of_unity(self, order: int) -> int:
        """The element g0**((q-1)/order), a generator of mu_order."""
        if (self.q - 1) % order:
            raise DomainError(f"mu_{order} is not contained in F_{self.q}")
        return self._exp[((self.q - 1) // order) % (self.q - 1)]

    # -- subfields ----------------------------------------------------------------
    def subfield(self, degree: int) -> list[int]:
        """Elements of the unique subfield of F_q of the given degree over F_l."""
        if self.f % degree:
            raise DomainError(f"no subfield of degree {degree} in F_{self.q}")
        return [x for x in range(self.q) if self.frobenius(x, degree) == x]

    def in_subfield(self, x: int, degree: int) -> bool:
        return self.frobenius(x, degree) == x

    # -- power residues and the scalar equation ------------------------------------
    def is_power_residue(self, x: int, d: int) -> bool:
        """True iff ``x`` lies in (F_q^x)^d."""
        if x == 0:
            raise DomainError("power-residue test of zero")
        if d <= 0:
            raise DomainError(f"exponent must be positive, got {d}")
        return self.pow(x, (self.q - 1) // gcd(d, self.q - 1)) == 1

    def solve_x_minus_cxl(self, c: int, h: int) -> Optional[int]:
        """Least x (in enumeration order) with x - c*x**l == h, or None."""
        for x in range(self.q):
            if self.sub(x, self._mul[c][self._frob[x]]) == h:
                return x
        return None

    def image_x_minus_cxl(self, c: int) -> frozenset[int]:
        return frozenset(self.sub(x, self._mul[c][self._frob[x]]) for x in range(self.q))

    # -- coordinates over F_l -------------------------------------------------------
    def to_digits(self, x: int) -> np.ndarray:
        return self._digits[x].copy()

    def from_digits(self, digits) -> int:
        return int((np.asarray(digits, dtype=np.int64) % self.l) @ self._weights)

    @property
    def digit_table(self) -> np.ndarray:
        """Read-only (q, f) array of digit vectors."""
        view = self._digits.view()
        view.flags.writeable = False
        return view

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def mul_matrix(self, c: int) -> np.ndarray:
        """Matrix over F_l of y -> c*y in digit coordinates (columns = images)."""
        return _mul_matrix(self, c)

    def frob_matrix(self, times: int = 1) -> np.ndarray:
        """Matrix over F_l of the F_l-linear map y -> y**(l**times)."""
        return _frob_matrix(self, times % self.f)


@lru_cache(maxsize=None)
def field(l: int, f: int = 1) -> Field:
    """Shared Field instance for (l, f); construction builds tables once."""
    return Field(l, f)


@lru_cache(maxsize=4096)
def _mul_matrix_cached(l: int, f: int, c: int) -> np.ndarray:
    F = field(l, f)
    cols = [F._digits[F._mul[c][l**t]] for t in range(f)]
    m = np.array(cols, dtype=np.int64).T
    m.flags.writeable = False
    return m


def _mul_matrix(F: Field, c: int) -> np.ndarray:
    return _mul_matrix_cached(F.l, F.f, c)


@lru_cache(maxsize=None)
def _frob_matrix_cached(l: int, f: int, times: int) -> np.ndarray:
    F = field(l, f)
    cols = [F._digits[F.frobenius(l**t, times)] for t in range(f)]
    m = np.array(cols, dtype=np.int64).T
    m.flags.writeable = False
    return m


def _frob_matrix(F: Field, times: int) -> np.ndarray:
    return _frob_matrix_cached(F.l, F.f, times)
