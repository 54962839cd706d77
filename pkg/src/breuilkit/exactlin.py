"""Dense linear algebra over the prime field F_l.

Matrices are numpy int64 arrays with entries reduced mod ``l``.  Every
routine goes through one reduced-row-echelon kernel, so rank, solving and
kernels agree with each other by construction.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import DomainError


def as_matrix(rows, l: int, cols: Optional[int] = None) -> np.ndarray:
    """Coerce ``rows`` to a 2-d int64 array reduced mod ``l``."""
    m = np.asarray(rows, dtype=np.int64)
    if m.ndim == 1:
        if m.size == 0 and cols is not None:
            m = m.reshape(0, cols)
        else:
            m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DomainError(f"expected a matrix, got array of shape {m.shape}")
    return m % l


def _inverses(l: int) -> np.ndarray:
    inv = np.zeros(l, dtype=np.int64)
    for x in range(1, l):
        inv[x] = pow(x, l - 2, l)
    return inv


def rref(m: np.ndarray, l: int, ncols: Optional[int] = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``m`` over F_l.

    Pivots are only searched in the first ``ncols`` columns (all by default),
    which lets callers reduce an augmented matrix without pivoting on the
    augmentation.  Returns the reduced copy and the list of pivot columns.
    """
    a = as_matrix(m, l).copy()
    rows, cols = a.shape
    limit = cols if ncols is None else ncols
    inv = _inverses(l)
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = (a[r] * inv[a[r, c]]) % l
        col = a[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % l
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m, l: int) -> int:
    a = as_matrix(m, l)
    if a.size == 0:
        return 0
    return len(rref(a, l)[1])


def solve(m, b, l: int) -> Optional[np.ndarray]:
    """Some x with m @ x = b over F_l, free variables set to 0; None if inconsistent."""
    a = as_matrix(m, l)
    rhs = np.asarray(b, dtype=np.int64).reshape(-1) % l
    if rhs.shape[0] != a.shape[0]:
        raise DomainError(f"right-hand side has length {rhs.shape[0]}, matrix has {a.shape[0]} rows")
    aug = np.concatenate([a, rhs[:, None]], axis=1)
    red, piv = rref(aug, l, ncols=a.shape[1])
    k = len(piv)
    if np.any(red[k:, -1]):
        return None
    x = np.zeros(a.shape[1], dtype=np.int64)
    x[piv] = red[:k, -1]
    return x


def kernel_basis(m, l: int, cols: Optional[int] = None) -> list[np.ndarray]:
    """Basis of {x : m @ x = 0}; its length is cols - rank(m)."""
    a = as_matrix(m, l, cols)
    n = a.shape[1]
    if a.shape[0] == 0:
        return [np.eye(n, dtype=np.int64)[i] for i in range(n)]
    red, piv = rref(a, l)
    pivset = set(piv)
    basis = []
    for free in range(n):
        if free in pivset:
            continue
        v = np.zeros(n, dtype=np.int64)
        v[free] = 1
        for row, pc in enumerate(piv):
            v[pc] = (-red[row, free]) % l
        basis.append(v)
    return basis


def kernel_matrix(m, l: int, cols: Optional[int] = None) -> np.ndarray:
    """Kernel basis stacked as rows, shape (nullity, cols)."""
    a = as_matrix(m, l, cols)
    basis = kernel_basis(a, l)
    if not basis:
        return np.zeros((0, a.shape[1]), dtype=np.int64)
    return np.array(basis, dtype=np.int64)


def row_space(m, l: int) -> np.ndarray:
    """Reduced basis of the row space, as rows."""
    a = as_matrix(m, l)
    if a.size == 0:
        return a.reshape(0, a.shape[1] if a.ndim == 2 else 0)
    red, piv = rref(a, l)
    return red[: len(piv)]


def inverse(m, l: int) -> np.ndarray:
    a = as_matrix(m, l)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DomainError("inverse of a non-square matrix")
    red, piv = rref(np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1), l, ncols=n)
    if len(piv) != n:
        raise DomainError("matrix is singular")
    return red[:, n:]


def quotient_dim(sub_rows, ambient_rows, l: int) -> int:
    """dim(span(ambient)) - dim(span(sub)), asserting sub lies inside ambient."""
    sub = as_matrix(sub_rows, l)
    amb = as_matrix(ambient_rows, l)
    ra = rank(amb, l)
    if sub.shape[0]:
        if rank(np.concatenate([amb, sub]), l) != ra:
            raise DomainError("subspace is not contained in the ambient space")
        return ra - rank(sub, l)
    return ra


class LinearSolver:
    """Factor a fixed matrix once, then solve many right-hand sides.

    Stores the reduced form of ``[m | I]``: the left block gives pivots and
    the right block the row operations, so a solve is one mat-vec product.
    """

    def __init__(self, m, l: int):
        a = as_matrix(m, l)
        self.l = l
        self.shape = a.shape
        rows, cols = a.shape
        red, piv = rref(np.concatenate([a, np.eye(rows, dtype=np.int64)], axis=1), l, ncols=cols)
        self._pivots = np.array(piv, dtype=np.int64)
        self._ops = red[:, cols:]
        self.rank = len(piv)

    def solve(self, b) -> Optional[np.ndarray]:
        rhs = np.asarray(b, dtype=np.int64).reshape(-1) % self.l
        if rhs.shape[0] != self.shape[0]:
            raise DomainError("right-hand side length does not match the matrix")
        t = (self._ops @ rhs) % self.l
        if np.any(t[self.rank:]):
            return None
        x = np.zeros(self.shape[1], dtype=np.int64)
        x[self._pivots] = t[: self.rank]
        return x

    def solve_many(self, bs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Solve for each column of ``bs``; returns (solutions, solvable mask)."""
        rhs = np.asarray(bs, dtype=np.int64) % self.l
        t = (self._ops @ rhs) % self.l
        ok = ~np.any(t[self.rank:], axis=0)
        x = np.zeros((self.shape[1], rhs.shape[1]), dtype=np.int64)
        x[self._pivots] = t[: self.rank]
        return x, ok

    def contains(self, b) -> bool:
        return self.solve(b) is not None


def stack(blocks: Sequence[np.ndarray], cols: int) -> np.ndarray:
    """Vertically stack row blocks, tolerating an empty list."""
    blocks = [b for b in blocks if b.size]
    if not blocks:
        return np.zeros((0, cols), dtype=np.int64)
    return np.concatenate(blocks, axis=0)
