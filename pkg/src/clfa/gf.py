"""Dense exact linear algebra over prime fields F_p.

Matrices are plain numpy integer arrays whose entries lie in ``[0, p)``.
Row reduction is canonical (leftmost pivot, first nonzero row wins), so two
row spaces are equal exactly when their reduced forms are equal.  For
``p = 2`` rows are packed eight columns to a byte and eliminated with XOR.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BadParams, NoSolution

_FLOAT_EXACT = 2**53
_INT64_EXACT = 2**63 - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


class Fp:
    """The prime field F_p, used as a descriptor and a coercion helper.

    >>> F = Fp(3)
    >>> F(5), F.inv(2)
    (2, 2)
    """

    __slots__ = ("p",)

    def __init__(self, p: int):
        p = int(p)
        if not (2 <= p < 2**31) or not is_prime(p):
            raise BadParams(f"field size must be a prime in [2, 2^31), got {p}")
        self.p = p

    def __call__(self, value: int) -> int:
        return int(value) % self.p

    def inv(self, value: int) -> int:
        value = int(value) % self.p
        if value == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return pow(value, -1, self.p)

    def array(self, data) -> np.ndarray:
        return np.asarray(data, dtype=np.int64) % self.p

    def __eq__(self, other):
        return isinstance(other, Fp) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def __repr__(self):
        return f"Fp({self.p})"


def _as_field(p) -> int:
    return p.p if isinstance(p, Fp) else int(p)


def matmul(a: np.ndarray, b: np.ndarray, p) -> np.ndarray:
    """``a @ b mod p`` with exact arithmetic.

    Uses BLAS in float64 while every partial sum stays below 2^53, int64
    while it stays below 2^63, and Python integers beyond that.
    """
    p = _as_field(p)
    inner = a.shape[-1]
    bound = (p - 1) ** 2 * max(inner, 1)
    if bound < _FLOAT_EXACT:
        out = np.matmul(a.astype(np.float64), b.astype(np.float64))
        return np.rint(out).astype(np.int64) % p
    if bound < _INT64_EXACT:
        return np.matmul(a.astype(np.int64), b.astype(np.int64)) % p
    out = np.matmul(a.astype(object), b.astype(object)) % p
    return out.astype(np.int64)


def _rref_generic(m: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    r = m.copy()
    nrows, ncols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nz = np.flatnonzero(r[row:, col])
        if nz.size == 0:
            continue
        src = row + int(nz[0])
        if src != row:
            r[[row, src]] = r[[src, row]]
        lead = int(r[row, col])
        if lead != 1:
            r[row] = (r[row] * pow(lead, -1, p)) % p
        factors = r[:, col].copy()
        factors[row] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            r[hit] = (r[hit] - np.outer(factors[hit], r[row])) % p
        pivots.append(col)
        row += 1
    return r, pivots


def _rref_gf2(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    nrows, ncols = m.shape
    packed = np.packbits(m.astype(np.uint8) & 1, axis=1)
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        byte, shift = divmod(col, 8)
        bits = (packed[row:, byte] >> (7 - shift)) & 1
        nz = np.flatnonzero(bits)
        if nz.size == 0:
            continue
        src = row + int(nz[0])
        if src != row:
            packed[[row, src]] = packed[[src, row]]
        column = (packed[:, byte] >> (7 - shift)) & 1
        column[row] = 0
        hit = np.flatnonzero(column)
        if hit.size:
            packed[hit] ^= packed[row]
        pivots.append(col)
        row += 1
    out = np.unpackbits(packed, axis=1, count=ncols).astype(np.int64)
    return out, pivots


def rref(m, p) -> tuple[np.ndarray, int, list[int]]:
    """Reduced row-echelon form of ``m`` over F_p.

    Returns:
        (R, rank, pivots): ``R`` has the shape of ``m`` with zero rows at
        the bottom; ``pivots`` lists the pivot columns in increasing order.
    """
    p = _as_field(p)
    m = np.atleast_2d(np.asarray(m, dtype=np.int64)) % p
    if m.size == 0:
        return m.copy(), 0, []
    if p == 2:
        r, pivots = _rref_gf2(m)
    else:
        r, pivots = _rref_generic(m, p)
    return r, len(pivots), pivots


def rank(m, p) -> int:
    return rref(m, p)[1]


def row_basis(m, p, ncols: int | None = None) -> np.ndarray:
    """Nonzero rows of the canonical reduced form (a ``rank x ncols`` array)."""
    m = np.asarray(m, dtype=np.int64)
    if m.size == 0:
        width = ncols if ncols is not None else (m.shape[1] if m.ndim == 2 else 0)
        return np.zeros((0, width), dtype=np.int64)
    r, k, _ = rref(m, p)
    return r[:k].copy()


def solve(a, b, p) -> np.ndarray:
    """Some ``x`` with ``a @ x == b`` over F_p; free variables are set to 0.

    Raises:
        NoSolution: ``b`` is not in the column space of ``a``.
    """
    p = _as_field(p)
    a = np.atleast_2d(np.asarray(a, dtype=np.int64)) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1) % p
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    ncols = a.shape[1]
    aug = np.concatenate([a, b[:, None]], axis=1)
    r, k, pivots = rref(aug, p)
    if pivots and pivots[-1] == ncols:
        raise NoSolution("right-hand side is not in the column space")
    x = np.zeros(ncols, dtype=np.int64)
    for row, col in enumerate(pivots):
        x[col] = r[row, ncols]
    return x


def kernel(a, p) -> np.ndarray:
    """Canonical null-space basis, one row per non-pivot column."""
    p = _as_field(p)
    a = np.atleast_2d(np.asarray(a, dtype=np.int64)) % p
    ncols = a.shape[1]
    r, k, pivots = rref(a, p)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, col in enumerate(pivots):
            basis[i, col] = (-r[row, f]) % p
    return basis


def inverse(a, p) -> np.ndarray:
    p = _as_field(p)
    a = np.asarray(a, dtype=np.int64) % p
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    r, k, pivots = rref(np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1), p)
    if k < n or pivots[n - 1] != n - 1:
        raise NoSolution("matrix is singular")
    return r[:, n:].copy()


def reduce_rows(rows: np.ndarray, basis: np.ndarray, pivots, p) -> np.ndarray:
    """Normal forms of ``rows`` modulo the span of a reduced ``basis``.

    ``basis`` must be in reduced row-echelon form with the given pivots; the
    result has zeros in every pivot column.
    """
    p = _as_field(p)
    if len(pivots) == 0 or rows.shape[0] == 0:
        return rows % p
    coeffs = rows[:, list(pivots)]
    return (rows - matmul(coeffs, basis, p)) % p


class SpanAccumulator:
    """Incrementally maintained reduced basis of a growing row space.

    Feeding a large batch of candidate rows costs one matrix product against
    the current basis plus a small elimination on whatever survives.
    """

    def __init__(self, ncols: int, p, limit: int | None = None):
        self.p = _as_field(p)
        self.ncols = ncols
        self.limit = ncols if limit is None else limit
        self.basis = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def full(self) -> bool:
        return self.rank >= self.limit

    def add(self, rows) -> None:
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.ncols) % self.p
        if rows.shape[0] == 0 or self.full:
            return
        rest = reduce_rows(rows, self.basis, self.pivots, self.p)
        rest = rest[np.any(rest != 0, axis=1)]
        if rest.shape[0] == 0:
            return
        r, k, new_pivots = rref(rest, self.p)
        fresh = r[:k]
        old = self.basis
        if old.shape[0]:
            # clear the new pivot columns from the old rows to stay fully reduced
            old = (old - matmul(old[:, new_pivots], fresh, self.p)) % self.p
        pivots = self.pivots + new_pivots
        order = np.argsort(pivots, kind="stable")
        self.basis = np.concatenate([old, fresh], axis=0)[order]
        self.pivots = [pivots[i] for i in order]
