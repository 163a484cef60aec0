"""Truncated filtered spaces, their elements and F_p-subgroups.

A filtered space is stored on a valuation-adapted basis: basis vector ``j``
carries a valuation tag and ``F^i`` is the span of the basis vectors tagged
``>= i``.  Bases are kept sorted by ascending valuation, which makes
``S ∩ F^i`` readable straight off the canonical reduced basis of a subgroup
``S``: it is spanned by the rows whose pivot column has valuation ``>= i``.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

from . import gf
from .errors import BadParams
from .lincomb import format_lincomb, parse_lincomb

# cap on the number of product vectors materialized at once
_CHUNK_ENTRIES = 1 << 22


class FilteredSpace:
    """An R-space truncated at ``F^{precision+1}``, with its action tensor.

    ``action[i, j]`` is the coordinate vector of (ring basis ``i``) times
    (space basis ``j``).  The ring is ``algebra``; a
    :class:`~clfa.algebra.TruncatedFilteredAlgebra` is itself a
    ``FilteredSpace`` over itself.

    ``precision`` need not match the ring's: a space truncated lower simply
    discards more, and a re-indexed filtration may run higher.  ``exact`` declares that the truncation is
    the whole object (``F^{precision+1}`` is genuinely zero) rather than a
    level of a tower.
    """

    def __init__(
        self,
        algebra,
        names: Sequence[str],
        valuations: Sequence[int],
        action,
        *,
        precision: int | None = None,
        exact: bool = False,
        label: str = "",
    ):
        self.algebra = self if algebra is None else algebra
        field = self.algebra.field if algebra is not None else self.field
        self.field = field
        self.p = field.p
        names = [str(n) for n in names]
        vals = np.asarray(valuations, dtype=np.int64).reshape(-1)
        if len(names) != vals.size:
            raise BadParams("names and valuations differ in length")
        if len(set(names)) != len(names):
            raise BadParams("duplicate basis names")
        n = len(names)
        act = np.asarray(action, dtype=np.int64)
        n_ring = n if algebra is None else self.algebra.dim
        if act.shape != (n_ring, n, n):
            raise BadParams(f"action tensor has shape {act.shape}, expected {(n_ring, n, n)}")
        if precision is None:
            precision = self.algebra.precision if algebra is not None else int(vals.max(initial=0))
        self.precision = int(precision)
        if n and (vals.min() < 0 or vals.max() > self.precision):
            raise BadParams(f"valuations must lie in [0, {self.precision}]")

        perm = np.argsort(vals, kind="stable")
        self.names = [names[i] for i in perm]
        self.valuations = vals[perm]
        self.valuations.setflags(write=False)
        act = act % self.p
        act = act[:, perm][:, :, perm]
        if algebra is None:
            act = act[perm]
        self.action = np.ascontiguousarray(act)
        self.action.setflags(write=False)
        self.index = {name: i for i, name in enumerate(self.names)}
        self.exact = bool(exact)
        self.label = label
        self._offsets = np.searchsorted(self.valuations, np.arange(self.precision + 3), side="left")

    # -- basic structure ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def infinity(self) -> int:
        """Valuation used for the zero vector."""
        return self.precision + 1

    def offset(self, i: int) -> int:
        """Number of basis vectors of valuation ``< i``."""
        i = max(0, i)
        if i >= len(self._offsets):
            return self.dim
        return int(self._offsets[i])

    def degree_slice(self, i: int) -> slice:
        return slice(self.offset(i), self.offset(i + 1))

    def h(self) -> list[int]:
        """Dimensions of the graded pieces ``F^i / F^{i+1}`` for ``i <= precision``."""
        return [self.offset(i + 1) - self.offset(i) for i in range(self.precision + 1)]

    def __repr__(self):
        tag = self.label or type(self).__name__
        return f"<{tag} p={self.p} N={self.precision} dim={self.dim}>"

    # -- elements ----------------------------------------------------------------

    def vector(self, value) -> np.ndarray:
        """Coerce ``value`` (element, vector, name, dict or linear-combination text)."""
        if isinstance(value, Element):
            if value.space is not self:
                raise BadParams("element belongs to a different space")
            return value.coeffs
        if isinstance(value, str):
            out = np.zeros(self.dim, dtype=np.int64)
            try:
                terms = parse_lincomb(value)
            except ValueError as exc:
                raise BadParams(f"cannot read element {value!r}: {exc}") from None
            for c, name in terms:
                if name not in self.index:
                    raise BadParams(f"unknown basis name {name!r}")
                out[self.index[name]] += c
            return out % self.p
        if isinstance(value, dict):
            out = np.zeros(self.dim, dtype=np.int64)
            for name, c in value.items():
                if name not in self.index:
                    raise BadParams(f"unknown basis name {name!r}")
                out[self.index[name]] += int(c)
            return out % self.p
        arr = np.asarray(value, dtype=np.int64).reshape(-1)
        if arr.size != self.dim:
            raise BadParams(f"vector of length {arr.size} for a space of dimension {self.dim}")
        return arr % self.p

    def element(self, value) -> "Element":
        return Element(self, self.vector(value))

    def basis_element(self, key) -> "Element":
        i = self.index[key] if isinstance(key, str) else int(key)
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return Element(self, v)

    def zero(self) -> "Element":
        return Element(self, np.zeros(self.dim, dtype=np.int64))

    def valuation(self, vec) -> int:
        nz = np.flatnonzero(np.asarray(vec) % self.p)
        if nz.size == 0:
            return self.infinity
        return int(self.valuations[nz[0]])

    def principal_part(self, vec) -> np.ndarray:
        """The graded image of ``vec``: its coordinates in degree ``v(vec)``."""
        vec = np.asarray(vec, dtype=np.int64) % self.p
        out = np.zeros_like(vec)
        v = self.valuation(vec)
        if v <= self.precision:
            s = self.degree_slice(v)
            out[s] = vec[s]
        return out

    def format(self, vec) -> str:
        return format_lincomb(vec, self.names, self.p)

    # -- action --------------------------------------------------------------------

    def right_operator(self, m) -> np.ndarray:
        """Matrix of ``r -> r·m`` (rows indexed by the ring basis)."""
        m = self.vector(m)
        nr = self.algebra.dim
        flat = self.action.transpose(0, 2, 1).reshape(nr * self.dim, self.dim)
        return gf.matmul(flat, m[:, None], self.p).reshape(nr, self.dim)

    def left_operator(self, r) -> np.ndarray:
        """Matrix of ``m -> r·m`` (rows indexed by the space basis)."""
        r = self.algebra.vector(r)
        flat = self.action.reshape(self.algebra.dim, self.dim * self.dim)
        return gf.matmul(r[None, :], flat, self.p).reshape(self.dim, self.dim)

    def act(self, r, m) -> np.ndarray:
        return gf.matmul(self.algebra.vector(r)[None, :], self.right_operator(m), self.p)[0]

    def iter_products(self, ring_rows: np.ndarray, space_rows: np.ndarray) -> Iterator[np.ndarray]:
        """Yield, in chunks, the vectors ``a·b`` for all row pairs."""
        a = np.asarray(ring_rows, dtype=np.int64).reshape(-1, self.algebra.dim)
        b = np.asarray(space_rows, dtype=np.int64).reshape(-1, self.dim)
        if a.shape[0] == 0 or b.shape[0] == 0:
            return
        n = self.dim
        nr = self.algebra.dim
        step = max(1, _CHUNK_ENTRIES // max(1, b.shape[0] * n + n * n))
        units = bool(np.all(np.count_nonzero(a, axis=1) == 1) and np.all(a.max(axis=1) == 1))
        if units and self._float_action is not None:
            # rows of ``a`` are basis vectors (e.g. a filtration level): slice, don't multiply
            idx = np.argmax(a, axis=1)
            bf = b.astype(np.float64)
            for start in range(0, a.shape[0], step):
                left = self._float_action[idx[start:start + step]]
                prods = np.matmul(bf[None, :, :], left)
                yield (np.rint(prods).astype(np.int64) % self.p).reshape(-1, n)
            return
        flat = self.action.reshape(nr, n * n)
        for start in range(0, a.shape[0], step):
            left = gf.matmul(a[start:start + step], flat, self.p).reshape(-1, n, n)
            prods = gf.matmul(b[None, :, :], left, self.p)
            yield prods.reshape(-1, n)

    @property
    def _float_action(self):
        """Float copy of the action tensor, when float products stay exact."""
        if not hasattr(self, "_float_cache"):
            exact = (self.p - 1) ** 2 * max(self.dim, 1) < 2**53
            self._float_cache = self.action.astype(np.float64) if exact else None
        return self._float_cache

    # -- subgroups -------------------------------------------------------------------

    def subgroup(self, rows=()) -> "Subgroup":
        return Subgroup(self, rows)

    def filtration(self, i: int) -> "Subgroup":
        """``F^i`` as a subgroup (``F^i = 0`` for ``i > precision``)."""
        start = self.offset(i)
        cache = self.__dict__.setdefault("_level_cache", {})
        if start not in cache:
            rows = np.eye(self.dim, dtype=np.int64)[start:]
            cache[start] = Subgroup(self, rows, _pivots=tuple(range(start, self.dim)))
        return cache[start]

    def whole(self) -> "Subgroup":
        return self.filtration(0)

    def zero_subgroup(self) -> "Subgroup":
        return Subgroup(self, ())


class Element:
    """A vector of a truncated filtered space.

    ``r * m`` is the action when ``r`` lives in the ring of ``m``'s space (for
    the ring itself this is its multiplication); ``c * m`` with an integer is
    scalar multiplication.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: FilteredSpace, coeffs):
        self.space = space
        c = np.asarray(coeffs, dtype=np.int64) % space.p
        c.setflags(write=False)
        self.coeffs = c

    @property
    def valuation(self) -> int:
        return self.space.valuation(self.coeffs)

    @property
    def principal_part(self) -> np.ndarray:
        return self.space.principal_part(self.coeffs)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def _peer(self, other) -> np.ndarray:
        if isinstance(other, Element):
            if other.space is not self.space:
                raise BadParams("elements live in different spaces")
            return other.coeffs
        return self.space.vector(other)

    def __add__(self, other):
        return Element(self.space, self.coeffs + self._peer(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Element(self.space, self.coeffs - self._peer(other))

    def __rsub__(self, other):
        return Element(self.space, self._peer(other) - self.coeffs)

    def __neg__(self):
        return Element(self.space, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return Element(self.space, self.coeffs * int(other))
        if isinstance(other, Element):
            if other.space.algebra is not self.space:
                raise BadParams("left factor must lie in the ring acting on the right factor")
            return Element(other.space, other.space.act(self.coeffs, other.coeffs))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return Element(self.space, self.coeffs * int(other))
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Element):
            return other.space is self.space and np.array_equal(other.coeffs, self.coeffs)
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((id(self.space), self.coeffs.tobytes()))

    def __repr__(self):
        return self.space.format(self.coeffs)


class Subgroup:
    """An F_p-subspace of a truncated space, stored in canonical reduced form.

    Equality of subgroups is equality of their reduced bases.
    """

    __slots__ = ("space", "basis", "pivots", "_profile")

    def __init__(self, space: FilteredSpace, rows=(), *, _reduced: bool = False, _pivots=None):
        self.space = space
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            rows = np.zeros((0, space.dim), dtype=np.int64)
        rows = rows.reshape(-1, space.dim)
        if _pivots is not None:
            basis = rows % space.p
            pivots = [int(c) for c in _pivots]
        elif _reduced:
            basis = rows % space.p
            pivots = np.argmax(basis != 0, axis=1).tolist()
        else:
            r, k, pivots = gf.rref(rows, space.p)
            basis = r[:k].copy()
        basis.setflags(write=False)
        self.basis = basis
        self.pivots = tuple(pivots)
        self._profile = None

    @classmethod
    def from_accumulator(cls, space: FilteredSpace, acc: gf.SpanAccumulator) -> "Subgroup":
        return cls(space, acc.basis, _pivots=acc.pivots)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.dim

    @property
    def profile(self) -> tuple[int, ...]:
        """``dim(S ∩ F^i)`` for ``i = 0 .. precision + 1``."""
        if self._profile is None:
            vals = self.space.valuations[list(self.pivots)] if self.pivots else np.zeros(0, dtype=np.int64)
            self._profile = tuple(int(np.sum(vals >= i)) for i in range(self.space.precision + 2))
        return self._profile

    def level(self, i: int) -> "Subgroup":
        """``S ∩ F^i``."""
        start = self.space.offset(i)
        keep = [k for k, c in enumerate(self.pivots) if c >= start]
        return Subgroup(self.space, self.basis[keep], _pivots=[self.pivots[k] for k in keep])

    def elements_of_valuation(self) -> list[tuple[int, np.ndarray]]:
        """Basis rows paired with their valuation (the pivot's valuation)."""
        return [(int(self.space.valuations[c]), row) for c, row in zip(self.pivots, self.basis)]

    def reduce(self, vec) -> np.ndarray:
        vec = np.asarray(vec, dtype=np.int64).reshape(1, -1)
        return gf.reduce_rows(vec, self.basis, self.pivots, self.space.p)[0]

    def contains(self, vec) -> bool:
        return not np.any(self.reduce(self.space.vector(vec)))

    def __contains__(self, vec) -> bool:
        return self.contains(vec)

    def _check(self, other: "Subgroup"):
        if other.space is not self.space:
            raise BadParams("subgroups of different spaces")

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return other.space is self.space and np.array_equal(other.basis, self.basis)

    def __hash__(self):
        return hash((id(self.space), self.basis.tobytes()))

    def __le__(self, other: "Subgroup") -> bool:
        self._check(other)
        if self.dim == 0:
            return True
        red = gf.reduce_rows(self.basis, other.basis, other.pivots, self.space.p)
        return not np.any(red)

    def __lt__(self, other: "Subgroup") -> bool:
        return self <= other and self.dim < other.dim

    def __add__(self, other: "Subgroup") -> "Subgroup":
        self._check(other)
        return Subgroup(self.space, np.concatenate([self.basis, other.basis]))

    def __and__(self, other: "Subgroup") -> "Subgroup":
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return self.space.zero_subgroup()
        stacked = np.concatenate([self.basis, other.basis]).T
        ker = gf.kernel(stacked, self.space.p)
        if ker.shape[0] == 0:
            return self.space.zero_subgroup()
        combos = ker[:, : self.dim]
        return Subgroup(self.space, gf.matmul(combos, self.basis, self.space.p))

    def image(self, matrix) -> "Subgroup":
        """Image under a linear map given by a matrix acting on row vectors."""
        return Subgroup(self.space, gf.matmul(self.basis, np.asarray(matrix), self.space.p))

    def elements(self) -> Iterator[np.ndarray]:
        """Enumerate every vector of the subgroup (``p^dim`` of them)."""
        p = self.space.p
        k = self.dim
        for idx in range(p**k):
            coeffs = np.zeros(k, dtype=np.int64)
            t = idx
            for i in range(k):
                coeffs[i] = t % p
                t //= p
            yield (coeffs @ self.basis) % p if k else np.zeros(self.space.dim, dtype=np.int64)

    def __repr__(self):
        return f"<Subgroup dim={self.dim} of {self.space!r}>"


def _rows_of(delta, space: FilteredSpace | None) -> tuple[FilteredSpace, np.ndarray]:
    if isinstance(delta, Subgroup):
        return delta.space, delta.basis
    items = list(delta)
    if space is None:
        owners = {id(x.space): x.space for x in items if isinstance(x, Element)}
        if len(owners) != 1:
            raise BadParams("cannot infer the ambient space of an empty or mixed element list")
        space = next(iter(owners.values()))
    rows = [space.vector(x) for x in items]
    if not rows:
        return space, np.zeros((0, space.dim), dtype=np.int64)
    return space, np.stack(rows)


def product(A, delta, space: FilteredSpace | None = None) -> Subgroup:
    """The subgroup ``AΔ``: all finite sums of products ``a·x``.

    Args:
        A: a :class:`Subgroup` of the ring, or an iterable of ring elements.
        delta: a :class:`Subgroup` of a space over that ring, or an iterable
            of its elements (pass ``space`` when the iterable may be empty).

    Both factors are F_p-stable, so the F_p-span of products of basis vectors
    already is the abelian group generated by all products.
    """
    target, mrows = _rows_of(delta, space)
    ring = target.algebra
    if isinstance(A, Subgroup):
        if A.space is not ring:
            raise BadParams("left factor is not a subgroup of the acting ring")
        arows = A.basis
    else:
        _, arows = _rows_of(A, ring)
    acc = gf.SpanAccumulator(target.dim, target.p)
    for chunk in target.iter_products(arows, mrows):
        acc.add(chunk)
        if acc.full:
            break
    return Subgroup.from_accumulator(target, acc)


def level_products(delta: Subgroup, top: int | None = None) -> list[Subgroup]:
    """``[F^i(R)·Δ for i = 0..top]`` from a single descending accumulation.

    ``F^i(R)·Δ`` is spanned by products of ring basis vectors of valuation
    ``>= i`` with the basis of Δ, so walking ``i`` downwards only ever adds
    rows.
    """
    space = delta.space
    ring = space.algebra
    if top is None:
        top = ring.precision
    acc = gf.SpanAccumulator(space.dim, space.p)
    out: list[Subgroup] = [None] * (top + 1)  # type: ignore[list-item]
    eye = np.eye(ring.dim, dtype=np.int64)
    for i in range(top, -1, -1):
        lo = ring.offset(i)
        hi = ring.dim if i == top else ring.offset(i + 1)
        if hi > lo and delta.dim and not acc.full:
            for chunk in space.iter_products(eye[lo:hi], delta.basis):
                acc.add(chunk)
        out[i] = Subgroup.from_accumulator(space, acc)
    return out


def span_of(space: FilteredSpace, vectors: Iterable) -> Subgroup:
    _, rows = _rows_of(list(vectors), space)
    return Subgroup(space, rows)
