"""Rees objects, leading monomials, spanning-set extraction and Artin–Rees constants.

Rees rings are never built as polynomial rings.  A Rees element is a short
list of coefficients indexed by the power of the Rees variable ``X``, and a
Rees subspace is stored slice by slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gf
from .core import FilteredSpace, Subgroup, level_products, product
from .errors import BadParams, CapTooLow, VerificationFailed


@dataclass(frozen=True)
class ReesElement:
    """``a_0 + a_1 X + ... + a_n X^n`` with ``a_j`` a vector of ``space``.

    ``rees=True`` enforces the Rees condition ``a_j ∈ F^j``; ``False`` gives
    an element of the plain polynomial space ``M[X]``.
    """

    space: FilteredSpace
    coeffs: tuple
    rees: bool = True

    @classmethod
    def build(cls, space: FilteredSpace, coeffs: Sequence, rees: bool = True) -> "ReesElement":
        vecs = [space.vector(c) for c in coeffs]
        while vecs and not np.any(vecs[-1]):
            vecs.pop()
        if rees:
            for j, v in enumerate(vecs):
                if np.any(v) and space.valuation(v) < j:
                    raise BadParams(f"coefficient of X^{j} has valuation {space.valuation(v)} < {j}")
        for v in vecs:
            v.setflags(write=False)
        return cls(space, tuple(vecs), rees)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def act(self, ring_elem: "ReesElement") -> "ReesElement":
        """``ring_elem · self`` where ``ring_elem`` lives over the acting ring."""
        sp = self.space
        out: dict[int, np.ndarray] = {}
        for i, r in enumerate(ring_elem.coeffs):
            if not np.any(r):
                continue
            for j, m in enumerate(self.coeffs):
                if not np.any(m):
                    continue
                prod = sp.act(r, m)
                out[i + j] = (out.get(i + j, np.zeros(sp.dim, dtype=np.int64)) + prod) % sp.p
        top = max(out) if out else -1
        return ReesElement.build(sp, [out.get(k, np.zeros(sp.dim, dtype=np.int64)) for k in range(top + 1)],
                                 rees=self.rees and ring_elem.rees)


@dataclass
class LeadingData:
    """``φ(α) = σ(a_n) X^n`` for ``α`` of degree ``n``; everything is ``None`` for ``α = 0``."""

    degree: int | None
    leading_coefficient: np.ndarray | None
    principal: np.ndarray | None
    valuation: int | None

    @property
    def is_zero(self) -> bool:
        return self.degree is None


def leading_monomial(alpha: ReesElement) -> LeadingData:
    if alpha.is_zero():
        return LeadingData(None, None, None, None)
    lead = alpha.coeffs[-1]
    sp = alpha.space
    return LeadingData(alpha.degree, lead, sp.principal_part(lead), sp.valuation(lead))


def graded_leading_product(ring, left: LeadingData, space: FilteredSpace, right: LeadingData) -> np.ndarray:
    """``σ(a_n)σ(b_m)`` in degree ``v(a_n) + v(b_m)`` (as a full-length vector, possibly zero)."""
    total = left.valuation + right.valuation
    out = np.zeros(space.dim, dtype=np.int64)
    if total > space.precision:
        return out
    prod = space.act(left.principal, right.principal)
    s = space.degree_slice(total)
    out[s] = prod[s]
    return out


def leading_product_rule_holds(alpha: ReesElement, beta: ReesElement) -> bool | None:
    """Check ``φ(αβ) = φ(α)φ(β)`` when the right side is nonzero (``None`` otherwise)."""
    la, lb = leading_monomial(alpha), leading_monomial(beta)
    if la.is_zero or lb.is_zero:
        return None
    expected = graded_leading_product(alpha.space, la, beta.space, lb)
    if not np.any(expected):
        return None
    lp = leading_monomial(beta.act(alpha))
    return bool(lp.degree == la.degree + lb.degree and np.array_equal(lp.principal, expected))


# -- leading coefficient spaces in M[X] ----------------------------------------------------


@dataclass
class LeadingCoefficientChain:
    """``N(0) ⊆ N(1) ⊆ ... ⊆ N(K)`` and the first index where the chain stops growing."""

    spaces: list[Subgroup]
    stabilized_at: int
    cap: int
    closure_dim: int


def _flat(space: FilteredSpace, poly: ReesElement, cap: int) -> np.ndarray:
    """Coefficient blocks laid out highest ``X``-degree first."""
    out = np.zeros((cap + 1) * space.dim, dtype=np.int64)
    for j, c in enumerate(poly.coeffs):
        if j > cap:
            raise CapTooLow(f"generator has X-degree {j} above the cap {cap}")
        b = (cap - j) * space.dim
        out[b:b + space.dim] = c
    return out


def leading_coefficient_spaces(space: FilteredSpace, gens: Sequence[ReesElement], cap: int) -> LeadingCoefficientChain:
    """Leading coefficient spaces of the ``R[X]``-subspace of ``M[X]`` spanned by ``gens``.

    The closure under the ring action and under multiplication by ``X`` is
    computed inside ``X``-degree at most ``cap``; ``N(j)`` collects the
    ``X^j`` coefficients of closure elements of degree at most ``j``.

    Raises:
        CapTooLow: ``N(cap - 1) != N(cap)``.
    """
    if cap < 1:
        raise BadParams("cap must be at least 1")
    n = space.dim
    p = space.p
    width = (cap + 1) * n
    acc = gf.SpanAccumulator(width, p)
    rows = [_flat(space, g, cap) for g in gens]
    if rows:
        acc.add(np.stack(rows))
    ring_whole = np.eye(space.algebra.dim, dtype=np.int64)
    while True:
        before = acc.rank
        basis = acc.basis
        if basis.shape[0] == 0:
            break
        blocks = basis.reshape(-1, cap + 1, n)
        # ring action, coefficientwise
        new = []
        for chunk in space.iter_products(ring_whole, blocks.reshape(-1, n)):
            new.append(chunk)
        acted = np.concatenate(new).reshape(space.algebra.dim, -1, cap + 1, n)
        acc.add(acted.reshape(-1, width))
        # multiplication by X keeps only elements that stay inside the cap
        low = blocks[blocks[:, 0, :].any(axis=1) == 0]
        if low.shape[0]:
            shifted = np.zeros_like(low)
            shifted[:, :-1, :] = low[:, 1:, :]
            acc.add(shifted.reshape(-1, width))
        if acc.rank == before:
            break
    basis = acc.basis
    chain = []
    for j in range(cap + 1):
        start = (cap - j) * n
        # rows supported in X-degree <= j are those whose pivot lies at or after block j
        keep = [k for k, c in enumerate(acc.pivots) if c >= start]
        coeffs = basis[keep, start:start + n] if keep else np.zeros((0, n), dtype=np.int64)
        chain.append(Subgroup(space, coeffs))
    stab = cap
    while stab > 0 and chain[stab - 1] == chain[stab]:
        stab -= 1
    if chain[cap - 1] != chain[cap]:
        raise CapTooLow(f"leading coefficient spaces still grow at X-degree {cap}")
    return LeadingCoefficientChain(chain, stab, cap, acc.rank)


# -- Rees subspaces and spanning sets -------------------------------------------------------


class ReesSubspace:
    """A subspace of ``R(M) = ⊕ F^n(M) X^n`` stored as its slices ``S_n ⊆ F^n(M)``."""

    def __init__(self, space: FilteredSpace, slices: Sequence[Subgroup]):
        self.space = space
        self.slices = list(slices)
        for n, s in enumerate(self.slices):
            if not s <= space.filtration(n):
                raise BadParams(f"slice {n} is not inside F^{n}")

    @classmethod
    def full(cls, space: FilteredSpace) -> "ReesSubspace":
        return cls(space, [space.filtration(n) for n in range(space.precision + 1)])

    @classmethod
    def from_generators(cls, space: FilteredSpace, gens: Sequence[tuple[int, object]]) -> "ReesSubspace":
        """Closure of monomial generators ``m X^d`` under ``F^j(R) X^j``.

        Iterates until every slice is stable, mirroring the generated-subspace
        closure for nonassociative actions.
        """
        ring = space.algebra
        n_top = space.precision
        slices = [space.zero_subgroup() for _ in range(n_top + 1)]
        for d, m in gens:
            vec = space.vector(m)
            if d > n_top:
                continue
            if np.any(vec) and space.valuation(vec) < d:
                raise BadParams(f"generator of X-degree {d} has valuation {space.valuation(vec)}")
            slices[d] = slices[d] + Subgroup(space, vec[None, :])
        changed = True
        while changed:
            changed = False
            for n in range(n_top + 1):
                acc = slices[n]
                for j in range(0, n + 1):
                    if slices[n - j].dim:
                        acc = acc + product(ring.filtration(j), slices[n - j])
                if acc != slices[n]:
                    slices[n] = acc
                    changed = True
        return cls(space, slices)


@dataclass
class SpanningSet:
    """Monomial generators ``m_i X^{d_i}`` with the verified slice identity."""

    degrees: list[int]
    generators: list[np.ndarray]
    verified_slices: int = 0

    def __len__(self):
        return len(self.degrees)


def slice_from_generators(space: FilteredSpace, degrees, gens, n: int) -> Subgroup:
    """``Σ_i F^{n-d_i}(R) m_i`` with ``F^{<0}(R) = 0``."""
    ring = space.algebra
    acc = space.zero_subgroup()
    for d, m in zip(degrees, gens):
        if n - d < 0:
            continue
        acc = acc + product(ring.filtration(n - d), [m], space)
    return acc


def extract_spanning_set(space: FilteredSpace, rees: ReesSubspace | None = None) -> SpanningSet:
    """Monomial spanning set of a Rees subspace, verified slice by slice.

    Generators are added greedily: in degree ``n`` every basis vector of the
    slice not yet reached by earlier generators becomes a generator of
    ``X``-degree ``n``.  The result satisfies
    ``S_n = Σ_i F^{n-d_i}(R) m_i`` for every ``n <= N``.

    Raises:
        VerificationFailed: the slice identity fails for some ``n`` (the
            slices are not closed under the Rees action).
    """
    rees = rees or ReesSubspace.full(space)
    degrees: list[int] = []
    gens: list[np.ndarray] = []
    for n, target in enumerate(rees.slices):
        covered = slice_from_generators(space, degrees, gens, n)
        for row in target.basis:
            if not covered.contains(row):
                degrees.append(n)
                gens.append(row.copy())
                covered = covered + product(space.algebra.filtration(0), [row], space)
    for n, target in enumerate(rees.slices):
        if slice_from_generators(space, degrees, gens, n) != target:
            raise VerificationFailed(f"spanning set does not reproduce slice {n}")
    return SpanningSet(degrees, gens, len(rees.slices))


# -- Artin–Rees --------------------------------------------------------------------------


@dataclass
class ArtinReesReport:
    """Smallest ``D`` with ``F^{n+d}(M) = F^n(R)F^d(M)`` for all ``d >= D``, ``n + d <= N``.

    ``table[(n, d)]`` records each equality; ``D`` is ``None`` when even
    ``d = N`` fails.
    """

    D: int | None
    precision: int
    table: dict[tuple[int, int], bool] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.D is not None

    @property
    def verified_pairs(self) -> int:
        if self.D is None:
            return 0
        return sum(1 for (n, d), ok in self.table.items() if d >= self.D and ok)

    def to_kv(self) -> dict[str, str]:
        return {
            "D": "none" if self.D is None else str(self.D),
            "N": str(self.precision),
            "verified_pairs": str(self.verified_pairs),
        }

    def to_csv(self) -> str:
        lines = ["n,d,pass"]
        for (n, d), ok in sorted(self.table.items(), key=lambda t: (t[0][1], t[0][0])):
            lines.append(f"{n},{d},{'true' if ok else 'false'}")
        return "\n".join(lines) + "\n"


def artin_rees_constant(space: FilteredSpace) -> ArtinReesReport:
    top = space.precision
    table: dict[tuple[int, int], bool] = {}
    levels = [space.filtration(i) for i in range(top + 1)]
    good_from = top + 1
    for d in range(top, -1, -1):
        ok_all = True
        for n, lhs in enumerate(level_products(levels[d], top - d)):
            ok = lhs == levels[n + d]
            table[(n, d)] = ok
            ok_all &= ok
        if ok_all and good_from == d + 1:
            good_from = d
    D = good_from if good_from <= top else None
    return ArtinReesReport(D, top, table)
