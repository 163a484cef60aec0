"""Filtered R-spaces: constructions, induced filtrations and dimension theory."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import gf
from .algebra import Check, ValidationReport, filtration_checks
from .core import FilteredSpace, Subgroup, level_products, product
from .errors import BadParams, NotPermissible, NotSubspace, PrecisionTooLow, VerificationFailed
from .graded import DEFAULT_WINDOW, GradedView, HilbertReport, hilbert


# -- spans ---------------------------------------------------------------------------


def span(space: FilteredSpace, delta: Iterable) -> Subgroup:
    """The R-span ``RΔ``: all finite sums of products ``r·x`` with ``x`` in Δ."""
    if isinstance(delta, Subgroup):
        return product(space.algebra.whole(), delta)
    return product(space.algebra.whole(), list(delta), space)


def generated_subspace(space: FilteredSpace, delta: Iterable, trace: list[int] | None = None) -> Subgroup:
    """Smallest R-subspace containing Δ: iterate ``S <- S + R·S`` from ``S = RΔ``.

    Over a nonassociative ring ``RΔ`` need not be closed under the action,
    so the iteration may take several rounds.  ``trace`` (if given)
    receives the dimension after each round.
    """
    whole = space.algebra.whole()
    current = span(space, delta)
    if trace is not None:
        trace.append(current.dim)
    while True:
        nxt = current + product(whole, current)
        if trace is not None:
            trace.append(nxt.dim)
        if nxt == current:
            return current
        current = nxt


def is_subspace(sub: Subgroup) -> bool:
    return product(sub.space.algebra.whole(), sub) <= sub


# -- constructions ---------------------------------------------------------------------


def subspace(space: FilteredSpace, sub: Subgroup, *, label: str = "") -> FilteredSpace:
    """``L`` as a filtered space with ``F^i(L) = L ∩ F^i(M)``.

    The basis is the reduced basis of ``L``; each vector is named after its
    pivot (leading) coordinate and tagged with that coordinate's valuation.
    Coordinates of a vector of ``L`` are its entries at the pivot columns.

    Raises:
        NotSubspace: ``L`` is not closed under the R-action.
    """
    if not is_subspace(sub):
        raise NotSubspace("subgroup is not closed under the ring action")
    piv = list(sub.pivots)
    names = [space.names[c] for c in piv]
    vals = [int(space.valuations[c]) for c in piv]
    nr = space.algebra.dim
    k = sub.dim
    images = np.zeros((nr, k, k), dtype=np.int64)
    for j, row in enumerate(sub.basis):
        prods = space.right_operator(row)
        images[:, j, :] = prods[:, piv]
    out = FilteredSpace(
        space.algebra, names, vals, images, precision=space.precision, exact=space.exact, label=label or "subspace"
    )
    out.ambient = space
    out.embedding = sub.basis.copy()
    return out


def quotient(space: FilteredSpace, sub: Subgroup, *, label: str = "") -> FilteredSpace:
    """``M/L`` with ``F^i(M/L) = (F^i(M) + L)/L``.

    The basis is the images of the basis vectors of ``M`` that are not pivots
    of ``L``; because reduced rows only reach later (higher-valuation)
    columns, this basis is adapted to the quotient filtration.

    Raises:
        NotSubspace: ``L`` is not closed under the R-action.
    """
    if not is_subspace(sub):
        raise NotSubspace("cannot form a quotient by a subgroup that is not an R-subspace")
    keep = [c for c in range(space.dim) if c not in set(sub.pivots)]
    nr = space.algebra.dim
    k = len(keep)
    images = np.zeros((nr, k, k), dtype=np.int64)
    for j, col in enumerate(keep):
        prods = space.action[:, col, :]
        red = gf.reduce_rows(prods, sub.basis, sub.pivots, space.p)
        images[:, j, :] = red[:, keep]
    out = FilteredSpace(
        space.algebra,
        [space.names[c] for c in keep],
        [int(space.valuations[c]) for c in keep],
        images,
        precision=space.precision,
        exact=space.exact,
        label=label or "quotient",
    )
    out.ambient = space
    out.kept_columns = keep
    out.killed = sub
    return out


def project(quotient_space: FilteredSpace, vec) -> np.ndarray:
    """Image of an ambient vector in a space built by :func:`quotient`."""
    sub = quotient_space.killed
    vec = np.asarray(vec, dtype=np.int64).reshape(1, -1)
    red = gf.reduce_rows(vec, sub.basis, sub.pivots, quotient_space.p)[0]
    return red[quotient_space.kept_columns]


def direct_sum(first: FilteredSpace, second: FilteredSpace, *, label: str = "") -> FilteredSpace:
    if first.algebra is not second.algebra:
        raise BadParams("direct sum of spaces over different rings")
    n1, n2 = first.dim, second.dim
    nr = first.algebra.dim
    act = np.zeros((nr, n1 + n2, n1 + n2), dtype=np.int64)
    act[:, :n1, :n1] = first.action
    act[:, n1:, n1:] = second.action
    names = [f"{n}.1" for n in first.names] + [f"{n}.2" for n in second.names]
    vals = list(first.valuations) + list(second.valuations)
    out = FilteredSpace(
        first.algebra,
        names,
        vals,
        act,
        precision=max(first.precision, second.precision),
        exact=first.exact and second.exact,
        label=label or "direct_sum",
    )
    # the constructor sorts by valuation; remember where each summand went
    order = {name: i for i, name in enumerate(out.names)}
    out.summand_index = ([order[f"{n}.1"] for n in first.names], [order[f"{n}.2"] for n in second.names])
    return out


# -- validation ----------------------------------------------------------------------


def validate_space(space: FilteredSpace) -> ValidationReport:
    """Unitality, filtration compatibility and that every ``F^i(M)`` is an R-subspace."""
    report = ValidationReport(filtration_checks(space))
    bad = None
    for i in range(1, space.precision + 1):
        if not is_subspace(space.filtration(i)):
            bad = i
            break
    report.checks.append(Check("levels_are_subspaces", bad is None, f"F^{bad}" if bad is not None else ""))
    return report


# -- induced filtrations --------------------------------------------------------------


@dataclass
class InducedFiltration:
    sub_profile: list[int]
    quotient_profile: list[int]
    sub_space: FilteredSpace
    quotient_space: FilteredSpace
    exact: bool

    @property
    def sub_view(self) -> GradedView:
        return GradedView(self.sub_space)

    @property
    def quotient_view(self) -> GradedView:
        return GradedView(self.quotient_space)


def induced_filtration(space: FilteredSpace, sub: Subgroup) -> InducedFiltration:
    """Induced filtrations on ``L`` and ``M/L`` plus the graded exactness check.

    Raises:
        NotSubspace: ``L`` is not an R-subspace.
    """
    low = subspace(space, sub)
    high = quotient(space, sub)
    n = space.precision
    sub_profile = [sub.level(i).dim for i in range(n + 2)]
    quot_profile = [space.dim - space.offset(i) - sub.level(i).dim for i in range(n + 2)]
    hm, hl, hq = space.h(), low.h(), high.h()
    exact = all(hm[i] == hl[i] + hq[i] for i in range(n + 1))
    return InducedFiltration(sub_profile, quot_profile, low, high, exact)


# -- alternative filtrations ------------------------------------------------------------


class Filtration:
    """A descending chain ``G^0 = M ⊇ G^1 ⊇ ... ⊇ G^{h-1}`` plus a floor ``G^h``.

    The floor is what the truncation cannot resolve: realizing the
    filtration quotients it away and leaves a space of precision ``h - 1``.
    """

    def __init__(self, space: FilteredSpace, levels: Sequence[Subgroup], floor: Subgroup, kind: str):
        self.space = space
        self.levels = list(levels)
        self.floor = floor
        self.kind = kind

    @property
    def horizon(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> Subgroup:
        if k < len(self.levels):
            return self.levels[k]
        return self.floor

    @classmethod
    def native(cls, space: FilteredSpace) -> "Filtration":
        levels = [space.filtration(i) for i in range(space.precision + 1)]
        return cls(space, levels, space.zero_subgroup(), "native")

    @classmethod
    def m_adic(cls, space: FilteredSpace, ar_constant: int) -> "Filtration":
        """``G^k = m^k M``, trusted for ``k <= N + 1 - D``.

        By the Artin–Rees inclusion ``F^{k+D}(M) ⊆ m^k M`` the truncated
        ``F^{N+1}(M)`` lies inside ``m^k M`` exactly in that range, so the
        truncation does not distort these levels.
        """
        top = space.precision + 1 - ar_constant
        if top < 1:
            raise BadParams("Artin-Rees constant leaves no faithful m-adic level")
        levels = level_products(space.whole(), top)
        return cls(space, levels[:top], levels[top], "m_adic")

    @classmethod
    def shifted(cls, space: FilteredSpace, shift: int) -> "Filtration":
        if shift < 0:
            raise BadParams("shift must be nonnegative")
        levels = [space.filtration(max(0, k - shift)) for k in range(space.precision + 1 + shift)]
        return cls(space, levels, space.zero_subgroup(), f"shifted:{shift}")

    def intersect(self, other: "Filtration") -> "Filtration":
        if other.space is not self.space:
            raise BadParams("filtrations of different spaces")
        top = min(self.horizon, other.horizon)
        levels = [self.level(k) & other.level(k) for k in range(top)]
        floor = self.level(top) & other.level(top)
        return Filtration(self.space, levels, floor, f"{self.kind}&{other.kind}")

    def realize(self) -> FilteredSpace:
        """The space ``M / G^h`` re-filtered by the chain, with precision ``h - 1``.

        Basis vectors are chosen from the deepest level upward and keep the
        names of their pivot coordinates.
        """
        space = self.space
        if self.kind == "native":
            return space
        p = space.p
        floor = self.floor
        q = quotient(space, floor)
        keep = q.kept_columns
        images = []
        for lvl in self.levels:
            red = gf.reduce_rows(lvl.basis, floor.basis, floor.pivots, p)[:, keep]
            images.append(Subgroup(q, red))
        rows, vals = [], []
        acc = q.zero_subgroup()
        for k in range(len(images) - 1, -1, -1):
            red = gf.reduce_rows(images[k].basis, acc.basis, acc.pivots, p)
            red = red[np.any(red != 0, axis=1)]
            if red.shape[0]:
                for row in gf.row_basis(red, p, q.dim):
                    rows.append(row)
                    vals.append(k)
            acc = acc + images[k]
        if len(rows) != q.dim:
            raise VerificationFailed("filtration does not start at the whole space")
        if not rows:
            basis = np.zeros((0, 0), dtype=np.int64)
            inv = basis
        else:
            basis = np.array(rows, dtype=np.int64)
            inv = gf.inverse(basis, p)
        names = [q.names[int(np.flatnonzero(r)[0])] for r in basis]
        nr = space.algebra.dim
        act = np.zeros((nr, q.dim, q.dim), dtype=np.int64)
        for j, row in enumerate(basis):
            act[:, j, :] = gf.matmul(q.right_operator(row), inv, p)
        out = FilteredSpace(
            space.algebra, names, vals, act, precision=max(len(images) - 1, 0), exact=space.exact,
            label=f"{space.label or 'space'}[{self.kind}]",
        )
        out.filtration_kind = self.kind
        return out


# -- permissibility ------------------------------------------------------------------


@dataclass
class PermissibilityReport:
    """Whether ``gr(M)`` is a finitely generated ``gr(R)``-module, with evidence.

    ``generators`` are ``(degree, coordinates within that degree)`` pairs
    chosen greedily; ``module_witness`` names a failing ``(x, s, m)`` triple
    when the graded action is not associative in the module sense.
    """

    permissible: bool
    generators: list[tuple[int, np.ndarray]] = field(default_factory=list)
    delta: int | None = None
    alpha: Fraction | None = None
    filtration: str = "native"
    module_witness: str = ""
    hilbert: HilbertReport | None = None

    def to_kv(self) -> dict[str, str]:
        kv = {
            "permissible": str(self.permissible).lower(),
            "filtration": self.filtration,
            "generator_degrees": " ".join(str(d) for d, _ in self.generators),
        }
        if self.module_witness:
            kv["module_witness"] = self.module_witness
        if self.delta is not None:
            kv["delta"] = str(self.delta)
            kv["alpha_num"] = str(self.alpha.numerator)
            kv["alpha_den"] = str(self.alpha.denominator)
        return kv


def graded_module_check(space: FilteredSpace) -> str:
    """Empty string if ``(σ(x)σ(s))σ(m) = σ(x)(σ(s)σ(m))`` for degree-1 ``x``; else a witness.

    Together with degree-one generation of ``gr(R)`` this makes the graded
    action a module structure.  Unit action is covered by validation.
    """
    ring = space.algebra
    rview = GradedView(ring)
    mview = GradedView(space)
    p = space.p
    n = space.precision
    h1 = ring.h()[1] if ring.precision >= 1 else 0
    if h1 == 0:
        return ""
    hr, hm = ring.h(), space.h()
    for s in range(0, ring.precision + 1):
        for d in range(0, n + 1 - s - 1):
            top = 1 + s + d
            if top > n or hr[s] == 0 or hm[d] == 0 or hm[top] == 0:
                continue
            xs = rview.block(1, s)
            if xs.shape[2] == 0:
                continue
            xs_m = mview.block(1 + s, d).reshape(hr[1 + s], hm[d] * hm[top])
            left = gf.matmul(xs.reshape(h1 * hr[s], hr[1 + s]), xs_m, p).reshape(h1, hr[s], hm[d], hm[top])
            sm = mview.block(s, d).reshape(hr[s] * hm[d], hm[s + d])
            x_sm = mview.block(1, s + d).transpose(1, 0, 2).reshape(hm[s + d], h1 * hm[top])
            right = gf.matmul(sm, x_sm, p).reshape(hr[s], hm[d], h1, hm[top]).transpose(2, 0, 1, 3)
            diff = np.argwhere(np.any(left != right, axis=3))
            if diff.size:
                i, j, k = (int(t) for t in diff[0])
                rs1 = ring.degree_slice(1).start
                rss = ring.degree_slice(s).start
                ms = space.degree_slice(d).start
                return f"({ring.names[rs1 + i]},{ring.names[rss + j]},{space.names[ms + k]})"
    return ""


def graded_generators(space: FilteredSpace) -> list[tuple[int, np.ndarray]]:
    """Greedy homogeneous generators of ``gr(M)`` over ``gr(R)``.

    In degree ``i`` the part already reached is ``gr_1(R)·gr_{i-1}(M)``;
    basis vectors of the slice outside it become new generators.
    """
    view = GradedView(space)
    p = space.p
    h = space.h()
    gens = []
    for i in range(space.precision + 1):
        if h[i] == 0:
            continue
        acc = gf.SpanAccumulator(h[i], p)
        if i >= 1 and space.algebra.precision >= 1:
            blk = view.block(1, i - 1)
            if blk.size:
                acc.add(blk.reshape(-1, h[i]))
        for k in range(h[i]):
            if acc.full:
                break
            e = np.zeros(h[i], dtype=np.int64)
            e[k] = 1
            before = acc.rank
            acc.add(e[None, :])
            if acc.rank > before:
                gens.append((i, e))
    return gens


def permissible(space: FilteredSpace, window: int = DEFAULT_WINDOW, *, filtration: str = "native") -> PermissibilityReport:
    """Decide at finite precision whether the space's filtration is permissible.

    Raises:
        PrecisionTooLow: a tower space still needs new generators within the
            last ``window`` degrees, or its Hilbert fit does not settle.
    """
    witness = graded_module_check(space)
    if witness:
        return PermissibilityReport(False, filtration=filtration, module_witness=witness)
    gens = graded_generators(space)
    if not space.exact and any(d > space.precision - window for d, _ in gens):
        late = max(d for d, _ in gens)
        raise PrecisionTooLow(f"a new generator of gr(M) appears in degree {late}, too close to precision {space.precision}")
    hil = hilbert(space, window)
    return PermissibilityReport(True, gens, hil.delta, hil.alpha, filtration, "", hil)


@dataclass
class DimensionReport:
    delta: int
    alpha: Fraction
    provenance: str
    compared: dict[str, int] = field(default_factory=dict)

    def to_kv(self) -> dict[str, str]:
        kv = {"delta": str(self.delta), "alpha_num": str(self.alpha.numerator),
              "alpha_den": str(self.alpha.denominator), "provenance": self.provenance}
        for k, v in self.compared.items():
            kv[f"delta[{k}]"] = str(v)
        return kv


def dimension(space: FilteredSpace, other: FilteredSpace | Sequence[FilteredSpace] | None = None,
              window: int = DEFAULT_WINDOW) -> DimensionReport:
    """Dimension of a permissible space, optionally cross-checked on other filtrations.

    Raises:
        NotPermissible: the graded action fails the module check.
        VerificationFailed: another permissible filtration yields a different δ.
    """
    rep = permissible(space, window)
    if not rep.permissible:
        raise NotPermissible(f"graded action is not a module action: {rep.module_witness}")
    label = getattr(space, "filtration_kind", "native")
    out = DimensionReport(rep.delta, rep.alpha, label, {label: rep.delta})
    others = [] if other is None else ([other] if isinstance(other, FilteredSpace) else list(other))
    for alt in others:
        alt_rep = permissible(alt, window)
        alt_label = getattr(alt, "filtration_kind", alt.label or "other")
        if not alt_rep.permissible:
            raise NotPermissible(f"comparison filtration {alt_label} is not permissible")
        out.compared[alt_label] = alt_rep.delta
        if alt_rep.delta != rep.delta:
            raise VerificationFailed(
                f"dimension depends on the filtration: {label} gives {rep.delta}, {alt_label} gives {alt_rep.delta}"
            )
    return out


# -- annihilators and distinguished elements -------------------------------------------


@dataclass
class AnnihilatorReport:
    """Kernel of ``r -> r·x`` and its elements of valuation at most ``tau``.

    Witnesses are rows of the reduced kernel basis with small valuation; a
    kernel element of valuation ``<= tau`` exists exactly when this list is
    nonempty.
    """

    kernel: Subgroup
    witnesses: list[np.ndarray]
    tau: int

    @property
    def has_witness(self) -> bool:
        return bool(self.witnesses)


def default_cap(space: FilteredSpace, x) -> int:
    v = space.valuation(space.vector(x))
    if v > space.precision:
        return space.algebra.precision
    return space.precision - v - 2


def annihilator(space: FilteredSpace, x, tau: int | None = None) -> AnnihilatorReport:
    """Annihilator witnesses of ``x`` honest at the truncation.

    A ring element of valuation ``> N - v(x)`` kills ``x`` in any truncation
    merely because the product falls off the end, so only witnesses with
    valuation ``<= tau`` (default ``N - v(x) - 2``) are reported.
    """
    ring = space.algebra
    vec = space.vector(x)
    if tau is None:
        tau = default_cap(space, vec)
    op = space.right_operator(vec)
    ker = Subgroup(ring, gf.kernel(op.T, space.p))
    wit = [row.copy() for v, row in ker.elements_of_valuation() if v <= tau]
    return AnnihilatorReport(ker, wit, tau)


def distinguished(space: FilteredSpace, x, mode: str = "plain") -> tuple[bool, tuple[int, ...] | None]:
    """Test ``m^i(Rx) = m^i x`` (plain) or ``m^i(m^j x) = m^{i+j} x`` (m_adic).

    ``m^i`` is taken as ``F^i(R)``, which the validated algebras guarantee.
    Returns ``(ok, first failing index tuple)``; indices run over all values
    whose total is at most the space's precision.
    """
    vec = space.vector(x)
    n = space.precision
    single = Subgroup(space, vec[None, :])
    m_x = level_products(single, n)
    if mode == "plain":
        for i, lhs in enumerate(level_products(span(space, single), n)):
            if lhs != m_x[i]:
                return False, (i,)
        return True, None
    if mode == "m_adic":
        for j in range(n + 1):
            for i, lhs in enumerate(level_products(m_x[j], n - j)):
                if lhs != m_x[i + j]:
                    return False, (i, j)
        return True, None
    raise BadParams(f"unknown distinguished mode {mode!r}")


def sub_dimension(space: FilteredSpace, sub: Subgroup, window: int = DEFAULT_WINDOW) -> tuple[int, int]:
    """``(dim L, dim M/L)`` for an R-subspace with the induced filtrations."""
    ind = induced_filtration(space, sub)
    return hilbert(ind.sub_space, window).delta, hilbert(ind.quotient_space, window).delta
