"""Central extensions ``R[[T]]`` acting on filtered spaces.

An extension is a space together with a matrix for ``T``: row ``j`` is
``T(e_j)``, so ``T(m) = m @ t_op``.  Powers of ``n = m + T R[[T]]`` acting on
subspaces are computed as ``n·S = m·S + T(S)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gf
from .core import FilteredSpace, Subgroup, level_products, product
from .errors import (
    BadParams,
    DomainNotAsserted,
    HypothesisNotMet,
    NotCentral,
    NotNilpotentModM,
    PrecisionTooLow,
    VerificationFailed,
)
from .graded import DEFAULT_WINDOW, GradedView, domain_refute, fit_growth, hilbert, hilbert_from_h
from .rees import artin_rees_constant
from .spaces import Filtration, annihilator, direct_sum, distinguished, graded_generators, permissible, span


@dataclass
class CentralExtension:
    space: FilteredSpace
    t_op: np.ndarray
    nilpotency: int
    k_table: dict[int, int] = field(default_factory=dict)

    def apply(self, sub: Subgroup) -> Subgroup:
        """``T(S)`` for a subgroup ``S``."""
        return sub.image(self.t_op)

    def n_step(self, sub: Subgroup) -> Subgroup:
        return product(self.space.algebra.filtration(1), sub) + self.apply(sub)

    def k_csv(self) -> str:
        return "j,k_j\n" + "".join(f"{j},{k}\n" for j, k in sorted(self.k_table.items()))


def t_operator(space: FilteredSpace, spec: str) -> tuple[FilteredSpace, np.ndarray]:
    """Build a ``T`` operator from a short spec.

    ``zero`` is the zero map, ``mult:<element>`` is left multiplication by a
    ring element, and ``shift`` replaces ``M`` by ``M ⊕ M`` with
    ``T(m, m') = (0, m)``.
    """
    if spec == "zero":
        return space, np.zeros((space.dim, space.dim), dtype=np.int64)
    if spec.startswith("mult:"):
        return space, space.left_operator(spec[len("mult:"):])
    if spec == "shift":
        both = direct_sum(space, space)
        first, second = both.summand_index
        t = np.zeros((both.dim, both.dim), dtype=np.int64)
        for a, b in zip(first, second):
            t[a, b] = 1
        return both, t
    raise BadParams(f"unknown T operator {spec!r}")


def _power_image(t_op: np.ndarray, k: int, p: int) -> np.ndarray:
    out = np.eye(t_op.shape[0], dtype=np.int64)
    for _ in range(k):
        out = gf.matmul(out, t_op, p)
    return out


def build_extension(space: FilteredSpace, t_op) -> CentralExtension:
    """Validate ``T`` and tabulate ``k_j = min{k : T^k M ⊆ m^j M}``.

    Raises:
        NotCentral: ``T(r·m) != r·T(m)`` for some basis pair.
        NotNilpotentModM: ``T`` induces a non-nilpotent map on ``M / mM``.
    """
    p = space.p
    t = np.asarray(t_op, dtype=np.int64) % p
    if t.shape != (space.dim, space.dim):
        raise BadParams(f"T operator has shape {t.shape}, expected {(space.dim, space.dim)}")
    left = gf.matmul(space.action, t, p)
    right = gf.matmul(t[None, :, :], space.action, p)
    bad = np.argwhere(np.any(left != right, axis=2))
    if bad.size:
        r, j = (int(v) for v in bad[0])
        raise NotCentral(f"T does not commute with {space.algebra.names[r]} on {space.names[j]}")
    ring = space.algebra
    whole = space.whole()
    mm = product(ring.filtration(1), whole)
    power = np.eye(space.dim, dtype=np.int64)
    k1 = None
    for k in range(1, space.dim - mm.dim + 2):
        power = gf.matmul(power, t, p)
        if Subgroup(space, power) <= mm:
            k1 = k
            break
    if k1 is None:
        rows = gf.reduce_rows(power, mm.basis, mm.pivots, p)
        j = int(np.flatnonzero(np.any(rows != 0, axis=1))[0])
        raise NotNilpotentModM(f"T is not nilpotent modulo mM (basis element {space.names[j]})")
    table = {}
    m_levels = level_products(whole, space.precision)
    for j in range(1, space.precision + 1):
        target = m_levels[j]
        power = np.eye(space.dim, dtype=np.int64)
        found = None
        for k in range(1, k1 * j + 1):
            power = gf.matmul(power, t, p)
            if Subgroup(space, power) <= target:
                found = k
                break
        if found is None:
            raise VerificationFailed(f"T^{k1 * j} M is not inside m^{j} M")
        table[j] = found
    return CentralExtension(space, t, k1, table)


# -- dimension over the extension ----------------------------------------------------------


@dataclass
class ExtensionDimension:
    sizes: list[int]
    delta_n: int
    alpha_n: Fraction
    delta_r: int
    reassociation_ok: bool
    nested_bound_ok: bool

    @property
    def invariant(self) -> bool:
        return self.delta_n == self.delta_r

    def to_kv(self) -> dict[str, str]:
        return {
            "delta_R": str(self.delta_r),
            "delta_RT": str(self.delta_n),
            "alpha_num": str(self.alpha_n.numerator),
            "alpha_den": str(self.alpha_n.denominator),
            "invariant": str(self.invariant).lower(),
            "reassociation": str(self.reassociation_ok).lower(),
            "power_bound": str(self.nested_bound_ok).lower(),
        }


def _faithful_top(space: FilteredSpace) -> int:
    if space.exact:
        return space.precision + 1
    ar = artin_rees_constant(space)
    if ar.D is None:
        raise PrecisionTooLow("no Artin-Rees constant at this precision")
    return space.precision + 1 - ar.D


def n_powers(ext: CentralExtension, top: int) -> list[Subgroup]:
    out = [ext.space.whole()]
    for _ in range(top):
        out.append(ext.n_step(out[-1]))
    return out


def dim_over_extension(ext: CentralExtension, window: int = DEFAULT_WINDOW) -> ExtensionDimension:
    """Dimension of ``M`` over ``R[[T]]`` from ``n``-adic quotient sizes, compared with the R-dimension.

    Also checks that ``n^k M`` equals ``Σ_s T^s(m^{k-s} M)`` and that
    ``n^{k·k_1} M ⊆ m^k M``.

    Raises:
        PrecisionTooLow: a fit does not settle.
    """
    space = ext.space
    ring = space.algebra
    p = space.p
    top = _faithful_top(space)
    levels = n_powers(ext, top)
    sizes = [space.dim - s.dim for s in levels]
    sample = sizes + [space.dim] * window if space.exact else sizes
    fit = fit_growth(sample, window)
    if not fit.stable:
        raise PrecisionTooLow("n-adic quotient sizes do not settle")
    rep = permissible(space, window)
    whole = space.whole()
    m_levels = level_products(whole, top)
    reassoc = True
    for k in range(top + 1):
        acc = space.zero_subgroup()
        for s in range(k + 1):
            acc = acc + m_levels[k - s].image(_power_image(ext.t_op, s, p))
        reassoc &= acc == levels[k]
    bound = all(levels[k * ext.nilpotency] <= m_levels[k] for k in range(top + 1) if k * ext.nilpotency <= top)
    return ExtensionDimension(sizes, fit.delta, fit.alpha, rep.delta, bool(reassoc), bool(bound))


# -- torsion and pseudo-nullity ----------------------------------------------------------------


def candidate_elements(space: FilteredSpace, samples: int, seed: int, exhaustive: bool) -> list[np.ndarray]:
    """Basis vectors plus seeded random vectors, or every nonzero vector in slow mode."""
    p = space.p
    if exhaustive and p**space.dim <= 4096:
        return [v for v in space.whole().elements() if np.any(v)]
    out = [row for row in np.eye(space.dim, dtype=np.int64)]
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        v = rng.integers(0, p, size=space.dim)
        if np.any(v):
            out.append(v.astype(np.int64))
    return out


def witness_room(space: FilteredSpace, vec) -> bool:
    """Whether the default annihilator cap leaves room for a witness of positive valuation."""
    return space.valuation(vec) <= space.precision - 3


@dataclass
class DistinguishedSample:
    """Sampled elements: how many were tested, distinguished and killed, and a counterexample."""

    tested: int = 0
    skipped: int = 0
    distinguished: int = 0
    with_witness: int = 0
    counterexample: np.ndarray | None = None

    @property
    def holds(self) -> bool:
        return self.counterexample is None


def sample_distinguished(space: FilteredSpace, candidates, mode: str = "plain") -> DistinguishedSample:
    out = DistinguishedSample()
    for vec in candidates:
        if not witness_room(space, vec):
            out.skipped += 1
            continue
        out.tested += 1
        ok, _ = distinguished(space, vec, mode)
        if not ok:
            continue
        out.distinguished += 1
        if annihilator(space, vec).has_witness:
            out.with_witness += 1
        elif out.counterexample is None:
            out.counterexample = np.asarray(vec).copy()
    return out


def lifted_generators(space: FilteredSpace) -> list[np.ndarray]:
    """Homogeneous generators of ``gr(M)`` placed back into ``M`` as full vectors."""
    out = []
    for degree, coords in graded_generators(space):
        vec = np.zeros(space.dim, dtype=np.int64)
        vec[space.degree_slice(degree)] = coords
        out.append(vec)
    return out


def _domain_evidence(ring, asserted: bool, seed: int):
    if not asserted:
        raise DomainNotAsserted("the graded ring must be asserted to be a domain (use --assert-domain)")
    evidence = domain_refute(GradedView(ring), seed=seed)
    if evidence.found:
        raise DomainNotAsserted(f"gr(R) has zero divisors: {evidence.describe(ring)}")
    return evidence


@dataclass
class TorsionReport:
    s1: bool
    s2: bool
    s3: bool
    dim_m: int
    dim_r: int
    hypothesis: bool
    sample: DistinguishedSample
    kept: int

    @property
    def agree(self) -> bool:
        return self.s1 == self.s2 == self.s3

    def to_kv(self) -> dict[str, str]:
        return {
            "S1": str(self.s1).lower(),
            "S2": str(self.s2).lower(),
            "S3": str(self.s3).lower(),
            "agree": str(self.agree).lower(),
            "dim_M": str(self.dim_m),
            "dim_R": str(self.dim_r),
            "hypothesis": str(self.hypothesis).lower(),
            "sampled": str(self.sample.tested),
            "skipped": str(self.sample.skipped),
            "distinguished": str(self.sample.distinguished),
            "spanning_kept": str(self.kept),
        }


def _space_dim(space: FilteredSpace, window: int) -> int:
    if space.dim == 0:
        return 0
    return hilbert(space, window).delta


def torsion_equivalence_check(
    space: FilteredSpace,
    *,
    domain_asserted: bool = False,
    strict: bool = False,
    samples: int = 16,
    seed: int = 0,
    exhaustive: bool = False,
    window: int = DEFAULT_WINDOW,
) -> TorsionReport:
    """Evaluate the three torsion conditions independently.

    S1 compares dimensions, S2 asks sampled distinguished elements for
    annihilator witnesses, and S3 asks whether the m-adically distinguished
    elements with witnesses span ``M``.

    Raises:
        DomainNotAsserted: the domain hypothesis is absent or refuted.
        HypothesisNotMet: with ``strict``, the basis vectors are not all
            m-adically distinguished with witnesses.
    """
    ring = space.algebra
    _domain_evidence(ring, domain_asserted, seed)
    dim_r = hilbert(ring, window).delta
    dim_m = _space_dim(space, window)
    s1 = dim_m <= dim_r - 1
    cands = candidate_elements(space, samples, seed, exhaustive)
    sample = sample_distinguished(space, cands, "plain")
    s2 = sample.holds
    kept = [v for v in cands if witness_room(space, v) and distinguished(space, v, "m_adic")[0]
            and annihilator(space, v).has_witness]
    s3 = span(space, kept) == space.whole() if kept else space.dim == 0
    lifted = lifted_generators(space)
    hyp = span(space, lifted) == space.whole() and all(
        witness_room(space, v) and distinguished(space, v, "m_adic")[0] and annihilator(space, v).has_witness
        for v in lifted
    )
    if strict and not hyp:
        raise HypothesisNotMet("the lifted graded generators are not all m-adically distinguished with witnesses")
    return TorsionReport(s1, s2, s3, dim_m, dim_r, hyp, sample, len(kept))


@dataclass
class PseudoNullReport:
    t1: bool
    t2: bool
    t3: bool
    dim_r: int
    dim_rt: int
    delta_n: int
    filtration_dims: dict[str, int]
    sample: DistinguishedSample
    hypothesis: bool
    elements_tried: int

    @property
    def agree(self) -> bool:
        return self.t1 == self.t2 == self.t3

    @property
    def verdict(self) -> bool:
        """Pseudo-null over ``R[[T]]``, equivalently ``dim R - dim M >= 1``."""
        return self.t2

    def to_kv(self) -> dict[str, str]:
        kv = {
            "T1": str(self.t1).lower(),
            "T2": str(self.t2).lower(),
            "T3": str(self.t3).lower(),
            "agree": str(self.agree).lower(),
            "dim_R": str(self.dim_r),
            "dim_RT": str(self.dim_rt),
            "dim_M": str(self.delta_n),
            "hypothesis": str(self.hypothesis).lower(),
            "sampled": str(self.sample.tested),
            "skipped": str(self.sample.skipped),
            "distinguished": str(self.sample.distinguished),
            "domain_search_elements": str(self.elements_tried),
        }
        for name, d in self.filtration_dims.items():
            kv[f"delta[{name}]"] = str(d)
        return kv


def _raises_valuation(space: FilteredSpace, t_op: np.ndarray) -> bool:
    """``T(F^j) ⊆ F^{j+1}`` for every ``j``."""
    for j in range(space.dim):
        img = t_op[j]
        if np.any(img) and space.valuation(img) <= int(space.valuations[j]):
            return False
    return True


def pseudo_null_filtration_test(
    ext: CentralExtension,
    *,
    domain_asserted: bool = False,
    samples: int = 16,
    seed: int = 0,
    exhaustive: bool = False,
    window: int = DEFAULT_WINDOW,
) -> PseudoNullReport:
    """Evaluate the three pseudo-nullity conditions independently.

    T1 samples R-distinguished elements for annihilator witnesses; T2 tests
    the dimension gap for the n-adic filtration; T3 tests it for every
    available filtration that is compatible with ``T``.

    Raises:
        DomainNotAsserted: the domain hypothesis is absent or refuted.
    """
    space = ext.space
    ring = space.algebra
    evidence = _domain_evidence(ring, domain_asserted, seed)
    h_r = ring.h()
    h_rt = [sum(h_r[: n + 1]) for n in range(len(h_r))]
    dim_r = hilbert(ring, window).delta
    dim_rt = hilbert_from_h(h_rt, ring.precision, window=window).delta
    ext_dim = dim_over_extension(ext, window)
    t2 = dim_rt - ext_dim.delta_n >= 2
    dims = {"n_adic": ext_dim.delta_n}
    if _raises_valuation(space, ext.t_op):
        dims["native"] = _space_dim(space, window)
        dims["shifted:1"] = _space_dim(Filtration.shifted(space, 1).realize(), window)
    if ext.nilpotency == 1 and space.dim:
        ar = artin_rees_constant(space)
        if ar.D is not None and space.precision + 1 - ar.D >= window + 2:
            dims["m_adic"] = _space_dim(Filtration.m_adic(space, ar.D).realize(), window)
    t3 = all(dim_rt - d >= 2 for d in dims.values())
    cands = candidate_elements(space, samples, seed, exhaustive)
    sample = sample_distinguished(space, cands, "plain")
    hyp = span(space, [v for v in cands if distinguished(space, v, "m_adic")[0]]) == space.whole()
    return PseudoNullReport(sample.holds, t2, t3, dim_r, dim_rt, ext_dim.delta_n, dims, sample, hyp,
                            evidence.elements_tried)
