"""Associated graded objects, Hilbert functions and growth fits.

All numbers here are exact: dimensions are integers and fitted polynomial
coefficients are :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf
from .algebra import Check
from .core import FilteredSpace
from .errors import BadParams, PrecisionTooLow

DEFAULT_WINDOW = 3


class GradedView:
    """``gr(M) = ⊕ F^i(M)/F^{i+1}(M)`` read off the valuation-adapted basis.

    Degree ``i`` is the slice of basis vectors tagged ``i``; the graded
    action of degree ``a`` on degree ``b`` is the ambient action projected
    onto degree ``a + b``.
    """

    def __init__(self, space: FilteredSpace):
        self.space = space
        self.ring = space.algebra
        self.precision = space.precision
        self.p = space.p

    def h(self) -> list[int]:
        return self.space.h()

    def component(self, i: int) -> slice:
        return self.space.degree_slice(i)

    def block(self, a: int, b: int) -> np.ndarray:
        """Graded action tensor ``gr_a(R) x gr_b(M) -> gr_{a+b}(M)``."""
        rs = self.ring.degree_slice(a)
        ms = self.space.degree_slice(b)
        if a + b > self.precision:
            return np.zeros((rs.stop - rs.start, ms.stop - ms.start, 0), dtype=np.int64)
        ts = self.space.degree_slice(a + b)
        return self.space.action[rs, ms, ts]

    def multiply(self, a: int, r_part, b: int, m_part) -> np.ndarray:
        """Product of homogeneous coordinates ``r_part`` (degree a) and ``m_part`` (degree b)."""
        blk = self.block(a, b)
        if blk.shape[2] == 0:
            return np.zeros(0, dtype=np.int64)
        left = gf.matmul(np.asarray(r_part)[None, :], blk.reshape(blk.shape[0], -1), self.p)
        left = left.reshape(blk.shape[1], blk.shape[2])
        return gf.matmul(np.asarray(m_part)[None, :], left, self.p)[0]


@dataclass
class GradedReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_kv(self) -> dict[str, str]:
        out = {c.name: "pass" if c.passed else f"fail {c.witness}".strip() for c in self.checks}
        out["all"] = "pass" if self.ok else "fail"
        return out


def _commutativity(view: GradedView) -> Check:
    names = view.space.names
    n = view.precision
    for a in range(n + 1):
        for b in range(a, n + 1 - a):
            left = view.block(a, b)
            right = view.block(b, a).transpose(1, 0, 2)
            diff = np.argwhere(np.any(left != right, axis=2))
            if diff.size:
                i, j = diff[0]
                ra = view.ring.degree_slice(a).start + int(i)
                rb = view.ring.degree_slice(b).start + int(j)
                return Check("graded_commutative", False, f"({names[ra]},{names[rb]})")
    return Check("graded_commutative", True)


def _associativity(view: GradedView) -> Check:
    """Compare ``(ab)c`` with ``a(bc)`` block by block; the unit is skipped."""
    p = view.p
    names = view.space.names
    n = view.precision
    h = view.h()
    for a in range(1, n + 1):
        for b in range(1, n + 1 - a):
            for c in range(1, n + 1 - a - b):
                ha, hb, hc, hab, hbc, habc = h[a], h[b], h[c], h[a + b], h[b + c], h[a + b + c]
                if 0 in (ha, hb, hc):
                    continue
                ab = view.block(a, b).reshape(ha * hb, hab)
                ab_c = view.block(a + b, c).reshape(hab, hc * habc)
                left = gf.matmul(ab, ab_c, p).reshape(ha, hb, hc, habc)
                bc = view.block(b, c).reshape(hb * hc, hbc)
                a_bc = view.block(a, b + c).transpose(1, 0, 2).reshape(hbc, ha * habc)
                right = gf.matmul(bc, a_bc, p).reshape(hb, hc, ha, habc).transpose(2, 0, 1, 3)
                diff = np.argwhere(np.any(left != right, axis=3))
                if diff.size:
                    i, j, k = (int(t) for t in diff[0])
                    sa = view.space.degree_slice(a).start
                    sb = view.space.degree_slice(b).start
                    sc = view.space.degree_slice(c).start
                    return Check(
                        "graded_associative", False, f"({names[sa + i]},{names[sb + j]},{names[sc + k]})"
                    )
    return Check("graded_associative", True)


def _degree_one_generation(view: GradedView) -> Check:
    h = view.h()
    for i in range(1, view.precision):
        target = h[i + 1]
        if target == 0:
            continue
        blk = view.block(1, i)
        rows = blk.reshape(-1, blk.shape[2])
        got = gf.rank(rows, view.p) if rows.size else 0
        if got != target:
            return Check("generated_in_degree_one", False, f"degree {i + 1}")
    if view.precision >= 1 and h[1] == 0 and any(h[2:]):
        return Check("generated_in_degree_one", False, "degree 1 is empty")
    return Check("generated_in_degree_one", True)


def check_clf_graded(view: GradedView) -> GradedReport:
    """Graded conditions on ``gr(R)``: commutative, associative, generated in degree 1.

    Only degree sums up to the precision are examined.
    """
    return GradedReport([_commutativity(view), _associativity(view), _degree_one_generation(view)])


# -- growth fitting ------------------------------------------------------------------


def _differences(values: Sequence[Fraction], order: int) -> list[Fraction]:
    out = list(values)
    for _ in range(order):
        out = [b - a for a, b in zip(out, out[1:])]
    return out


def _binom_poly(m: int, shift: int) -> list[Fraction]:
    """Monomial coefficients (lowest first) of ``C(x - shift, m)``."""
    poly = [Fraction(1)]
    for t in range(m):
        root = shift + t
        nxt = [Fraction(0)] * (len(poly) + 1)
        for k, c in enumerate(poly):
            nxt[k + 1] += c
            nxt[k] -= c * root
        poly = nxt
    return [c / math.factorial(m) for c in poly]


def _binomial(x: int, m: int) -> Fraction:
    num = 1
    for t in range(m):
        num *= x - t
    return Fraction(num, math.factorial(m))


@dataclass
class GrowthFit:
    """Polynomial fitted to the tail of an integer sequence.

    ``delta`` is the order of the first difference sequence whose last
    ``window`` entries agree, and ``alpha`` that common value over
    ``delta!``.  The polynomial is stored in three equivalent forms: Newton
    coefficients at ``start``, coefficients on ``C(n, m)``, and monomial
    coefficients (lowest degree first).
    """

    values: list[int]
    window: int
    stable: bool
    delta: int | None = None
    alpha: Fraction | None = None
    start: int | None = None
    newton: list[Fraction] = field(default_factory=list)
    binomial: list[Fraction] = field(default_factory=list)
    monomial: list[Fraction] = field(default_factory=list)
    agrees_from: int | None = None

    def __call__(self, n: int) -> Fraction:
        if not self.stable:
            raise PrecisionTooLow("no stable fit to evaluate")
        return sum((c * _binomial(n - self.start, m) for m, c in enumerate(self.newton)), Fraction(0))


def fit_growth(values: Sequence[int], window: int = DEFAULT_WINDOW) -> GrowthFit:
    vals = [Fraction(int(v)) for v in values]
    if window < 2:
        # a single value is trivially constant, so it can never witness stability
        raise BadParams("window must be at least 2")
    for k in range(0, len(vals) - window + 1):
        tail = _differences(vals, k)[-window:]
        if all(t == tail[0] for t in tail):
            break
    else:
        return GrowthFit([int(v) for v in values], window, False)
    start = len(vals) - window - k
    newton = [_differences(vals[start:], m)[0] for m in range(k + 1)]
    monomial = [Fraction(0)] * (k + 1)
    for m, c in enumerate(newton):
        for idx, coef in enumerate(_binom_poly(m, start)):
            monomial[idx] += c * coef
    fit = GrowthFit(
        [int(v) for v in values],
        window,
        True,
        delta=k,
        alpha=tail[0] / math.factorial(k),
        start=start,
        newton=newton,
        monomial=monomial,
    )
    fit.binomial = [_differences([fit(n) for n in range(k + 1)], m)[0] for m in range(k + 1)]
    agree = len(vals)
    for n in range(len(vals) - 1, -1, -1):
        if fit(n) != vals[n]:
            break
        agree = n
    fit.agrees_from = agree
    return fit


@dataclass
class HilbertReport:
    """Hilbert function of a truncated filtered space and its growth fit.

    ``h[i]`` for ``i = 0..N`` and ``ell[n] = sum_{k<n} h[k]`` for
    ``n = 0..N+1``.  ``ell[N+1]`` is the full truncated dimension, which is
    an honest length in both exact and tower mode.
    """

    h: list[int]
    ell: list[int]
    fit: GrowthFit
    precision: int
    window: int
    exact: bool

    @property
    def stable(self) -> bool:
        return self.fit.stable

    @property
    def delta(self) -> int | None:
        return self.fit.delta

    @property
    def alpha(self) -> Fraction | None:
        return self.fit.alpha

    @property
    def polynomial(self) -> list[Fraction]:
        return self.fit.binomial

    def to_csv(self) -> str:
        lines = ["n,h,ell"]
        for n, e in enumerate(self.ell):
            hv = str(self.h[n]) if n < len(self.h) else ""
            lines.append(f"{n},{hv},{e}")
        return "\n".join(lines) + "\n"

    def to_kv(self) -> dict[str, str]:
        kv = {
            "N": str(self.precision),
            "W": str(self.window),
            "stable": str(self.stable).lower(),
            "mode": "exact" if self.exact else "tower",
        }
        if self.stable:
            kv["delta"] = str(self.delta)
            kv["alpha_num"] = str(self.alpha.numerator)
            kv["alpha_den"] = str(self.alpha.denominator)
            kv["polynomial_binomial"] = " ".join(str(c) for c in self.fit.binomial)
        return kv


def lengths(h: Sequence[int]) -> list[int]:
    out = [0]
    for v in h:
        out.append(out[-1] + int(v))
    return out


def hilbert_from_h(
    h: Sequence[int], precision: int, *, window: int = DEFAULT_WINDOW, exact: bool = False, strict: bool = True
) -> HilbertReport:
    h = [int(v) for v in h]
    ell = lengths(h)
    sample = ell + [ell[-1]] * window if exact else ell
    fit = fit_growth(sample, window)
    report = HilbertReport(h, ell, fit, precision, window, exact)
    if strict and not fit.stable:
        raise PrecisionTooLow(
            f"lengths do not settle to a polynomial within precision {precision} (window {window})"
        )
    return report


def hilbert(view, window: int = DEFAULT_WINDOW, *, strict: bool = True) -> HilbertReport:
    """Hilbert function, cumulative lengths and fitted Hilbert–Samuel polynomial.

    Exact (nilpotent) inputs are padded with ``window`` further copies of the
    final length, since every later graded piece is genuinely zero.

    Raises:
        PrecisionTooLow: no difference order settles within the window.
    """
    space = view.space if isinstance(view, GradedView) else view
    return hilbert_from_h(space.h(), space.precision, window=window, exact=space.exact, strict=strict)


def krull_dim(view, window: int = DEFAULT_WINDOW) -> int:
    return hilbert(view, window).delta


def pseudo_null_test(ring_dim: int, module_dim: int) -> bool:
    """Dimension criterion: the module is pseudo-null when the gap is at least two."""
    return ring_dim - module_dim >= 2


@dataclass
class DomainEvidence:
    """Result of a zero-divisor search in ``gr(R)``.

    ``witness`` is ``(deg_a, a, deg_b, b)`` with homogeneous coordinate
    vectors satisfying ``σ(a)σ(b) = 0``.  Absence of a witness is not a
    proof that ``gr(R)`` is a domain.
    """

    witness: tuple[int, np.ndarray, int, np.ndarray] | None
    degree_bound: int
    elements_tried: int

    @property
    def found(self) -> bool:
        return self.witness is not None

    def describe(self, space: FilteredSpace) -> str:
        if self.witness is None:
            return "no zero divisors found"
        da, a, db, b = self.witness
        full_a = np.zeros(space.dim, dtype=np.int64)
        full_a[space.degree_slice(da)] = a
        full_b = np.zeros(space.dim, dtype=np.int64)
        full_b[space.degree_slice(db)] = b
        return f"({space.format(full_a)})*({space.format(full_b)}) = 0"


def _homogeneous_candidates(h: int, p: int, rng, samples: int, exhaustive: bool):
    eye = np.eye(h, dtype=np.int64)
    for row in eye:
        yield row
    if exhaustive and p**h <= 4096:
        for idx in range(1, p**h):
            v = np.zeros(h, dtype=np.int64)
            t = idx
            for i in range(h):
                v[i] = t % p
                t //= p
            yield v
        return
    for _ in range(samples):
        v = rng.integers(0, p, size=h)
        if np.any(v):
            yield v


def domain_refute(
    view: GradedView,
    degree_bound: int | None = None,
    *,
    samples: int = 16,
    seed: int = 0,
    exhaustive: bool = False,
) -> DomainEvidence:
    """Search for homogeneous ``a, b`` of positive degree with ``σ(a)σ(b) = 0``.

    For each candidate ``a`` the whole kernel of ``b -> ab`` on each degree
    is computed, so only the left factor is sampled.
    """
    ring = view.ring
    rview = GradedView(ring)
    bound = ring.precision if degree_bound is None else min(degree_bound, ring.precision)
    h = ring.h()
    rng = np.random.default_rng(seed)
    tried = 0
    for total in range(2, bound + 1):
        for a in range(1, total):
            b = total - a
            if h[a] == 0:
                continue
            if h[b] == 0:
                continue
            blk = rview.block(a, b)
            for cand in _homogeneous_candidates(h[a], ring.p, rng, samples, exhaustive):
                tried += 1
                mat = gf.matmul(cand[None, :], blk.reshape(h[a], -1), ring.p).reshape(h[b], h[total])
                ker = gf.kernel(mat.T, ring.p)
                if ker.shape[0]:
                    return DomainEvidence((a, cand, b, ker[0]), bound, tried)
    return DomainEvidence(None, bound, tried)
