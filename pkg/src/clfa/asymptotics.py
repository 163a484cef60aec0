"""Sizes of the quotients ``M / m^n M`` and their comparison with graded data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import FilteredSpace, level_products, product
from .errors import NotPermissible, PrecisionTooLow
from .graded import DEFAULT_WINDOW, GrowthFit, HilbertReport, fit_growth, hilbert
from .rees import artin_rees_constant
from .spaces import permissible


def m_power_space(space: FilteredSpace, n: int):
    """``m^n M`` as the single product ``F^n(R) · M``."""
    if n == 0:
        return space.whole()
    return product(space.algebra.filtration(n), space.whole())


@dataclass
class SizeSeries:
    """``L(n) = dim_Fp M / m^n M``, which is ``log_q |M / m^n M|`` with ``q = p``.

    Only ``n <= N + 1 - D`` is recorded: beyond that the truncation can make
    ``m^n M`` look smaller than it is.
    """

    L: list[int]
    fit: GrowthFit
    ar_constant: int
    precision: int
    graded: HilbertReport | None = None
    window: int = DEFAULT_WINDOW

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
    def match_graded(self) -> bool | None:
        if self.graded is None or not self.graded.stable or not self.stable:
            return None
        return self.delta == self.graded.delta and self.alpha == self.graded.alpha

    def to_csv(self) -> str:
        return "n,L\n" + "".join(f"{n},{v}\n" for n, v in enumerate(self.L))

    def to_kv(self) -> dict[str, str]:
        kv = {
            "N": str(self.precision),
            "D": str(self.ar_constant),
            "W": str(self.window),
            "stable": str(self.stable).lower(),
            "match_graded": {None: "unknown", True: "true", False: "false"}[self.match_graded],
        }
        if self.stable:
            kv["delta"] = str(self.delta)
            kv["alpha_num"] = str(self.alpha.numerator)
            kv["alpha_den"] = str(self.alpha.denominator)
        return kv


def size_series(space: FilteredSpace, D: int | None = None, window: int = DEFAULT_WINDOW) -> SizeSeries:
    """Quotient sizes, their growth fit, and the Hilbert fit of ``gr(M)`` for comparison.

    Raises:
        PrecisionTooLow: either fit fails to settle.
    """
    if D is None:
        ar = artin_rees_constant(space)
        if ar.D is None:
            raise PrecisionTooLow("no Artin-Rees constant at this precision")
        D = ar.D
    # exact spaces carry no truncation error, so every n is faithful
    top = space.precision + 1 if space.exact else space.precision + 1 - D
    sizes = [space.dim - lvl.dim for lvl in level_products(space.whole(), top)]
    sample = sizes + [space.dim] * window if space.exact else sizes
    fit = fit_growth(sample, window)
    if not fit.stable:
        raise PrecisionTooLow(f"quotient sizes do not settle within n <= {top}")
    graded = hilbert(space, window)
    return SizeSeries(sizes, fit, D, space.precision, graded, window)


@dataclass
class SandwichReport:
    """``ℓ(n) <= L(n) <= ℓ(n + D)`` for each ``n`` in range."""

    D: int
    rows: list[tuple[int, int, int, int]] = field(default_factory=list)

    @property
    def failures(self) -> list[int]:
        return [n for n, lo, mid, hi in self.rows if not lo <= mid <= hi]

    @property
    def ok(self) -> bool:
        return not self.failures


def sandwich_check(space: FilteredSpace, D: int, window: int = DEFAULT_WINDOW) -> SandwichReport:
    """Check ``F^{n+D}(M) ⊆ m^n M ⊆ F^n(M)`` through the three lengths.

    Raises:
        NotPermissible: the space fails the graded module check.
    """
    rep = permissible(space, window)
    if not rep.permissible:
        raise NotPermissible(f"sandwich check needs a permissible space: {rep.module_witness}")
    out = SandwichReport(D)
    top = space.precision + 1 - D
    for n, lvl in enumerate(level_products(space.whole(), top)):
        mid = space.dim - lvl.dim
        out.rows.append((n, space.offset(n), mid, space.offset(n + D)))
    return out


def parenthesization_check(space: FilteredSpace, D: int = 0, samples: int = 8, seed: int = 0) -> list[tuple[int, int, bool]]:
    """Compare ``F^a(R)(F^b(R) M)`` with ``F^{a+b}(R) M`` on seeded ``(a, b)``."""
    rng = np.random.default_rng(seed)
    top = space.precision + 1 - D
    out = []
    ring = space.algebra
    whole = space.whole()
    for _ in range(samples):
        total = int(rng.integers(0, top + 1))
        a = int(rng.integers(0, total + 1))
        b = total - a
        inner = product(ring.filtration(b), whole)
        out.append((a, b, product(ring.filtration(a), inner) == m_power_space(space, total)))
    return out
