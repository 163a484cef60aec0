"""Truncated complete local-filtered algebras and the solvers built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gf
from .core import Element, FilteredSpace, Subgroup, level_products, product
from .errors import BadParams, NotSpanned, NotUnit, NoSolution


class TruncatedFilteredAlgebra(FilteredSpace):
    """A ring ``R / F^{N+1}(R)`` given by structure constants over F_p.

    ``mul[i, j]`` is the coordinate vector of ``b_i * b_j``.  The algebra is
    also a filtered space over itself (left multiplication), so every
    space-level routine accepts it directly.

    Args:
        field: prime ``p`` or an :class:`~clfa.gf.Fp`.
        names: basis names.
        valuations: valuation tag of each basis vector.
        mul: structure tensor of shape ``(n, n, n)``.
        unit: name or index of the unit; defaults to the first valuation-0
            basis vector.
        precision: truncation level ``N``; defaults to the largest tag.
        exact: ``True`` if ``F^{N+1}`` really is zero (a nilpotent algebra),
            ``False`` for a level of a power-series tower.
    """

    def __init__(
        self,
        field,
        names: Sequence[str],
        valuations: Sequence[int],
        mul,
        *,
        unit=None,
        precision: int | None = None,
        exact: bool = False,
        label: str = "",
    ):
        self.field = field if isinstance(field, gf.Fp) else gf.Fp(field)
        super().__init__(None, names, valuations, mul, precision=precision, exact=exact, label=label)
        if unit is None:
            zeros = np.flatnonzero(self.valuations == 0)
            if zeros.size == 0:
                raise BadParams("no basis element of valuation 0 to serve as unit")
            self.unit = int(zeros[0])
        elif isinstance(unit, str):
            if unit not in self.index:
                raise BadParams(f"unknown unit name {unit!r}")
            self.unit = self.index[unit]
        else:
            self.unit = int(unit)

    @property
    def mul(self) -> np.ndarray:
        return self.action

    def one(self) -> Element:
        return self.basis_element(self.unit)

    def multiply(self, a, b) -> np.ndarray:
        return self.act(a, b)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_kv(self) -> dict[str, str]:
        out = {c.name: "pass" if c.passed else f"fail {c.witness}".strip() for c in self.checks}
        out["all"] = "pass" if self.ok else "fail"
        return out


def _pair_witness(space: FilteredSpace, bad: np.ndarray) -> str:
    i, j = (int(t) for t in np.argwhere(bad)[0][:2])
    return f"({space.algebra.names[i]},{space.names[j]})"


def filtration_checks(space: FilteredSpace) -> list[Check]:
    """Checks common to algebras and spaces: compatibility and unitality."""
    ring = space.algebra
    checks = []
    vr = ring.valuations[:, None, None]
    vm = space.valuations[None, :, None]
    vk = space.valuations[None, None, :]
    support = space.action != 0
    low = support & (vk < vr + vm)
    checks.append(Check("filtration_compatible", not low.any(), _pair_witness(space, low) if low.any() else ""))
    one = space.action[ring.unit]
    eye = np.eye(space.dim, dtype=np.int64)
    bad = np.flatnonzero(np.any(one != eye, axis=1))
    checks.append(Check("unit_acts_trivially", bad.size == 0, space.names[bad[0]] if bad.size else ""))
    return checks


def validate(alg: TruncatedFilteredAlgebra, *, graded: bool = True) -> ValidationReport:
    """Check the axioms of a complete local-filtered algebra at precision ``N``.

    Failures are reported, never raised.  The graded conditions (commutative,
    associative, generated in degree one) are delegated to
    :func:`clfa.graded.check_clf_graded` unless ``graded`` is false.
    """
    report = ValidationReport()
    zeros = np.flatnonzero(alg.valuations == 0)
    report.checks.append(
        Check(
            "unique_valuation_zero",
            zeros.size == 1 and int(zeros[0]) == alg.unit,
            ",".join(alg.names[i] for i in zeros),
        )
    )
    mul = alg.mul
    eye = np.eye(alg.dim, dtype=np.int64)
    left_bad = np.flatnonzero(np.any(mul[alg.unit] != eye, axis=1))
    right_bad = np.flatnonzero(np.any(mul[:, alg.unit] != eye, axis=1))
    bad = sorted(set(left_bad.tolist()) | set(right_bad.tolist()))
    report.checks.append(Check("unit_laws", not bad, alg.names[bad[0]] if bad else ""))
    compat = filtration_checks(alg)[0]
    report.checks.append(compat)
    vi = alg.valuations[:, None, None]
    vj = alg.valuations[None, :, None]
    vk = alg.valuations[None, None, :]
    leak = (mul != 0) & (vk < np.maximum(vi, vj))
    report.checks.append(
        Check("two_sided_ideals", not leak.any(), _pair_witness(alg, leak) if leak.any() else "")
    )
    bad_pair = filtration_product_failure(alg)
    report.checks.append(
        Check("filtration_products", bad_pair is None, "" if bad_pair is None else f"(i,j)={bad_pair}")
    )
    if graded:
        from .graded import GradedView, check_clf_graded

        report.checks.extend(check_clf_graded(GradedView(alg)).checks)
    return report


def filtration_product_failure(alg: TruncatedFilteredAlgebra) -> tuple[int, int] | None:
    """First ``(i, j)`` with ``F^i F^j != F^{i+j}`` and ``i + j <= N``, or ``None``."""
    top = alg.precision
    for j in range(top + 1):
        for i, lhs in enumerate(level_products(alg.filtration(j), top - j)):
            if lhs != alg.filtration(i + j):
                return i, j
    return None


def power_ideal(alg: TruncatedFilteredAlgebra, n: int) -> Subgroup:
    """``m^n`` built left-nested: ``m^{k+1} = m (m^k)``, with ``m^0 = R``."""
    if n < 0:
        raise BadParams("power must be nonnegative")
    if n == 0:
        return alg.whole()
    m = alg.filtration(1)
    acc = m
    for _ in range(n - 1):
        if acc.dim == 0:
            break
        acc = product(m, acc)
    return acc


def random_bracketing(n: int, rng: np.random.Generator):
    """A uniformly split binary tree with ``n`` leaves (nested tuples, leaves ``None``)."""
    if n == 1:
        return None
    k = int(rng.integers(1, n))
    return (random_bracketing(k, rng), random_bracketing(n - k, rng))


def power_by_bracketing(alg: TruncatedFilteredAlgebra, tree) -> Subgroup:
    if tree is None:
        return alg.filtration(1)
    left, right = tree
    return product(power_by_bracketing(alg, left), power_by_bracketing(alg, right))


@dataclass
class LiftResult:
    """Outcome of a successive-approximation solve.

    ``steps`` lists ``(degree solved, residual valuation afterwards)``.
    ``K`` is the largest spanner valuation, the shift bounding how far the
    valuation of each coefficient may sit below the residual it corrects.
    """

    coefficients: list[np.ndarray]
    steps: list[tuple[int, int]]
    K: int
    residual_valuation: int


def lift_solve(space: FilteredSpace, target, spanners: Sequence) -> LiftResult:
    """Find ring elements ``r_i`` with ``sum r_i · y_i = target`` exactly.

    Each step solves the homogeneous equation
    ``sum σ(r_i) σ(y_i) = σ(residual)`` in the degree of the residual, with
    free variables set to zero, and subtracts the full correction.

    Raises:
        NotSpanned: the principal parts of the spanners do not span the
            graded piece in the degree of some residual.
    """
    ring = space.algebra
    p = space.p
    y = space.vector(target)
    ys = [space.vector(s) for s in spanners]
    if not ys:
        if np.any(y):
            raise NotSpanned(space.valuation(y), "no spanners given for a nonzero target")
        return LiftResult([], [], 0, space.infinity)
    ops = [space.right_operator(s) for s in ys]
    vals = [space.valuation(s) for s in ys]
    coeffs = [np.zeros(ring.dim, dtype=np.int64) for _ in ys]
    residual = y.copy()
    steps: list[tuple[int, int]] = []
    for _ in range(space.precision + 2):
        v = space.valuation(residual)
        if v > space.precision:
            break
        target_cols = space.degree_slice(v)
        blocks = []
        owners = []
        for idx, (op, vy) in enumerate(zip(ops, vals)):
            d = v - vy
            if d < 0 or vy > space.precision:
                continue
            rows = ring.degree_slice(d)
            if rows.stop <= rows.start:
                continue
            blocks.append(op[rows, target_cols])
            owners.append((idx, rows))
        if not blocks:
            raise NotSpanned(v)
        system = np.concatenate(blocks, axis=0).T
        try:
            x = gf.solve(system, residual[target_cols], p)
        except NoSolution:
            raise NotSpanned(v) from None
        pos = 0
        for idx, rows in owners:
            width = rows.stop - rows.start
            part = x[pos:pos + width]
            pos += width
            if not np.any(part):
                continue
            coeffs[idx][rows] = (coeffs[idx][rows] + part) % p
            residual = (residual - gf.matmul(part[None, :], ops[idx][rows], p)[0]) % p
        new_v = space.valuation(residual)
        if new_v <= v:
            raise NotSpanned(v, f"correction failed to raise the residual valuation in degree {v}")
        steps.append((v, new_v))
    total = np.zeros(space.dim, dtype=np.int64)
    for c, op in zip(coeffs, ops):
        total = (total + gf.matmul(c[None, :], op, p)[0]) % p
    assert np.array_equal(total, y), "successive approximation produced a wrong solution"
    return LiftResult(coeffs, steps, max(vals), space.infinity)


@dataclass
class Inversion:
    inverse: Element
    two_sided: bool
    steps: list[tuple[int, int]]


def invert(a) -> Inversion:
    """Left inverse of a valuation-0 element, found by successive approximation.

    Raises:
        NotUnit: ``a`` lies in the maximal ideal.
    """
    if not isinstance(a, Element):
        raise BadParams("invert expects an Element")
    alg = a.space
    if a.valuation != 0:
        raise NotUnit(f"element {a!r} has valuation {a.valuation} and is not a unit")
    res = lift_solve(alg, alg.one(), [a])
    x = Element(alg, res.coefficients[0])
    two_sided = bool(np.array_equal(alg.multiply(a.coeffs, x.coeffs), alg.one().coeffs))
    return Inversion(x, two_sided, res.steps)
