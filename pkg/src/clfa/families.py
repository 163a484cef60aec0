"""Built-in example families, each available at every precision.

Monomials are ordered by total degree and, within a degree, by descending
lexicographic order of exponent vectors (``x^2, xy, y^2``).  A family is a
tower: the object at precision ``N`` is the truncation of the one at
``N + 1``, and :meth:`FamilyTower.coherent` checks this.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import TruncatedFilteredAlgebra
from .core import FilteredSpace, Subgroup
from .errors import BadParams
from .spaces import generated_subspace, graded_generators, quotient, span, subspace

_MONO = re.compile(r"(x\d+|[a-z])(?:\^(\d+))?")


def variable_names(nvars: int) -> list[str]:
    if nvars == 1:
        return ["t"]
    if nvars == 2:
        return ["x", "y"]
    if nvars == 3:
        return ["x", "y", "z"]
    return [f"x{i}" for i in range(1, nvars + 1)]


def monomials(nvars: int, max_degree: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(max_degree + 1):
        degree_d = [e for e in itertools.product(range(d + 1), repeat=nvars) if sum(e) == d]
        out.extend(sorted(degree_d, reverse=True))
    return out


def monomial_name(exps: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for e, n in zip(exps, names):
        if e == 1:
            parts.append(n)
        elif e > 1:
            parts.append(f"{n}^{e}")
    return "".join(parts) or "1"


def parse_monomial(text: str, names: Sequence[str]) -> tuple[int, ...]:
    """Exponent vector of a monomial written like ``x^2y`` (``1`` is the unit)."""
    text = text.strip()
    exps = [0] * len(names)
    if text == "1":
        return tuple(exps)
    pos = 0
    while pos < len(text):
        m = _MONO.match(text, pos)
        if not m or m.group(1) not in names:
            raise BadParams(f"cannot read monomial {text!r} at column {pos + 1}")
        exps[names.index(m.group(1))] += int(m.group(2) or 1)
        pos = m.end()
    return tuple(exps)


def _divides(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


Correction = Callable[[tuple[int, ...], tuple[int, ...]], list[tuple[int, tuple[int, ...]]]]


def _build(
    nvars: int,
    precision: int,
    p: int,
    quotient_gens: Sequence[str] = (),
    correction: Correction | None = None,
    label: str = "",
) -> TruncatedFilteredAlgebra:
    names_v = variable_names(nvars)
    killed = [parse_monomial(g, names_v) for g in quotient_gens]
    alive = [e for e in monomials(nvars, precision) if not any(_divides(k, e) for k in killed)]
    index = {e: i for i, e in enumerate(alive)}
    n = len(alive)
    mul = np.zeros((n, n, n), dtype=np.int64)
    for i, a in enumerate(alive):
        for j, b in enumerate(alive):
            terms = [(1, tuple(x + y for x, y in zip(a, b)))]
            if correction is not None:
                terms.extend(correction(a, b))
            for c, e in terms:
                k = index.get(e)
                if k is not None:
                    mul[i, j, k] = (mul[i, j, k] + c) % p
    next_degree = [e for e in itertools.product(range(precision + 2), repeat=nvars) if sum(e) == precision + 1]
    exact = all(any(_divides(k, e) for k in killed) for e in next_degree)
    alg = TruncatedFilteredAlgebra(
        p,
        [monomial_name(e, names_v) for e in alive],
        [sum(e) for e in alive],
        mul,
        unit="1",
        precision=precision,
        exact=exact,
        label=label,
    )
    alg.variables = names_v
    return alg


def powerseries(nvars: int, precision: int, p: int = 2, quotient: Sequence[str] = ()) -> TruncatedFilteredAlgebra:
    """``F_p[[vars]] / (monomials)`` truncated at total degree ``precision``."""
    if nvars < 1:
        raise BadParams("need at least one variable")
    if precision < 0:
        raise BadParams("precision must be nonnegative")
    tag = f"powerseries:{nvars}" + (f"/({','.join(quotient)})" if quotient else "")
    return _build(nvars, precision, p, quotient, label=tag)


def deformation_rule(nvars: int = 2, coefficient: int = 1) -> Correction:
    """The default nonassociative deformation of ``F_p[[x, y]]``.

    ``x * w = xw + c·xyw`` for every monomial ``w`` of positive degree and all
    other products are unchanged.  The correction has degree one higher than
    the leading product, so ``gr`` stays the polynomial ring, while
    ``(x*x)*x - x*(x*x) = c·x^3y + c^2·x^3y^2`` is nonzero.
    """
    if nvars < 2:
        raise BadParams("the deformation needs at least two variables")
    x = tuple([1] + [0] * (nvars - 1))
    xy = tuple([1, 1] + [0] * (nvars - 2))

    def rule(a, b):
        if a == x and sum(b) >= 1:
            return [(coefficient, tuple(u + v for u, v in zip(xy, b)))]
        return []

    return rule


def deformation(precision: int, p: int = 2, nvars: int = 2, coefficient: int = 1,
                quotient: Sequence[str] = ()) -> TruncatedFilteredAlgebra:
    return _build(nvars, precision, p, quotient, deformation_rule(nvars, coefficient),
                  label=f"deformation:{nvars}")


# -- spaces ------------------------------------------------------------------------------


def _ring_vectors(alg: TruncatedFilteredAlgebra, gens: Sequence[str]) -> list[np.ndarray]:
    out = []
    for g in gens:
        try:
            out.append(alg.vector(g))
        except BadParams:
            # a generator above the truncation is zero here
            exps = parse_monomial(g, alg.variables)
            if sum(exps) <= alg.precision:
                raise
            out.append(np.zeros(alg.dim, dtype=np.int64))
    return out


def ideal_space(alg: TruncatedFilteredAlgebra, gens: Sequence[str]) -> FilteredSpace:
    """The left ideal generated by ``gens`` with the filtration induced from ``R``."""
    sub = generated_subspace(alg, _ring_vectors(alg, gens))
    return subspace(alg, sub, label=f"ideal({','.join(gens)})")


def quotient_space(alg: TruncatedFilteredAlgebra, gens: Sequence[str]) -> FilteredSpace:
    """``R / I`` for the left ideal ``I`` generated by ``gens``, with the quotient filtration."""
    sub = generated_subspace(alg, _ring_vectors(alg, gens))
    return quotient(alg, sub, label=f"quotient({','.join(gens)})")


def cyclic(alg: TruncatedFilteredAlgebra, generator: str) -> FilteredSpace:
    """The span ``Rg`` with its induced filtration shifted so ``g`` has valuation 0.

    The result has precision ``N - v(g)``.  Its graded module must be
    generated by ``σ(g)`` alone; otherwise the input is rejected.

    Raises:
        NotSubspace: ``Rg`` is not closed under the action.
        BadParams: ``g`` is zero in the truncation or ``gr(Rg)`` is not cyclic.
    """
    g = alg.vector(generator)
    v = alg.valuation(g)
    if v > alg.precision:
        raise BadParams("cyclic generator vanishes in the truncation")
    sub = span(alg, [g])
    inner = subspace(alg, sub)
    out = FilteredSpace(
        alg,
        inner.names,
        [int(t) - v for t in inner.valuations],
        inner.action,
        precision=alg.precision - v,
        exact=alg.exact,
        label=f"cyclic({generator})",
    )
    gens = graded_generators(out)
    if len(gens) != 1 or gens[0][0] != 0:
        raise BadParams(f"gr(R{generator}) is not cyclic on the generator")
    out.embedding = inner.embedding
    out.ambient = alg
    out.generator = out.vector(_coords_in_sub(sub, g))
    return out


def _coords_in_sub(sub: Subgroup, vec: np.ndarray) -> np.ndarray:
    return np.asarray(vec)[list(sub.pivots)]


def regular(alg: TruncatedFilteredAlgebra) -> FilteredSpace:
    """``R`` as a space over itself (the algebra object already is one)."""
    return alg


# -- towers ----------------------------------------------------------------------------------


@dataclass
class FamilyTower:
    """A family id with parameters, producing its member at any precision."""

    family: str
    params: dict = field(default_factory=dict)

    def at(self, precision: int):
        return make_family(self.family, self.params, precision)

    def coherent(self, precision: int) -> bool:
        """Truncating the level-``N`` product table gives the level-``N-1`` table."""
        if precision < 1:
            return True
        top = self.at(precision)
        low = self.at(precision - 1)
        if getattr(top, "algebra", top) is top:
            return _coherent_pair(top, low, top.algebra, low.algebra)
        return _coherent_pair(top.algebra, low.algebra, top.algebra, low.algebra) and _coherent_pair(
            top, low, top.algebra, low.algebra
        )


def _coherent_pair(top: FilteredSpace, low: FilteredSpace, ring_top, ring_low) -> bool:
    keep = [top.index[n] for n in low.names if n in top.index]
    if len(keep) != low.dim:
        return False
    ring_keep = [ring_top.index[n] for n in ring_low.names if n in ring_top.index]
    if len(ring_keep) != ring_low.dim:
        return False
    restricted = top.action[np.ix_(ring_keep, keep, keep)]
    return bool(np.array_equal(restricted, low.action))


def parse_family_spec(spec: str) -> tuple[str, dict]:
    """``powerseries:2``, ``deformation``, ``deformation:3`` and similar."""
    name, _, arg = spec.partition(":")
    params: dict = {}
    if name in ("powerseries", "deformation"):
        params["nvars"] = int(arg) if arg else (1 if name == "powerseries" else 2)
    elif arg:
        raise BadParams(f"unknown family {spec!r}")
    if name not in ("powerseries", "deformation"):
        raise BadParams(f"unknown family {spec!r}")
    return name, params


def make_family(family: str, params: dict, precision: int):
    """Instantiate a built-in family.

    Parameters: ``nvars``, ``p``, ``quotient`` (monomial list) and
    optionally a space construction ``space`` in ``{"regular", "ideal",
    "quotient", "cyclic"}`` with generators ``gens``.
    """
    p = params.get("p", 2)
    q = params.get("quotient", ())
    if family == "powerseries":
        alg = powerseries(params.get("nvars", 1), precision, p, q)
    elif family == "deformation":
        alg = deformation(precision, p, params.get("nvars", 2), params.get("coefficient", 1), q)
    else:
        raise BadParams(f"unknown family {family!r}")
    kind = params.get("space")
    gens = params.get("gens", ())
    if kind in (None, "regular"):
        return alg
    if kind == "ideal":
        return ideal_space(alg, gens)
    if kind == "quotient":
        return quotient_space(alg, gens)
    if kind == "cyclic":
        return cyclic(alg, gens[0])
    raise BadParams(f"unknown space construction {kind!r}")
