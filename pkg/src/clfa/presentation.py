"""The line-oriented ``.cfa`` presentation format.

A file is a sequence of directives, one per line; ``#`` starts a comment::

    field 2
    precision 1
    kind algebra
    basis e:0 t:1
    unit e
    # products not listed are zero
    product e e = e
    product e t = t
    product t e = t

Directives:

``field p``, ``precision N``, ``kind algebra|space|extension`` and
``mode exact|tower`` form the header.  A ring is given either by ``basis``,
``unit`` and ``product a b = comb`` lines or by ``family <id> [key=value ...]``.
Spaces add either ``space <construction> [generators]`` (``regular``,
``ideal``, ``quotient`` or ``cyclic`` over the ring) or ``space-basis`` and
``action r m = comb`` lines.  Extensions add ``t-op m = comb`` lines or a
single ``t-family <spec>`` line (``zero``, ``shift``, ``mult:<element>``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, ParseError
from .gf import is_prime
from .lincomb import parse_lincomb

KINDS = ("algebra", "space", "extension")
MODES = ("exact", "tower")
SPACE_CONSTRUCTIONS = ("regular", "ideal", "quotient", "cyclic")
_NAME = re.compile(r"[A-Za-z0-9_^.']+\Z")

Terms = tuple[tuple[int, str], ...]


@dataclass
class Presentation:
    """Parsed contents of a ``.cfa`` file.

    Line numbers are kept for diagnostics and ignored by equality, so a
    re-serialized presentation compares equal to the original.
    """

    p: int | None = None
    precision: int | None = None
    kind: str = "algebra"
    mode: str | None = None
    basis: list[tuple[str, int]] = field(default_factory=list)
    unit: str | None = None
    products: list[tuple[str, str, Terms]] = field(default_factory=list)
    family: tuple[str, tuple[tuple[str, str], ...]] | None = None
    space: tuple[str, tuple[str, ...]] | None = None
    space_basis: list[tuple[str, int]] = field(default_factory=list)
    actions: list[tuple[str, str, Terms]] = field(default_factory=list)
    t_ops: list[tuple[str, Terms]] = field(default_factory=list)
    t_family: str | None = None
    lines: dict = field(default_factory=dict, compare=False, repr=False)


# -- parsing ---------------------------------------------------------------------------------


def _column(raw: str, token: str, start: int = 0) -> int:
    pos = raw.find(token, start)
    return pos + 1 if pos >= 0 else 1


def _int(raw: str, token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", lineno, _column(raw, token)) from None


def _declarations(raw: str, tokens: list[str], lineno: int) -> list[tuple[str, int]]:
    out = []
    for tok in tokens:
        name, sep, val = tok.partition(":")
        if not sep or not name or not _NAME.match(name):
            raise ParseError(f"expected name:valuation, got {tok!r}", lineno, _column(raw, tok))
        v = _int(raw, val, lineno, "valuation")
        if v < 0:
            raise ParseError(f"valuation of {name!r} is negative", lineno, _column(raw, tok))
        out.append((name, v))
    if not out:
        raise ParseError("declaration line lists no basis elements", lineno, 1)
    return out


def _terms(raw: str, text: str, lineno: int) -> Terms:
    offset = raw.find(text) if text else len(raw)
    try:
        return tuple(parse_lincomb(text))
    except ValueError as exc:
        col = re.search(r"column (\d+)", str(exc))
        at = offset + int(col.group(1)) if col else offset + 1
        raise ParseError(re.sub(r" at column \d+", "", str(exc)).split(":")[0], lineno, at) from None


def _binary_rule(raw: str, rest: str, lineno: int, directive: str) -> tuple[str, str, Terms]:
    left, eq, right = rest.partition("=")
    names = left.split()
    if not eq or len(names) != 2:
        raise ParseError(f"expected '{directive} a b = combination'", lineno, _column(raw, directive) + len(directive) + 1)
    return names[0], names[1], _terms(raw, right.strip(), lineno)


def parse(text: str) -> Presentation:
    """Parse a presentation, raising :class:`ParseError` with line and column on any problem.

    Parsing is all-or-nothing: references to undeclared names and missing
    mandatory lines are checked before anything is returned.
    """
    pres = Presentation()
    seen: set[str] = set()
    raw_lines = text.splitlines()
    for lineno, raw in enumerate(raw_lines, start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        directive, _, rest = body.strip().partition(" ")
        rest = rest.strip()
        tokens = rest.split()
        col = _column(raw, directive)
        single = directive in ("field", "precision", "kind", "mode", "unit", "family", "space", "t-family")
        if single and directive in seen:
            raise ParseError(f"duplicate '{directive}' line", lineno, col)
        seen.add(directive)
        pres.lines.setdefault(directive, lineno)
        if directive == "field":
            if len(tokens) != 1:
                raise ParseError("expected 'field p'", lineno, col)
            pres.p = _int(raw, tokens[0], lineno, "field characteristic")
            if not is_prime(pres.p):
                raise ParseError(f"{pres.p} is not prime", lineno, _column(raw, tokens[0], col))
        elif directive == "precision":
            if len(tokens) != 1:
                raise ParseError("expected 'precision N'", lineno, col)
            pres.precision = _int(raw, tokens[0], lineno, "precision")
            if pres.precision < 0:
                raise ParseError("precision must be nonnegative", lineno, _column(raw, tokens[0], col))
        elif directive == "kind":
            if tokens not in ([k] for k in KINDS):
                raise ParseError(f"kind must be one of {', '.join(KINDS)}", lineno, col)
            pres.kind = tokens[0]
        elif directive == "mode":
            if tokens not in ([m] for m in MODES):
                raise ParseError("mode must be 'exact' or 'tower'", lineno, col)
            pres.mode = tokens[0]
        elif directive == "basis":
            pres.basis.extend(_declarations(raw, tokens, lineno))
        elif directive == "space-basis":
            pres.space_basis.extend(_declarations(raw, tokens, lineno))
        elif directive == "unit":
            if len(tokens) != 1:
                raise ParseError("expected 'unit name'", lineno, col)
            pres.unit = tokens[0]
        elif directive == "product":
            a, b, terms = _binary_rule(raw, rest, lineno, directive)
            pres.products.append((a, b, terms))
            pres.lines[("product", len(pres.products) - 1)] = lineno
        elif directive == "action":
            r, m, terms = _binary_rule(raw, rest, lineno, directive)
            pres.actions.append((r, m, terms))
            pres.lines[("action", len(pres.actions) - 1)] = lineno
        elif directive == "t-op":
            left, eq, right = rest.partition("=")
            if not eq or len(left.split()) != 1:
                raise ParseError("expected 't-op m = combination'", lineno, col)
            pres.t_ops.append((left.strip(), _terms(raw, right.strip(), lineno)))
            pres.lines[("t-op", len(pres.t_ops) - 1)] = lineno
        elif directive == "family":
            if not tokens:
                raise ParseError("expected 'family <id> [key=value ...]'", lineno, col)
            params = []
            for tok in tokens[1:]:
                key, sep, value = tok.partition("=")
                if not sep or not key:
                    raise ParseError(f"expected key=value, got {tok!r}", lineno, _column(raw, tok))
                params.append((key, value))
            pres.family = (tokens[0], tuple(params))
        elif directive == "space":
            if not tokens or tokens[0] not in SPACE_CONSTRUCTIONS:
                raise ParseError(f"space construction must be one of {', '.join(SPACE_CONSTRUCTIONS)}", lineno, col)
            gens = tuple(g for g in " ".join(tokens[1:]).replace(",", " ").split())
            pres.space = (tokens[0], gens)
        elif directive == "t-family":
            if len(tokens) != 1:
                raise ParseError("expected 't-family <spec>'", lineno, col)
            pres.t_family = tokens[0]
        else:
            raise ParseError(f"unknown directive {directive!r}", lineno, col)
    _check(pres, max(len(raw_lines), 1))
    return pres


def _check(pres: Presentation, eof: int) -> None:
    """Whole-file requirements; problems are reported at the offending line or at end of file."""
    for key in ("field", "precision"):
        if key not in pres.lines:
            raise ParseError(f"missing required '{key}' line", eof, 1)
    if pres.family is not None and pres.basis:
        raise ParseError("give the ring either by a family or by basis lines, not both", pres.lines["family"], 1)
    if pres.family is None:
        if not pres.basis:
            raise ParseError("missing ring: add 'basis' lines or a 'family' line", eof, 1)
        if pres.unit is None:
            raise ParseError("missing required 'unit' line naming the unit element", eof, 1)
        ring_names = _unique([n for n, _ in pres.basis], pres.lines["basis"], "basis")
        if pres.unit not in ring_names:
            raise ParseError(f"unit {pres.unit!r} is not a basis element", pres.lines["unit"], 1)
        for k, (a, b, terms) in enumerate(pres.products):
            _names_known([a, b] + [n for _, n in terms], ring_names, pres.lines[("product", k)])
        for name, v in pres.basis:
            if v > pres.precision:
                raise ParseError(f"valuation of {name!r} exceeds the precision", pres.lines["basis"], 1)
    elif pres.products or pres.unit is not None:
        raise ParseError("product and unit lines need basis lines", pres.lines.get("product", pres.lines.get("unit", 1)), 1)
    if pres.kind == "algebra":
        for key in ("space", "space-basis", "action", "t-op", "t-family"):
            if key in pres.lines:
                raise ParseError(f"'{key}' lines need kind space or extension", pres.lines[key], 1)
        return
    if pres.space is not None and pres.space_basis:
        raise ParseError("give the space either by a construction or by space-basis lines", pres.lines["space"], 1)
    if pres.space is None and not pres.space_basis:
        raise ParseError("missing space: add a 'space' line or 'space-basis' lines", eof, 1)
    space_names = None
    if pres.space_basis:
        space_names = _unique([n for n, _ in pres.space_basis], pres.lines["space-basis"], "space-basis")
        ring_names = set(n for n, _ in pres.basis) if pres.basis else None
        for k, (r, m, terms) in enumerate(pres.actions):
            line = pres.lines[("action", k)]
            if ring_names is not None:
                _names_known([r], ring_names, line)
            _names_known([m] + [n for _, n in terms], space_names, line)
    elif pres.actions:
        raise ParseError("action lines need space-basis lines", pres.lines["action"], 1)
    if pres.kind == "space":
        for key in ("t-op", "t-family"):
            if key in pres.lines:
                raise ParseError(f"'{key}' lines need kind extension", pres.lines[key], 1)
        return
    if pres.t_family is not None and pres.t_ops:
        raise ParseError("give T either by t-op lines or by t-family", pres.lines["t-family"], 1)
    if pres.t_family is None and not pres.t_ops:
        raise ParseError("missing T operator: add 't-op' lines or a 't-family' line", eof, 1)
    if pres.t_ops:
        if space_names is None:
            raise ParseError("t-op lines need space-basis lines", pres.lines["t-op"], 1)
        for k, (m, terms) in enumerate(pres.t_ops):
            _names_known([m] + [n for _, n in terms], space_names, pres.lines[("t-op", k)])


def _unique(names: list[str], line: int, what: str) -> set[str]:
    seen = set()
    for n in names:
        if n in seen:
            raise ParseError(f"{n!r} declared twice in {what}", line, 1)
        seen.add(n)
    return seen


def _names_known(names, known, line: int) -> None:
    for n in names:
        if n not in known:
            raise ParseError(f"undeclared basis name {n!r}", line, 1)


# -- serialization ---------------------------------------------------------------------------


def format_terms(terms: Terms) -> str:
    if not terms:
        return "0"
    out = []
    for k, (c, name) in enumerate(terms):
        body = name if abs(c) == 1 else f"{abs(c)}*{name}"
        if k == 0:
            out.append(f"-{body}" if c < 0 else body)
        else:
            out.append(f"{'-' if c < 0 else '+'} {body}")
    return " ".join(out)


def serialize(pres: Presentation) -> str:
    """Canonical text for ``pres``; parsing it gives back an equal presentation."""
    out = [f"field {pres.p}", f"precision {pres.precision}", f"kind {pres.kind}"]
    if pres.mode is not None:
        out.append(f"mode {pres.mode}")
    if pres.family is not None:
        fam, params = pres.family
        out.append(" ".join(["family", fam] + [f"{k}={v}" for k, v in params]))
    if pres.basis:
        out.append("basis " + " ".join(f"{n}:{v}" for n, v in pres.basis))
        out.append(f"unit {pres.unit}")
        out.extend(f"product {a} {b} = {format_terms(t)}" for a, b, t in pres.products)
    if pres.space is not None:
        kind, gens = pres.space
        out.append(" ".join(["space", kind] + ([",".join(gens)] if gens else [])))
    if pres.space_basis:
        out.append("space-basis " + " ".join(f"{n}:{v}" for n, v in pres.space_basis))
        out.extend(f"action {r} {m} = {format_terms(t)}" for r, m, t in pres.actions)
    if pres.t_family is not None:
        out.append(f"t-family {pres.t_family}")
    out.extend(f"t-op {m} = {format_terms(t)}" for m, t in pres.t_ops)
    return "\n".join(out) + "\n"


def _table_terms(vec, names, p) -> Terms:
    return tuple((int(c), names[k]) for k, c in enumerate(vec) if int(c) % p)


def from_algebra(alg, *, mode: str | None = None) -> Presentation:
    """A presentation listing every nonzero structure constant of ``alg``."""
    pres = Presentation(p=alg.p, precision=alg.precision, kind="algebra",
                        mode=mode or ("exact" if alg.exact else "tower"))
    pres.basis = [(n, int(v)) for n, v in zip(alg.names, alg.valuations)]
    pres.unit = alg.names[alg.unit]
    for i, a in enumerate(alg.names):
        for j, b in enumerate(alg.names):
            terms = _table_terms(alg.action[i, j], alg.names, alg.p)
            if terms:
                pres.products.append((a, b, terms))
    return pres


# -- building ----------------------------------------------------------------------------------


def _family_params(pres: Presentation) -> tuple[str, dict]:
    from .families import parse_family_spec

    fam, raw = pres.family
    name, params = parse_family_spec(fam)
    params["p"] = pres.p
    for key, value in raw:
        if key == "quotient":
            params["quotient"] = tuple(v for v in value.split(",") if v)
        elif key == "coefficient":
            params["coefficient"] = int(value)
        else:
            raise BadParams(f"unknown family parameter {key!r}")
    return name, params


def build_ring(pres: Presentation):
    from .algebra import TruncatedFilteredAlgebra
    from .families import make_family

    if pres.family is not None:
        name, params = _family_params(pres)
        alg = make_family(name, params, pres.precision)
        if pres.mode is not None and (pres.mode == "exact") != alg.exact:
            raise BadParams(f"declared mode {pres.mode!r} does not match the family")
        return alg
    names = [n for n, _ in pres.basis]
    index = {n: k for k, n in enumerate(names)}
    n = len(names)
    mul = np.zeros((n, n, n), dtype=np.int64)
    for a, b, terms in pres.products:
        for c, name in terms:
            mul[index[a], index[b], index[name]] += c
    return TruncatedFilteredAlgebra(
        pres.p,
        names,
        [v for _, v in pres.basis],
        mul % pres.p,
        unit=pres.unit,
        precision=pres.precision,
        exact=(pres.mode or "exact") == "exact",
        label="presentation",
    )


def build_space(pres: Presentation, ring=None):
    from .core import FilteredSpace
    from .families import cyclic, ideal_space, quotient_space

    ring = ring if ring is not None else build_ring(pres)
    if pres.space is not None:
        kind, gens = pres.space
        if kind == "regular":
            return ring
        if not gens:
            raise BadParams(f"space construction {kind!r} needs generators")
        if kind == "ideal":
            return ideal_space(ring, list(gens))
        if kind == "quotient":
            return quotient_space(ring, list(gens))
        return cyclic(ring, gens[0])
    names = [n for n, _ in pres.space_basis]
    index = {n: k for k, n in enumerate(names)}
    act = np.zeros((ring.dim, len(names), len(names)), dtype=np.int64)
    for r, m, terms in pres.actions:
        if r not in ring.index:
            raise BadParams(f"unknown ring basis element {r!r}")
        for c, name in terms:
            act[ring.index[r], index[m], index[name]] += c
    return FilteredSpace(ring, names, [v for _, v in pres.space_basis], act % pres.p,
                         precision=pres.precision, exact=(pres.mode or "exact") == "exact",
                         label="presentation")


def build(pres: Presentation):
    """The object a presentation describes: an algebra, a space, or a central extension."""
    from .central import build_extension, t_operator

    ring = build_ring(pres)
    if pres.kind == "algebra":
        return ring
    space = build_space(pres, ring)
    if pres.kind == "space":
        return space
    if pres.t_family is not None:
        space, t = t_operator(space, pres.t_family)
        return build_extension(space, t)
    t = np.zeros((space.dim, space.dim), dtype=np.int64)
    for m, terms in pres.t_ops:
        for c, name in terms:
            t[space.index[m], space.index[name]] += c
    return build_extension(space, t % space.p)


def load(path) -> Presentation:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
