"""Command-line entry point ``clfa``.

Every subcommand prints a short human summary and, with ``--out DIR``,
writes ``<command>.kv`` (sorted ``key=value`` lines) and, where a table is
produced, ``<command>.csv``.  Exit status: 0 success, 2 bad input,
3 precision too low to decide, 4 a checked property failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import BadParams, ClfaError, PrecisionTooLow, VerificationFailed
from .graded import DEFAULT_WINDOW


@dataclass
class Outcome:
    title: str
    kv: dict[str, str] = field(default_factory=dict)
    csv: str | None = None
    failed: str | None = None


# -- input resolution ----------------------------------------------------------------------


@dataclass
class Subject:
    """What the command operates on, plus a way to rebuild it at another precision."""

    space: object
    extension: object = None
    rebuild: object = None
    source: str = ""
    coherent: bool | None = None

    @property
    def ring(self):
        return self.space.algebra


def _split_gens(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(g.strip() for g in text.split(",") if g.strip())


def _family_params(args) -> tuple[str, dict]:
    from .families import parse_family_spec

    name, params = parse_family_spec(args.family)
    params["p"] = args.p
    params["quotient"] = _split_gens(args.quotient)
    chosen = [k for k in ("ideal", "quotient_space", "cyclic") if getattr(args, k)]
    if len(chosen) > 1:
        raise BadParams("choose at most one of --ideal, --quotient-space, --cyclic")
    if chosen:
        kind = chosen[0]
        params["space"] = {"ideal": "ideal", "quotient_space": "quotient", "cyclic": "cyclic"}[kind]
        params["gens"] = _split_gens(getattr(args, kind))
    return name, params


def resolve(args, *, need_extension: bool = False) -> Subject:
    from .central import CentralExtension, build_extension, t_operator
    from .families import FamilyTower
    from .presentation import build, load

    if bool(args.input) == bool(args.family):
        raise BadParams("give exactly one of a presentation file or --family")
    if args.input:
        pres = load(args.input)
        if args.precision is not None:
            if pres.family is None:
                raise BadParams("the precision of a hand-written table is fixed by the file")
            pres.precision = args.precision
        obj = build(pres)
        ext = obj if isinstance(obj, CentralExtension) else None
        space = ext.space if ext is not None else obj
        rebuild = None
        if pres.family is not None and pres.space_basis == []:
            def rebuild(n, _pres=pres):
                _pres.precision = n
                out = build(_pres)
                return out.space if isinstance(out, CentralExtension) else out
        subject = Subject(space, ext, rebuild, f"file:{args.input}")
    else:
        name, params = _family_params(args)
        tower = FamilyTower(name, params)
        n = args.precision if args.precision is not None else 6
        space = tower.at(n)
        subject = Subject(space, None, tower.at, f"family:{args.family}", tower.coherent(n))
    t_spec = getattr(args, "t_op", None)
    if t_spec:
        if subject.extension is not None:
            raise BadParams("the presentation already defines T; drop --t-op")
        space, t = t_operator(subject.space, t_spec)
        subject.extension = build_extension(space, t)
        subject.space = space
    if need_extension and subject.extension is None:
        raise BadParams("this command needs a T operator (--t-op or an extension presentation)")
    return subject


def _elements(subject: Subject, texts) -> list[np.ndarray]:
    if not texts:
        raise BadParams("give at least one --element")
    return [subject.space.vector(t) for t in texts]


def _fmt(space, vec) -> str:
    return space.format(vec)


def _bool(value) -> str:
    return str(bool(value)).lower()


# -- subcommands ---------------------------------------------------------------------------


def cmd_validate(args, subject: Subject) -> Outcome:
    from .algebra import validate
    from .spaces import validate_space

    ring_rep = validate(subject.ring)
    out = Outcome("validation")
    out.kv.update({f"ring.{k}": v for k, v in ring_rep.to_kv().items()})
    ok = ring_rep.ok
    if subject.space is not subject.ring:
        space_rep = validate_space(subject.space)
        out.kv.update({f"space.{k}": v for k, v in space_rep.to_kv().items()})
        ok &= space_rep.ok
    if subject.coherent is not None:
        out.kv["tower_coherent"] = _bool(subject.coherent)
        ok &= subject.coherent
    if subject.extension is not None:
        out.kv["t_central"] = "pass"
        out.kv["t_nilpotency"] = str(subject.extension.nilpotency)
    out.kv["all"] = "pass" if ok else "fail"
    out.kv["mode"] = "exact" if subject.space.exact else "tower"
    if not ok:
        out.failed = "validation failed"
    return out


def cmd_gr(args, subject: Subject) -> Outcome:
    from .graded import GradedView, check_clf_graded
    from .spaces import graded_generators, graded_module_check

    space = subject.space
    out = Outcome("associated graded")
    if space is subject.ring:
        rep = check_clf_graded(GradedView(space))
        out.kv.update(rep.to_kv())
        if not rep.ok:
            out.failed = "graded ring conditions fail"
    else:
        witness = graded_module_check(space)
        out.kv["module_action"] = "pass" if not witness else f"fail {witness}"
        out.kv["generators"] = str(len(graded_generators(space)))
        if witness:
            out.failed = "graded action is not a module action"
    h = space.h()
    out.csv = "degree,dim\n" + "".join(f"{i},{d}\n" for i, d in enumerate(h))
    return out


def cmd_hilbert(args, subject: Subject) -> Outcome:
    from .graded import hilbert

    rep = hilbert(subject.space, args.window)
    out = Outcome("Hilbert data", rep.to_kv(), rep.to_csv())
    out.kv["mode"] = "exact" if rep.exact else "tower"
    return out


def _comparison_filtrations(space, window: int) -> list:
    from .rees import artin_rees_constant
    from .spaces import Filtration

    out = [Filtration.shifted(space, 1).realize()]
    ar = artin_rees_constant(space)
    if ar.D is not None and space.precision + 1 - ar.D >= window + 2:
        out.append(Filtration.m_adic(space, ar.D).realize())
    return out


def cmd_dim(args, subject: Subject) -> Outcome:
    from .spaces import dimension

    space = subject.space
    others = [] if space.dim == 0 else _comparison_filtrations(space, args.window)
    rep = dimension(space, others, args.window)
    out = Outcome("dimension", rep.to_kv())
    out.kv["filtrations_compared"] = str(len(rep.compared))
    return out


def cmd_span(args, subject: Subject) -> Outcome:
    from .spaces import generated_subspace, is_subspace, span

    space = subject.space
    vecs = _elements(subject, args.element)
    trace: list[int] = []
    sub = generated_subspace(space, vecs, trace)
    direct = span(space, vecs)
    out = Outcome("span")
    out.kv.update({
        "span_dim": str(direct.dim),
        "span_is_subspace": _bool(is_subspace(direct)),
        "generated_dim": str(sub.dim),
        "iterations": str(len(trace)),
        "profile": ",".join(str(d) for d in sub.profile),
    })
    out.csv = "step,dim\n" + "".join(f"{k},{d}\n" for k, d in enumerate(trace))
    return out


def cmd_artin_rees(args, subject: Subject) -> Outcome:
    from .rees import artin_rees_constant

    rep = artin_rees_constant(subject.space)
    if rep.D is None:
        raise PrecisionTooLow("no offset D works at this precision; raise --precision")
    return Outcome("Artin-Rees constant", rep.to_kv(), rep.to_csv())


def cmd_asymptotics(args, subject: Subject) -> Outcome:
    from .asymptotics import sandwich_check, size_series

    ser = size_series(subject.space, window=args.window)
    sand = sandwich_check(subject.space, ser.ar_constant, args.window)
    out = Outcome("quotient sizes", ser.to_kv(), ser.to_csv())
    out.kv["sandwich"] = "pass" if sand.ok else f"fail n={sand.failures[0]}"
    out.kv["mode"] = "exact" if subject.space.exact else "tower"
    if not sand.ok:
        out.failed = "sandwich inequalities fail"
    elif ser.match_graded is False:
        out.failed = "quotient-size growth disagrees with the graded Hilbert data"
    return out


def cmd_lift(args, subject: Subject) -> Outcome:
    from .algebra import lift_solve

    space = subject.space
    if args.target is None or not args.spanners:
        raise BadParams("lift needs --target and at least one --spanners")
    res = lift_solve(space, args.target, args.spanners)
    ring = subject.ring
    out = Outcome("successive approximation")
    for k, c in enumerate(res.coefficients):
        out.kv[f"coefficient[{k}]"] = _fmt(ring, c)
    out.kv["K"] = str(res.K)
    out.kv["residual_valuation"] = str(res.residual_valuation)
    out.kv["steps"] = str(len(res.steps))
    out.csv = "degree,residual_valuation\n" + "".join(f"{d},{v}\n" for d, v in res.steps)
    return out


def cmd_invert(args, subject: Subject) -> Outcome:
    from .algebra import invert

    ring = subject.ring
    if not args.element:
        raise BadParams("invert needs --element")
    a = ring.element(args.element[0])
    inv = invert(a)
    prod = ring.multiply(inv.inverse.coeffs, a.coeffs)
    ok = bool(np.array_equal(prod, ring.one().coeffs))
    out = Outcome("inverse", {
        "element": _fmt(ring, a.coeffs),
        "inverse": _fmt(ring, inv.inverse.coeffs),
        "product_is_one": _bool(ok),
        "two_sided": _bool(inv.two_sided),
        "steps": str(len(inv.steps)),
    })
    out.csv = "degree,residual_valuation\n" + "".join(f"{d},{v}\n" for d, v in inv.steps)
    if not ok:
        out.failed = "inverse does not multiply back to one"
    return out


def cmd_distinguished(args, subject: Subject) -> Outcome:
    from .spaces import distinguished

    space = subject.space
    out = Outcome("distinguished elements")
    for k, vec in enumerate(_elements(subject, args.element)):
        ok, where = distinguished(space, vec, args.mode)
        out.kv[f"element[{k}]"] = _fmt(space, vec)
        out.kv[f"distinguished[{k}]"] = _bool(ok)
        if where is not None:
            out.kv[f"first_failure[{k}]"] = ",".join(str(i) for i in where)
    out.kv["mode"] = args.mode
    return out


def cmd_annihilator(args, subject: Subject) -> Outcome:
    from .spaces import annihilator

    space = subject.space
    ring = subject.ring
    out = Outcome("annihilator witnesses")
    rows = []
    for k, text in enumerate(args.element or []):
        vec = space.vector(text)
        rep = annihilator(space, vec, args.tau)
        out.kv[f"element[{k}]"] = _fmt(space, vec)
        out.kv[f"tau[{k}]"] = str(rep.tau)
        out.kv[f"witnesses[{k}]"] = str(len(rep.witnesses))
        for w in rep.witnesses:
            rows.append((k, ring.valuation(w), _fmt(ring, w)))
        persist = "n/a"
        if subject.rebuild is not None and rep.has_witness:
            persist = "true"
            for extra in (1, 2):
                bigger = subject.rebuild(space.precision + extra)
                again = annihilator(bigger, bigger.vector(text),
                                    None if args.tau is None else args.tau + extra)
                if not again.has_witness:
                    persist = "false"
        out.kv[f"persists[{k}]"] = persist
    if not args.element:
        raise BadParams("annihilator needs --element")
    out.csv = "element,valuation,witness\n" + "".join(f"{k},{v},{w}\n" for k, v, w in rows)
    return out


def cmd_extend(args, subject: Subject) -> Outcome:
    from .central import dim_over_extension, pseudo_null_filtration_test

    ext = subject.extension
    dims = dim_over_extension(ext, args.window)
    out = Outcome("central extension", dims.to_kv(), ext.k_csv())
    out.kv["k1"] = str(ext.nilpotency)
    if not (dims.invariant and dims.reassociation_ok and dims.nested_bound_ok):
        out.failed = "extension dimension checks fail"
    if args.assert_domain:
        rep = pseudo_null_filtration_test(ext, domain_asserted=True, samples=args.samples, seed=args.seed,
                                          exhaustive=args.slow_exhaustive, window=args.window)
        out.kv.update({f"pseudo_null.{k}": v for k, v in rep.to_kv().items()})
        if not rep.agree:
            out.failed = "pseudo-nullity conditions disagree"
    return out


def cmd_torsion(args, subject: Subject) -> Outcome:
    from .central import torsion_equivalence_check

    rep = torsion_equivalence_check(subject.space, domain_asserted=args.assert_domain, strict=args.strict,
                                    samples=args.samples, seed=args.seed, exhaustive=args.slow_exhaustive,
                                    window=args.window)
    out = Outcome("torsion conditions", rep.to_kv())
    out.kv["mode"] = "exact" if subject.space.exact else "tower"
    if not rep.agree:
        out.failed = "torsion conditions disagree"
    return out


def _random_monomial_ideal(ring, rng) -> list[str]:
    names = [n for n, v in zip(ring.names, ring.valuations) if 1 <= v <= min(3, ring.precision)]
    count = int(rng.integers(1, 4))
    picks = rng.choice(len(names), size=min(count, len(names)), replace=False)
    return sorted(names[int(i)] for i in picks)


def cmd_fuzz(args, subject: Subject) -> Outcome:
    from .algebra import invert, power_by_bracketing, random_bracketing
    from .families import ideal_space
    from .rees import artin_rees_constant

    ring = subject.ring
    rng = np.random.default_rng(args.seed)
    rows = []
    for trial in range(args.count):
        gens = _random_monomial_ideal(ring, rng)
        rep = artin_rees_constant(ideal_space(ring, gens))
        rows.append(("artin_rees", trial, "+".join(gens), rep.D is not None, "" if rep.D is None else rep.D))
    units = 0
    for trial in range(args.units):
        coeffs = rng.integers(0, ring.p, size=ring.dim)
        coeffs[ring.unit] = int(rng.integers(1, ring.p))
        a = ring.element(coeffs)
        inv = invert(a)
        ok = bool(np.array_equal(ring.multiply(inv.inverse.coeffs, a.coeffs), ring.one().coeffs))
        units += ok
        rows.append(("inverse", trial, _fmt(ring, coeffs), ok, len(inv.steps)))
    for trial in range(args.count):
        n = int(rng.integers(1, ring.precision + 1))
        tree = random_bracketing(n, rng)
        ok = power_by_bracketing(ring, tree) == ring.filtration(n)
        rows.append(("bracketing", trial, str(tree).replace(",", ";"), ok, n))
    failures = [r for r in rows if not r[3]]
    out = Outcome("seeded property battery", {
        "seed": str(args.seed),
        "trials": str(len(rows)),
        "failures": str(len(failures)),
        "artin_rees_found": str(sum(1 for r in rows if r[0] == "artin_rees" and r[3])),
        "inverses_ok": str(units),
    })
    out.csv = "check,trial,input,pass,detail\n" + "".join(
        f"{c},{t},{i},{_bool(ok)},{d}\n" for c, t, i, ok, d in rows)
    if failures:
        out.failed = f"{len(failures)} seeded trials failed (first: {failures[0][0]} #{failures[0][1]})"
    return out


# help texts name the result each property command exercises
COMMANDS = {
    "validate": (cmd_validate, "check the ring axioms, the space axioms and tower coherence",
                 "Checks the local-filtered axioms; in particular that the product of the i-th and "
                 "j-th filtration levels is exactly the (i+j)-th level whenever i+j <= N "
                 "(ring structure theorem: R is local with maximal ideal F^1)."),
    "gr": (cmd_gr, "inspect the associated graded ring or module",
           "For a ring: gr(R) must be commutative, associative and generated in degree one. "
           "For a space: the graded action must be a module action."),
    "hilbert": (cmd_hilbert, "Hilbert function, cumulative lengths and the fitted polynomial",
                "Fits the Hilbert-Samuel polynomial to the lengths of M/F^n(M) with exact rationals; "
                "its degree is the Krull dimension of gr(M)."),
    "dim": (cmd_dim, "dimension of a permissible space under several filtrations",
            "Dimension independence: every permissible filtration of the same space gives the same "
            "degree of growth."),
    "span": (cmd_span, "span of elements and the subspace they generate", None),
    "artin-rees": (cmd_artin_rees, "smallest Artin-Rees offset D at this precision",
                   "Artin-Rees: for a subspace with the induced filtration there is D with "
                   "F^{n+d}(M) = F^n(R)F^d(M) for every d >= D; the command reports the least such D "
                   "visible at the working precision."),
    "asymptotics": (cmd_asymptotics, "growth of |M / m^n M| compared with gr(M)",
                    "Asymptotics: log_p|M/m^n M| agrees with a polynomial of degree dim M whose leading "
                    "coefficient is that of the Hilbert-Samuel polynomial; also checks the bounds "
                    "len(M/F^n M) <= len(M/m^n M) <= len(M/F^{n+D} M)."),
    "lift": (cmd_lift, "solve sum r_i y_i = target by successive approximation",
             "Successive approximation: if principal parts span the graded pieces, corrections raise "
             "the residual valuation until the equation holds exactly."),
    "invert": (cmd_invert, "invert a valuation-0 element",
               "Locality: every element outside F^1 is a unit, found here by successive approximation."),
    "distinguished": (cmd_distinguished, "test whether elements are distinguished",
                      "plain mode: m^i(Rx) = m^i x for all i; m_adic mode: m^i(m^j x) = m^{i+j} x for all i, j."),
    "annihilator": (cmd_annihilator, "annihilator witnesses below a valuation cap",
                    "Reports ring elements of valuation <= tau killing x; on family inputs the search "
                    "is repeated at N+1 and N+2 to confirm the witness survives."),
    "extend": (cmd_extend, "central extension by T: k_j table and dimensions",
               "Dimension invariance under R[[T]]: with T central and nilpotent modulo mM, the n-adic "
               "growth of M has the same degree as the m-adic growth. With --assert-domain also runs "
               "the pseudo-nullity equivalence (T1)-(T3)."),
    "torsion": (cmd_torsion, "torsion equivalence (S1)-(S3) on a space",
                "Torsion equivalence over a ring whose graded ring is a domain: dim M < dim R, "
                "every distinguished element has a nonzero annihilator, and M is spanned by "
                "m-adically distinguished elements with annihilators, are equivalent."),
    "fuzz": (cmd_fuzz, "seeded random battery of property checks",
             "Random monomial ideals must admit an Artin-Rees offset, random units must invert, "
             "and every bracketing of m^n must equal F^n."),
}


def _common(parser: argparse.ArgumentParser) -> None:
    src = parser.add_argument_group("input")
    src.add_argument("input", nargs="?", help="presentation file (.cfa)")
    src.add_argument("--family", help="built-in family such as powerseries:2 or deformation")
    src.add_argument("-p", type=int, default=2, help="field characteristic for --family (default 2)")
    src.add_argument("--quotient", help="comma-separated monomials to kill in the family ring")
    src.add_argument("--ideal", help="work in the ideal generated by these comma-separated elements")
    src.add_argument("--quotient-space", dest="quotient_space", help="work in R modulo this ideal")
    src.add_argument("--cyclic", help="work in the cyclic space R·x")
    src.add_argument("--t-op", dest="t_op", help="T operator: zero, shift or mult:<element>")
    run = parser.add_argument_group("run options")
    run.add_argument("--precision", type=int, help="truncation level N (family default 6)")
    run.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="stability window for fits")
    run.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    run.add_argument("--tau", type=int, help="valuation cap for annihilator witnesses")
    run.add_argument("--samples", type=int, default=16, help="random elements sampled per test")
    run.add_argument("--slow-exhaustive", action="store_true", help="enumerate all elements when small")
    run.add_argument("--out", help="directory for <command>.kv and <command>.csv")
    run.add_argument("--element", action="append", help="an element, e.g. 'x + y^2' (repeatable)")
    run.add_argument("--target", help="right-hand side for lift")
    run.add_argument("--spanners", action="append", help="spanning element for lift (repeatable)")
    run.add_argument("--mode", choices=("plain", "m_adic"), default="plain", help="distinguishedness mode")
    run.add_argument("--assert-domain", action="store_true", help="assert that gr(R) is a domain")
    run.add_argument("--strict", action="store_true", help="fail when the torsion hypothesis is not met")
    run.add_argument("--count", type=int, default=20, help="fuzz: trials per check")
    run.add_argument("--units", type=int, default=100, help="fuzz: random units to invert")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clfa", description="Exact checks on truncated complete local-filtered rings and their spaces over F_p.")
    parser.add_argument("--version", action="version", version=f"clfa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, short, detail) in COMMANDS.items():
        p = sub.add_parser(name, help=short, description=detail or short)
        _common(p)
    return parser


def write_reports(outcome: Outcome, command: str, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, f"{command}.kv"), "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(outcome.kv):
            fh.write(f"{key}={outcome.kv[key]}\n")
    if outcome.csv is not None:
        with open(os.path.join(out_dir, f"{command}.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(outcome.csv)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        subject = resolve(args, need_extension=args.command == "extend")
        outcome = handler(args, subject)
        outcome.kv.setdefault("seed", str(args.seed))
        outcome.kv.setdefault("N", str(subject.space.precision))
        outcome.kv.setdefault("p", str(subject.space.p))
    except ClfaError as exc:
        print(f"clfa {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"{outcome.title} ({subject.source}, N={subject.space.precision}, p={subject.space.p})", file=stdout)
    for key in sorted(outcome.kv):
        print(f"  {key}: {outcome.kv[key]}", file=stdout)
    if args.out:
        write_reports(outcome, args.command, args.out)
    if outcome.failed:
        print(f"clfa {args.command}: property check failed: {outcome.failed}", file=sys.stderr)
        return VerificationFailed.exit_code
    return 0


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
