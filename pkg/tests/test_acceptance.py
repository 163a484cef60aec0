"""Acceptance battery: one PASS/FAIL line per criterion.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest,
where the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import io
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from clfa.algebra import filtration_product_failure, invert, lift_solve  # noqa: E402
from clfa.asymptotics import sandwich_check, size_series  # noqa: E402
from clfa.central import (  # noqa: E402
    build_extension,
    dim_over_extension,
    pseudo_null_filtration_test,
    t_operator,
    torsion_equivalence_check,
)
from clfa.cli import run as cli_run  # noqa: E402
from clfa.core import Subgroup, level_products, product  # noqa: E402
from clfa.families import cyclic, deformation, ideal_space, monomial_name, powerseries, quotient_space  # noqa: E402
from clfa.graded import hilbert  # noqa: E402
from clfa.presentation import build, load  # noqa: E402
from clfa.rees import artin_rees_constant  # noqa: E402
from clfa.spaces import Filtration, annihilator, dimension, distinguished, generated_subspace, span  # noqa: E402

DP_FILE = Path(__file__).resolve().parent.parent / "presentations" / "dp.cfa"
SEED = 20240601
RESULTS: list[str] = []

RINGS = {
    "F2[[t]] N=8": lambda: powerseries(1, 8, 2),
    "F3[[t]] N=8": lambda: powerseries(1, 8, 3),
    "F5[[t]] N=6": lambda: powerseries(1, 6, 5),
    "F2[[x,y]] N=8": lambda: powerseries(2, 8, 2),
    "F3[[x,y]] N=6": lambda: powerseries(2, 6, 3),
    "F5[[x,y]] N=5": lambda: powerseries(2, 5, 5),
    "F2[[x,y,z]] N=4": lambda: powerseries(3, 4, 2),
    "F2[[x,y]]/(xy) N=7": lambda: powerseries(2, 7, 2, quotient=["xy"]),
    "F3[[x,y]]/(y^2) N=6": lambda: powerseries(2, 6, 3, quotient=["y^2"]),
    "D_2 N=6": lambda: deformation(6, 2),
    "D_3 N=6": lambda: deformation(6, 3),
    "D_5 N=4": lambda: deformation(4, 5),
    "dp.cfa": lambda: build(load(DP_FILE)),
}
DEFORMATIONS = ["D_2 N=6", "D_3 N=6", "D_5 N=4", "dp.cfa"]

GROWTH = {
    "F2[[x,y]]": lambda: powerseries(2, 8, 2),
    "F3[[t]]": lambda: powerseries(1, 8, 3),
    "(x) in F2[[x,y]]": lambda: ideal_space(powerseries(2, 8, 2), ["x"]),
    "(x^2,y^3) in F2[[x,y]]": lambda: ideal_space(powerseries(2, 8, 2), ["x^2", "y^3"]),
    "F2[[x,y]]/(x)": lambda: quotient_space(powerseries(2, 8, 2), ["x"]),
    "F5[[x,y]]/(xy)": lambda: powerseries(2, 8, 5, quotient=["xy"]),
    "R·x in F2[[x,y]]": lambda: cyclic(powerseries(2, 8, 2), "x"),
    "D_2": lambda: deformation(7, 2),
    "D_3/(y^2)": lambda: quotient_space(deformation(7, 3), ["y^2"]),
}
DEFORMATION_GROWTH = ["D_2", "D_3/(y^2)"]

CYCLIC = {
    "R·x in F2[[x,y]]": lambda: cyclic(powerseries(2, 7, 2), "x"),
    "R·(x+y) in F3[[x,y]]": lambda: cyclic(powerseries(2, 6, 3), "x + y"),
    "R·xy in F2[[x,y]]": lambda: cyclic(powerseries(2, 7, 2), "xy"),
    "R·t^2 in F5[[t]]": lambda: cyclic(powerseries(1, 8, 5), "t^2"),
    "R·x in D_2": lambda: cyclic(deformation(6, 2), "x"),
    "R·y in D_3": lambda: cyclic(deformation(6, 3), "y"),
}
DEFORMATION_CYCLIC = ["R·x in D_2", "R·y in D_3"]


def report(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def cli(*argv) -> int:
    return cli_run([str(a) for a in argv], stdout=io.StringIO())


# individual checks, each returning (ok, detail)

def filtration_products(names) -> tuple[bool, str]:
    bad = []
    for name in names:
        gap = filtration_product_failure(RINGS[name]())
        if gap is not None:
            bad.append(f"{name} at {gap}")
    return not bad, f"{len(names)} rings" + (f"; gaps: {bad}" if bad else "")


def inversions(names, count: int = 100) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    failures = 0
    for name in names:
        ring = RINGS[name]()
        one = ring.one().coeffs
        for _ in range(count):
            coeffs = rng.integers(0, ring.p, size=ring.dim)
            coeffs[ring.unit] = int(rng.integers(1, ring.p))
            a = ring.element(coeffs)
            inv = invert(a)
            failures += not np.array_equal(ring.multiply(inv.inverse.coeffs, a.coeffs), one)
    return failures == 0, f"{count * len(names)} inversions, {failures} wrong"


def growth(names) -> tuple[bool, str]:
    bad = []
    for name in names:
        sp = GROWTH[name]()
        ser = size_series(sp)
        gr = hilbert(sp)
        ok = ser.stable and gr.stable and ser.delta == gr.delta and ser.alpha == gr.alpha and ser.match_graded
        ok = ok and sandwich_check(sp, ser.ar_constant).ok
        if not ok:
            bad.append(name)
    return not bad, f"{len(names)} spaces" + (f"; failing: {bad}" if bad else "")


def cyclic_levels(names) -> tuple[bool, str]:
    bad = []
    for name in names:
        sp = CYCLIC[name]()
        gen = Subgroup(sp, [sp.generator])
        powers = level_products(gen, sp.precision)
        ok = all(sp.filtration(n) == powers[n] for n in range(sp.precision + 1))
        for j in range(sp.precision + 1):
            inner = level_products(powers[j], sp.precision - j)
            ok = ok and all(inner[i] == powers[i + j] for i in range(sp.precision - j + 1))
        ok = ok and distinguished(sp, sp.generator, "m_adic")[0]
        if not ok:
            bad.append(name)
    return not bad, f"{len(names)} cyclic spaces" + (f"; failing: {bad}" if bad else "")


def criterion_1():
    return report(1, *filtration_products(list(RINGS)))


def criterion_2():
    return report(2, *inversions(list(RINGS)))


def criterion_3():
    rep = hilbert(powerseries(2, 8, 2))
    ok = (rep.h[:9] == [oracles.hilbert_function_polynomial_ring(2, n) for n in range(9)]
          and rep.h[:9] == [n + 1 for n in range(9)]
          and rep.ell[:10] == [n * (n + 1) // 2 for n in range(10)]
          and rep.delta == 2 and rep.alpha == Fraction(1, 2))
    return report(3, ok, f"h={rep.h[:9]} delta={rep.delta} alpha={rep.alpha}")


def criterion_4():
    rep = artin_rees_constant(ideal_space(powerseries(2, 8, 2), ["x"]))
    oracle_d = oracles.monomial_ideal_artin_rees(2, [(1, 0)], 8)
    ok = rep.D == 1 == oracle_d
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(20):
        nvars = int(rng.integers(1, 4))
        precision = 6 if nvars < 3 else 4
        gens = set()
        for _ in range(int(rng.integers(1, 4))):
            deg = int(rng.integers(1, 4))
            cuts = sorted(rng.integers(0, deg + 1, nvars - 1).tolist())
            gens.add(tuple(b - a for a, b in zip([0] + cuts, cuts + [deg])))
        gens = sorted(gens)
        ring = powerseries(nvars, precision, 2)
        got = artin_rees_constant(ideal_space(ring, [monomial_name(g, ring.variables) for g in gens]))
        mismatches += not got.found or got.D != oracles.monomial_ideal_artin_rees(nvars, gens, precision)
    # the same battery through the command line must exit 0, not 4
    code = cli("fuzz", "--family", "powerseries:2", "--precision", 6, "--count", 20, "--units", 0, "--seed", SEED)
    ok = ok and mismatches == 0 and code == 0
    return report(4, ok, f"D((x))={rep.D}, 20 random ideals with {mismatches} oracle mismatches, fuzz exit {code}")


def criterion_5():
    return report(5, *growth(list(GROWTH)))


def criterion_6():
    rng = np.random.default_rng(SEED)
    ring = powerseries(2, 6, 3)
    failures = 0
    for _ in range(30):
        spanners = ["x", "y", "x + y^2"]
        target = ring.filtration(1).basis[0] * 0
        for k in range(ring.dim):
            if ring.valuations[k] >= 1:
                target[k] = rng.integers(0, ring.p)
        res = lift_solve(ring, target, spanners)
        total = np.zeros(ring.dim, dtype=np.int64)
        for c, s in zip(res.coefficients, spanners):
            total = (total + ring.multiply(c, ring.vector(s))) % ring.p
        failures += not np.array_equal(total, target) or res.residual_valuation <= ring.precision
    series = powerseries(1, 5, 3)
    inv = invert(series.element("1 + t"))
    text = series.format(inv.inverse.coeffs)
    ok = failures == 0 and text == "1 + 2*t + t^2 + 2*t^3 + t^4 + 2*t^5"
    return report(6, ok, f"30 lifts with {failures} failures; (1+t)^-1 = {text}")


def criterion_7():
    return report(7, *cyclic_levels(list(CYCLIC)))


def criterion_8():
    spaces = {
        "F2[[x,y]]": powerseries(2, 8, 2),
        "F2[[x,y]]/(x)": quotient_space(powerseries(2, 8, 2), ["x"]),
        "(x) in F2[[x,y]]": ideal_space(powerseries(2, 8, 2), ["x"]),
        "D_2": deformation(7, 2),
    }
    bad = []
    for name, sp in spaces.items():
        rep = dimension(sp, [Filtration.shifted(sp, 1).realize(), Filtration.m_adic(sp, 1).realize()])
        if len(set(rep.compared.values())) != 1 or rep.delta not in rep.compared.values():
            bad.append(name)
    extensions = [
        (powerseries(2, 7, 2), "zero"),
        (powerseries(2, 7, 2), "mult:x"),
        (powerseries(1, 10, 2), "mult:t^2"),
        (deformation(6, 2), "zero"),
        (quotient_space(deformation(6, 2), ["x"]), "shift"),
    ]
    for space, spec in extensions:
        rep = dim_over_extension(build_extension(*t_operator(space, spec)))
        if not rep.invariant:
            bad.append(f"extension {spec}")
    return report(8, not bad, f"{len(spaces)} spaces x 3 filtrations, {len(extensions)} extensions"
                  + (f"; failing: {bad}" if bad else ""))


def criterion_9():
    battery = {
        "R": powerseries(2, 7, 2),
        "R/(x)": quotient_space(powerseries(2, 7, 2), ["x"]),
        "R/(x,y)": quotient_space(powerseries(2, 7, 2), ["x", "y"]),
        "D_2/(x)": quotient_space(deformation(7, 2), ["x"]),
        "D_2": deformation(7, 2),
    }
    bad = [name for name, sp in battery.items()
           if not torsion_equivalence_check(sp, domain_asserted=True, seed=SEED).agree]
    extensions = {
        "R, T=0": (powerseries(2, 7, 2), "zero"),
        "R/(x,y), T=0": (quotient_space(powerseries(2, 6, 2), ["x", "y"]), "zero"),
        "F2[[t]], T=t^2": (powerseries(1, 10, 2), "mult:t^2"),
        "D_2/(x), T=shift": (quotient_space(deformation(6, 2), ["x"]), "shift"),
    }
    for name, (space, spec) in extensions.items():
        ext = build_extension(*t_operator(space, spec))
        if not pseudo_null_filtration_test(ext, domain_asserted=True, seed=SEED).agree:
            bad.append(name)
    code = cli("torsion", "--family", "deformation", "--quotient-space", "x", "--precision", 7,
               "--assert-domain", "--seed", SEED)
    ok = not bad and code == 0
    return report(9, ok, f"{len(battery)} torsion and {len(extensions)} pseudo-null cases, cli exit {code}"
                  + (f"; disagreeing: {bad}" if bad else ""))


def criterion_10():
    cases = {
        "F2[[t]] N=5": powerseries(1, 5, 2),
        "F2[[x,y]] N=3": powerseries(2, 3, 2),
        "F2[[x,y,z]] N=1": powerseries(3, 1, 2),
        "D_2 N=3": deformation(3, 2),
        "(x) in F2[[x,y]] N=3": ideal_space(powerseries(2, 3, 2), ["x"]),
        "D_2/(y^2) N=3": quotient_space(deformation(3, 2), ["y^2"]),
    }
    rng = np.random.default_rng(SEED)
    bad = []
    closures = 0
    for name, sp in cases.items():
        assert sp.dim <= 12
        for _ in range(3):
            a = Subgroup(sp.algebra, rng.integers(0, 2, (2, sp.algebra.dim)))
            d = Subgroup(sp, rng.integers(0, 2, (2, sp.dim)))
            xs = [tuple(int(c) for c in v) for v in rng.integers(0, 2, (2, sp.dim))]
            ok = oracles.subgroup_set(product(a, d)) == oracles.product_set(
                sp, oracles.subgroup_set(a), oracles.subgroup_set(d))
            ok = ok and oracles.subgroup_set(span(sp, xs)) == oracles.span_set(sp, xs)
            # closing under the action enumerates every (ring, space) pair, so keep that product small
            if sp.algebra.dim + sp.dim <= 17:
                closures += 1
                ok = ok and oracles.subgroup_set(generated_subspace(sp, xs)) == oracles.generated_set(sp, xs)
            ok = ok and oracles.subgroup_set(annihilator(sp, xs[0]).kernel) == oracles.annihilator_set(sp, xs[0])
            if not ok:
                bad.append(name)
    return report(10, not bad, f"{len(cases)} spaces x 3 draws, {closures} generated-subspace closures" + (f"; failing: {bad}" if bad else ""))


def criterion_11():
    ring = deformation(4, 2)
    x = ring.vector("x")
    left = ring.multiply(ring.multiply(x, x), x)
    right = ring.multiply(x, ring.multiply(x, x))
    checks = {
        "1": filtration_products(DEFORMATIONS)[0],
        "2": inversions(DEFORMATIONS)[0],
        "5": growth(DEFORMATION_GROWTH)[0],
        "7": cyclic_levels(DEFORMATION_CYCLIC)[0],
    }
    nonassoc = not np.array_equal(left, right)
    ok = nonassoc and all(checks.values())
    return report(11, ok, f"(x*x)*x = {ring.format(left)}, x*(x*x) = {ring.format(right)}; "
                  + ", ".join(f"c{k}={'ok' if v else 'bad'}" for k, v in checks.items()))


def criterion_12():
    commands = [
        ["fuzz", "--family", "deformation", "--precision", 5, "--count", 6, "--units", 20],
        ["torsion", "--family", "powerseries:2", "--quotient-space", "x", "--precision", 6, "--assert-domain"],
        ["extend", "--family", "powerseries:2", "--t-op", "mult:x", "--precision", 6, "--assert-domain"],
        ["asymptotics", str(DP_FILE)],
        ["artin-rees", "--family", "powerseries:2", "--ideal", "x", "--precision", 8],
    ]
    differing = []
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "first", Path(tmp) / "second"]
        for cmd in commands:
            for out in dirs:
                cli(*cmd, "--seed", SEED, "--out", out)
        names = sorted(p.name for p in dirs[0].iterdir())
        for name in names:
            if (dirs[0] / name).read_bytes() != (dirs[1] / name).read_bytes():
                differing.append(name)
        kv_files = [n for n in names if n.endswith(".kv")]
        ok = not differing and len(kv_files) == len(commands) and names == sorted(p.name for p in dirs[1].iterdir())
    return report(12, ok, f"{len(names)} report files compared" + (f"; differing: {differing}" if differing else ""))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 13)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    outcomes = [check() for check in CRITERIA]
    sys.exit(0 if all(outcomes) else 4)
