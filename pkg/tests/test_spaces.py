from __future__ import annotations

import numpy as np
import pytest

import oracles
from clfa.core import Subgroup, level_products
from clfa.errors import BadParams, NotPermissible, NotSubspace, PrecisionTooLow
from clfa.families import cyclic, deformation, ideal_space, powerseries, quotient_space
from clfa.spaces import (
    Filtration,
    annihilator,
    default_cap,
    dimension,
    direct_sum,
    distinguished,
    generated_subspace,
    graded_generators,
    induced_filtration,
    is_subspace,
    permissible,
    project,
    quotient,
    span,
    sub_dimension,
    subspace,
    validate_space,
)


@pytest.fixture(scope="module")
def ring():
    return powerseries(2, 6, 2)


def test_span_of_monomial_is_the_ideal(ring):
    s = span(ring, ["x"])
    assert s.dim == sum(n for n in range(1, 7))  # x·(monomials of degree <= 5)
    assert is_subspace(s)


def test_nonassociative_span_may_need_closure():
    alg = deformation(4, 2)
    trace = []
    gen = generated_subspace(alg, ["y"], trace)
    assert trace[-1] == gen.dim and trace == sorted(trace)
    assert is_subspace(gen)


def test_subspace_rejects_non_closed(ring):
    with pytest.raises(NotSubspace):
        subspace(ring, Subgroup(ring, [ring.vector("x")]))


def test_subspace_and_quotient_filtrations(ring):
    sub = span(ring, ["x"])
    low = subspace(ring, sub)
    high = quotient(ring, sub)
    assert low.h() == [0, 1, 2, 3, 4, 5, 6]
    assert high.h() == [1] * 7
    assert validate_space(low).ok and validate_space(high).ok
    ind = induced_filtration(ring, sub)
    assert ind.exact
    assert sub_dimension(ring, sub) == (2, 1)


def test_projection_kills_the_subspace(ring):
    sub = span(ring, ["x"])
    high = quotient(ring, sub)
    assert not np.any(project(high, ring.vector("x + xy")))
    assert high.format(project(high, ring.vector("x + y^2"))) == "y^2"


def test_direct_sum_records_summands(ring):
    both = direct_sum(ring, ring)
    first, second = both.summand_index
    assert both.dim == 2 * ring.dim
    assert [both.names[i] for i in first] == [n + ".1" for n in ring.names]
    assert hilbert_delta(both) == 2


def hilbert_delta(space):
    from clfa.graded import hilbert

    return hilbert(space).delta


def test_cyclic_family_levels_are_m_powers_of_generator(ring):
    # F^n(M) = m^n x for the cyclic space R·x
    for gen in ["x", "x + y", "xy"]:
        sp = cyclic(ring, gen)
        powers = level_products(Subgroup(sp, [sp.generator]), sp.precision)
        for n in range(sp.precision + 1):
            assert sp.filtration(n) == powers[n]
        assert distinguished(sp, sp.generator, "m_adic") == (True, None)


def test_cyclic_rejects_non_cyclic_graded_module():
    alg = powerseries(2, 5, 2, quotient=["xy"])
    with pytest.raises(BadParams):
        cyclic(alg, "x + y^2")


def test_distinguished_modes(ring):
    # a ring element in an associative ring is distinguished in both modes
    assert distinguished(ring, "x + y^2")[0]
    assert distinguished(ring, "x + y^2", "m_adic")[0]
    with pytest.raises(BadParams):
        distinguished(ring, "x", "other")


def test_annihilator_cap_and_witness():
    m = quotient_space(powerseries(2, 6, 2), ["x"])
    rep = annihilator(m, "1")
    assert rep.tau == default_cap(m, "1") == 4
    assert rep.has_witness
    assert all(m.algebra.valuation(w) <= rep.tau for w in rep.witnesses)
    none = annihilator(powerseries(2, 6, 2), "1")
    assert not none.has_witness


def test_annihilator_ignores_truncation_artifacts():
    ring = powerseries(1, 6, 2)
    # t^5 is killed by t^2 only because t^7 falls off the end
    rep = annihilator(ring, "t^5")
    assert rep.kernel.dim > 0 and not rep.has_witness


def test_m_adic_filtration_realized(ring):
    sp = ideal_space(ring, ["x"])
    flt = Filtration.m_adic(sp, 1)
    assert flt.horizon == 6
    real = flt.realize()
    assert real.filtration_kind == "m_adic"
    assert permissible(real).delta == 2


def test_shifted_filtration(ring):
    real = Filtration.shifted(ring, 2).realize()
    assert real.h()[:3] == [0, 0, 1]
    assert permissible(real).delta == 2
    with pytest.raises(BadParams):
        Filtration.shifted(ring, -1)


def test_intersection_of_filtrations(ring):
    a = Filtration.native(ring)
    b = Filtration.shifted(ring, 1)
    both = a.intersect(b)
    for k in range(both.horizon):
        assert both.level(k) == ring.filtration(k)


def test_dimension_independent_of_filtration(ring):
    # two distinct permissible filtrations give the same degree
    sp = quotient_space(ring, ["x"])
    rep = dimension(sp, [Filtration.shifted(sp, 1).realize(), Filtration.m_adic(sp, 0).realize()])
    assert rep.delta == 1
    assert set(rep.compared.values()) == {1}


def test_non_module_graded_action_is_not_permissible():
    # R acting on itself except that x sends y to x^2, which breaks (xs)m = x(sm) in gr
    ring = powerseries(2, 4, 2)
    act = ring.action.copy()
    ix, iy = ring.index["x"], ring.index["y"]
    ixx, ixy = ring.index["x^2"], ring.index["xy"]
    act = np.array(act)
    act[ix, iy] = 0
    act[ix, iy, ixx] = 1
    from clfa.core import FilteredSpace

    bad = FilteredSpace(ring, ring.names, ring.valuations, act)
    assert not permissible(bad).permissible
    with pytest.raises(NotPermissible):
        dimension(bad)


def test_late_generator_is_precision_too_low():
    sp = ideal_space(powerseries(1, 6, 2), ["t^5"])
    assert graded_generators(sp)[0][0] == 5
    with pytest.raises(PrecisionTooLow):
        permissible(sp)


def test_graded_generators_of_ideal(ring):
    gens = graded_generators(ideal_space(ring, ["x^2", "y^3"]))
    assert [d for d, _ in gens] == [2, 3]


def test_brute_force_levels_of_quotient():
    sp = quotient_space(powerseries(2, 3, 2), ["y"])
    for i in range(sp.precision + 2):
        assert oracles.subgroup_set(sp.filtration(i)) == oracles.level_set(sp, i)
