"""Small p = 2 cases checked against full enumeration of every element."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from clfa.core import Subgroup, product
from clfa.families import deformation, ideal_space, powerseries, quotient_space
from clfa.spaces import annihilator, generated_subspace, span

CASES = {
    "series1_N5": lambda: powerseries(1, 5, 2),
    "series2_N2": lambda: powerseries(2, 2, 2),
    "series2_N3": lambda: powerseries(2, 3, 2),
    "series3_N1": lambda: powerseries(3, 1, 2),
    "deformation_N3": lambda: deformation(3, 2),
    "ideal_x_N3": lambda: ideal_space(powerseries(2, 3, 2), ["x"]),
    "quotient_y2_N3": lambda: quotient_space(deformation(3, 2), ["y^2"]),
}
SMALL_RING = ["series1_N5", "series2_N2", "series3_N1"]

_cache: dict = {}


def space_for(name):
    if name not in _cache:
        _cache[name] = CASES[name]()
    return _cache[name]


def random_rows(rng, k, dim):
    return rng.integers(0, 2, (k, dim))


@pytest.mark.parametrize("name", sorted(CASES))
def test_dimensions_within_enumeration_range(name):
    sp = space_for(name)
    assert sp.dim <= 12 and sp.algebra.dim <= 12


@pytest.mark.parametrize("name", sorted(CASES))
@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_product_matches_enumeration(name, seed):
    sp = space_for(name)
    rng = np.random.default_rng(seed)
    a = Subgroup(sp.algebra, random_rows(rng, 3, sp.algebra.dim))
    d = Subgroup(sp, random_rows(rng, 3, sp.dim))
    expected = oracles.product_set(sp, oracles.subgroup_set(a), oracles.subgroup_set(d))
    assert oracles.subgroup_set(product(a, d)) == expected


@pytest.mark.parametrize("name", sorted(CASES))
@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_span_matches_enumeration(name, seed):
    sp = space_for(name)
    xs = [tuple(v) for v in random_rows(np.random.default_rng(seed), 2, sp.dim)]
    assert oracles.subgroup_set(span(sp, xs)) == oracles.span_set(sp, xs)


@pytest.mark.parametrize("name", SMALL_RING)
@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_generated_subspace_matches_enumeration(name, seed):
    sp = space_for(name)
    xs = [tuple(v) for v in random_rows(np.random.default_rng(seed), 2, sp.dim)]
    assert oracles.subgroup_set(generated_subspace(sp, xs)) == oracles.generated_set(sp, xs)


@pytest.mark.parametrize("name", sorted(CASES))
@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_annihilator_kernel_matches_enumeration(name, seed):
    sp = space_for(name)
    x = tuple(random_rows(np.random.default_rng(seed), 1, sp.dim)[0])
    rep = annihilator(sp, x)
    full = oracles.annihilator_set(sp, x)
    assert oracles.subgroup_set(rep.kernel) == full
    honest = {r for r in full if any(r) and sp.algebra.valuation(np.array(r)) <= rep.tau}
    assert rep.has_witness == bool(honest)
    for w in rep.witnesses:
        assert tuple(int(c) for c in w) in full


@pytest.mark.parametrize("name", sorted(CASES))
def test_filtration_levels_match_enumeration(name):
    sp = space_for(name)
    for i in range(sp.precision + 2):
        assert oracles.subgroup_set(sp.filtration(i)) == oracles.level_set(sp, i)
