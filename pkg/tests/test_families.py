from __future__ import annotations

import pytest

from clfa.algebra import validate
from clfa.errors import BadParams
from clfa.families import (
    FamilyTower,
    make_family,
    monomial_name,
    monomials,
    parse_family_spec,
    parse_monomial,
    powerseries,
    variable_names,
)


def test_monomial_order_and_names():
    assert monomials(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert [monomial_name(e, ["x", "y"]) for e in monomials(2, 2)] == ["1", "x", "y", "x^2", "xy", "y^2"]
    assert parse_monomial("x^2y", ["x", "y"]) == (2, 1)
    assert variable_names(4) == ["x1", "x2", "x3", "x4"]
    assert parse_monomial("x2^3x1", variable_names(4)) == (1, 3, 0, 0)
    with pytest.raises(BadParams):
        parse_monomial("z", ["x", "y"])


def test_power_series_in_one_variable():
    alg = powerseries(1, 5, 7)
    assert alg.names == ["1", "t", "t^2", "t^3", "t^4", "t^5"]
    assert not alg.exact


def test_quotient_by_xy():
    alg = make_family("powerseries", {"nvars": 2, "quotient": ("xy",)}, 6)
    assert alg.h() == [1, 2, 2, 2, 2, 2, 2]


def test_exact_flag_for_nilpotent_quotient():
    assert powerseries(1, 3, 2, quotient=["t^4"]).exact
    assert not powerseries(1, 3, 2, quotient=["t^5"]).exact


@pytest.mark.parametrize("family,params", [
    ("powerseries", {"nvars": 1}),
    ("powerseries", {"nvars": 2, "p": 3}),
    ("powerseries", {"nvars": 2, "quotient": ("xy",)}),
    ("deformation", {"nvars": 2}),
    ("deformation", {"nvars": 3, "p": 5}),
    ("powerseries", {"nvars": 2, "space": "ideal", "gens": ("x",)}),
    ("powerseries", {"nvars": 2, "space": "quotient", "gens": ("x",)}),
    ("deformation", {"nvars": 2, "space": "quotient", "gens": ("y^2",)}),
    ("powerseries", {"nvars": 2, "space": "cyclic", "gens": ("x",)}),
])
def test_towers_are_coherent_and_valid(family, params):
    tower = FamilyTower(family, params)
    # start at 2 so that degree-one generators exist one level down
    for n in range(2, 6):
        assert tower.coherent(n)
        obj = tower.at(n)
        assert validate(obj.algebra).ok


def test_parse_family_spec():
    assert parse_family_spec("powerseries:3") == ("powerseries", {"nvars": 3})
    assert parse_family_spec("deformation") == ("deformation", {"nvars": 2})
    for bad in ["banana", "banana:2"]:
        with pytest.raises(BadParams):
            parse_family_spec(bad)


def test_deformation_needs_two_variables():
    with pytest.raises(BadParams):
        make_family("deformation", {"nvars": 1}, 3)


def test_unknown_space_construction():
    with pytest.raises(BadParams):
        make_family("powerseries", {"space": "torus"}, 3)


def test_generator_beyond_truncation_is_zero():
    sp = make_family("powerseries", {"nvars": 1, "space": "ideal", "gens": ("t^9",)}, 4)
    assert sp.dim == 0
