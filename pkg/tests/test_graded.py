from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from clfa.algebra import TruncatedFilteredAlgebra
from clfa.errors import PrecisionTooLow
from clfa.families import deformation, powerseries, quotient_space
from clfa.graded import GradedView, check_clf_graded, domain_refute, fit_growth, hilbert, pseudo_null_test


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4), st.integers(2, 4))
def test_fit_recovers_integer_polynomials(coeffs, window):
    def poly(n):
        return sum(c * n**k for k, c in enumerate(coeffs))

    degree = max((k for k, c in enumerate(coeffs) if c), default=0)
    values = [poly(n) for n in range(degree + window + 3)]
    fit = fit_growth(values, window)
    assert fit.stable and fit.delta == degree
    assert fit.alpha == Fraction(coeffs[degree] if coeffs[degree] else 0)
    assert all(fit(n) == values[n] for n in range(len(values)))
    assert all(fit(n) == poly(n) for n in range(len(values), len(values) + 5))
    assert fit.monomial[: degree + 1] == [Fraction(c) for c in coeffs[: degree + 1]]


def test_fit_reports_instability():
    fit = fit_growth([0, 1, 4, 9, 20, 50], 3)
    assert not fit.stable


@pytest.mark.parametrize("nvars,N", [(1, 9), (2, 8), (3, 6)])
def test_hilbert_of_power_series_matches_monomial_count(nvars, N):
    rep = hilbert(powerseries(nvars, N, 2))
    assert rep.h == [oracles.hilbert_function_polynomial_ring(nvars, n) for n in range(N + 1)]
    assert rep.ell == [comb(n + nvars - 1, nvars) for n in range(N + 2)]
    assert rep.delta == nvars
    assert rep.alpha == Fraction(1, np.prod(range(1, nvars + 1)))


def test_hilbert_csv_layout():
    rep = hilbert(powerseries(2, 3, 2))
    assert rep.to_csv() == "n,h,ell\n0,1,0\n1,2,1\n2,3,3\n3,4,6\n4,,10\n"


def test_monomial_quotient_xy():
    rep = hilbert(powerseries(2, 6, 5, quotient=["xy"]))
    assert rep.h == [1, 2, 2, 2, 2, 2, 2]
    assert rep.delta == 1 and rep.alpha == 2


def test_exact_nilpotent_algebra_has_dimension_zero():
    alg = powerseries(2, 2, 2, quotient=["x^2", "xy", "y^2"])
    assert alg.exact
    rep = hilbert(alg)
    assert rep.h == [1, 2, 0]
    assert rep.delta == 0 and rep.alpha == 3


def test_short_tower_is_precision_too_low():
    with pytest.raises(PrecisionTooLow):
        hilbert(powerseries(3, 2, 2), window=3)


def test_graded_conditions_on_deformation():
    rep = check_clf_graded(GradedView(deformation(5, 2)))
    assert rep.ok, rep.to_kv()


def test_noncommutative_graded_ring_is_detected():
    # e, a, b, ab with a*b = ab but b*a = 0: gr is not commutative
    names = ["e", "a", "b", "ab"]
    mul = np.zeros((4, 4, 4), dtype=np.int64)
    for k in range(4):
        mul[0, k, k] = mul[k, 0, k] = 1
    mul[1, 2, 3] = 1
    alg = TruncatedFilteredAlgebra(2, names, [0, 1, 1, 2], mul, unit="e", exact=True)
    rep = check_clf_graded(GradedView(alg))
    assert not rep.ok
    assert not [c for c in rep.checks if c.name == "graded_commutative"][0].passed


def test_graded_pieces_multiply_by_degree():
    view = GradedView(powerseries(2, 4, 3))
    assert view.block(1, 2).shape == (2, 3, 4)


def test_domain_refuter_finds_zero_divisors():
    assert domain_refute(GradedView(powerseries(2, 5, 2, quotient=["xy"]))).found
    assert not domain_refute(GradedView(powerseries(2, 5, 2))).found


def test_pseudo_null_gap():
    assert pseudo_null_test(3, 1) and not pseudo_null_test(2, 1)


def test_quotient_space_hilbert():
    rep = hilbert(quotient_space(powerseries(2, 8, 2), ["x"]))
    assert rep.h == [1] * 9 and rep.delta == 1 and rep.alpha == 1


def test_window_must_be_at_least_two():
    from clfa.errors import BadParams

    with pytest.raises(BadParams):
        fit_growth([1, 2, 3], 1)
