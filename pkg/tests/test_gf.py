from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clfa import gf
from clfa.errors import BadParams, NoSolution

PRIMES = st.sampled_from([2, 3, 5, 7])


@st.composite
def matrices(draw, max_rows=7, max_cols=7):
    p = draw(PRIMES)
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    data = draw(st.lists(st.integers(0, p - 1), min_size=rows * cols, max_size=rows * cols))
    return p, np.array(data, dtype=np.int64).reshape(rows, cols)


def brute_rank(m, p):
    """Size of the row space by enumeration, converted back to a dimension."""
    from oracles import additive_closure

    group = additive_closure(list(m), p, m.shape[1])
    return round(np.log(len(group)) / np.log(p))


def test_is_prime():
    assert [n for n in range(20) if gf.is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_field_rejects_composites():
    with pytest.raises(BadParams):
        gf.Fp(6)


def test_field_inverse():
    f = gf.Fp(7)
    assert all(f(a * f.inv(a)) == 1 for a in range(1, 7))


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rref_is_idempotent_and_canonical(pm):
    p, m = pm
    r, k, piv = gf.rref(m, p)
    r2, k2, piv2 = gf.rref(r, p)
    assert np.array_equal(r, r2) and k == k2 and piv == piv2
    assert np.all((r >= 0) & (r < p))
    for row, col in enumerate(piv):
        assert r[row, col] == 1
        assert np.count_nonzero(r[:, col]) == 1


@settings(max_examples=40, deadline=None)
@given(matrices(max_rows=4, max_cols=4))
def test_rank_matches_enumeration(pm):
    p, m = pm
    assert gf.rank(m, p) == brute_rank(m, p)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(pm):
    p, m = pm
    ker = gf.kernel(m, p)
    assert gf.rank(m, p) + ker.shape[0] == m.shape[1]
    if ker.shape[0]:
        assert not np.any(gf.matmul(m, ker.T, p))


@settings(max_examples=60, deadline=None)
@given(matrices(), st.data())
def test_solve_substitutes_back(pm, data):
    p, a = pm
    x_true = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=a.shape[1], max_size=a.shape[1])))
    b = gf.matmul(a, x_true[:, None], p)[:, 0]
    x = gf.solve(a, b, p)
    assert np.array_equal(gf.matmul(a, x[:, None], p)[:, 0], b)


def test_solve_reports_inconsistency():
    with pytest.raises(NoSolution):
        gf.solve(np.array([[1, 0], [1, 0]]), np.array([0, 1]), 3)


@settings(max_examples=40, deadline=None)
@given(PRIMES, st.integers(1, 6), st.integers(0, 10_000))
def test_inverse_of_random_invertible(p, n, seed):
    rng = np.random.default_rng(seed)
    lower = np.tril(rng.integers(0, p, (n, n)), -1) + np.eye(n, dtype=np.int64)
    upper = np.triu(rng.integers(0, p, (n, n)), 1) + np.diag(rng.integers(1, p, n))
    a = gf.matmul(lower, upper, p)
    assert np.array_equal(gf.matmul(a, gf.inverse(a, p), p), np.eye(n, dtype=np.int64))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(1, 70), st.integers(0, 10_000))
def test_packed_gf2_matches_generic(rows, cols, seed):
    m = np.random.default_rng(seed).integers(0, 2, (rows, cols))
    packed = gf._rref_gf2(m.copy())
    generic = gf._rref_generic(m.copy(), 2)
    assert np.array_equal(packed[0], generic[0]) and packed[1] == generic[1]


@settings(max_examples=60, deadline=None)
@given(PRIMES, st.integers(1, 12), st.lists(st.integers(0, 6), min_size=1, max_size=5), st.integers(0, 10_000))
def test_accumulator_equals_batch_rref(p, cols, batch_sizes, seed):
    rng = np.random.default_rng(seed)
    acc = gf.SpanAccumulator(cols, p)
    seen = []
    for size in batch_sizes:
        batch = rng.integers(0, p, (size, cols)) * (rng.random((size, 1)) < 0.7)
        acc.add(batch)
        seen.append(batch)
        stacked = np.concatenate(seen)
        assert np.array_equal(acc.basis, gf.row_basis(stacked, p, cols))
        assert acc.pivots == gf.rref(stacked, p)[2] if stacked.size else acc.pivots == []


def test_matmul_large_entries_stay_exact():
    p = 7
    a = np.full((3, 5000), 6)
    b = np.full((5000, 2), 6)
    assert np.array_equal(gf.matmul(a, b, p), np.full((3, 2), (36 * 5000) % 7))
