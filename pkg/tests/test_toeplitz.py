import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from toeptrace.errors import DenseGuardExceeded, DimensionMismatch
from toeptrace.spectral import FourierTable, fourier_table
from toeptrace.symbol import CATALOG, Constant, Farima, cos_symbol
from toeptrace.toeplitz import (DENSE_GUARD, build_dense, embed_circulant, embedding_size,
                                matvec)

PI = math.pi


def table(coeffs):
    return FourierTable("t", len(coeffs), np.asarray(coeffs, dtype=float))


def test_dense_examples():
    np.testing.assert_array_equal(build_dense(table([2 * PI])).entries, [[2 * PI]])
    np.testing.assert_array_equal(build_dense(table([0, PI])).entries, [[0, PI], [PI, 0]])
    a, b, c = 1.0, 2.0, 3.0
    np.testing.assert_array_equal(build_dense(table([a, b, c])).entries,
                                  [[a, b, c], [b, a, b], [c, b, a]])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
def test_dense_structure_exact(coeffs):
    e = build_dense(table(coeffs)).entries
    assert np.array_equal(e, e.T)
    assert np.array_equal(e[:-1, :-1], e[1:, 1:])


def test_dense_guard():
    t = FourierTable("big", DENSE_GUARD + 1, np.zeros(DENSE_GUARD + 1))
    with pytest.raises(DenseGuardExceeded):
        build_dense(t)


def test_embedding_examples():
    op = embed_circulant(table([5.0]))
    assert op.m == 1
    np.testing.assert_allclose(op.column, [5.0])
    np.testing.assert_allclose(op.circ_spectrum, [5.0])
    op = embed_circulant(table([0.0, PI]))
    assert op.m == 4
    np.testing.assert_allclose(op.column, [0, PI, 0, PI])
    np.testing.assert_allclose(op.circ_spectrum, np.fft.fft(op.column).real, atol=1e-12)


@given(st.integers(1, 5000))
def test_embedding_size(n):
    m = embedding_size(n)
    assert m >= 2 * n - 1 and m & (m - 1) == 0 and m < 2 * (2 * n - 1)


def test_matvec_examples():
    op = embed_circulant(fourier_table(Constant(1), 3))
    np.testing.assert_allclose(matvec(op, [1.0, 0, 0]), [2 * PI, 0, 0], atol=1e-14)
    op = embed_circulant(fourier_table(cos_symbol(), 2))
    np.testing.assert_allclose(matvec(op, [1.0, 0]), [0, PI], atol=1e-14)
    with pytest.raises(DimensionMismatch):
        matvec(op, [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        op.matmat(np.zeros(2))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_matvec_matches_dense(name, rng):
    full = fourier_table(CATALOG[name], 64)
    for n in (1, 2, 3, 7, 16, 33, 64):
        t = full.truncate(n)
        dense = build_dense(t).entries
        op = embed_circulant(t)
        X = rng.normal(size=(n, 100))
        ref = dense @ X
        got = op.matmat(X)
        scale = np.abs(ref).max(axis=0)
        assert np.all(np.abs(got - ref).max(axis=0) <= 1e-12 * np.maximum(scale, 1e-300) + 1e-300
                      ) or np.allclose(got, ref, rtol=0, atol=1e-12 * np.abs(ref).max())


def test_farima_matvec_n64(rng):
    t = fourier_table(Farima(1, 0.2), 64)
    x = rng.normal(size=64)
    ref = build_dense(t).entries @ x
    got = matvec(embed_circulant(t), x)
    assert np.abs(got - ref).max() <= 1e-12 * np.abs(ref).max()


def test_rayleigh_quotients_within_symbol_range(rng):
    # nonnegative bounded symbol |sin|: spectrum of T_n inside [0, 2 pi]
    t = fourier_table(CATALOG["abs_sine"], 48)
    T = build_dense(t).entries
    X = rng.normal(size=(48, 200))
    rq = np.einsum("ij,ij->j", X, T @ X) / np.einsum("ij,ij->j", X, X)
    assert rq.min() >= -1e-12 and rq.max() <= 2 * PI + 1e-12
