import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import abs_sine_coeff, farima_autocov
from toeptrace.errors import NonIntegrableProduct
from toeptrace.quadrature import QuadratureSpec
from toeptrace.spectral import (FourierTable, fourier_coeff, fourier_table, limit_integral,
                                phi, phi_holder_estimate)
from toeptrace.symbol import (AbsSine, Constant, Farima, PowerLaw, TrigPolynomial,
                              cos_symbol)

PI = math.pi


def test_coeff_examples():
    assert fourier_coeff(Constant(1), 0) == pytest.approx(2 * PI)
    assert fourier_coeff(Constant(1), 3) == 0.0
    assert fourier_coeff(cos_symbol(), 1) == pytest.approx(PI)
    assert fourier_coeff(PowerLaw(0.25), 0) == pytest.approx(8 / 3 * PI ** 0.75, rel=1e-12)


def test_farima_coeff_against_autocovariance():
    v, err = fourier_coeff(Farima(1, 0.3), 5, full_output=True)
    assert v == pytest.approx(farima_autocov(1, 0.3, 5), rel=1e-10)
    assert err <= 1e-9


def test_powerlaw_table_against_mpmath():
    t = fourier_table(PowerLaw(0.25), 6)
    for k in range(6):
        if k == 0:
            ref = 8 / 3 * PI ** 0.75
        else:
            ref = 2 * mp.quad(lambda x: mp.cos(k * x) * x ** -0.25,
                              mp.linspace(0, mp.pi, k + 2))
        assert t[k] == pytest.approx(float(ref), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("n", [64, 1024])
def test_farima_table_against_autocovariance(n):
    t = fourier_table(Farima(1, 0.2), n)
    ks = [0, 1, 7, n // 3, n - 1]
    for k in ks:
        assert t[k] == pytest.approx(farima_autocov(1, 0.2, k), rel=1e-9, abs=1e-12)


def test_abs_sine_table_closed_form():
    t = fourier_table(AbsSine(), 257)
    ref = np.array([abs_sine_coeff(k) for k in range(257)])
    np.testing.assert_allclose(t.coeffs, ref, atol=1e-11)


def test_table_examples_and_accessor():
    np.testing.assert_allclose(fourier_table(Constant(2.0), 4).coeffs, [4 * PI, 0, 0, 0])
    t = fourier_table(cos_symbol(), 3)
    np.testing.assert_allclose(t.coeffs, [0, PI, 0], atol=1e-15)
    assert t[-1] == t[1]
    with pytest.raises(IndexError):
        t[3]
    with pytest.raises(ValueError):
        t.coeffs[0] = 1.0
    assert t.truncate(2).n == 2


def test_table_rejects_bad_shape():
    with pytest.raises(ValueError):
        FourierTable("x", 3, np.zeros(2))


def test_table_bounded_by_h0():
    for s in (PowerLaw(0.2), Farima(1, 0.2), AbsSine()):
        t = fourier_table(s, 128)
        assert np.all(np.abs(t.coeffs) <= t.coeffs[0] * (1 + 1e-12))


def test_farima_long_memory_decay():
    a = 0.2
    t = fourier_table(Farima(1, a), 513)
    k = np.arange(16, 513)
    r = t.coeffs[16:] * k ** (1 - a)
    assert r.max() / r.min() < 1.2


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5),
       st.lists(st.floats(-2, 2), min_size=1, max_size=5))
def test_parseval(a, b):
    f, g = TrigPolynomial(tuple(a)), TrigPolynomial(tuple(b))
    n = max(len(a), len(b))
    tf, tg = fourier_table(f, n), fourier_table(g, n)
    lhs = tf.coeffs[0] * tg.coeffs[0] + 2 * np.dot(tf.coeffs[1:], tg.coeffs[1:])
    rhs = 2 * PI * limit_integral(f, g, 1) / (2 * PI)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-9)


def test_limit_integral_examples():
    assert limit_integral(Constant(1), Constant(1), 2) == pytest.approx(16 * PI**4, rel=1e-14)
    c = cos_symbol()
    assert limit_integral(c, c, 2) == pytest.approx(6 * PI**4, rel=1e-13)
    p = PowerLaw(0.2)
    assert limit_integral(p, p, 2) == pytest.approx((2 * PI) ** 3 * 2 * PI**0.2 / 0.2,
                                                    rel=1e-12)
    with pytest.raises(NonIntegrableProduct):
        limit_integral(PowerLaw(0.3), PowerLaw(0.3), 2)


def test_limit_integral_nu1_direct():
    f, g = Farima(1, 0.2), AbsSine()
    ref = 2 * PI * 2 * mp.quad(lambda x: f(float(x)) * g(float(x)), [0, 1e-8, 1e-3, 1, mp.pi])
    assert limit_integral(f, g, 1) == pytest.approx(float(ref), rel=1e-8)


def test_refinement_within_err_est():
    coarse = QuadratureSpec(abs_tol=1e-8)
    fine = QuadratureSpec(abs_tol=1e-12)
    for s in (PowerLaw(0.2), Farima(1, 0.3)):
        v1, e1 = fourier_coeff(s, 3, coarse, full_output=True)
        v2, _ = fourier_coeff(s, 3, fine, full_output=True)
        assert abs(v1 - v2) <= max(e1, 1e-13)


def test_phi_examples():
    one, c = Constant(1), cos_symbol()
    assert phi(one, one, 0.3, -1.0, 2.0) == pytest.approx(2 * PI)
    assert phi(c, c, 0, 0, 0) == pytest.approx(3 * PI / 4, rel=1e-13)
    assert phi(c, c, PI, 0, 0) == pytest.approx(-3 * PI / 4, rel=1e-13)


def test_phi_singular_against_mpmath():
    f = PowerLaw(0.1)
    u = (0.4, -1.1, 2.0)
    val = phi(f, f, *u)

    def red(x):
        x = x % (2 * mp.pi)
        return x - 2 * mp.pi if x > mp.pi else x

    def integrand(l):
        return abs(l) ** -0.1 * abs(red(l - u[0])) ** -0.1 * abs(red(l - u[1])) ** -0.1 \
            * abs(red(l - u[2])) ** -0.1

    pts = sorted({-PI, PI, 0.0, *[float(red(mp.mpf(x))) for x in u],
                  *[float(red(mp.mpf(x) + mp.pi)) for x in u]})
    ref = mp.quad(integrand, pts)
    assert val == pytest.approx(float(ref), rel=1e-9)


def test_phi_at_zero_is_square_integral():
    f = Farima(1, 0.1)
    assert phi(f, f, 0, 0, 0) == pytest.approx(limit_integral(f, f, 2) / (2 * PI) ** 3,
                                                 rel=1e-10)


def test_holder_estimates():
    radii = [0.2, 0.1, 0.05, 0.025]
    h = phi_holder_estimate(Constant(1), Constant(1), radii)
    assert h.gamma == math.inf
    c = cos_symbol()
    assert abs(phi_holder_estimate(c, c, radii).gamma - 1) <= 0.1
    p = PowerLaw(0.1)
    assert phi_holder_estimate(p, p, radii).gamma >= 0.3
    with pytest.raises(ValueError):
        phi_holder_estimate(c, c, [0.1, 0.2])
