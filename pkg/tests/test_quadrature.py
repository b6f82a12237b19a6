import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from toeptrace.errors import NonIntegrableProduct, QuadratureNoConverge
from toeptrace.quadrature import (QuadratureSpec, gauss_legendre, integrate_periodic,
                                  integrate_segment, merge_points, one_sided_rule,
                                  periodic_rule, refine, shifted_arguments)

Q = QuadratureSpec()


def test_spec_validation():
    for kw in ({"panels_per_unit": 0}, {"grading_exponent": 0.5}, {"abs_tol": 0},
               {"max_refinements": 0}, {"order": 1}):
        with pytest.raises(ValueError):
            QuadratureSpec(**kw)


def test_level_ladder():
    lv = Q.level(2)
    assert lv.panels_per_unit == 16 and lv.levels == Q.levels + 12


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(8)
    for p in range(16):
        assert np.dot(w, x**p) == pytest.approx(1.0 / (p + 1), rel=1e-14)


@given(st.floats(0.0, 0.95), st.floats(0.1, 5.0))
def test_one_sided_power(e, width):
    x, w = one_sided_rule(width, e, Q)
    assert np.all(x > 0) and np.all(x <= width * (1 + 1e-15))
    exact = width ** (1 - e) / (1 - e)
    assert np.dot(w, x**-e) == pytest.approx(exact, rel=1e-11)


def test_refine_raises_with_estimate():
    calls = iter(range(100))
    with pytest.raises(QuadratureNoConverge) as exc:
        refine(lambda lv: float(next(calls)), QuadratureSpec(max_refinements=2))
    assert exc.value.err_est == 1.0


def test_merge_points_combines_exponents():
    pts = merge_points([(0.0, 0.2), (2 * math.pi, 0.3), (math.pi, 0.0)])
    assert pts == [(-math.pi, 0.0), (0.0, pytest.approx(0.5))]
    with pytest.raises(NonIntegrableProduct):
        periodic_rule([(0.0, 0.6), (2 * math.pi, 0.5)], Q)


def test_periodic_rule_measures_circle():
    a, o, w = periodic_rule([(0.3, 0.4), (-2.0, 0.1)], Q)
    assert w.sum() == pytest.approx(2 * math.pi, rel=1e-13)


def test_shifted_arguments_exact_at_anchor():
    a, o, w = periodic_rule([(1.0, 0.3)], Q)
    args = shifted_arguments(a, o, 1.0)
    sel = a == 1.0
    assert np.array_equal(args[sel], o[sel])


def test_integrate_periodic_two_singularities():
    # int |l|^-a |l - u|^-b over the circle; arguments are reduced mod 2 pi
    import mpmath as mp

    a, b, u = 0.3, 0.4, 1.2
    def f(x, y):
        return np.abs(x) ** -a * np.abs(y) ** -b
    val, err = integrate_periodic(f, (0.0, u), (a, b), Q)
    def periodic_dist(l):
        d = l - u
        return d + 2 * mp.pi if d < -mp.pi else d

    ref = mp.quad(lambda l: abs(l) ** -a * abs(periodic_dist(l)) ** -b,
                  [-mp.pi, u - mp.pi, 0, u, mp.pi])
    assert val == pytest.approx(float(ref), rel=1e-9)


def test_integrate_segment_beta():
    from scipy.special import beta

    a, b = 0.3, 0.6
    val = integrate_segment(lambda l, r: l**-a * r**-b, 1.0, a, b, Q)
    assert val == pytest.approx(beta(1 - a, 1 - b), rel=1e-11)
