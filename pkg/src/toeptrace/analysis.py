"""Numerical checks of the supporting lemmas and of the divergence example.

Everything here is a measurement: functions return numbers or small report
objects and leave pass/fail decisions to the caller (``harness.verify_all``
and the test-suite).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import beta as beta_fn

from .errors import NonIntegrablePower, RegimeViolation
from .quadrature import (QuadratureSpec, integrate_periodic, integrate_segment,
                         one_sided_rule, refine)
from .symbol import Symbol

TWO_PI = 2.0 * math.pi
DEFAULT_QUADRATURE = QuadratureSpec()
# nested three-dimensional rule: coarse base, refined by the usual ladder
LEMMA3_QUADRATURE = QuadratureSpec(panels_per_unit=1, order=6, levels=8,
                                   abs_tol=1e-3, max_refinements=2)


# ---------------------------------------------------------------- Dirichlet

def dirichlet(n: int, u):
    """``D_n(u) = sin(n u / 2) / sin(u / 2)`` with the removable points filled.

    ``u`` is reduced to ``r = u - 2 pi k`` with ``|r| <= pi`` first; the
    value is then ``(-1)^{k (n-1)} sin(n r/2) / sin(r/2)``, and exactly
    ``(-1)^{k (n-1)} n`` at ``r = 0``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    u = np.asarray(u, dtype=float)
    k = np.round(u / TWO_PI)
    r = u - TWO_PI * k
    sign = np.where((k * (n - 1)) % 2 == 0, 1.0, -1.0)
    zero = r == 0.0
    safe = np.where(zero, 1.0, r)
    val = np.where(zero, float(n), np.sin(n * safe / 2.0) / np.sin(safe / 2.0))
    out = sign * val
    return float(out) if out.ndim == 0 else out


def dirichlet_samples(samples: int, seed: int = 0) -> np.ndarray:
    """Sample points on the circle minus 0: uniform draws plus log-spaced
    points clustered at 0 and at +-pi, where the bound is tightest."""
    rng = np.random.default_rng(seed)
    m = min(samples // 4, 2000)
    near0 = np.logspace(-12, math.log10(math.pi), m // 2)
    nearpi = math.pi - np.logspace(-12, 0, m - m // 2)
    u = rng.uniform(-math.pi, math.pi, samples - 2 * m)
    u = np.concatenate([u, near0, -near0, nearpi, -nearpi])
    return u[u != 0.0]


def check_dirichlet_bound(n: int, delta: float, samples: int = 100_000,
                          seed: int = 0, constant: float = math.pi) -> float:
    """Worst ratio ``|D_n(u)| / (constant n^delta |u|^(delta-1))`` over samples."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    u = dirichlet_samples(samples, seed)
    bound = constant * float(n) ** delta * np.abs(u) ** (delta - 1.0)
    return float(np.max(np.abs(dirichlet(n, u)) / bound))


# ------------------------------------------------------------------ Lemma 2

@dataclass
class Lemma2Result:
    alpha: float
    beta: float
    y: float
    value: float
    err_est: float
    scaled: float  # value * |y|^(alpha + beta - 1)


@dataclass
class Lemma2Scaling:
    alpha: float
    beta: float
    ys: np.ndarray
    values: np.ndarray
    scaled: np.ndarray
    spread: float  # (max - min) / mean of ``scaled``


def _check_lemma2(alpha, beta):
    if not (0 < alpha < 1 and 0 < beta < 1 and alpha + beta > 1):
        raise ValueError("need 0 < alpha, beta < 1 and alpha + beta > 1")


def lemma2_closed_form(alpha: float, beta: float) -> float:
    """Reference constant via Beta functions (used only for reporting)."""
    _check_lemma2(alpha, beta)
    c = alpha + beta - 1.0
    return float(beta_fn(1 - alpha, c) + beta_fn(c, 1 - beta) + beta_fn(1 - alpha, 1 - beta))


def lemma2_identity(alpha: float, beta: float, y: float,
                    q: QuadratureSpec = DEFAULT_QUADRATURE) -> Lemma2Result:
    """``int_R |x|^-alpha |x + y|^-beta dx`` by graded quadrature.

    Pieces, with ``s = |y|`` (the value is even in ``y``):
    ``[-s, 0]`` graded at both singular ends, ``[0, s]`` and ``[-2s, -s]``
    graded at their singular end, and the two tails ``x > s`` and
    ``x < -2s`` mapped onto ``(0, 1]`` by ``x = s/t`` and ``x = -s - s/t``.
    The maps are exact, so no tail is truncated.
    """
    _check_lemma2(alpha, beta)
    if y == 0 or not math.isfinite(y):
        raise ValueError("y must be finite and nonzero")
    a, b, s = float(alpha), float(beta), abs(float(y))

    def compute(level):
        mid = integrate_segment(lambda dl, dr: dr**-a * dl**-b, s, b, a, level)
        x, w = one_sided_rule(s, a, level)
        right = np.dot(w, x**-a * (s + x) ** -b)
        x, w = one_sided_rule(s, b, level)
        left = np.dot(w, x**-b * (s + x) ** -a)
        t, w = one_sided_rule(1.0, 2.0 - a - b, level)
        tails = s ** (1.0 - a - b) * np.dot(
            w, t ** (a + b - 2.0) * ((1.0 + t) ** -b + (1.0 + t) ** -a))
        return mid + right + left + tails

    val, err = refine(compute, q, "lemma2_identity")
    return Lemma2Result(a, b, float(y), val, err, val * s ** (a + b - 1.0))


def lemma2_scaling(alpha: float, beta: float, ys: Sequence[float],
                   q: QuadratureSpec = DEFAULT_QUADRATURE) -> Lemma2Scaling:
    res = [lemma2_identity(alpha, beta, y, q) for y in ys]
    scaled = np.array([r.scaled for r in res])
    spread = float((scaled.max() - scaled.min()) / abs(scaled.mean()))
    return Lemma2Scaling(alpha, beta, np.asarray(ys, dtype=float),
                         np.array([r.value for r in res]), scaled, spread)


# ------------------------------------------------------------------ Lemma 3

def _two_point_rule(c: np.ndarray, emax: float, spec: QuadratureSpec):
    """Nodes on ``[-pi, pi]`` graded at 0 and at ``c`` (one row per ``c``).

    Returns signed ``x0 = t``, ``xc = t - c`` and weights, all of shape
    ``(len(c), K)``.  Both differences are formed as ``(anchor - point) +
    offset`` so distances to a singular anchor are exact.  When ``c`` lies
    outside the interval it is clipped for meshing only.
    """
    panels = max(1, int(math.ceil(math.pi * spec.panels_per_unit)))
    r, rw = one_sided_rule(0.5, emax, spec, min_panels=panels, graded=True)
    c = np.asarray(c, dtype=float)[:, None]
    p = np.clip(c, -math.pi, math.pi)
    lo, hi = np.minimum(0.0, p), np.maximum(0.0, p)
    x0s, xcs, ws = [], [], []
    for a, b in ((-math.pi, lo), (lo, hi), (hi, math.pi)):
        length = b - a
        for anchor, sgn in ((a, 1.0), (b, -1.0)):
            anchor = np.broadcast_to(anchor, c.shape)
            d = sgn * length * r
            x0s.append(anchor + d)
            xcs.append((anchor - c) + d)
            ws.append(np.broadcast_to(length * rw, d.shape))
    return np.hstack(x0s), np.hstack(xcs), np.hstack(ws)


def _abs_pow(x: np.ndarray, e: float, w: np.ndarray) -> np.ndarray:
    # zero-length segments put nodes on a singular point with zero weight
    return np.where(w > 0, np.abs(np.where(w > 0, x, 1.0)) ** -e, 0.0)


def _lemma3_value(exps, beta: float, spec: QuadratureSpec) -> float:
    e1, e2, e3 = exps
    # growth exponents of the inner integrals at their merged singularity
    g_in = max(0.0, e3 + beta - 1.0)
    g_mid = max(0.0, e2 + g_in - 1.0)
    emax_in = max(e3, beta, 0.0)
    emax_mid = max(e2, g_in, 0.0)
    u1, w1 = one_sided_rule(math.pi, max(e1 + g_mid, 0.0), spec,
                            min_panels=int(math.ceil(math.pi * spec.panels_per_unit)),
                            graded=True)
    total = 0.0
    for u, wu in zip(u1, w1):
        x0, xc, w = _two_point_rule(np.array([-u]), emax_mid, spec)
        s = xc[0]  # u1 + u2
        y0, yc, v = _two_point_rule(-s, emax_in, spec)
        inner = np.sum(v * _abs_pow(y0, e3, v) * _abs_pow(yc, beta, v), axis=1)
        mid = np.dot(w[0] * _abs_pow(x0[0], e2, w[0]), inner)
        total += wu * abs(u) ** -e1 * mid
    return 2.0 * total  # u -> -u symmetry


def _lemma3_exponents(alpha, beta, i):
    if i not in (1, 2, 3):
        raise ValueError("i must be 1, 2 or 3")
    if not (0 < alpha <= 1 and 2.0 / 3.0 < beta < (alpha + 3.0) / 4.0):
        raise ValueError("need 0 < alpha <= 1 and 2/3 < beta < (alpha + 3)/4")
    return tuple(beta - alpha if j == i else beta for j in (1, 2, 3))


def lemma3_Bi(alpha: float, beta: float, i: int, refinement: int = 2,
              q: QuadratureSpec = LEMMA3_QUADRATURE) -> float:
    """``int_{T^3} |u_i|^alpha / |u1 u2 u3 (u1+u2+u3)|^beta du``.

    Iterated graded quadrature: ``u3`` innermost (singular at 0 and at
    ``-(u1+u2)``), then ``u2`` (singular at 0 and ``-u1``), then ``u1`` on
    ``(0, pi]`` doubled by the ``u -> -u`` symmetry.  ``refinement`` picks
    the level of the refinement ladder of ``q``.
    """
    exps = _lemma3_exponents(alpha, beta, i)
    return _lemma3_value(exps, beta, q.level(refinement))


@dataclass
class Lemma3Stability:
    alpha: float
    beta: float
    i: int
    values: np.ndarray  # one per refinement level 0..levels
    rel_change: float  # between the last two levels


def lemma3_stability(alpha: float, beta: float, i: int, levels: int = 2,
                     q: QuadratureSpec = LEMMA3_QUADRATURE) -> Lemma3Stability:
    exps = _lemma3_exponents(alpha, beta, i)
    vals = np.array([_lemma3_value(exps, beta, q.level(r)) for r in range(levels + 1)])
    rel = float(abs(vals[-1] - vals[-2]) / abs(vals[-1]))
    return Lemma3Stability(alpha, beta, i, vals, rel)


# ----------------------------------------------------- moduli of continuity

MODULUS_QUADRATURE = QuadratureSpec(abs_tol=1e-12)


def _lp_difference(s: Symbol, p: float, h: float, q: QuadratureSpec) -> float:
    """``|| s(. + h) - s(.) ||_p`` over one period."""
    if math.isinf(p):
        lam = np.linspace(-math.pi, math.pi, 1 << 14, endpoint=False)
        lam = np.concatenate([lam, [0.0, -h, -h / 2, math.pi - h, math.pi - h / 2]])
        if s.singularity_alpha > 0:
            keep = (np.abs(lam) > 1e-8) & (np.abs(lam + h) > 1e-8)
            lam = lam[keep]
        return float(np.max(np.abs(s(lam + h) - s(lam))))
    a = s.singularity_alpha * p

    def integrand(x, xh):
        return np.abs(s(xh) - s(x)) ** p

    val, _ = integrate_periodic(integrand, (0.0, -h), (a, a), q,
                                extra_points=(-h / 2, math.pi - h / 2),
                                what="modulus_continuity")
    return max(val, 0.0) ** (1.0 / p)


def _check_power(s: Symbol, p: float):
    if not p >= 1:
        raise ValueError("p must lie in [1, inf]")
    if s.singularity_alpha > 0 and s.singularity_alpha * p >= 1:
        raise NonIntegrablePower(
            f"alpha * p = {s.singularity_alpha * p:.6g} >= 1: "
            f"{s.symbol_id} is not in L^{p}")


def h_grid(delta: float, grid_size: int) -> np.ndarray:
    """Geometric grid ``delta * 2^(-j/4)``, ``j = 0..grid_size-1``."""
    return delta * 2.0 ** (-np.arange(grid_size) / 4.0)


def modulus_continuity(s: Symbol, p: float, delta: float, grid_size: int = 32,
                       q: QuadratureSpec = MODULUS_QUADRATURE) -> float:
    """Lower bound for ``sup_{0 < h <= delta} || s(. + h) - s(.) ||_p``.

    The sup runs over the geometric grid :func:`h_grid`; ``p = inf`` uses a
    dense lambda grid instead of quadrature.
    """
    _check_power(s, p)
    if not delta > 0:
        raise ValueError("delta must be positive")
    return max(_lp_difference(s, p, h, q) for h in h_grid(delta, grid_size))


@dataclass
class ModulusCurve:
    symbol_id: str
    p: float
    deltas: np.ndarray
    omegas: np.ndarray
    fitted_gamma: float
    fitted_C: float
    refinement_delta: float = 0.0  # change of omega(max delta) with a doubled grid

    def is_monotone(self) -> bool:
        # deltas decrease, so omegas must not increase
        return bool(np.all(np.diff(self.omegas) <= 0))


def lipschitz_fit(s: Symbol, p: float, deltas: Sequence[float], grid_size: int = 32,
                  q: QuadratureSpec = MODULUS_QUADRATURE,
                  noise_floor: float = 1e-13) -> ModulusCurve:
    """Fit ``log omega_p`` against ``log delta``.

    The h-grids of all deltas are pooled and ``omega(delta)`` is the max
    over pooled points ``h <= delta``, which makes the curve monotone by
    construction.  Identically zero curves give ``fitted_gamma = inf``.
    """
    _check_power(s, p)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or deltas.size < 4:
        raise ValueError("need at least four deltas")
    if np.any(deltas <= 0) or np.any(np.diff(deltas) >= 0):
        raise ValueError("deltas must be positive and strictly decreasing")
    hs = np.unique(np.concatenate([h_grid(d, grid_size) for d in deltas]))
    norms = np.array([_lp_difference(s, p, h, q) for h in hs])
    run = np.maximum.accumulate(norms)
    omegas = np.array([run[np.searchsorted(hs, d, side="right") - 1] for d in deltas])
    fine = h_grid(deltas[0], 2 * grid_size)
    fine_max = max(_lp_difference(s, p, h, q) for h in fine[fine < hs[-1]]) \
        if np.any(fine < hs[-1]) else 0.0
    refinement = max(0.0, max(fine_max, omegas[0]) - omegas[0])
    keep = omegas > noise_floor
    if keep.sum() < 2:
        return ModulusCurve(s.symbol_id, p, deltas, omegas, math.inf, 0.0, refinement)
    slope = float(np.polyfit(np.log(deltas[keep]), np.log(omegas[keep]), 1)[0])
    C = float(np.max(omegas[keep] / deltas[keep] ** slope))
    return ModulusCurve(s.symbol_id, p, deltas, omegas, slope, C, refinement)


# --------------------------------------------------- inequality for (xy-1)

@dataclass
class LpInequalityResult:
    gamma: float
    theta: float
    y0: float
    ys: np.ndarray
    lhs: np.ndarray
    ratios: np.ndarray  # lhs / (y - 1)^(1 - gamma - theta)
    min_ratio: float
    small_branch_constant: float  # 3^-theta / (1 - gamma), for 1 < y <= 2
    J: float  # left side at y = y0
    small_branch_ok: bool
    large_branch_ok: bool


def _lp_lhs(gamma, theta, y, q):
    ym1 = y - 1.0

    def compute(level):
        o, w = one_sided_rule(1.0, gamma, level, graded=True)
        return np.dot(w, (ym1 + y * o) ** -theta * o**-gamma)

    return refine(compute, q, f"lp_inequality(y={y:.6g})")[0]


def lp_inequality_check(gamma: float, theta: float, y0: float, y_grid: Sequence[float],
                        q: QuadratureSpec = DEFAULT_QUADRATURE,
                        rel_tol: float = 1e-9) -> LpInequalityResult:
    """Left side ``int_1^2 (xy-1)^-theta (x-1)^-gamma dx`` against
    ``(y-1)^(1-gamma-theta)`` over a grid of ``y`` in ``(1, y0)``.

    Branch checks: for ``y <= 2`` the ratio must reach the explicit constant
    ``3^-theta / (1-gamma)``, for ``y > 2`` it must reach ``J / y0``.
    """
    if not (0 < gamma < 1 and 0 < theta < 1):
        raise ValueError("need 0 < gamma, theta < 1")
    if not y0 > 2:
        raise ValueError("y0 must exceed 2")
    ys = np.asarray(y_grid, dtype=float)
    if ys.size == 0 or np.any(ys <= 1) or np.any(ys >= y0):
        raise ValueError("grid points must lie in (1, y0)")
    lhs = np.array([_lp_lhs(gamma, theta, y, q) for y in ys])
    ratios = lhs / (ys - 1.0) ** (1.0 - gamma - theta)
    c_small = 3.0 ** -theta / (1.0 - gamma)
    J = _lp_lhs(gamma, theta, y0, q)
    slack = 1.0 - rel_tol
    small = ys <= 2
    return LpInequalityResult(
        gamma, theta, float(y0), ys, lhs, ratios, float(ratios.min()), c_small, J,
        bool(np.all(ratios[small] >= slack * c_small)),
        bool(np.all(ratios[~small] >= slack * J / y0)),
    )


# --------------------------------------------------------------- divergence

@dataclass
class DivergenceReport:
    nu: int
    eta: float
    alpha_plus_beta: float
    truncations: np.ndarray
    partial_integrals: np.ndarray
    fitted_blowup_exponent: float
    analytic_exponent: float  # 2 nu eta - 1
    epsilon: float  # 2 nu eta - nu (alpha + beta)
    naive_loglog_slope: float
    strictly_increasing: bool
    region_check: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu, "eta": self.eta, "alpha_plus_beta": self.alpha_plus_beta,
            "truncations": self.truncations.tolist(),
            "partial_integrals": self.partial_integrals.tolist(),
            "fitted_blowup_exponent": self.fitted_blowup_exponent,
            "analytic_exponent": self.analytic_exponent,
            "epsilon": self.epsilon,
            "naive_loglog_slope": self.naive_loglog_slope,
            "strictly_increasing": self.strictly_increasing,
            "region_check": dict(self.region_check),
        }


def check_divergence_regime(nu: int, eta: float, alpha_plus_beta: float):
    if int(nu) != nu or nu < 1:
        raise RegimeViolation("nu must be a positive integer")
    ab = float(alpha_plus_beta)
    if not 0 < nu * ab < 1:
        raise RegimeViolation(f"nu (alpha + beta) = {nu * ab:.6g} must lie in (0, 1)")
    if not ab / 2 < eta:
        raise RegimeViolation(f"eta = {eta:.6g} must exceed (alpha + beta)/2 = {ab / 2:.6g}")
    if not eta < 1.0 / (2 * nu):
        raise RegimeViolation(f"eta = {eta:.6g} must be below 1/(2 nu) = {1 / (2 * nu):.6g}")


def partial_integral(p: float, s: float, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """``int_{1+s}^2 (z-1)^p dz`` on a mesh graded toward ``z = 1 + s``."""

    def compute(level):
        o, w = one_sided_rule(1.0 - s, 0.0, level, graded=True)
        return np.dot(w, (s + o) ** p)

    return refine(compute, q, f"partial_integral(s={s:.3g})")[0]


def fit_blowup(truncations: np.ndarray, values: np.ndarray) -> float:
    """Exponent ``e`` of the model ``I(s) = A s^e + B``.

    ``A`` and ``B`` come from linear least squares for each trial ``e``;
    ``e`` minimises the relative residual over ``(-1, 0)``.
    """
    ls = np.log(truncations)

    def resid(e):
        X = np.column_stack([np.exp(e * ls), np.ones_like(ls)])
        coef, *_ = np.linalg.lstsq(X, values, rcond=None)
        r = (X @ coef - values) / values
        return float(r @ r)

    res = minimize_scalar(resid, bounds=(-1.0 + 1e-9, -1e-9), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def region_containment(nu: int, t: float = 1.0, samples: int = 20_000,
                       seed: int = 0) -> Dict[str, float]:
    """Monte-Carlo membership of two boxes in the region ``A_t``.

    ``A_t``: all partial products ``|z_1 ... z_k| <= t`` and the chain
    ``|P_1| > |P_2|/2 > ... > |P_2nu|/2^(2nu-1) > |z_1|/2^(2nu)``.
    Box ``0 < z_1 < t/2^nu`` is the one used in the lower-bound argument;
    box ``0 < z_1 < t/2^(2nu-1)`` always fits.  Other coordinates in (1, 2).
    """
    rng = np.random.default_rng(seed)
    m = 2 * nu

    def fraction(z1max):
        z = rng.uniform(1.0, 2.0, (samples, m))
        z[:, 0] = rng.uniform(0.0, z1max, samples)
        P = np.abs(np.cumprod(z, axis=1))
        ok = np.all(P <= t, axis=1)
        scaled = P / 2.0 ** np.arange(m)
        ok &= np.all(scaled[:, :-1] > scaled[:, 1:], axis=1)
        ok &= scaled[:, -1] > P[:, 0] / 2.0**m
        return float(ok.mean())

    return {
        "t": float(t),
        "samples": float(samples),
        "box_t_over_2_nu": fraction(t / 2.0**nu),
        "box_t_over_2_2nu_minus_1": fraction(t / 2.0 ** (m - 1)),
    }


def divergence_demo(nu: int, eta: float, alpha_plus_beta: float,
                    truncations: Sequence[float],
                    q: QuadratureSpec = DEFAULT_QUADRATURE,
                    mc_samples: int = 20_000, seed: int = 0) -> DivergenceReport:
    """Partial integrals ``int_{1+s}^2 (z-1)^(2 nu eta - 2) dz`` as ``s -> 0``.

    The lower-bound chain reduces divergence of the ``2 nu``-fold integral
    to this one-dimensional integral, which grows like ``s^(2 nu eta - 1)``.
    """
    check_divergence_regime(nu, eta, alpha_plus_beta)
    s = np.asarray(truncations, dtype=float)
    if s.ndim != 1 or s.size < 3:
        raise ValueError("need at least three truncations")
    if np.any(s <= 0) or np.any(s >= 1) or np.any(np.diff(s) >= 0):
        raise ValueError("truncations must be strictly decreasing in (0, 1)")
    p = 2 * nu * eta - 2.0
    vals = np.array([partial_integral(p, si, q) for si in s])
    naive = float(np.polyfit(np.log(s), np.log(vals), 1)[0])
    return DivergenceReport(
        int(nu), float(eta), float(alpha_plus_beta), s, vals,
        fit_blowup(s, vals), p + 1.0, 2 * nu * eta - nu * alpha_plus_beta, naive,
        bool(np.all(np.diff(vals) > 0)),
        region_containment(int(nu), 1.0, mc_samples, seed),
    )
