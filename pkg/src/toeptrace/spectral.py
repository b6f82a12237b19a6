"""Fourier coefficients, limit integrals and the shifted product integral phi.

Coefficients follow the un-normalised convention

    h(k) = int_{-pi}^{pi} e^{i k lam} u(lam) dlam,

so ``T_n(1) = 2 pi I``.  For even symbols this is ``2 int_0^pi cos(k lam) u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import NonIntegrableProduct
from .quadrature import QuadratureSpec, integrate_periodic, one_sided_rule, refine
from .symbol import Symbol

TWO_PI = 2.0 * math.pi
DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class FourierTable:
    """Coefficients ``h(0..n-1)`` of one symbol.  ``h(-k) == h(k)``."""

    symbol_id: str
    n: int
    coeffs: np.ndarray = field(repr=False)
    err_est: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size != self.n or self.n < 1:
            raise ValueError(f"expected {self.n} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, k: int) -> float:
        k = abs(int(k))
        if k >= self.n:
            raise IndexError(f"lag {k} outside table of size {self.n}")
        return float(self.coeffs[k])

    def truncate(self, n: int) -> "FourierTable":
        if not 1 <= n <= self.n:
            raise ValueError(f"cannot truncate a table of size {self.n} to {n}")
        return FourierTable(self.symbol_id, n, self.coeffs[:n], self.err_est)


def _min_panels(kmax: int, level: QuadratureSpec, base: QuadratureSpec) -> int:
    # panel width <= pi/(4k); the cap refines together with panels_per_unit
    return 4 * max(kmax, 1) * (level.panels_per_unit // base.panels_per_unit)


def fourier_coeff(s: Symbol, k: int, q: QuadratureSpec = DEFAULT_QUADRATURE,
                  full_output: bool = False):
    """Single coefficient ``h(k)`` by graded Gauss-Legendre quadrature.

    With ``full_output`` returns ``(value, err_est)``.
    """
    k = abs(int(k))
    exact = s.exact_coefficients(np.array([k]))
    if exact is not None:
        val = float(exact[0])
        return (val, 0.0) if full_output else val

    def compute(level):
        x, w = one_sided_rule(math.pi, s.singularity_alpha, level, _min_panels(k, level, q))
        return 2.0 * np.dot(w * s(x), np.cos(k * x))

    val, err = refine(compute, q, f"fourier_coeff({s.symbol_id}, k={k})")
    return (val, err) if full_output else val


@lru_cache(maxsize=64)
def _table(s: Symbol, n: int, q: QuadratureSpec) -> FourierTable:
    k = np.arange(n)
    exact = s.exact_coefficients(k)
    if exact is not None:
        return FourierTable(s.symbol_id, n, exact, 0.0)

    def compute(level):
        x, w = one_sided_rule(math.pi, s.singularity_alpha, level,
                              _min_panels(n - 1, level, q))
        return 2.0 * kernels.cosine_moments(x, w * s(x), n)

    vals, err = refine(compute, q, f"fourier_table({s.symbol_id}, n={n})")
    return FourierTable(s.symbol_id, n, vals, err)


def fourier_table(s: Symbol, n: int, q: QuadratureSpec = DEFAULT_QUADRATURE) -> FourierTable:
    """Coefficients for lags ``0..n-1``.

    All lags share one mesh fine enough for the largest lag; the cosine
    sums go through the compiled kernel when available.  ``err_est`` is the
    largest change across the final refinement.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _table(s, int(n), q)


def limit_integral(f: Symbol, g: Symbol, nu: int, q: QuadratureSpec = DEFAULT_QUADRATURE,
                   full_output: bool = False):
    """``(2 pi)^(2 nu - 1) int_{-pi}^{pi} (f g)^nu dlam``."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    e = nu * (f.singularity_alpha + g.singularity_alpha)
    if e >= 1.0:
        raise NonIntegrableProduct(
            f"nu*(alpha_f + alpha_g) = {e:.6g} >= 1: (f g)^nu is not integrable"
        )

    def compute(level):
        x, w = one_sided_rule(math.pi, e, level)
        return 2.0 * np.dot(w, (f(x) * g(x)) ** nu)

    val, err = refine(compute, q, "limit_integral")
    scale = TWO_PI ** (2 * nu - 1)
    return (scale * val, scale * err) if full_output else scale * val


def phi(f: Symbol, g: Symbol, u1: float, u2: float, u3: float,
        q: QuadratureSpec = DEFAULT_QUADRATURE, full_output: bool = False):
    """``int f(l) g(l - u1) f(l - u2) g(l - u3) dl`` over one period."""
    af, ag = f.singularity_alpha, g.singularity_alpha

    def integrand(a0, a1, a2, a3):
        return f(a0) * g(a1) * f(a2) * g(a3)

    val, err = integrate_periodic(
        integrand, (0.0, u1, u2, u3), (af, ag, af, ag), q, what="phi"
    )
    return (val, err) if full_output else val


@dataclass
class HolderEstimate:
    gamma: float
    C: float
    raw_slope: float
    radii: np.ndarray
    diffs: np.ndarray


def phi_holder_estimate(f: Symbol, g: Symbol, radii: Sequence[float],
                        q: QuadratureSpec = DEFAULT_QUADRATURE, directions: int = 12,
                        seed: int = 0, noise_floor: Optional[float] = None) -> HolderEstimate:
    """Empirical exponent of ``|phi(u) - phi(0)| <= C |u|^gamma``.

    ``|u|`` is the l1 norm.  At each radius the difference is maximised over
    a fixed set of random directions; the log-log slope is clipped to 1,
    the top of the Hoelder range (even symbols make phi flat at 0, so smooth
    pairs show slope 2).  ``gamma`` is ``inf`` when every difference sits
    below ``noise_floor`` (default ``100 * abs_tol``).
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(radii <= 0):
        raise ValueError("need at least two positive radii")
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((directions, 3))
    dirs /= np.abs(dirs).sum(axis=1, keepdims=True)
    p0 = phi(f, g, 0.0, 0.0, 0.0, q)
    diffs = np.array([
        max(abs(phi(f, g, *(r * d), q) - p0) for d in dirs) for r in radii
    ])
    floor = 100 * q.abs_tol if noise_floor is None else noise_floor
    keep = diffs > floor
    if keep.sum() < 2:
        return HolderEstimate(math.inf, 0.0, math.inf, radii, diffs)
    slope = float(np.polyfit(np.log(radii[keep]), np.log(diffs[keep]), 1)[0])
    gamma = min(slope, 1.0)
    C = float(np.max(diffs[keep] / radii[keep] ** gamma))
    return HolderEstimate(gamma, C, slope, radii, diffs)
