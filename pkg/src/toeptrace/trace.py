"""Normalised traces ``S = tr[(T_n(f) T_n(g))^nu] / n`` and their errors.

Three engines compute ``S``:

``dense``
    explicit matrices, repeated products; exact up to rounding, ``n <= 8192``.
``matfree``
    circulant-embedded operators applied to the ``n`` basis vectors in
    blocks; exact (no sampling), ``O(nu n^2 log n)``.
``closed_nu1``
    ``nu = 1`` only: ``n h_f(0) h_g(0) + 2 sum_m (n - m) h_f(m) h_g(m)``.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .analysis import dirichlet
from .errors import DimensionMismatch, QuadratureNoConverge
from .quadrature import QuadratureSpec
from .spectral import DEFAULT_QUADRATURE, FourierTable, fourier_table, limit_integral
from .symbol import Symbol
from .toeplitz import ToeplitzOperator, build_dense, embed_circulant

ENGINES = ("dense", "matfree", "closed_nu1")


@dataclass
class TraceRecord:
    n: int
    nu: int
    s_n_nu: float
    m_nu: float
    delta: float
    engine: str
    elapsed: float
    status: str = "ok"

    def to_dict(self) -> dict:
        return asdict(self)


def _check_pair(a: int, b: int):
    if a != b:
        raise DimensionMismatch(f"tables/operators disagree on n: {a} vs {b}")


def trace_product_dense(f_table: FourierTable, g_table: FourierTable, nu: int) -> float:
    _check_pair(f_table.n, g_table.n)
    if nu < 1:
        raise ValueError("nu must be >= 1")
    n = f_table.n
    p = build_dense(f_table).entries @ build_dense(g_table).entries
    if nu == 1:
        return float(np.trace(p)) / n
    q = p
    for _ in range(nu - 2):
        q = q @ p
    # tr(Q P) without forming the product
    return float(np.sum(q * p.T)) / n


def trace_product_matfree(f_op: ToeplitzOperator, g_op: ToeplitzOperator, nu: int,
                          block: Optional[int] = None) -> float:
    """Exact trace from ``n`` basis probes, ``2 nu`` operator applications each.

    Diagonal entries are gathered into one array and summed pairwise, so the
    result does not depend on the block size.
    """
    _check_pair(f_op.n, g_op.n)
    if nu < 1:
        raise ValueError("nu must be >= 1")
    n = f_op.n
    if block is None:
        block = max(1, min(n, (1 << 21) // f_op.m))
    diag = np.empty(n)
    for j0 in range(0, n, block):
        cols = np.arange(j0, min(j0 + block, n))
        y = np.zeros((n, cols.size))
        y[cols, np.arange(cols.size)] = 1.0
        for _ in range(nu):
            y = f_op.matmat(g_op.matmat(y))
        diag[cols] = y[cols, np.arange(cols.size)]
    return float(np.sum(diag)) / n


def trace_nu1_closed(f_table: FourierTable, g_table: FourierTable) -> float:
    _check_pair(f_table.n, g_table.n)
    n = f_table.n
    prod = f_table.coeffs * g_table.coeffs
    weights = 2.0 * (n - np.arange(n, dtype=float))
    weights[0] = n
    return float(np.dot(weights, prod)) / n


def trace_with_engine(f_table: FourierTable, g_table: FourierTable, nu: int,
                      engine: str) -> float:
    if engine == "dense":
        return trace_product_dense(f_table, g_table, nu)
    if engine == "matfree":
        return trace_product_matfree(embed_circulant(f_table), embed_circulant(g_table), nu)
    if engine == "closed_nu1":
        if nu != 1:
            raise ValueError("engine closed_nu1 requires nu = 1")
        return trace_nu1_closed(f_table, g_table)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def record_from_tables(f_table: FourierTable, g_table: FourierTable, nu: int,
                       m_nu: float, engine: str) -> TraceRecord:
    t0 = time.perf_counter()
    s = trace_with_engine(f_table, g_table, nu, engine)
    return TraceRecord(f_table.n, nu, s, m_nu, abs(s - m_nu), engine,
                       time.perf_counter() - t0)


def delta(f: Symbol, g: Symbol, n: int, nu: int, engine: str = "dense",
          q: QuadratureSpec = DEFAULT_QUADRATURE) -> TraceRecord:
    """``|S_{n,nu} - M_nu|`` with ``S`` from the chosen engine."""
    t0 = time.perf_counter()
    ft = fourier_table(f, n, q)
    gt = ft if g == f else fourier_table(g, n, q)
    m_nu = limit_integral(f, g, nu, q)
    s = trace_with_engine(ft, gt, nu, engine)
    return TraceRecord(n, nu, s, m_nu, abs(s - m_nu), engine, time.perf_counter() - t0)


def _grid_values(s: Symbol, lam: np.ndarray) -> np.ndarray:
    return np.asarray(s(lam), dtype=float)


def phi_grid(f: Symbol, g: Symbol, N: int) -> np.ndarray:
    """``phi`` at all shifts ``(a, b, c) * 2 pi / N`` by the N-point rule in lambda.

    The triple correlation ``sum_l F[l] G[l-a] F[l-b] G[l-c]`` is evaluated
    through its 3-D DFT, ``F^(p+q+r) conj(G^(p) F^(q) G^(r))``.  The lambda
    grid is offset by half a step when either symbol is singular, so 0 is
    never sampled.
    """
    h = 2.0 * math.pi / N
    off = 0.5 if (f.singularity_alpha > 0 or g.singularity_alpha > 0) else 0.0
    lam = -math.pi + (np.arange(N) + off) * h
    F = np.fft.fft(_grid_values(f, lam))
    G = np.fft.fft(_grid_values(g, lam))
    p = np.arange(N)
    idx = (p[:, None, None] + p[None, :, None] + p[None, None, :]) % N
    spec = F[idx] * np.conj(G[:, None, None] * F[None, :, None] * G[None, None, :])
    return h * np.fft.ifftn(spec).real


def _integral_rep(f: Symbol, g: Symbol, n: int, N: int) -> float:
    ph = phi_grid(f, g, N)
    i = np.arange(N)
    a = i[:, None, None]
    b = i[None, :, None]
    c = i[None, None, :]
    psi = ph[a, (a + b) % N, (a + b + c) % N]
    h = 2.0 * math.pi / N
    m = (i + N // 2) % N - N // 2  # representatives in [-N/2, N/2)
    d1 = dirichlet(n, m * h)
    msum = m[:, None, None] + m[None, :, None] + m[None, None, :]
    kernel = (d1[:, None, None] * d1[None, :, None] * d1[None, None, :]
              * dirichlet(n, msum * h)) / (8.0 * math.pi**3 * n)
    # the kernel integrates to one; 8 pi^3 converts back to trace units
    return 8.0 * math.pi**3 * h**3 * float(np.sum((psi - ph[0, 0, 0]) * kernel))


def delta_integral_representation(f: Symbol, g: Symbol, n: int,
                                  q: QuadratureSpec = DEFAULT_QUADRATURE,
                                  grid: int = 32, rtol: float = 1e-6,
                                  max_grid: int = 256) -> float:
    """``Delta_{n,2}`` as ``8 pi^3 |int_{T^3} [Psi(u) - Psi(0)] Phi_n(u) du|``.

    ``Phi_n = D_n(u1) D_n(u2) D_n(u3) D_n(u1+u2+u3) / (8 pi^3 n)`` and
    ``Psi(u) = phi(u1, u1+u2, u1+u2+u3)``.  Uses the periodic trapezoid rule
    on a ``grid^3`` lattice, doubled until two levels agree to ``rtol``
    (exact for trigonometric polynomials once the grid exceeds the degree).
    Lattices beyond ``max_grid`` points per axis are not attempted; memory
    grows like ``max_grid^3``.
    """
    if not 1 <= n <= 8:
        raise ValueError("integral representation is limited to 1 <= n <= 8")
    if grid > max_grid:
        raise ValueError("grid exceeds max_grid")
    prev = _integral_rep(f, g, n, grid)
    change = math.inf
    N = grid
    for _ in range(q.max_refinements):
        if 2 * N > max_grid:
            break
        N *= 2
        cur = _integral_rep(f, g, n, N)
        change = abs(cur - prev)
        if change <= max(q.abs_tol, rtol * abs(cur)):
            return abs(cur)
        prev = cur
    raise QuadratureNoConverge(
        f"integral representation did not settle by grid {N} (last change {change:.3g})",
        err_est=change,
    )
