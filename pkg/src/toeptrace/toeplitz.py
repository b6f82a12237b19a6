"""Dense and matrix-free symmetric Toeplitz matrices ``T_n(u)[k, j] = h(k - j)``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DenseGuardExceeded, DimensionMismatch
from .spectral import FourierTable

DENSE_GUARD = 8192


@dataclass(frozen=True)
class DenseToeplitz:
    n: int
    entries: np.ndarray = field(repr=False)


def build_dense(t: FourierTable) -> DenseToeplitz:
    if t.n > DENSE_GUARD:
        raise DenseGuardExceeded(f"n = {t.n} exceeds the dense guard {DENSE_GUARD}")
    m = scipy.linalg.toeplitz(t.coeffs)
    m.setflags(write=False)
    return DenseToeplitz(t.n, m)


def embedding_size(n: int) -> int:
    """Smallest power of two ``>= 2n - 1``."""
    need = 2 * n - 1
    return 1 << (need - 1).bit_length()


@dataclass(frozen=True)
class ToeplitzOperator:
    """Circulant embedding of ``T_n``; products cost ``O(m log m)``."""

    table: FourierTable
    m: int
    column: np.ndarray = field(repr=False)
    circ_spectrum: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.table.n

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch(f"expected vector of length {self.n}, got shape {x.shape}")
        return self.matmat(x[:, None])[:, 0]

    def matmat(self, X):
        """``T_n @ X`` for an ``(n, p)`` block of columns."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] != self.n:
            raise DimensionMismatch(f"expected ({self.n}, p) block, got shape {X.shape}")
        spec = scipy.fft.rfft(X, n=self.m, axis=0)
        spec *= self.circ_spectrum[: self.m // 2 + 1, None]
        return scipy.fft.irfft(spec, n=self.m, axis=0)[: self.n]


def embed_circulant(t: FourierTable) -> ToeplitzOperator:
    """First circulant column ``[h0, h1, .., h(n-1), 0.., h(n-1), .., h1]``."""
    n = t.n
    m = embedding_size(n)
    col = np.zeros(m)
    col[:n] = t.coeffs
    if n > 1:
        col[m - n + 1:] = t.coeffs[1:][::-1]
    # symmetric column: the spectrum is real
    spectrum = scipy.fft.fft(col).real
    col.setflags(write=False)
    spectrum.setflags(write=False)
    return ToeplitzOperator(t, m, col, spectrum)


def matvec(op: ToeplitzOperator, x) -> np.ndarray:
    return op.matvec(x)
