# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Pure-numpy equivalents live in ``_fallback``."""
import numpy as np

from libc.math cimport cos, sin

cdef enum:
    ANCHOR = 64
    LANES = 16


def cosine_moments(const double[::1] x, const double[::1] w, Py_ssize_t nmax):
    """``out[k] = sum_j w[j] cos(k x[j])`` for ``k < nmax``.

    cos(k x) is advanced by complex rotation and re-anchored with a direct
    cos/sin call every ``ANCHOR`` steps, which keeps the recurrence error
    at a few ulp independent of ``nmax``.  Nodes are processed ``LANES`` at
    a time so the rotations vectorise; the order in which contributions
    reach ``out[k]`` is fixed, so results are reproducible.
    """
    cdef Py_ssize_t n = x.shape[0]
    if w.shape[0] != n:
        raise ValueError("x and w must have equal length")
    out = np.zeros(max(nmax, 0))
    cdef double[::1] o = out
    cdef double cr[LANES]
    cdef double ci[LANES]
    cdef double zr[LANES]
    cdef double zi[LANES]
    cdef double ww[LANES]
    cdef double xx[LANES]
    cdef Py_ssize_t j, b, k, k0, k1, m
    cdef double t, acc
    for j in range(0, n, LANES):
        m = n - j
        if m > LANES:
            m = LANES
        for b in range(LANES):
            if b < m:
                xx[b] = x[j + b]
                ww[b] = w[j + b]
            else:
                xx[b] = 0.0
                ww[b] = 0.0
            cr[b] = cos(xx[b])
            ci[b] = sin(xx[b])
        k0 = 0
        while k0 < nmax:
            for b in range(LANES):
                zr[b] = cos(k0 * xx[b])
                zi[b] = sin(k0 * xx[b])
            k1 = k0 + ANCHOR
            if k1 > nmax:
                k1 = nmax
            for k in range(k0, k1):
                acc = 0.0
                for b in range(LANES):
                    acc += ww[b] * zr[b]
                o[k] += acc
                for b in range(LANES):
                    t = zr[b] * cr[b] - zi[b] * ci[b]
                    zi[b] = zi[b] * cr[b] + zr[b] * ci[b]
                    zr[b] = t
            k0 = k1
    return out
