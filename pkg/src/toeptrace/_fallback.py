"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

ANCHOR = 64


def cosine_moments(x, w, nmax):
    """``out[k] = sum_j w[j] cos(k x[j])`` for ``k < nmax``.

    Same rotation-with-re-anchoring scheme as the compiled kernel, vectorised
    over nodes instead of over lanes.
    """
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if x.shape != w.shape:
        raise ValueError("x and w must have equal length")
    nmax = max(int(nmax), 0)
    out = np.zeros(nmax)
    if nmax == 0 or x.size == 0:
        return out
    step = np.exp(1j * x)
    for k0 in range(0, nmax, ANCHOR):
        z = np.exp(1j * (k0 * x))
        for k in range(k0, min(k0 + ANCHOR, nmax)):
            out[k] = z.real @ w
            z *= step
    return out
