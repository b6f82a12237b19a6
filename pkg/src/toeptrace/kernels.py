"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``TOEPTRACE_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names
the active implementation; both stay importable for benchmarking.
"""
import os

from . import _fallback

cosine_moments_py = _fallback.cosine_moments

try:
    from ._kernels import cosine_moments as cosine_moments_ext
except ImportError:  # extension not built
    cosine_moments_ext = None

if cosine_moments_ext is not None and not os.environ.get("TOEPTRACE_PURE_PYTHON"):
    BACKEND = "compiled"
    cosine_moments = cosine_moments_ext
else:
    BACKEND = "python"
    cosine_moments = cosine_moments_py
