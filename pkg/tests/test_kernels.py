import numpy as np
import pytest
from hypothesis import given, strategies as st

from toeptrace import kernels


def direct(x, w, n):
    return np.cos(np.arange(n)[:, None] * x[None, :]) @ w


@given(st.integers(0, 300), st.integers(0, 200), st.integers(0, 10**6))
def test_fallback_matches_direct(n, m, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, np.pi, m)
    w = rng.normal(size=m)
    np.testing.assert_allclose(kernels.cosine_moments_py(x, w, n), direct(x, w, n),
                               atol=1e-11 * (1 + np.abs(w).sum()))


@pytest.mark.skipif(kernels.cosine_moments_ext is None, reason="extension not built")
@given(st.integers(0, 300), st.integers(0, 200), st.integers(0, 10**6))
def test_compiled_matches_fallback(n, m, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, np.pi, m)
    w = rng.normal(size=m)
    np.testing.assert_allclose(kernels.cosine_moments_ext(x, w, n),
                               kernels.cosine_moments_py(x, w, n),
                               atol=1e-11 * (1 + np.abs(w).sum()))


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.cosine_moments in (kernels.cosine_moments_py, kernels.cosine_moments_ext)


def test_fallback_forced_by_env():
    import subprocess, sys

    out = subprocess.run([sys.executable, "-c", "import toeptrace.kernels as k; print(k.BACKEND)"],
                         env={"TOEPTRACE_PURE_PYTHON": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_shape_mismatch():
    with pytest.raises(ValueError):
        kernels.cosine_moments_py(np.zeros(3), np.zeros(4), 5)
