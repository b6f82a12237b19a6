import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def farima_autocov(sigma2, alpha, k):
    """Autocovariance of fractional noise with d = alpha / 2 (mpmath)."""
    import mpmath as mp

    d = mp.mpf(alpha) / 2
    k = int(abs(k))
    v = sigma2 * mp.gamma(1 - 2 * d) * mp.gamma(k + d) / (
        mp.gamma(d) * mp.gamma(1 - d) * mp.gamma(k + 1 - d))
    return float(v)


def abs_sine_coeff(k):
    """2 int_0^pi sin(x) cos(k x) dx in closed form."""
    k = abs(int(k))
    if k == 1:
        return 0.0
    return 2.0 * (1.0 + (-1.0) ** k) / (1.0 - k * k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Recorder for one PASS/FAIL summary line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, title, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  {detail}".rstrip()
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
