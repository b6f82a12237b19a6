"""Acceptance criteria, one test per criterion at the stated tolerance."""
import math
import time

import numpy as np
import pytest

from toeptrace import analysis as A
from toeptrace import harness as H
from toeptrace.errors import RegimeViolation
from toeptrace.symbol import Constant, Farima, PowerLaw, cos_symbol
from toeptrace.trace import delta, delta_integral_representation

N_SMOOTH = (64, 128, 256, 512, 1024, 2048, 4096)
N_SINGULAR = (256, 512, 1024, 2048, 4096)
SINGULAR_CASES = [(name, a) for name in ("example1", "example2") for a in (0.05, 0.1)]


def _singular_cfg(name, a):
    return H.preset(name, alpha1=a, alpha2=a).with_overrides(n_grid=N_SINGULAR)


def test_criterion_1_engine_equivalence(acceptance):
    t0 = time.perf_counter()
    c = H.check_engine_equivalence((1, 2, 4, 8, 16, 32, 64, 128))
    dt = time.perf_counter() - t0
    d = c.details
    ok = (c.passed and d["cases"] == 6 * 2 * 8 * 2 and dt < 60)
    acceptance(1, "engine equivalence", ok,
               f"cases={d['cases']} dense/matfree={d['max_err_dense_matfree']:.2e} "
               f"dense/closed={d['max_err_dense_closed']:.2e} t={dt:.1f}s")
    assert ok


def test_criterion_2_exact_identities(acceptance):
    one = Constant(1.0)
    worst = 0.0
    for n in (1, 2, 3, 5, 8, 16, 64, 256):
        r = delta(one, one, n, 2)
        worst = max(worst, r.delta)
        assert r.s_n_nu == pytest.approx(16 * math.pi**4, rel=1e-12)
        assert r.m_nu == pytest.approx(16 * math.pi**4, rel=1e-12)
    cos = cos_symbol()
    r = delta(cos, cos, 2, 2)
    errs = [abs(r.s_n_nu - math.pi**4) / math.pi**4,
            abs(r.m_nu - 6 * math.pi**4) / (6 * math.pi**4),
            abs(r.delta - 5 * math.pi**4) / (5 * math.pi**4)]
    ok = worst <= 1e-8 and max(errs) <= 1e-8
    acceptance(2, "exact identities", ok,
               f"constant max delta={worst:.1e} cos n=2 max rel err={max(errs):.1e}")
    assert ok


@pytest.mark.parametrize("nu", [1, 2])
def test_criterion_3_smooth_rate(acceptance, nu, tmp_path):
    cfg = H.preset("a1_smooth").with_overrides(nu=nu, n_grid=N_SMOOTH, drop_head=2)
    t0 = time.perf_counter()
    recs = H.run_sweep(cfg)
    dt = time.perf_counter() - t0
    fit = H.fit_config(cfg, recs)
    uses_matfree = any(r.engine == "matfree" for r in recs)
    ok = fit.slope <= -0.9 and fit.r_squared >= 0.95 and dt < 300 and uses_matfree
    acceptance(3, f"smooth rate nu={nu}", ok,
               f"slope={fit.slope:.4f} r2={fit.r_squared:.6f} t={dt:.1f}s")
    assert ok


@pytest.mark.parametrize("name,a", SINGULAR_CASES)
def test_criterion_4_theorem3_rate(acceptance, name, a):
    cfg = _singular_cfg(name, a)
    gamma = 0.25 - a
    assert cfg.theoretical_rate == pytest.approx(gamma) and cfg.slack == 0.1
    recs = H.run_sweep(cfg)
    fit = H.fit_config(cfg, recs)
    positive = all(r.status == "ok" and r.delta > 0 for r in recs)
    ok = positive and fit.verdict in ("consistent", "faster_than_bound")
    acceptance(4, f"theorem3 rate {name} alpha={a}", ok,
               f"gamma={gamma:.2f} slope={fit.slope:.4f} r2={fit.r_squared:.4f} "
               f"verdict={fit.verdict}")
    assert ok


def test_criterion_5_integral_representation(acceptance):
    cos = cos_symbol()
    rels = []
    for n in (2, 4):
        rep = delta_integral_representation(cos, cos, n)
        dense = delta(cos, cos, n, 2, engine="dense").delta
        rels.append(abs(rep - dense) / abs(dense))
    ok = max(rels) <= 1e-3
    acceptance(5, "integral representation", ok,
               "rel err " + " ".join(f"n={n}:{r:.1e}" for n, r in zip((2, 4), rels)))
    assert ok


def test_criterion_6_lemma_suite(acceptance):
    worst = max(A.check_dirichlet_bound(n, d, 100_000)
                for n in (16, 256, 1024) for d in (0.0, 0.25, 0.5, 1.0))
    sc = A.lemma2_scaling(0.75, 0.75, (0.5, 1.0, 2.0, 4.0))
    st = A.lemma3_stability(1.0, 0.7, 1)
    lp = A.lp_inequality_check(0.5, 0.5, 16.0, (1.01, 1.05, 1.1, 1.25, 1.5, 1.75, 1.9, 2.0))
    small_min = float(lp.ratios.min())
    target = 0.9 * 3 ** -0.5 / (1 - 0.5)
    parts = {"dirichlet": worst <= 1 + 1e-12, "lemma2": sc.spread < 1e-5,
             "lemma3": st.rel_change <= 0.01, "lp_ineq": small_min >= target}
    ok = all(parts.values())
    acceptance(6, "lemma suite", ok,
               f"dirichlet={worst:.6f} lemma2 spread={sc.spread:.1e} "
               f"lemma3 rel={st.rel_change:.1e} lp min={small_min:.4f}>={target:.4f}")
    assert ok, parts


def test_criterion_7_lipschitz(acceptance):
    deltas = H.LIPSCHITZ_DELTAS
    out = []
    ok = True
    for s in (PowerLaw(0.2), Farima(1.0, 0.2)):
        c = A.lipschitz_fit(s, 4.0, deltas)
        good = c.fitted_gamma >= 0.05 - 0.05 and c.is_monotone()
        ok &= good
        out.append(f"{s.symbol_id} gamma={c.fitted_gamma:.4f}")
    const = A.lipschitz_fit(Constant(1.0), 4.0, deltas)
    ok &= bool(np.all(const.omegas == 0))
    acceptance(7, "lipschitz fit", ok, " ".join(out) + " constant omega=0")
    assert ok


def test_criterion_8_divergence(acceptance):
    trunc = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
    rep = A.divergence_demo(2, 0.2, 0.3, trunc)
    with pytest.raises(RegimeViolation):
        A.divergence_demo(2, 0.3, 0.3, trunc)
    ok = rep.strictly_increasing and abs(rep.fitted_blowup_exponent + 0.2) <= 0.02
    acceptance(8, "divergence demo", ok,
               f"exponent={rep.fitted_blowup_exponent:.6f} eta=0.3 rejected")
    assert ok


def test_criterion_9_determinism(acceptance, tmp_path):
    blobs = {}
    for run, workers in ((0, 1), (1, 3)):
        rep = tmp_path / f"verify{run}.json"
        H.verify_all(str(rep))
        blobs.setdefault("verify", []).append(rep.read_bytes())
        configs = [("a1_smooth_nu1", H.preset("a1_smooth").with_overrides(nu=1, n_grid=N_SMOOTH)),
                   ("a1_smooth_nu2", H.preset("a1_smooth").with_overrides(n_grid=N_SMOOTH))]
        configs += [(f"{n}_{a}", _singular_cfg(n, a)) for n, a in SINGULAR_CASES]
        for label, cfg in configs:
            p = tmp_path / f"{label}_{run}.csv"
            H.run_sweep(cfg, csv_path=str(p), workers=workers, timing=False)
            blobs.setdefault(label, []).append(p.read_bytes())
    same = {k: v[0] == v[1] for k, v in blobs.items()}
    ok = all(same.values())
    acceptance(9, "determinism", ok,
               f"{len(same)} outputs byte-identical across runs and workers 1/3")
    assert ok, same
