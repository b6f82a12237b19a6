"""Sweeps over n, rate fits, presets and the verification suite."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__, analysis
from .config import ExperimentConfig
from .errors import DegenerateFit, RegimeViolation, ToepTraceError, UnknownPreset
from .spectral import fourier_table, limit_integral
from .symbol import CATALOG, AbsSine, Constant, Farima, PowerLaw, cos_symbol, theorem3_gamma
from .trace import (TraceRecord, delta, delta_integral_representation, trace_nu1_closed,
                    trace_product_dense, trace_product_matfree)
from .toeplitz import embed_circulant

CSV_COLUMNS = ("n", "nu", "s_n_nu", "m_nu", "delta", "engine", "elapsed_s", "status")
VERDICTS = ("consistent", "faster_than_bound", "violation", "inconclusive")


def fmt(x) -> str:
    """17 significant digits, '.' decimal point."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


# ------------------------------------------------------------------- sweeps

def _m_nu(cfg: ExperimentConfig) -> float:
    f, g = cfg.f, cfg.g
    q = cfg.quadrature
    if f.singularity_alpha > 0 or g.singularity_alpha > 0:
        q = replace(q, abs_tol=max(q.abs_tol, cfg.m_nu_abs_tol))
    return limit_integral(f, g, cfg.nu, q)


def _sweep_point(cfg, f_full, g_full, m_nu, n) -> TraceRecord:
    engine = cfg.engine_for(n)
    t0 = time.perf_counter()
    try:
        ft = f_full.truncate(n)
        gt = g_full.truncate(n)
        if engine == "dense":
            s = trace_product_dense(ft, gt, cfg.nu)
        else:
            s = trace_product_matfree(embed_circulant(ft), embed_circulant(gt), cfg.nu)
        return TraceRecord(n, cfg.nu, s, m_nu, abs(s - m_nu), engine,
                           time.perf_counter() - t0)
    except ToepTraceError as exc:
        return TraceRecord(n, cfg.nu, math.nan, m_nu, math.nan, engine,
                           time.perf_counter() - t0, status=type(exc).__name__)


def record_row(r: TraceRecord, timing: bool = True) -> List[str]:
    return [fmt(r.n), fmt(r.nu), fmt(r.s_n_nu), fmt(r.m_nu), fmt(r.delta), r.engine,
            fmt(r.elapsed if timing else 0.0), r.status]


def run_sweep(cfg: ExperimentConfig, csv_path: Optional[str] = None,
              workers: Optional[int] = None, timing: bool = True) -> List[TraceRecord]:
    """One record per ``n`` in ``cfg.n_grid``, merged in n-order.

    Coefficient tables are computed once at the largest ``n`` and truncated.
    Sweep points run on up to ``workers`` threads; each finished record is
    appended to the CSV as soon as all smaller ``n`` are written, so an
    interrupted run leaves a valid prefix.  Per-point errors are recorded in
    the ``status`` column and the sweep continues.
    """
    workers = cfg.workers if workers is None else workers
    csv_path = cfg.csv_path if csv_path is None else csv_path
    n_max = cfg.n_grid[-1]
    f, g = cfg.f, cfg.g
    f_full = fourier_table(f, n_max, cfg.quadrature)
    g_full = f_full if g == f else fourier_table(g, n_max, cfg.quadrature)
    m_nu = _m_nu(cfg)

    fh = writer = None
    if csv_path:
        fh = open(csv_path, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        fh.flush()
    records = []
    try:
        # largest n first so the slow points start early; output stays in n-order
        order = sorted(cfg.n_grid, reverse=True)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {n: pool.submit(_sweep_point, cfg, f_full, g_full, m_nu, n) for n in order}
            for n in cfg.n_grid:
                rec = futs[n].result()
                records.append(rec)
                if writer is not None:
                    writer.writerow(record_row(rec, timing))
                    fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records


def read_sweep_csv(path: str) -> List[TraceRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(TraceRecord(int(row["n"]), int(row["nu"]), float(row["s_n_nu"]),
                                   float(row["m_nu"]), float(row["delta"]), row["engine"],
                                   float(row["elapsed_s"]), row.get("status", "ok")))
    return out


# ----------------------------------------------------------------- rate fit

@dataclass
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_range: tuple
    n_points: int
    verdict: str
    gamma: Optional[float]
    slack: float
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        return d


def classify(slope: float, r_squared: float, gamma: Optional[float], slack: float) -> str:
    """One-sided verdict: the theorems only bound the error from above."""
    if gamma is None:
        return "inconclusive"
    if slope > -gamma + slack:
        return "violation" if r_squared >= 0.9 else "inconclusive"
    if slope < -gamma - slack:
        return "faster_than_bound"
    return "consistent"


def fit_rate(records: Sequence[TraceRecord], drop_head: int = 2,
             gamma: Optional[float] = None, slack: float = 0.1) -> RateFit:
    """Least-squares fit of ``log delta`` against ``log n``.

    Records with a non-ok status are skipped.  A zero delta means the
    error vanishes exactly; the fit then reports ``consistent`` with a note
    instead of taking logarithms.
    """
    recs = [r for r in records if r.status == "ok"][drop_head:]
    if len(recs) < 3:
        raise DegenerateFit(f"need at least 3 usable records after drop_head, got {len(recs)}")
    n = np.array([r.n for r in recs], dtype=float)
    d = np.array([r.delta for r in recs], dtype=float)
    n_range = (int(n[0]), int(n[-1]))
    if np.any(d == 0):
        return RateFit(math.nan, math.nan, 1.0, n_range, len(recs), "consistent", gamma,
                       slack, note="delta is exactly zero at some n; no fit performed")
    x, y = np.log(n), np.log(d)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(resid @ resid) / ss_tot)
    return RateFit(float(slope), float(intercept), r2, n_range, len(recs),
                   classify(float(slope), r2, gamma, slack), gamma, slack)


def fit_config(cfg: ExperimentConfig, records: Sequence[TraceRecord]) -> RateFit:
    return fit_rate(records, cfg.drop_head, cfg.theoretical_rate, cfg.slack)


# ------------------------------------------------------------------ presets

def _a1_smooth() -> ExperimentConfig:
    c = cos_symbol().to_record()
    return ExperimentConfig(c, c, theoretical_rate=1.0, rate_tag="B1", name="a1_smooth")


def _example1(alpha1: float = 0.1, alpha2: float = 0.1) -> ExperimentConfig:
    return ExperimentConfig(PowerLaw(alpha1).to_record(), PowerLaw(alpha2).to_record(),
                            theoretical_rate=theorem3_gamma(alpha1, alpha2),
                            rate_tag="theorem3", name="example1")


def _example2(sigma2: float = 1.0, alpha1: float = 0.2, alpha2: float = 0.2) -> ExperimentConfig:
    return ExperimentConfig(Farima(sigma2, alpha1).to_record(),
                            Farima(sigma2, alpha2).to_record(),
                            theoretical_rate=theorem3_gamma(alpha1, alpha2),
                            rate_tag="theorem3", name="example2")


def _theorem2() -> ExperimentConfig:
    # |sin| is Lipschitz, so it lies in Lip(inf, 1): p = q = inf, gamma = 1
    s = AbsSine().to_record()
    return ExperimentConfig(s, s, theoretical_rate=1.0, rate_tag="theorem2", name="theorem2")


def _constant(c: float = 1.0) -> ExperimentConfig:
    s = Constant(c).to_record()
    return ExperimentConfig(s, s, name="constant")


PRESETS: Dict[str, tuple] = {
    "a1_smooth": (_a1_smooth, "f = g = cos; smooth symbols, rate 1 (finite coefficient sums)"),
    "example1": (_example1, "f_i = |lam|^-alpha_i; rate 1/4 - (alpha1 + alpha2)/2"),
    "example2": (_example2, "f_i = sigma2/(2 pi)|1 - e^{i lam}|^-alpha_i; same rate"),
    "theorem2": (_theorem2, "f = g = |sin lam| in Lip(inf, 1); rate 1"),
    "constant": (_constant, "f = g = c; delta is exactly zero"),
}


def preset(name: str, **params) -> ExperimentConfig:
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    try:
        return PRESETS[name][0](**params)
    except TypeError as exc:
        raise UnknownPreset(f"bad parameters for preset {name!r}: {exc}") from exc


# -------------------------------------------------------------- verify_all

@dataclass
class Check:
    name: str
    passed: bool
    details: dict


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def trace_scale(ft, gt, nu: int) -> float:
    """Upper bound ``(||T_f||_F ||T_g||_F)^nu / n`` for ``|S_{n,nu}|``."""
    n = ft.n
    w = 2.0 * (n - np.arange(n, dtype=float))
    w[0] = n
    fro = math.sqrt(float(w @ ft.coeffs**2)) * math.sqrt(float(w @ gt.coeffs**2))
    return fro**nu / n


def engine_error(value: float, reference: float, scale: float) -> float:
    """Relative error, or error relative to ``scale`` when the reference
    trace is zero to working precision (``|reference| <= 1e-12 scale``)."""
    if abs(reference) > 1e-12 * scale:
        return abs(value - reference) / abs(reference)
    return abs(value - reference) / scale if scale > 0 else abs(value - reference)


def check_engine_equivalence(ns: Iterable[int] = (1, 2, 4, 8, 16, 32, 64, 128)) -> Check:
    """Dense vs matfree (1e-9) and dense vs closed form for nu = 1 (1e-12)."""
    ns = list(ns)
    cos = CATALOG["cos"]
    worst_mf = worst_cf = 0.0
    cases = zero_cases = 0
    for name, f in CATALOG.items():
        ft_full = fourier_table(f, ns[-1])
        ct_full = fourier_table(cos, ns[-1])
        for g, gt_full in ((f, ft_full), (cos, ct_full)):
            for n in ns:
                ft, gt = ft_full.truncate(n), gt_full.truncate(n)
                fo, go = embed_circulant(ft), embed_circulant(gt)
                for nu in (1, 2):
                    d = trace_product_dense(ft, gt, nu)
                    scale = trace_scale(ft, gt, nu)
                    zero_cases += abs(d) <= 1e-12 * scale
                    worst_mf = max(worst_mf, engine_error(
                        trace_product_matfree(fo, go, nu), d, scale))
                    if nu == 1:
                        worst_cf = max(worst_cf, engine_error(
                            trace_nu1_closed(ft, gt), d, scale))
                    cases += 1
    return Check("engine_equivalence", worst_mf <= 1e-9 and worst_cf <= 1e-12,
                 {"cases": cases, "zero_trace_cases": int(zero_cases),
                  "max_err_dense_matfree": worst_mf, "max_err_dense_closed": worst_cf})


def check_exact_identities() -> Check:
    one = Constant(1.0)
    cos = cos_symbol()
    worst_const = max(delta(one, one, n, 2).delta for n in (1, 2, 3, 7, 16, 64))
    r = delta(cos, cos, 2, 2)
    target = (math.pi**4, 6 * math.pi**4, 5 * math.pi**4)
    errs = [_rel(r.s_n_nu, target[0]), _rel(r.m_nu, target[1]), _rel(r.delta, target[2])]
    return Check("exact_identities", worst_const <= 1e-8 and max(errs) <= 1e-8,
                 {"constant_max_delta": worst_const, "cos_n2_rel_errors": errs})


def check_integral_representation() -> Check:
    cos = cos_symbol()
    out = {}
    ok = True
    for n in (2, 4):
        rep = delta_integral_representation(cos, cos, n)
        dense = delta(cos, cos, n, 2).delta
        out[f"n{n}"] = {"integral": rep, "dense": dense, "rel": _rel(rep, dense)}
        ok &= _rel(rep, dense) <= 1e-3
    return Check("integral_representation", ok, out)


def check_dirichlet(constant: float = math.pi, samples: int = 100_000) -> Check:
    ratios = {}
    for n in (16, 256, 1024):
        for d in (0.0, 0.25, 0.5, 1.0):
            ratios[f"n{n}_delta{d}"] = analysis.check_dirichlet_bound(n, d, samples,
                                                                      constant=constant)
    worst = max(ratios.values())
    return Check("dirichlet_bound", worst <= 1 + 1e-12,
                 {"constant": constant, "samples": samples, "worst_ratio": worst,
                  "ratios": ratios})


def check_lemma2() -> Check:
    sc = analysis.lemma2_scaling(0.75, 0.75, (0.5, 1.0, 2.0, 4.0))
    ref = analysis.lemma2_closed_form(0.75, 0.75)
    return Check("lemma2_scaling", sc.spread < 1e-5,
                 {"alpha": 0.75, "beta": 0.75, "ys": sc.ys.tolist(),
                  "scaled": sc.scaled.tolist(), "spread": sc.spread,
                  "beta_function_constant": ref})


def check_lemma3() -> Check:
    st = analysis.lemma3_stability(1.0, 0.7, 1)
    return Check("lemma3_refinement", st.rel_change <= 0.01,
                 {"alpha": 1.0, "beta": 0.7, "i": 1, "values": st.values.tolist(),
                  "rel_change": st.rel_change})


def check_lp_inequality() -> Check:
    r = analysis.lp_inequality_check(0.5, 0.5, 16.0, (1.01, 1.1, 1.5, 1.9, 3.0, 8.0))
    small = r.ys <= 2
    small_min = float(r.ratios[small].min())
    ok = small_min >= 0.9 * r.small_branch_constant and r.large_branch_ok
    return Check("lp_inequality", ok,
                 {"gamma": r.gamma, "theta": r.theta, "y0": r.y0, "ys": r.ys.tolist(),
                  "ratios": r.ratios.tolist(), "small_branch_min": small_min,
                  "small_branch_constant": r.small_branch_constant, "J_over_y0": r.J / r.y0,
                  "large_branch_ok": r.large_branch_ok})


LIPSCHITZ_DELTAS = tuple(0.5 * 2.0 ** -np.arange(6))


def check_lipschitz() -> Check:
    out = {}
    ok = True
    for s, p in ((PowerLaw(0.2), 4.0), (Farima(1.0, 0.2), 4.0)):
        c = analysis.lipschitz_fit(s, p, LIPSCHITZ_DELTAS)
        target = 1.0 / p - s.singularity_alpha
        good = c.fitted_gamma >= target - 0.05 and c.is_monotone()
        ok &= good
        out[s.symbol_id] = {"p": p, "fitted_gamma": c.fitted_gamma, "fitted_C": c.fitted_C,
                            "omegas": c.omegas.tolist(), "target": target, "passed": good}
    c = analysis.lipschitz_fit(Constant(1.0), 2.0, LIPSCHITZ_DELTAS)
    zero = bool(np.all(c.omegas == 0))
    ok &= zero
    out["constant"] = {"omegas": c.omegas.tolist(), "identically_zero": zero}
    return Check("lipschitz_fit", ok, out)


DIVERGENCE_TRUNCATIONS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)


def check_divergence() -> Check:
    rep = analysis.divergence_demo(2, 0.2, 0.3, DIVERGENCE_TRUNCATIONS)
    try:
        analysis.divergence_demo(2, 0.3, 0.3, DIVERGENCE_TRUNCATIONS)
        rejected = False
    except RegimeViolation:
        rejected = True
    ok = (rep.strictly_increasing and abs(rep.fitted_blowup_exponent + 0.2) <= 0.02
          and rejected)
    d = rep.to_dict()
    d["eta_0.3_rejected"] = rejected
    return Check("divergence_demo", ok, d)


def verify_all(report_path: Optional[str] = None, dirichlet_constant: float = math.pi,
               include_slow: bool = True,
               progress: Optional[Callable[[Check], None]] = None) -> dict:
    """Run every check; failures are recorded, not raised.

    The report carries the library version and the check parameters, but no
    timestamps, so reruns are byte-identical.
    """
    steps = [
        check_exact_identities,
        check_engine_equivalence,
        check_integral_representation,
        lambda: check_dirichlet(dirichlet_constant),
        check_lemma2,
        check_lp_inequality,
        check_lipschitz,
        check_divergence,
    ]
    if include_slow:
        steps.append(check_lemma3)
    checks = []
    for step in steps:
        try:
            c = step()
        except ToepTraceError as exc:
            c = Check(getattr(step, "__name__", "check"), False,
                      {"error": type(exc).__name__, "message": str(exc)})
        checks.append(c)
        if progress is not None:
            progress(c)
    report = {
        "version": __version__,
        "config": {"dirichlet_constant": dirichlet_constant, "include_slow": include_slow},
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
    if report_path:
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    return report


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serialisable: {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
