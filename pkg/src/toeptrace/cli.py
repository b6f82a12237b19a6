"""Command line front end.

Exit codes: 0 success, 1 failed check, 2 invalid configuration,
3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Optional, Sequence

from . import __version__, analysis, harness
from .config import ExperimentConfig, load_config, parse_symbol_text
from .errors import ConfigError, ToepTraceError
from .harness import fmt
from .spectral import fourier_table
from .symbol import symbol_from_record
from .trace import delta


def _ints(text: str):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _floats(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _param(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), float(val)


def _open_out(path: Optional[str]):
    return open(path, "w", newline="") if path else sys.stdout


def _symbol(text):
    return symbol_from_record(parse_symbol_text(text))


def _experiment(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = harness.preset(args.preset, **dict(args.param or ()))
    else:
        raise ConfigError("need --config FILE or --preset NAME")
    try:
        return cfg.with_overrides(nu=args.nu, n_grid=args.n_grid, workers=args.workers,
                                  dense_below=args.dense_below, drop_head=args.drop_head,
                                  slack=args.slack)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- commands

def cmd_coeffs(args) -> int:
    s = _symbol(args.symbol)
    table = fourier_table(s, args.n)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("k", "coeff"))
        for k, c in enumerate(table.coeffs):
            w.writerow((k, fmt(c)))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_delta(args) -> int:
    f = _symbol(args.f)
    g = _symbol(args.g) if args.g else f
    rec = delta(f, g, args.n, args.nu, args.engine)
    d = rec.to_dict()
    if args.no_timing:
        d["elapsed"] = 0.0
    print(harness.dumps(d))
    return 0


def cmd_sweep(args) -> int:
    cfg = _experiment(args)
    out = args.out or cfg.csv_path
    records = harness.run_sweep(cfg, csv_path=out, timing=not args.no_timing)
    if not out:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(harness.CSV_COLUMNS)
        for r in records:
            w.writerow(harness.record_row(r, not args.no_timing))
    return 0 if all(r.status == "ok" for r in records) else 1


def cmd_fit(args) -> int:
    records = harness.read_sweep_csv(args.csv)
    gamma, slack, drop = args.gamma, args.slack, args.drop_head
    cfg = None
    if args.config or args.preset:
        cfg = _experiment(args)
    if cfg is not None:
        gamma = cfg.theoretical_rate if gamma is None else gamma
        slack = cfg.slack if slack is None else slack
        drop = cfg.drop_head if drop is None else drop
    fit = harness.fit_rate(records, 2 if drop is None else drop, gamma,
                           0.1 if slack is None else slack)
    out = {"version": __version__, "csv": args.csv, "fit": fit.to_dict()}
    if cfg is not None:
        out["config"] = cfg.to_record()
    print(harness.dumps(out))
    return 1 if fit.verdict == "violation" else 0


def cmd_preset(args) -> int:
    if args.action == "list":
        for name, (_, desc) in sorted(harness.PRESETS.items()):
            print(f"{name:10s}  {desc}")
        return 0
    if not args.name:
        raise ConfigError("preset show needs a name")
    print(harness.dumps(harness.preset(args.name).to_record()))
    return 0


def cmd_verify(args) -> int:
    def progress(c):
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}", file=sys.stderr)

    report = harness.verify_all(args.report, dirichlet_constant=args.dirichlet_constant,
                                include_slow=not args.quick, progress=progress)
    if not args.report:
        print(harness.dumps(report))
    return 0 if report["passed"] else 1


def cmd_demo_divergence(args) -> int:
    rep = analysis.divergence_demo(args.nu, args.eta, args.alpha_plus_beta,
                                   args.truncations)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("s", "partial_integral"))
        for s, v in zip(rep.truncations, rep.partial_integrals):
            w.writerow((fmt(s), fmt(v)))
    finally:
        if fh is not sys.stdout:
            fh.close()
    summary = {k: v for k, v in rep.to_dict().items()
               if k not in ("truncations", "partial_integrals")}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


# ------------------------------------------------------------------ parser

def _add_experiment_args(p):
    p.add_argument("--config", help="TOML experiment file")
    p.add_argument("--preset", help="start from a named preset")
    p.add_argument("--param", action="append", type=_param, metavar="KEY=VALUE",
                   help="preset parameter, e.g. alpha1=0.05 (repeatable)")
    p.add_argument("--nu", type=int)
    p.add_argument("--n-grid", type=_ints, help="comma separated sizes")
    p.add_argument("--workers", type=int)
    p.add_argument("--dense-below", type=int)
    p.add_argument("--drop-head", type=int)
    p.add_argument("--slack", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toeptrace", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="Fourier coefficient table as CSV")
    p.add_argument("--symbol", required=True,
                   help='catalog name or inline table, e.g. \'{kind="power_law", alpha=0.1}\'')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("delta", help="single trace record as JSON")
    p.add_argument("--f", required=True)
    p.add_argument("--g")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nu", type=int, default=2)
    p.add_argument("--engine", default="dense", choices=("dense", "matfree", "closed_nu1"))
    p.add_argument("--no-timing", action="store_true", help="write elapsed as 0")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("sweep", help="delta over an n grid as CSV")
    _add_experiment_args(p)
    p.add_argument("--out")
    p.add_argument("--no-timing", action="store_true", help="write elapsed_s as 0")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="rate fit of a sweep CSV as JSON")
    p.add_argument("csv")
    _add_experiment_args(p)
    p.add_argument("--gamma", type=float, help="theoretical rate to test against")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("preset", help="list or show presets")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--dirichlet-constant", type=float, default=math.pi,
                   help="constant in the Dirichlet bound (mutation testing)")
    p.add_argument("--quick", action="store_true", help="skip the slow triple integral")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo-divergence", help="partial integrals of the divergent example")
    p.add_argument("--nu", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.2)
    p.add_argument("--alpha-plus-beta", type=float, default=0.3)
    p.add_argument("--truncations", type=_floats, default=harness.DIVERGENCE_TRUNCATIONS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo_divergence)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToepTraceError as exc:
        print(f"toeptrace: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"toeptrace: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
