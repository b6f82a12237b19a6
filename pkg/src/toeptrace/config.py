"""Experiment configuration and its TOML schema.

Example file::

    preset = "example1"          # optional starting point
    nu = 2
    n_grid = [256, 512, 1024, 2048, 4096]
    dense_below = 512
    workers = 2
    drop_head = 2
    slack = 0.1

    [f]
    kind = "power_law"
    alpha = 0.1

    [g]
    kind = "power_law"
    alpha = 0.1

    [rate]
    gamma = 0.15
    tag = "theorem3"

    [quadrature]
    abs_tol = 1e-10
    panels_per_unit = 4

    [output]
    csv = "sweep.csv"

Keys given in the file override the preset; command-line flags override
both.
"""
from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, OutOfRegime, ToepTraceError
from .quadrature import QuadratureSpec
from .symbol import Symbol, symbol_from_record, theorem3_gamma

DEFAULT_N_GRID = (64, 128, 256, 512, 1024, 2048, 4096)
RATE_TAGS = ("theorem1", "theorem2", "theorem3", "B1", "B2", "exact")
_QUAD_KEYS = {"panels_per_unit", "grading_exponent", "abs_tol", "max_refinements",
              "order", "levels"}
_TOP_KEYS = {"preset", "params", "name", "nu", "n_grid", "dense_below", "workers",
             "drop_head", "slack", "m_nu_abs_tol", "f", "g", "rate", "quadrature",
             "output"}


@dataclass(frozen=True)
class ExperimentConfig:
    f_spec: Mapping[str, Any]
    g_spec: Mapping[str, Any]
    nu: int = 2
    n_grid: Tuple[int, ...] = DEFAULT_N_GRID
    dense_below: int = 512
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    m_nu_abs_tol: float = 1e-8  # limit integral of singular products
    theoretical_rate: Optional[float] = None
    rate_tag: Optional[str] = None
    drop_head: int = 2
    slack: float = 0.1
    workers: int = 1
    csv_path: Optional[str] = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        self.validate()

    @property
    def f(self) -> Symbol:
        return symbol_from_record(self.f_spec)

    @property
    def g(self) -> Symbol:
        return symbol_from_record(self.g_spec)

    def engine_for(self, n: int) -> str:
        return "dense" if n < self.dense_below else "matfree"

    def validate(self):
        if self.nu not in (1, 2):
            raise ConfigError(f"nu must be 1 or 2 in the harness, got {self.nu}")
        grid = self.n_grid
        if not grid or any(n < 1 for n in grid):
            raise ConfigError("n_grid must hold positive integers")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        if self.workers < 1 or self.drop_head < 0 or self.dense_below < 1:
            raise ConfigError("workers, dense_below >= 1 and drop_head >= 0 required")
        if not (self.slack >= 0 and math.isfinite(self.slack)):
            raise ConfigError("slack must be a finite nonnegative number")
        f, g = self.f, self.g  # raises ConfigError on bad records
        if self.rate_tag is not None and self.rate_tag not in RATE_TAGS:
            raise ConfigError(f"unknown rate tag {self.rate_tag!r}; expected one of {RATE_TAGS}")
        if self.theoretical_rate is not None and not self.theoretical_rate > 0:
            raise ConfigError("theoretical rate must be positive")
        if self.rate_tag == "theorem3":
            try:
                gamma = theorem3_gamma(f.singularity_alpha, g.singularity_alpha)
            except OutOfRegime as exc:
                raise ConfigError(f"theorem3 tag: {exc}") from exc
            if self.theoretical_rate is None or abs(self.theoretical_rate - gamma) > 1e-12:
                raise ConfigError(
                    f"theorem3 tag requires rate {gamma:.17g}, got {self.theoretical_rate}")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["f_spec"] = _plain(self.f_spec)
        rec["g_spec"] = _plain(self.g_spec)
        rec["n_grid"] = list(self.n_grid)
        rec["quadrature"] = self.quadrature.to_record()
        return rec


def _plain(x):
    if isinstance(x, Mapping):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def quadrature_from_record(rec: Mapping) -> QuadratureSpec:
    extra = set(rec) - _QUAD_KEYS
    if extra:
        raise ConfigError(f"unknown quadrature keys {sorted(extra)}")
    try:
        return QuadratureSpec(**rec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad quadrature section: {exc}") from exc


def config_from_mapping(data: Mapping, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Build a config from parsed TOML, starting from ``base`` if given."""
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    if base is None and "preset" in data:
        from .harness import preset

        base = preset(data["preset"], **dict(data.get("params", {})))
    kw: dict = {}
    for key in ("name", "nu", "n_grid", "dense_below", "workers", "drop_head", "slack",
                "m_nu_abs_tol"):
        if key in data:
            kw[key] = data[key]
    if "f" in data:
        kw["f_spec"] = dict(data["f"])
    if "g" in data:
        kw["g_spec"] = dict(data["g"])
    if "rate" in data:
        rate = data["rate"]
        kw["theoretical_rate"] = rate.get("gamma")
        kw["rate_tag"] = rate.get("tag")
    if "quadrature" in data:
        kw["quadrature"] = quadrature_from_record(data["quadrature"])
    if "output" in data and "csv" in data["output"]:
        kw["csv_path"] = str(data["output"]["csv"])
    try:
        if base is not None:
            return replace(base, **kw)
        if "f" not in data:
            raise ConfigError("config needs an [f] symbol table or a preset")
        kw.setdefault("g_spec", kw["f_spec"])
        return ExperimentConfig(**kw)
    except ToepTraceError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_mapping(data)


def parse_symbol_text(text: str) -> Mapping:
    """Symbol record from a catalog name or an inline TOML table."""
    from .symbol import CATALOG

    text = text.strip()
    if text in CATALOG:
        return CATALOG[text].to_record()
    if not text.startswith("{"):
        raise ConfigError(f"unknown symbol {text!r}; use a catalog name or an inline table")
    try:
        return tomllib.loads("s = " + text)["s"]
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad inline symbol table {text!r}: {exc}") from exc
