"""Generating functions (symbols) for Toeplitz matrices.

A symbol is a real, even, 2*pi-periodic integrable function on
``[-pi, pi]``.  Every kind carries its singularity exponent ``alpha`` (the
power of the blow-up at lambda = 0) together with the envelope constants
``M1``, ``M2`` of

    |f(lam)| <= M1 |lam|^-alpha,   |f'(lam)| <= M2 |lam|^-(alpha + 1).

Symbols are immutable value objects.  Composite symbols are built with
``Scaled`` / ``Sum`` or with the ``*`` and ``+`` operators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

import numpy as np

from .errors import ConfigError, EvalAtSingularity, OutOfRegime, ProfileUnavailable

TWO_PI = 2.0 * math.pi

Profile = Tuple[float, float, Optional[float]]


def reduce_abs(lam):
    """Map ``lam`` to ``|lam mod 2pi|`` in ``[0, pi]``.

    Working on ``|lam|`` first makes every symbol exactly even.
    """
    a = np.abs(np.asarray(lam, dtype=float))
    r = np.fmod(a, TWO_PI)
    return np.where(r > math.pi, TWO_PI - r, r)


class Symbol:
    """Base class; subclasses implement ``_eval_abs`` on ``[0, pi]``."""

    singularity_alpha: float = 0.0

    def __call__(self, lam):
        x = reduce_abs(lam)
        if self.singularity_alpha > 0.0 and np.any(x == 0.0):
            raise EvalAtSingularity(
                f"{self.symbol_id} is singular at lambda = 0 (mod 2 pi); "
                "use singularity-aware quadrature instead"
            )
        out = self._eval_abs(x)
        return float(out) if np.ndim(out) == 0 else out

    def _eval_abs(self, x):
        raise NotImplementedError

    def profile(self) -> Profile:
        raise NotImplementedError

    def exact_coefficients(self, k) -> Optional[np.ndarray]:
        """Closed-form Fourier coefficients if available, else ``None``."""
        return None

    @property
    def derivative_envelope(self) -> Optional[float]:
        try:
            return self.profile()[2]
        except ProfileUnavailable as exc:
            return exc.conservative[2]

    @property
    def symbol_id(self) -> str:
        raise NotImplementedError

    def to_record(self) -> dict:
        raise NotImplementedError

    def __mul__(self, factor):
        return Scaled(self, float(factor))

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Symbol):
            return NotImplemented
        return Sum(self, other)

    def __str__(self):
        return self.symbol_id


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class Constant(Symbol):
    c: float = 1.0

    def _eval_abs(self, x):
        return np.full_like(x, self.c) if np.ndim(x) else np.float64(self.c)

    def profile(self):
        return (0.0, abs(self.c), 0.0)

    def exact_coefficients(self, k):
        k = np.asarray(k)
        return np.where(k == 0, TWO_PI * self.c, 0.0)

    @property
    def symbol_id(self):
        return f"constant(c={_fmt(self.c)})"

    def to_record(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class TrigPolynomial(Symbol):
    """Cosine polynomial ``sum_j coeffs[j] cos(j lam)``."""

    coeffs: Tuple[float, ...] = (0.0, 1.0)

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("TrigPolynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))

    def _eval_abs(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for j, a in enumerate(self.coeffs):
            if a:
                out = out + a * np.cos(j * x)
        return out

    def profile(self):
        m1 = sum(abs(a) for a in self.coeffs)
        m2 = math.pi * sum(j * abs(a) for j, a in enumerate(self.coeffs))
        return (0.0, m1, m2)

    def exact_coefficients(self, k):
        k = np.abs(np.asarray(k))
        a = np.zeros(max(int(k.max(initial=0)) + 1, len(self.coeffs)))
        a[: len(self.coeffs)] = self.coeffs
        out = math.pi * a[k]
        return np.where(k == 0, TWO_PI * a[0], out)

    @property
    def symbol_id(self):
        if self.coeffs == (0.0, 1.0):
            return "cos"
        return "trig(" + ",".join(_fmt(a) for a in self.coeffs) + ")"

    def to_record(self):
        return {"kind": "trig", "coeffs": list(self.coeffs)}


def cos_symbol() -> TrigPolynomial:
    return TrigPolynomial((0.0, 1.0))


@dataclass(frozen=True)
class PowerLaw(Symbol):
    """``|lam|^-alpha``, periodically extended."""

    alpha: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("PowerLaw needs 0 <= alpha < 1 for integrability")
        object.__setattr__(self, "singularity_alpha", float(self.alpha))

    def _eval_abs(self, x):
        return np.power(x, -self.alpha)

    def profile(self):
        return (self.alpha, 1.0, self.alpha)

    @property
    def symbol_id(self):
        return f"power_law(alpha={_fmt(self.alpha)})"

    def to_record(self):
        return {"kind": "power_law", "alpha": self.alpha}


@dataclass(frozen=True)
class Farima(Symbol):
    """Long-memory spectral density ``sigma2/(2 pi) |1 - e^{i lam}|^-alpha``."""

    sigma2: float = 1.0
    alpha: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("Farima needs 0 <= alpha < 1 for integrability")
        if not self.sigma2 > 0.0:
            raise ValueError("Farima needs sigma2 > 0")
        object.__setattr__(self, "singularity_alpha", float(self.alpha))

    def _eval_abs(self, x):
        # |1 - e^{i x}| = 2 sin(x/2) on [0, pi]
        return self.sigma2 / TWO_PI * np.power(2.0 * np.sin(0.5 * x), -self.alpha)

    def profile(self):
        return (self.alpha, self.sigma2, self.sigma2)

    @property
    def symbol_id(self):
        return f"farima(sigma2={_fmt(self.sigma2)},alpha={_fmt(self.alpha)})"

    def to_record(self):
        return {"kind": "farima", "sigma2": self.sigma2, "alpha": self.alpha}


@dataclass(frozen=True)
class AbsSine(Symbol):
    """``|sin lam|``: bounded, Lipschitz, with kinks at 0 and pi."""

    def _eval_abs(self, x):
        return np.sin(x)

    def profile(self):
        # max of |lam cos lam| on [0, pi] is pi
        return (0.0, 1.0, math.pi)

    @property
    def symbol_id(self):
        return "abs_sine"

    def to_record(self):
        return {"kind": "abs_sine"}


@dataclass(frozen=True)
class Scaled(Symbol):
    base: Symbol = None
    factor: float = 1.0

    def __post_init__(self):
        if not isinstance(self.base, Symbol):
            raise TypeError("Scaled.base must be a Symbol")
        object.__setattr__(self, "singularity_alpha", self.base.singularity_alpha)

    def _eval_abs(self, x):
        return self.factor * self.base._eval_abs(x)

    def profile(self):
        c = abs(self.factor)
        try:
            a, m1, m2 = self.base.profile()
        except ProfileUnavailable as exc:
            a, m1, m2 = exc.conservative
            raise ProfileUnavailable(str(exc), (a, c * m1, None if m2 is None else c * m2))
        return (a, c * m1, None if m2 is None else c * m2)

    def exact_coefficients(self, k):
        inner = self.base.exact_coefficients(k)
        return None if inner is None else self.factor * inner

    @property
    def symbol_id(self):
        return f"{_fmt(self.factor)}*{self.base.symbol_id}"

    def to_record(self):
        return {"kind": "scaled", "factor": self.factor, "base": self.base.to_record()}


def _lift(profile: Profile, alpha: float) -> Profile:
    """Re-express an envelope at a larger exponent on [-pi, pi]."""
    a, m1, m2 = profile
    c = math.pi ** (alpha - a)
    return (alpha, c * m1, None if m2 is None else c * m2)


@dataclass(frozen=True)
class Sum(Symbol):
    left: Symbol = None
    right: Symbol = None

    def __post_init__(self):
        if not (isinstance(self.left, Symbol) and isinstance(self.right, Symbol)):
            raise TypeError("Sum operands must be Symbols")
        alpha = max(self.left.singularity_alpha, self.right.singularity_alpha)
        object.__setattr__(self, "singularity_alpha", alpha)

    def _eval_abs(self, x):
        return self.left._eval_abs(x) + self.right._eval_abs(x)

    def _operand_profiles(self):
        out = []
        for s in (self.left, self.right):
            try:
                out.append((s.profile(), True))
            except ProfileUnavailable as exc:
                out.append((exc.conservative, False))
        return out

    def profile(self):
        (pl, okl), (pr, okr) = self._operand_profiles()
        alpha = self.singularity_alpha
        ll, rr = _lift(pl, alpha), _lift(pr, alpha)
        m2 = None if ll[2] is None or rr[2] is None else ll[2] + rr[2]
        envelope = (alpha, ll[1] + rr[1], m2)
        if pl[0] != pr[0] or not (okl and okr):
            raise ProfileUnavailable(
                f"operands of {self.symbol_id} have different singularity exponents",
                envelope,
            )
        return envelope

    def exact_coefficients(self, k):
        a = self.left.exact_coefficients(k)
        b = self.right.exact_coefficients(k)
        return None if a is None or b is None else a + b

    @property
    def symbol_id(self):
        return f"({self.left.symbol_id}+{self.right.symbol_id})"

    def to_record(self):
        return {"kind": "sum", "left": self.left.to_record(), "right": self.right.to_record()}


def evaluate(s: Symbol, lam):
    """Pointwise evaluation with periodic reduction; see ``Symbol.__call__``."""
    return s(lam)


def singularity_profile(s: Symbol) -> Profile:
    return s.profile()


def theorem3_gamma(alpha1: float, alpha2: float) -> float:
    """Rate exponent ``1/4 - (alpha1 + alpha2)/2`` for two power singularities."""
    if not (alpha1 > 0.0 and alpha2 > 0.0):
        raise OutOfRegime("rate theorem needs alpha1, alpha2 > 0")
    if alpha1 + alpha2 >= 0.5:
        raise OutOfRegime(f"alpha1 + alpha2 = {alpha1 + alpha2} >= 1/2")
    return 0.25 - 0.5 * (alpha1 + alpha2)


_KINDS = ("constant", "trig", "cos", "power_law", "farima", "abs_sine", "scaled", "sum")


def symbol_from_record(rec: Mapping) -> Symbol:
    """Build a symbol from a config record such as
    ``{kind = "farima", sigma2 = 1.0, alpha = 0.3}``."""
    if not isinstance(rec, Mapping) or "kind" not in rec:
        raise ConfigError(f"symbol record needs a 'kind' key, got {rec!r}")
    kind = rec["kind"]
    allowed = {
        "constant": {"c"},
        "trig": {"coeffs"},
        "cos": set(),
        "power_law": {"alpha"},
        "farima": {"sigma2", "alpha"},
        "abs_sine": set(),
        "scaled": {"base", "factor"},
        "sum": {"left", "right"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown symbol kind {kind!r}; expected one of {_KINDS}")
    extra = set(rec) - allowed[kind] - {"kind"}
    if extra:
        raise ConfigError(f"unexpected keys for {kind}: {sorted(extra)}")
    try:
        if kind == "constant":
            return Constant(float(rec.get("c", 1.0)))
        if kind == "trig":
            return TrigPolynomial(tuple(rec["coeffs"]))
        if kind == "cos":
            return cos_symbol()
        if kind == "power_law":
            return PowerLaw(float(rec["alpha"]))
        if kind == "farima":
            return Farima(float(rec.get("sigma2", 1.0)), float(rec["alpha"]))
        if kind == "abs_sine":
            return AbsSine()
        if kind == "scaled":
            return Scaled(symbol_from_record(rec["base"]), float(rec["factor"]))
        return Sum(symbol_from_record(rec["left"]), symbol_from_record(rec["right"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} record {dict(rec)!r}: {exc}") from exc


# The six symbols used by the engine-equivalence acceptance suite.
CATALOG = {
    "constant": Constant(1.0),
    "cos": cos_symbol(),
    "abs_sine": AbsSine(),
    "power_law_0.1": PowerLaw(0.1),
    "power_law_0.2": PowerLaw(0.2),
    "farima_1_0.2": Farima(1.0, 0.2),
}
