"""Model parameters, derived exponents and regime classification.

The equation studied is

    i u_t - (-Delta)^alpha u + epsilon |x|^gamma |u|^(p-1) u = 0,   x in R^N.

Every downstream module takes a :class:`ModelParams`; the exponents ``A``,
``B``, ``mu`` and the effective Lebesgue exponent ``s`` are derived once and
cached on the instance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .exceptions import InvalidParameterError

#: tolerance used to decide B == 2 and the window endpoints
CRITICAL_ATOL = 1e-12


class Criticality(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class DerivedExponents:
    A: float
    B: float
    mu: float
    sigma_exp: float

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "mu": self.mu, "sigma_exp": self.sigma_exp}


@dataclass(frozen=True)
class RegimeReport:
    gn_admissible: bool
    gn_strict: bool
    wellposed_alpha: bool
    criticality: Criticality
    mass_threshold: Optional[float] = None
    # same window with p in place of p + 1, an alternative reading of the
    # bound; reported only
    gn_strict_p_variant: bool = False

    def as_dict(self) -> dict:
        return {
            "gn_admissible": self.gn_admissible,
            "gn_strict": self.gn_strict,
            "gn_strict_p_variant": self.gn_strict_p_variant,
            "wellposed_alpha": self.wellposed_alpha,
            "criticality": self.criticality.value,
            "mass_threshold": self.mass_threshold,
        }


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters ``(N, alpha, gamma, p, epsilon)``.

    ``N = 1`` and ``alpha = 1`` are only accepted with ``debug=True``.
    """

    N: int
    alpha: float
    gamma: float
    p: float
    epsilon: int = 1
    debug: bool = field(default=False, compare=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameterError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if self.N > 3:
            raise InvalidParameterError("dimensions above 3 are not supported")
        if self.N == 1 and not self.debug:
            raise InvalidParameterError("N = 1 is only available in debug mode")
        if not (0.0 < self.alpha < 1.0):
            if not (self.alpha == 1.0 and self.debug):
                raise InvalidParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not math.isfinite(self.gamma):
            raise InvalidParameterError("gamma must be finite")
        if not (self.p > 0 and math.isfinite(self.p)):
            raise InvalidParameterError(f"p must be positive, got {self.p}")
        if self.epsilon not in (1, -1):
            raise InvalidParameterError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.gamma != 0 and not (self.N - 2 * self.alpha > 0):
            raise InvalidParameterError("N - 2 alpha must be positive when gamma != 0")
        if self.gamma <= -self.N:
            raise InvalidParameterError("gamma must exceed -N for a locally integrable weight")

    @cached_property
    def exponents(self) -> DerivedExponents:
        return derive_exponents(self)

    def replace(self, **changes) -> "ModelParams":
        values = {k: getattr(self, k) for k in ("N", "alpha", "gamma", "p", "epsilon", "debug")}
        values.update(changes)
        return ModelParams(**values)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "p": self.p,
            "epsilon": self.epsilon,
            "debug": self.debug,
        }


def _weight_shift(params: ModelParams) -> float:
    # 2 gamma / (N - 2 alpha); zero when gamma = 0 even if N = 2 alpha
    if params.gamma == 0:
        return 0.0
    denom = params.N - 2 * params.alpha
    if denom == 0:
        raise InvalidParameterError("N = 2 alpha with gamma != 0")
    return 2 * params.gamma / denom


def effective_exponent(params: ModelParams) -> float:
    """``s = p + 1 - 2 gamma / (N - 2 alpha)``."""
    return params.p + 1 - _weight_shift(params)


def sobolev_endpoint(params: ModelParams) -> float:
    """Upper end ``2N / (N - 2 alpha)`` of the window (``inf`` if N <= 2 alpha)."""
    denom = params.N - 2 * params.alpha
    return math.inf if denom <= 0 else 2 * params.N / denom


def derive_exponents(params: ModelParams) -> DerivedExponents:
    s = effective_exponent(params)
    B = (params.N * (params.p - 1) - 2 * params.gamma) / (2 * params.alpha)
    A = 1 + params.p - B
    mu = (params.N / params.alpha) * (0.5 - 1 / s)
    return DerivedExponents(A=A, B=B, mu=mu, sigma_exp=s)


def critical_p(N: int, alpha: float, gamma: float) -> float:
    """Mass-critical exponent ``1 + (4 alpha + 2 gamma) / N`` (B = 2)."""
    return 1 + (4 * alpha + 2 * gamma) / N


def check_gn_window(params: ModelParams) -> tuple[bool, bool]:
    """Return ``(admissible, strict)`` for ``2 <= s <= 2N/(N-2 alpha)``."""
    s = effective_exponent(params)
    hi = sobolev_endpoint(params)
    lo_ok = s > 2 - CRITICAL_ATOL
    hi_ok = s < hi + CRITICAL_ATOL
    admissible = lo_ok and hi_ok
    strict = admissible and abs(s - 2) > CRITICAL_ATOL and (math.isinf(hi) or abs(s - hi) > CRITICAL_ATOL)
    return admissible, strict


def classify_regime(params: ModelParams, exps: Optional[DerivedExponents] = None,
                    C: Optional[float] = None) -> RegimeReport:
    """Classify ``params``; ``C`` is a sharp GN constant used for the critical
    mass threshold ``((p+1)/(2C))^(2/A)``."""
    exps = params.exponents if exps is None else exps
    admissible, strict = check_gn_window(params)
    s_p = effective_exponent(params) - 1
    hi = sobolev_endpoint(params)
    strict_p = 2 < s_p < hi

    N, alpha = params.N, params.alpha
    wellposed = (N / (2 * N - 1) < alpha < 1) if N > 1 else False

    if abs(exps.B - 2) <= CRITICAL_ATOL:
        crit = Criticality.CRITICAL
    elif exps.B < 2:
        crit = Criticality.SUBCRITICAL
    else:
        crit = Criticality.SUPERCRITICAL

    threshold = None
    if crit is Criticality.CRITICAL and C is not None:
        if not C > 0:
            raise InvalidParameterError("sharp constant must be positive")
        threshold = ((params.p + 1) / (2 * C)) ** (2 / exps.A)

    return RegimeReport(
        gn_admissible=admissible,
        gn_strict=strict,
        wellposed_alpha=wellposed,
        criticality=crit,
        mass_threshold=threshold,
        gn_strict_p_variant=strict_p,
    )


def require_groundstate_regime(params: ModelParams) -> None:
    """Raise unless ``params`` fit the hypotheses of the ground-state solvers."""
    if params.gamma < 0:
        raise InvalidParameterError("ground-state solvers require gamma >= 0")
    _, strict = check_gn_window(params)
    if not strict:
        raise InvalidParameterError(
            f"s = {effective_exponent(params):.6g} is not strictly inside the GN window"
        )
    if params.p <= 1:
        raise InvalidParameterError("ground-state solvers require p > 1")
