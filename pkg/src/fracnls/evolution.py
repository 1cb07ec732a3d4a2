"""Split-step time integration of ``i u_t - (-Delta)^alpha u + eps |x|^gamma |u|^(p-1) u = 0``.

Both sub-flows are solved exactly: the linear one is a Fourier phase
``exp(-i t |xi|^(2 alpha))`` and the nonlinear one a pointwise phase
``exp(i eps t w |u|^(p-1))`` (``|u|`` is constant along it).  Strang
composition gives a second-order, mass-conserving, time-reversible scheme.
The discrete energy uses the same weights ``w`` as the nonlinear step.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .exceptions import InvalidParameterError
from .field import (
    Field,
    WeightGrid,
    angular_asymmetry,
    fft,
    h_alpha_inner,
    h_alpha_norm,
    ifft,
    symbol,
    weight_grid,
)
from .functionals import _parts, kh_from_parts
from .params import Criticality, ModelParams, classify_regime

logger = logging.getLogger(__name__)


class Outcome(str, enum.Enum):
    COMPLETED = "completed"
    BLOWUP_SUSPECTED = "blowup_suspected"
    RESOLUTION_FAILURE = "resolution_failure"


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 1e-3
    T: float = 1.0
    record_every: int = 10
    blowup_norm_factor: float = 1e3
    spectral_tail_limit: float = 0.1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidParameterError("dt must be positive")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidParameterError("T must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidParameterError("record_every must be a positive integer")
        if not self.blowup_norm_factor > 1:
            raise InvalidParameterError("blowup_norm_factor must exceed 1")
        if not 0 < self.spectral_tail_limit <= 1:
            raise InvalidParameterError("spectral_tail_limit must lie in (0, 1]")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class EvolutionTrace:
    times: list = dc_field(default_factory=list)
    mass_series: list = dc_field(default_factory=list)
    energy_series: list = dc_field(default_factory=list)
    hs_series: list = dc_field(default_factory=list)
    action_series: list = dc_field(default_factory=list)
    orbital_distance_series: Optional[list] = None
    K_flags: Optional[list] = None
    K_values: Optional[list] = None
    asymmetry_series: list = dc_field(default_factory=list)
    tail_series: list = dc_field(default_factory=list)
    outcome: Optional[Outcome] = None
    final: Optional[Field] = dc_field(default=None, repr=False)
    steps: int = 0

    def set_outcome(self, outcome: Outcome) -> None:
        if self.outcome is not None:
            raise RuntimeError("outcome already set")
        self.outcome = outcome

    def __len__(self) -> int:
        return len(self.times)

    def relative_drift(self, series: str) -> float:
        s = np.asarray(getattr(self, series), dtype=float)
        return float(np.max(np.abs(s - s[0])) / abs(s[0]))

    def max_growth(self) -> float:
        h = np.asarray(self.hs_series)
        return float(np.max(h) / h[0])

    def rows(self) -> list:
        n = len(self.times)
        dist = self.orbital_distance_series or [float("nan")] * n
        ks = self.K_flags or [0] * n
        return [(self.times[i], self.mass_series[i], self.energy_series[i], self.hs_series[i], dist[i], ks[i])
                for i in range(n)]

    CSV_HEADER = ("t", "M", "E", "Hs", "dist", "K_sign")

    def summary(self) -> dict:
        out = {
            "outcome": self.outcome.value if self.outcome else None,
            "samples": len(self.times),
            "steps": self.steps,
            "t_final": self.times[-1] if self.times else 0.0,
            "mass_drift": self.relative_drift("mass_series"),
            "energy_drift": self.relative_drift("energy_series"),
            "hs_max_growth": self.max_growth(),
            "max_asymmetry": max(self.asymmetry_series) if self.asymmetry_series else 0.0,
        }
        if self.orbital_distance_series:
            out["dist_initial"] = self.orbital_distance_series[0]
            out["dist_max"] = max(self.orbital_distance_series)
        if self.K_flags:
            out["K_always_positive"] = all(k > 0 for k in self.K_flags)
        return out


# --------------------------------------------------------------------------
# sub-steps
# --------------------------------------------------------------------------

def linear_propagator_step(u: Field, t: float, alpha: float) -> Field:
    """Free flow ``exp(-i t (-Delta)^alpha) u``."""
    if t == 0:
        return u
    phase = np.exp(-1j * t * symbol(u.grid, alpha))
    return Field(u.grid, ifft(phase * u.fourier))


def _weights(w: Union[WeightGrid, np.ndarray]) -> np.ndarray:
    return w.quadrature if isinstance(w, WeightGrid) else np.asarray(w)


def nonlinear_phase_step(u: Field, t: float, w: Union[WeightGrid, np.ndarray], p: float, eps: int) -> Field:
    """Exact flow of ``i u_t = -eps w |u|^(p-1) u``: ``u exp(i eps t w |u|^(p-1))``."""
    v = u.values
    return Field(u.grid, v * np.exp(1j * eps * t * _weights(w) * np.abs(v) ** (p - 1)))


def strang_step(u: Field, dt: float, params: ModelParams, w: Optional[WeightGrid] = None) -> Field:
    """Linear half step, nonlinear full step, linear half step."""
    if w is None:
        w = weight_grid(u.grid, params.gamma)
    half = linear_propagator_step(u, dt / 2, params.alpha)
    mid = nonlinear_phase_step(half, dt, w, params.p, params.epsilon)
    return linear_propagator_step(mid, dt / 2, params.alpha)


def propagate(u: Field, params: ModelParams, dt: float, steps: int) -> Field:
    """``steps`` Strang steps of size ``dt`` (negative ``dt`` runs backwards).

    Consecutive linear half steps are fused into one full step.
    """
    if steps <= 0:
        return u
    grid = u.grid
    w = _weights(weight_grid(grid, params.gamma))
    sym = symbol(grid, params.alpha)
    half = np.exp(-0.5j * dt * sym)
    full = half * half
    p, eps = params.p, params.epsilon
    hat = half * u.fourier
    for k in range(steps):
        v = ifft(hat)
        v = v * np.exp(1j * eps * dt * w * np.abs(v) ** (p - 1))
        hat = (full if k < steps - 1 else half) * fft(v)
    return Field(grid, ifft(hat))


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

def orbital_distance(u: Field, phi: Field, alpha: float) -> float:
    """``min_theta ||u - e^{i theta} phi||_{H^alpha}`` in closed form."""
    a = h_alpha_norm(u, alpha) ** 2
    b = h_alpha_norm(phi, alpha) ** 2
    c = abs(h_alpha_inner(u, phi, alpha))
    return math.sqrt(max(a + b - 2 * c, 0.0))


def spectral_tail_fraction(u: Field) -> float:
    """Share of ``sum |u_hat|^2`` on modes with some ``|xi_i|`` in the top third of the band."""
    g = u.grid
    k = np.abs(np.fft.fftfreq(g.n) * g.n)
    top = k > (g.n // 2) * 2 / 3
    mask = np.zeros(g.shape, dtype=bool)
    for ax in range(g.dim):
        shape = [1] * g.dim
        shape[ax] = g.n
        mask = mask | top.reshape(shape)
    e = np.abs(u.fourier) ** 2
    tot = float(np.sum(e))
    return float(np.sum(e[mask])) / tot if tot > 0 else 0.0


@dataclass(frozen=True)
class Membership:
    member: bool
    S: float
    K: float
    S_below_m: bool
    K_positive: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def stable_set_membership(u: Field, params: ModelParams, a: float, b: float, m: float) -> Membership:
    """Whether ``S(u) < m`` and ``K_{a,b}(u) > 0`` (both strict)."""
    if not m > 0:
        raise InvalidParameterError("m must be positive")
    M, T, P = _parts(u, params)
    rep = kh_from_parts(M, T, P, params, a, b)
    S = 0.5 * (M + T) - P / (params.p + 1)
    return Membership(member=(S < m and rep.K > 0), S=S, K=rep.K, S_below_m=S < m, K_positive=rep.K > 0)


def evolve(u0: Field, params: ModelParams, cfg: EvolutionConfig, phi: Optional[Field] = None,
           pairs: Optional[Sequence[tuple]] = None, require_radial: bool = True) -> EvolutionTrace:
    """Integrate from ``u0`` to ``cfg.T`` recording diagnostics every ``cfg.record_every`` steps.

    Stops early with ``blowup_suspected`` once the Hdot^alpha seminorm exceeds
    ``blowup_norm_factor`` times its initial value, and with
    ``resolution_failure`` on NaNs or when the spectral tail fraction exceeds
    ``spectral_tail_limit``.  With ``phi`` the orbital distance to its phase
    orbit is recorded; with ``pairs`` the sign of ``K_{a,b}`` (``+1`` only if
    positive for every pair).
    """
    regime = classify_regime(params)
    if not regime.wellposed_alpha and not params.debug:
        raise InvalidParameterError("alpha outside the local well-posedness window (use debug mode to override)")
    if u0.grid.dim != params.N:
        raise InvalidParameterError("field dimension does not match N")
    if require_radial and angular_asymmetry(u0) > 1e-8:
        raise InvalidParameterError("initial data must be radial")
    if phi is not None and phi.grid != u0.grid:
        raise InvalidParameterError("phi lives on a different grid")

    trace = EvolutionTrace()
    if phi is not None:
        trace.orbital_distance_series = []
    if pairs:
        trace.K_flags = []
        trace.K_values = []
    alpha, p = params.alpha, params.p

    def record(t: float, u: Field) -> Optional[Outcome]:
        M, T, P = _parts(u, params)
        if not all(math.isfinite(x) for x in (M, T, P)):
            return Outcome.RESOLUTION_FAILURE
        trace.times.append(t)
        trace.mass_series.append(M)
        trace.energy_series.append(0.5 * T - params.epsilon * P / (p + 1))
        trace.action_series.append(0.5 * (M + T) - P / (p + 1))
        trace.hs_series.append(math.sqrt(T))
        trace.asymmetry_series.append(angular_asymmetry(u))
        tail = spectral_tail_fraction(u)
        trace.tail_series.append(tail)
        if phi is not None:
            trace.orbital_distance_series.append(orbital_distance(u, phi, alpha))
        if pairs:
            ks = [kh_from_parts(M, T, P, params, a, b).K for a, b in pairs]
            trace.K_values.append(ks)
            trace.K_flags.append(1 if all(k > 0 for k in ks) else (-1 if any(k < 0 for k in ks) else 0))
        if tail > cfg.spectral_tail_limit:
            return Outcome.RESOLUTION_FAILURE
        if math.sqrt(T) > cfg.blowup_norm_factor * trace.hs_series[0]:
            return Outcome.BLOWUP_SUSPECTED
        return None

    u = u0
    stop = record(0.0, u)
    n_steps = cfg.n_steps
    done = 0
    while stop is None and done < n_steps:
        k = min(cfg.record_every, n_steps - done)
        u = propagate(u, params, cfg.dt, k)
        done += k
        stop = record(done * cfg.dt, u)
    trace.steps = done
    trace.final = u
    trace.set_outcome(stop or Outcome.COMPLETED)
    logger.info("evolve: %s after %d steps", trace.outcome.value, done)
    return trace


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def apriori_hs_bound(params: ModelParams, C: float, mass: float, energy: float) -> float:
    """Largest ``s = ||u||_{Hdot^alpha}`` allowed by ``2E >= s^2 (1 - k s^(B-2))``.

    ``k = 2 C M^(A/2) / (p+1)``.  Finite for ``B < 2``, and for ``B = 2``
    when ``k < 1`` (mass below the threshold); ``inf`` otherwise.
    """
    e = params.exponents
    if params.epsilon < 0:
        return math.sqrt(max(2 * energy, 0.0))
    k = 2 * C * mass ** (e.A / 2) / (params.p + 1)
    if regime_is_critical(params):
        return math.sqrt(2 * energy / (1 - k)) if k < 1 and energy >= 0 else math.inf
    if e.B > 2:
        return math.inf
    # f(s) = s^2 - k s^B has its minimum at s* and increases afterwards
    f = lambda s: s * s - k * s ** e.B - 2 * energy  # noqa: E731
    s_star = (k * e.B / 2) ** (1 / (2 - e.B)) if k > 0 else 0.0
    hi = max(1.0, 2 * s_star)
    while f(hi) < 0:
        hi *= 2
    return brentq(f, max(s_star, 0.0), hi, xtol=1e-14, rtol=1e-12) if f(max(s_star, 0.0)) < 0 else s_star


def regime_is_critical(params: ModelParams) -> bool:
    return classify_regime(params).criticality is Criticality.CRITICAL


@dataclass
class ExperimentResult:
    kind: str
    trace: EvolutionTrace
    gates: dict
    findings: list
    scalars: dict

    @property
    def passed(self) -> bool:
        return all(self.gates.values())


def run_global_existence_experiment(params: ModelParams, u0: Field, cfg: EvolutionConfig, C: float,
                                    growth_limit: float = 2.0) -> ExperimentResult:
    """Evolve ``u0`` in a regime where global existence follows from mass and energy control.

    Applies to ``B < 2`` and to ``B = 2`` with mass below
    ``((p+1)/(2C))^(2/A)``.  Gates: the run completes, the seminorm never
    exceeds the a-priori bound and its growth stays below ``growth_limit``.
    """
    e = params.exponents
    crit = classify_regime(params).criticality
    M0, T0, P0 = _parts(u0, params)
    threshold = ((params.p + 1) / (2 * C)) ** (2 / e.A)
    if crit is Criticality.SUPERCRITICAL:
        raise InvalidParameterError("no mass-energy global existence argument for B > 2")
    if crit is Criticality.CRITICAL and params.epsilon > 0 and not M0 < threshold:
        raise InvalidParameterError("critical case needs mass below the threshold")
    E0 = 0.5 * T0 - params.epsilon * P0 / (params.p + 1)
    bound = apriori_hs_bound(params, C, M0, E0)
    trace = evolve(u0, params, cfg)
    hs_max = max(trace.hs_series)
    growth = trace.max_growth()
    gates = {
        "completed": trace.outcome is Outcome.COMPLETED,
        "within_apriori_bound": hs_max <= bound * (1 + 1e-6),
        "growth_below_limit": growth < growth_limit,
    }
    findings = [k for k, v in gates.items() if not v]
    scalars = {"criticality": crit.value, "mass0": M0, "energy0": E0, "mass_threshold": threshold,
               "mass_fraction_of_threshold": M0 / threshold, "apriori_bound": bound,
               "hs_max": hs_max, "hs_growth": growth}
    scalars.update(trace.summary())
    return ExperimentResult("global_existence", trace, gates, findings, scalars)


def run_trapping_experiment(params: ModelParams, u0: Field, cfg: EvolutionConfig, m: float,
                            pairs: Sequence[tuple] = ((1.0, 0.0), (1.0, 1.0), (2.0, 1.0))) -> ExperimentResult:
    """Evolve data in the potential well and check membership at every sample."""
    first = [stable_set_membership(u0, params, a, b, m) for a, b in pairs]
    if not all(x.member for x in first):
        raise InvalidParameterError("initial data is not in the potential well for every pair")
    trace = evolve(u0, params, cfg, pairs=pairs)
    S_ok = all(s < m for s in trace.action_series)
    K_ok = all(k > 0 for k in trace.K_flags)
    gates = {"completed": trace.outcome is Outcome.COMPLETED, "K_positive": K_ok, "S_below_m": S_ok}
    findings = [k for k, v in gates.items() if not v]
    scalars = {"m": m, "S_max": max(trace.action_series),
               "K_min": [min(ks[i] for ks in trace.K_values) for i in range(len(pairs))]}
    scalars.update(trace.summary())
    return ExperimentResult("trapping", trace, gates, findings, scalars)


def run_stability_probe(params: ModelParams, phi: Field, cfg: EvolutionConfig, delta: float,
                        factor: float = 10.0) -> ExperimentResult:
    """Evolve ``phi (1 + delta)`` and compare the orbital distance with its initial value.

    ``factor`` is an engineering gate on ``max dist / dist(0)``.
    """
    if classify_regime(params).criticality is not Criticality.SUBCRITICAL:
        raise InvalidParameterError("orbital stability is only asserted for B < 2")
    u0 = phi * (1 + delta)
    trace = evolve(u0, params, cfg, phi=phi)
    d = trace.orbital_distance_series
    ratio = max(d) / d[0] if d[0] > 0 else math.inf
    gates = {"completed": trace.outcome is Outcome.COMPLETED, "distance_ratio_below_factor": ratio <= factor}
    findings = [k for k, v in gates.items() if not v]
    scalars = {"delta": delta, "distance_ratio": ratio, "factor": factor}
    scalars.update(trace.summary())
    return ExperimentResult("stability", trace, gates, findings, scalars)
