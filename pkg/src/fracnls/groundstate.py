"""Ground states and minimizers of the Weinstein functional.

Two independent routes are provided:

* :func:`petviashvili_solve` iterates directly on
  ``(-Delta)^alpha phi + phi - |x|^gamma |phi|^(p-1) phi = 0``;
* :func:`minimize_J` descends on ``J`` over fields with
  ``||psi|| = ||(-Delta)^(alpha/2) psi|| = 1`` and
  :func:`rescale_minimizer_to_groundstate` maps the minimizer onto a
  solution of the same equation.

Dilations inside the second route are applied exactly by rescaling the box
(see :func:`fracnls.field.dilate_exact`), so the unit-pair constraint holds to
rounding at every step and ``J`` is unchanged by renormalization.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DegenerateInputError, DegenerateSeedError, InvalidParameterError
from .field import (
    Field,
    GridSpec,
    boundary_mass_fraction,
    dilate_exact,
    fft,
    resample_to_grid,
    gaussian,
    hs_seminorm,
    ifft,
    l2_norm,
    symbol,
    symmetrize,
    weight_grid,
)
from .functionals import kh_from_parts
from .params import ModelParams, require_groundstate_regime

logger = logging.getLogger(__name__)

DEFAULT_PAIRS = ((1.0, 0.0), (1.0, 1.0), (2.0, 1.0))


class ProfileKind(str, enum.Enum):
    EULER_LAGRANGE_UNIT = "euler_lagrange_unit"
    J_MINIMIZER = "j_minimizer"


@dataclass
class GroundStateRecord:
    profile: Field
    kind: ProfileKind
    residual: float
    mass: float
    seminorm: float
    nonlinear_integral: float
    action_value: float
    iterations: int
    converged: bool
    m_value: Optional[float] = None
    beta_value: Optional[float] = None
    history: list = dc_field(default_factory=list, repr=False)
    extra: dict = dc_field(default_factory=dict)

    def scalars(self) -> dict:
        out = {
            "kind": self.kind.value,
            "residual": self.residual,
            "mass": self.mass,
            "seminorm": self.seminorm,
            "nonlinear_integral": self.nonlinear_integral,
            "action": self.action_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "m": self.m_value,
            "beta": self.beta_value,
            "grid": self.profile.grid.as_dict(),
        }
        out.update(self.extra)
        return out


def _power(values: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    """``w |v|^(p-1) v``."""
    return w * np.abs(values) ** (p - 1) * values


def _fix_phase(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Rotate so the sample with largest modulus near the origin is real positive."""
    centre = (grid.n // 2,) * grid.dim
    z = values[centre]
    if abs(z) < 1e-300:
        z = values.flat[np.argmax(np.abs(values))]
    return values * (abs(z) / z)


def _norms(values: np.ndarray, grid: GridSpec, params: ModelParams, w: np.ndarray):
    hat = fft(values)
    dv = grid.cell_volume
    M = float(np.vdot(values, values).real) * dv
    T = float(np.sum(symbol(grid, params.alpha) * np.abs(hat) ** 2)) * dv
    P = float(np.sum(w * np.abs(values) ** (params.p + 1))) * dv
    return hat, M, T, P


def groundstate_residual(phi: Field, params: ModelParams) -> float:
    """``||(I + (-Delta)^alpha) phi - |x|^gamma |phi|^(p-1) phi|| / ||phi||_{H^alpha}``."""
    w = weight_grid(phi.grid, params.gamma).quadrature
    lin = ifft((1 + symbol(phi.grid, params.alpha)) * phi.fourier)
    res = lin - _power(phi.values, w, params.p)
    dv = phi.grid.cell_volume
    num = math.sqrt(float(np.vdot(res, res).real) * dv)
    den = math.sqrt(l2_norm(phi) ** 2 + hs_seminorm(phi, params.alpha) ** 2)
    return num / den


def euler_residual(psi: Field, params: ModelParams, beta: float) -> float:
    """Relative residual of ``B (-Delta)^alpha psi + A psi - beta (p+1) |x|^gamma |psi|^(p-1) psi``."""
    e = params.exponents
    w = weight_grid(psi.grid, params.gamma).quadrature
    lin = ifft((e.B * symbol(psi.grid, params.alpha) + e.A) * psi.fourier)
    res = lin - beta * (params.p + 1) * _power(psi.values, w, params.p)
    dv = psi.grid.cell_volume
    num = math.sqrt(float(np.vdot(res, res).real) * dv)
    den = math.sqrt(l2_norm(psi) ** 2 + hs_seminorm(psi, params.alpha) ** 2)
    return num / den


def default_seed(grid: GridSpec) -> Field:
    """``exp(-|x|^2/2)`` scaled to unit mass."""
    g = gaussian(grid, 0.5)
    return g * (1 / l2_norm(g))


def petviashvili_solve(params: ModelParams, grid: GridSpec, seed: Optional[Field] = None,
                       tol: float = 1e-10, max_iter: int = 3000,
                       theta: Optional[float] = None, radial: bool = True) -> GroundStateRecord:
    """Petviashvili iteration for ``(-Delta)^alpha phi + phi = |x|^gamma |phi|^(p-1) phi``.

    ``phi <- M^theta (I + (-Delta)^alpha)^(-1) [|x|^gamma |phi|^(p-1) phi]`` with
    the stabilizing factor ``M = <(I + (-Delta)^alpha) phi, phi> / <|x|^gamma |phi|^(p+1)>``
    and ``theta = p/(p-1)`` unless given.  Stops once the residual drops below
    ``tol``; a run that exhausts ``max_iter`` is returned with ``converged=False``.

    With ``radial=True`` each iterate is projected onto grid functions with
    radial symmetry.  Without it rounding errors seed non-radial modes, which
    grow for ``gamma > 0`` because the weight favours mass far from the origin.
    """
    require_groundstate_regime(params)
    if seed is None:
        seed = default_seed(grid)
    if seed.grid != grid:
        raise InvalidParameterError("seed lives on a different grid")
    if not np.any(seed.values):
        raise DegenerateSeedError("seed is identically zero")
    p = params.p
    theta = p / (p - 1) if theta is None else theta
    w = weight_grid(grid, params.gamma).quadrature
    lin = 1 + symbol(grid, params.alpha)
    dv = grid.cell_volume

    phi = np.array(seed.values, dtype=np.complex128)
    if radial:
        phi = symmetrize(phi)
    history = []
    converged = False
    updates = 0
    for it in range(1, max_iter + 1):
        hat = fft(phi)
        quad = float(np.sum(lin * np.abs(hat) ** 2)) * dv
        nl = _power(phi, w, p)
        P = float(np.sum(w * np.abs(phi) ** (p + 1))) * dv
        if not (P > 1e-300 and quad > 1e-300):
            raise DegenerateSeedError("Petviashvili iteration collapsed to zero")
        stab = quad / P
        res_vec = ifft(lin * hat) - nl
        residual = math.sqrt(float(np.vdot(res_vec, res_vec).real) * dv) / math.sqrt(quad)
        history.append((it - 1, residual, stab))
        if not math.isfinite(residual):
            break
        if residual < tol:
            converged = True
            break
        phi = stab ** theta * ifft(fft(nl) / lin)
        updates += 1
        if radial:
            phi = symmetrize(phi)

    phi = _fix_phase(phi, grid)
    prof = Field(grid, phi)
    rec = _record(prof, params, ProfileKind.EULER_LAGRANGE_UNIT, converged, updates, history)
    rec.extra["stabilizer"] = history[-1][2]
    rec.extra["theta"] = theta
    rec.extra["monotone_after_10"] = residual_monotone(history)
    rec.m_value = rec.action_value
    logger.info("petviashvili: %d iterations, residual %.3e", rec.iterations, rec.residual)
    return rec


def residual_monotone(history: Sequence, start: int = 10) -> bool:
    """Whether residuals in ``history`` are non-increasing after ``start`` iterations."""
    r = [h[1] for h in history[start:]]
    return all(b <= a * (1 + 1e-6) for a, b in zip(r, r[1:]))


def _record(prof: Field, params: ModelParams, kind: ProfileKind, converged: bool,
            iterations: int, history: list) -> GroundStateRecord:
    w = weight_grid(prof.grid, params.gamma).quadrature
    _, M, T, P = _norms(prof.values, prof.grid, params, w)
    if kind is ProfileKind.EULER_LAGRANGE_UNIT:
        res = groundstate_residual(prof, params)
    else:
        res = euler_residual(prof, params, 1 / P)
    return GroundStateRecord(
        profile=prof,
        kind=kind,
        residual=res,
        mass=M,
        seminorm=math.sqrt(T),
        nonlinear_integral=P,
        action_value=0.5 * (M + T) - P / (params.p + 1),
        iterations=iterations,
        converged=converged,
        history=history,
        extra={"boundary_mass_fraction": boundary_mass_fraction(prof)},
    )


def unit_pair_scaling(u: Field, alpha: float) -> tuple[float, float]:
    """``(a, b)`` such that ``a u(b x)`` has unit mass and unit Hdot^alpha seminorm."""
    n = l2_norm(u)
    s = hs_seminorm(u, alpha)
    if n == 0 or s == 0:
        raise DegenerateInputError("cannot normalize a field with zero norm or seminorm")
    N = u.grid.dim
    b = (n / s) ** (1 / alpha)
    a = n ** (N / (2 * alpha) - 1) / s ** (N / (2 * alpha))
    return a, b


def normalize_unit_pair(u: Field, params: ModelParams) -> Field:
    """Return ``a u(b x)`` with ``||.|| = ||(-Delta)^(alpha/2) .|| = 1``.

    The dilation is exact: the samples are kept and the box is rescaled.
    """
    a, b = unit_pair_scaling(u, params.alpha)
    return dilate_exact(u, a, b)


def _pinned_unit_pair(u: Field, params: ModelParams, box: GridSpec) -> Field:
    """Unit-pair normalization that keeps the profile on (nearly) the box ``box``.

    ``a u(b x)`` is resampled onto ``box``; the small constraint defect left
    by interpolation is then removed with an exact regrid, which moves the box
    by a relative amount of the order of that defect.
    """
    a, b = unit_pair_scaling(u, params.alpha)
    v = resample_to_grid(u, box, a, b)
    return normalize_unit_pair(v, params)


def psi_box(params: ModelParams, grid: GridSpec) -> GridSpec:
    """Box carrying the unit-pair minimizer whose rescaled ground state lives on ``grid``."""
    e = params.exponents
    return grid.scaled((e.B / e.A) ** (1 / (2 * params.alpha)))


def minimize_J(params: ModelParams, grid: GridSpec, seed: Optional[Field] = None,
               tol: float = 1e-8, residual_tol: float = 1e-2, max_iter: int = 2000,
               step: float = 1.0, radial: bool = True) -> GroundStateRecord:
    """Preconditioned descent on ``J`` over the unit-pair manifold.

    The descent direction is the ``H^alpha``-type preconditioned gradient of
    ``log J`` at the unit pair,

        d = psi - (p+1)/P (B (-Delta)^alpha + A)^(-1) [|x|^gamma |psi|^(p-1) psi],

    the step is halved until ``J`` decreases, and every trial point is put
    back on the unit pair.  The box is pinned to ``grid``: on a periodic box
    the discrete ``J`` can be lowered indefinitely by widening the profile
    relative to the box, so a normalization that only rescales the box would
    drift.  ``grid`` is the box of the ground state the minimizer maps to;
    ``psi`` itself is carried on the box widened by ``(B/A)^(1/(2 alpha))``
    so that :func:`rescale_minimizer_to_groundstate` lands back on ``grid``.
    Iteration stops once the relative decrease of ``J`` stays below ``tol``
    for 5 consecutive steps; the run counts as converged only if the Euler
    residual is then below ``residual_tol`` as well.  The residual of the
    true minimizer does not go to zero on a finite box (slowly decaying
    tails meet their periodic images), hence the loose default.
    ``beta = 1/P(psi)``.
    """
    require_groundstate_regime(params)
    e = params.exponents
    p = params.p
    if seed is None:
        seed = default_seed(grid)
    if seed.grid.dim != grid.dim or seed.grid.n != grid.n:
        raise InvalidParameterError("seed does not match the grid")
    if not np.any(seed.values):
        raise DegenerateSeedError("seed is identically zero")

    if radial:
        seed = Field(seed.grid, symmetrize(seed.values))
    box = psi_box(params, grid)
    psi = _pinned_unit_pair(seed, params, box)
    history = []
    converged = False
    stalls = 0
    J = _J_unit(psi, params)
    max_defect = 0.0
    for it in range(max_iter):
        g = psi.grid
        w = weight_grid(g, params.gamma).quadrature
        pre = e.B * symbol(g, params.alpha) + e.A
        nl = _power(psi.values, w, p)
        d = psi.values - (p + 1) * J * ifft(fft(nl) / pre)
        if radial:
            d = symmetrize(d)
        res = euler_residual(psi, params, J)
        history.append((it, res, J))
        if stalls >= 5:
            converged = res < residual_tol
            if not converged:
                logger.warning("minimize_J: J stalled with Euler residual %.3e", res)
            break
        tau = step
        accepted = False
        while tau > 1e-10:
            try:
                trial = _pinned_unit_pair(Field(g, psi.values - tau * d), params, box)
            except DegenerateInputError:
                tau /= 2
                continue
            J_new = _J_unit(trial, params)
            if J_new <= J * (1 + 1e-14):
                accepted = True
                break
            tau /= 2
        if not accepted:
            logger.warning("minimize_J: line search failed at iteration %d", it)
            break
        rel = (J - J_new) / J
        psi, J = trial, J_new
        max_defect = max(max_defect, abs(l2_norm(psi) - 1), abs(hs_seminorm(psi, params.alpha) - 1))
        stalls = stalls + 1 if rel < tol else 0

    psi = Field(psi.grid, _fix_phase(np.array(psi.values), psi.grid))
    rec = _record(psi, params, ProfileKind.J_MINIMIZER, converged, len(history) - 1, history)
    rec.beta_value = 1 / rec.nonlinear_integral
    rec.extra["J"] = J
    rec.extra["max_constraint_defect"] = max_defect
    logger.info("minimize_J: %d iterations, residual %.3e, beta %.10g", rec.iterations, rec.residual, rec.beta_value)
    return rec


def _J_unit(u: Field, params: ModelParams) -> float:
    # J at a unit pair is 1/P; computed in full to stay valid off the manifold
    e = params.exponents
    w = weight_grid(u.grid, params.gamma).quadrature
    _, M, T, P = _norms(u.values, u.grid, params, w)
    if not P > 0:
        raise DegenerateInputError("weighted power integral vanishes")
    return T ** (e.B / 2) * M ** (e.A / 2) / P


def rescale_minimizer_to_groundstate(psi: GroundStateRecord, params: ModelParams) -> GroundStateRecord:
    """Map a ``J`` minimizer ``psi`` to a solution ``phi`` of the ground-state equation.

    With ``psi = a phi(b x)``, ``b = (A/B)^(1/(2 alpha))`` and
    ``a = ((A/B)^(gamma/(2 alpha)) A / (beta (p+1)))^(1/(p-1))``.
    """
    if psi.kind is not ProfileKind.J_MINIMIZER:
        raise InvalidParameterError("expected a J-minimizer record")
    e = params.exponents
    if e.B <= 0 or e.A <= 0:
        raise InvalidParameterError("rescaling needs A > 0 and B > 0")
    if params.p <= 1:
        raise InvalidParameterError("rescaling needs p > 1")
    beta = psi.beta_value
    ratio = e.A / e.B
    b = ratio ** (1 / (2 * params.alpha))
    a = (ratio ** (params.gamma / (2 * params.alpha)) * e.A / (beta * (1 + params.p))) ** (1 / (params.p - 1))
    # phi(y) = psi(y / b) / a
    phi = dilate_exact(psi.profile, 1 / a, 1 / b)
    rec = _record(phi, params, ProfileKind.EULER_LAGRANGE_UNIT, psi.converged, psi.iterations, psi.history)
    rec.m_value = rec.action_value
    norm_phi = math.sqrt(rec.mass)
    rec.extra.update(
        scale_a=a,
        scale_b=b,
        beta_from_phi=e.A / (1 + params.p) * ratio ** (-e.B / 2) * norm_phi ** (params.p - 1),
        psi_norm_from_phi=a * b ** (-params.N / 2) * norm_phi,
        beta_minimizer=beta,
    )
    return rec


@dataclass(frozen=True)
class MReport:
    m: float
    K: dict
    max_relative_K: float

    def as_dict(self) -> dict:
        return {"m": self.m, "K": {f"{a:g},{b:g}": v for (a, b), v in self.K.items()},
                "max_relative_K": self.max_relative_K}


def compute_m(phi: GroundStateRecord, params: ModelParams,
              pairs: Sequence[tuple] = DEFAULT_PAIRS) -> MReport:
    """``m = S(phi)`` together with ``K_{a,b}(phi)`` for each pair."""
    M, T, P = phi.mass, phi.seminorm ** 2, phi.nonlinear_integral
    S = 0.5 * (M + T) - P / (params.p + 1)
    Ks = {}
    for a, b in pairs:
        Ks[(float(a), float(b))] = kh_from_parts(M, T, P, params, a, b).K
    scale = M + T
    return MReport(m=S, K=Ks, max_relative_K=max(abs(k) for k in Ks.values()) / scale)


def is_radially_decreasing(phi: Field, rtol: float = 1e-10) -> bool:
    """Check the profile along the first axis is non-increasing in ``r``."""
    from .field import radial_profile

    _, v = radial_profile(phi)
    v = np.abs(v)
    return bool(np.all(np.diff(v) <= rtol * v[0]))
