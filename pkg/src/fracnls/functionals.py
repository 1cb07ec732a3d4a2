"""Conserved and variational functionals.

Notation: ``M = ||u||^2``, ``T = ||(-Delta)^(alpha/2) u||^2`` and
``P = int |x|^gamma |u|^(p+1)``.  The two-parameter scaling is
``u^lam_{a,b}(x) = lam^a u(x / lam^b)`` under which

    M -> lam^(2a + Nb) M,   T -> lam^(2a + (N - 2 alpha) b) T,
    P -> lam^((p+1) a + (N + gamma) b) P,

so ``K_{a,b} = d/dlam S(u^lam_{a,b})`` at ``lam = 1`` is a linear
combination of ``M``, ``T`` and ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import DegenerateInputError
from .field import Field, hs_seminorm, l2_norm, weight_grid, weighted_power_integral
from .params import ModelParams


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    energy: float
    action: float
    weinstein: float
    nonlinear_integral: float
    sigma_norm: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class KHReport:
    a: float
    b: float
    K: float
    H: float
    K_quad: float
    K_nonlin: float
    # K with the alternative quadratic coefficient (2a + (N - alpha) b)/2,
    # kept for comparison only
    K_alt_variant: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _parts(u: Field, params: ModelParams, corrected: bool = False) -> tuple[float, float, float]:
    M = l2_norm(u) ** 2
    T = hs_seminorm(u, params.alpha, corrected) ** 2
    P = nonlinear_integral(u, params)
    return M, T, P


def nonlinear_integral(u: Field, params: ModelParams) -> float:
    return weighted_power_integral(u, weight_grid(u.grid, params.gamma), params.p + 1)


def mass(u: Field) -> float:
    return l2_norm(u) ** 2


def energy(u: Field, params: ModelParams, corrected: bool = False) -> float:
    """``E = T/2 - epsilon P / (p+1)``.

    ``corrected`` switches ``T`` to its whole-space quadrature; the default
    is the discrete energy of the torus problem.
    """
    _, T, P = _parts(u, params, corrected)
    return 0.5 * T - params.epsilon * P / (params.p + 1)


def action(u: Field, params: ModelParams, corrected: bool = False) -> float:
    """``S = (M + T)/2 - P/(p+1)`` (focusing sign)."""
    M, T, P = _parts(u, params, corrected)
    return 0.5 * (M + T) - P / (params.p + 1)


def weinstein_J(u: Field, params: ModelParams, corrected: bool = False) -> float:
    """``J = T^(B/2) M^(A/2) / P``."""
    e = params.exponents
    M, T, P = _parts(u, params, corrected)
    if not P > 0:
        raise DegenerateInputError("weighted power integral vanishes; J undefined")
    return T ** (e.B / 2) * M ** (e.A / 2) / P


def functional_report(u: Field, params: ModelParams, corrected: bool = False) -> FunctionalReport:
    e = params.exponents
    M, T, P = _parts(u, params, corrected)
    E = 0.5 * T - params.epsilon * P / (params.p + 1)
    S = 0.5 * (M + T) - P / (params.p + 1)
    J = T ** (e.B / 2) * M ** (e.A / 2) / P if P > 0 else float("inf")
    return FunctionalReport(
        mass=M,
        energy=E,
        action=S,
        weinstein=J,
        nonlinear_integral=P,
        sigma_norm=P ** (1 / (params.p + 1)),
    )


def scaling_rates(params: ModelParams, a: float, b: float) -> tuple[float, float, float]:
    """Exponents of ``lam`` picked up by ``M``, ``T`` and ``P``."""
    N, alpha, gamma, p = params.N, params.alpha, params.gamma, params.p
    return 2 * a + N * b, 2 * a + (N - 2 * alpha) * b, (p + 1) * a + (N + gamma) * b


def kh_from_parts(M: float, T: float, P: float, params: ModelParams, a: float, b: float) -> KHReport:
    rm, rt, rp = scaling_rates(params, a, b)
    S = 0.5 * (M + T) - P / (params.p + 1)
    K_quad = 0.5 * rm * M + 0.5 * rt * T
    K_nonlin = -rp / (params.p + 1) * P
    K = K_quad + K_nonlin
    alt = 0.5 * rm * M + 0.5 * (2 * a + (params.N - params.alpha) * b) * T + K_nonlin
    H = S - K / rm if rm != 0 else float("nan")
    return KHReport(a=a, b=b, K=K, H=H, K_quad=K_quad, K_nonlin=K_nonlin, K_alt_variant=alt)


def K_ab(u: Field, params: ModelParams, a: float, b: float) -> KHReport:
    """Scaling derivative ``K_{a,b}`` of the action together with ``H_{a,b}``.

    ``H = S - K/(2a + Nb)`` is undefined (``nan``) when ``2a + Nb = 0``; use
    :func:`H_ab` to get an error instead.
    """
    return kh_from_parts(*_parts(u, params), params, a, b)


def H_ab(u: Field, params: ModelParams, a: float, b: float) -> float:
    if 2 * a + params.N * b == 0:
        raise DegenerateInputError("2a + Nb = 0: H_{a,b} is undefined")
    return K_ab(u, params, a, b).H


def action_of_scaled(u: Field, params: ModelParams, a: float, b: float, lam: float) -> float:
    """``S(u^lam_{a,b})`` evaluated through the exact scaling laws of ``M``, ``T``, ``P``."""
    M, T, P = _parts(u, params)
    rm, rt, rp = scaling_rates(params, a, b)
    return 0.5 * (lam ** rm * M + lam ** rt * T) - lam ** rp * P / (params.p + 1)
