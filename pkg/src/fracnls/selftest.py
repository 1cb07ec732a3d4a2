"""Quick internal consistency battery behind ``fracnls selftest`` (a few seconds)."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma as gamma_fn

from .config import parse_config
from .evolution import linear_propagator_step, nonlinear_phase_step, orbital_distance
from .exceptions import ConfigError
from .field import GridSpec, dilate_exact, gaussian, h_alpha_norm, l2_norm, ring, weight_grid
from .functionals import K_ab, action
from .params import CRITICAL_ATOL, ModelParams, critical_p
from .sharpconst import strauss_check
from .storage import field_from_bytes, field_to_bytes


def _exponents(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        N = int(rng.integers(2, 4))
        alpha = float(rng.uniform(0.55, 0.95))
        gamma = float(rng.uniform(0, 1))
        p = float(rng.uniform(1.5, 5))
        e = ModelParams(N, alpha, gamma, p).exponents
        worst = max(worst, abs(e.A + e.B - (p + 1)))
        pc = critical_p(N, alpha, gamma)
        if abs(ModelParams(N, alpha, gamma, pc).exponents.B - 2) > CRITICAL_ATOL:
            return False, f"B != 2 at p_c for {(N, alpha, gamma)}"
    return worst <= 1e-12, f"max |A+B-(p+1)| = {worst:.2e}"


def _k_derivative() -> tuple[bool, str]:
    g = GridSpec(2, 64, 8.0)
    params = ModelParams(2, 0.8, 0.4, 3.0)
    worst = 0.0
    for u in (gaussian(g, 0.7), ring(g, 1, 0.9) + gaussian(g, 1.3, 0.5)):
        for a, b in ((1, 0), (1, 1), (2, 1)):
            h = 1e-4
            sp = action(dilate_exact(u, (1 + h) ** a, (1 + h) ** (-b)), params)
            sm = action(dilate_exact(u, (1 - h) ** a, (1 - h) ** (-b)), params)
            fd = (sp - sm) / (2 * h)
            K = K_ab(u, params, a, b).K
            worst = max(worst, abs(K - fd) / abs(K))
    return worst < 1e-5, f"max relative gap {worst:.2e}"


def _propagator() -> tuple[bool, str]:
    g = GridSpec(2, 64, 8.0)
    u = gaussian(g, 0.5) + ring(g, 2, 0.8)
    v = linear_propagator_step(u, 0.3, 0.7)
    iso = abs(l2_norm(v) - l2_norm(u)) / l2_norm(u)
    w1 = linear_propagator_step(linear_propagator_step(u, 0.2, 0.7), 0.5, 0.7)
    w2 = linear_propagator_step(u, 0.7, 0.7)
    group = l2_norm(w1 - w2) / l2_norm(u)
    return iso < 1e-14 and group < 1e-13, f"isometry {iso:.1e}, group law {group:.1e}"


def _phase() -> tuple[bool, str]:
    g = GridSpec(2, 64, 8.0)
    u = gaussian(g, 0.5, 1.3)
    v = nonlinear_phase_step(u, 0.4, weight_grid(g, 0.4), 3.0, 1)
    err = float(np.max(np.abs(np.abs(v.values) - np.abs(u.values))))
    return err < 1e-15, f"max modulus change {err:.1e}"


def _gamma() -> tuple[bool, str]:
    cases = [(5.0, 24.0), (0.5, math.sqrt(math.pi)), (3.5, 15 * math.sqrt(math.pi) / 8), (1.0, 1.0)]
    worst = max(abs(gamma_fn(x) - v) / v for x, v in cases)
    return worst < 1e-12, f"max relative error {worst:.1e}"


def _container() -> tuple[bool, str]:
    g = GridSpec(2, 32, 5.0)
    u = gaussian(g, 0.5) * (1 + 0.5j)
    back = field_from_bytes(field_to_bytes(u))
    ok = back.grid == g and np.array_equal(back.values, u.values)
    return ok, "round trip exact" if ok else "round trip mismatch"


def _orbit() -> tuple[bool, str]:
    g = GridSpec(2, 32, 5.0)
    phi = gaussian(g, 0.5)
    u = gaussian(g, 0.6, 1.1) * np.exp(0.3j)
    thetas = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
    brute = min(h_alpha_norm(u - phi * np.exp(1j * t), 0.8) for t in thetas[::10])
    # refine around the coarse optimum
    t0 = thetas[::10][int(np.argmin([h_alpha_norm(u - phi * np.exp(1j * t), 0.8) for t in thetas[::10]]))]
    fine = np.linspace(t0 - 2 * np.pi / 1000, t0 + 2 * np.pi / 1000, 1001)
    brute = min(brute, min(h_alpha_norm(u - phi * np.exp(1j * t), 0.8) for t in fine))
    closed = orbital_distance(u, phi, 0.8)
    return abs(closed - brute) < 1e-8, f"closed {closed:.10f}, brute {brute:.10f}"


def _config() -> tuple[bool, str]:
    try:
        parse_config("[params]\nN = 2\nbogus = 1\n")
    except ConfigError as exc:
        return ":3:" in str(exc), "unknown key rejected with line context"
    return False, "unknown key accepted"


def _strauss() -> tuple[bool, str]:
    g = GridSpec(2, 128, 12.0)
    pairs = strauss_check([gaussian(g, c) for c in (0.3, 1.0, 3.0)], 0.8)
    worst = max(a / b for a, b in pairs)
    return worst <= 1.05, f"worst ratio {worst:.4f}"


def run_selftest(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "exponent_identities": _exponents(rng),
        "K_derivative": _k_derivative(),
        "linear_propagator": _propagator(),
        "nonlinear_phase": _phase(),
        "gamma_closed_forms": _gamma(),
        "field_container": _container(),
        "orbital_distance": _orbit(),
        "config_rejects_unknown_keys": _config(),
        "strauss_bound": _strauss(),
    }
