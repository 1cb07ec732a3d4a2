import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracnls import DomainError, Field, GridSpec, InvalidParameterError, weight_grid
from fracnls.field import (
    angular_asymmetry, apply_fractional_laplacian, dilate_exact, epstein_zeta, fourier_l2_norm, gaussian,
    h_alpha_norm, hs_seminorm, l2_norm, radial_decay_sup, radial_profile, radius, resample_to_grid, ring,
    scale_field_amplitude_dilation, scale_field_exponent, symmetrize, weighted_power_integral,
)
from fracnls.sharpconst import strauss_constant

import oracles

G = GridSpec(2, 256, 12.0)


def test_grid_geometry():
    g = GridSpec(2, 16, 8.0)
    assert g.h == 1.0 and g.cell_volume == 1.0 and g.shape == (16, 16)
    assert g.axis()[0] == -8.0 and g.axis()[-1] == 7.0
    assert g.xi_max == pytest.approx(math.pi)
    for bad in ((2, 24, 4.0), (2, 8, 4.0), (4, 16, 4.0), (2, 16, 0.0)):
        with pytest.raises(InvalidParameterError):
            GridSpec(*bad)


def test_laplacian_of_constant_vanishes():
    u = Field(G, np.full(G.shape, 2.5))
    assert np.max(np.abs(apply_fractional_laplacian(u, 0.7).values)) < 1e-12


def test_plane_wave_is_eigenfunction():
    x, y = G.coords()
    k = np.array([3, -5])
    xi = math.pi * k / G.L
    u = Field(G, np.exp(1j * (xi[0] * x + xi[1] * y)))
    v = apply_fractional_laplacian(u, 0.8)
    lam = np.linalg.norm(xi) ** 1.6
    assert np.max(np.abs(v.values - lam * u.values)) < 1e-10


def test_half_laplacian_of_gaussian_at_origin():
    u = gaussian(G, 0.5)
    origin = (G.n // 2,) * 2
    expected = oracles.radial_integral(2, lambda k: k * mp.exp(-k ** 2 / 2)) / (2 * math.pi)
    v = apply_fractional_laplacian(u, 0.5, corrected=True)
    assert abs(v.values[origin].real - expected) < 1e-6
    # the torus operator misses the cusp of |xi| at the lattice origin
    plain = apply_fractional_laplacian(u, 0.5).values[origin].real
    assert 1e-4 < expected - plain < 1e-3


def test_corrected_symbol_leaves_high_modes_alone():
    from fracnls.field import corrected_symbol, symbol
    diff = corrected_symbol(G, 0.8) != symbol(G, 0.8)
    assert diff.sum() == 1 + 2 * G.dim
    assert diff[0, 0] and diff[1, 0] and diff[-1, 0] and diff[0, 1] and diff[0, -1]


def test_seminorm_examples():
    u = gaussian(G, 0.5)
    assert hs_seminorm(Field.zeros(G), 0.5) == 0.0
    exact = math.sqrt(math.pi * math.gamma(1.5))
    assert exact == pytest.approx(1.6686, abs=1e-4)
    assert exact == pytest.approx(math.sqrt(oracles.gaussian_seminorm_sq(2, 0.5, 0.5)), rel=1e-12)
    assert hs_seminorm(u, 0.5, corrected=True) == pytest.approx(exact, abs=1e-5)
    assert hs_seminorm(u, 0.0) == pytest.approx(l2_norm(u), rel=1e-13)


@pytest.mark.parametrize("N, n, alpha", [(2, 256, 0.8), (3, 64, 0.75)])
def test_corrected_seminorm_converges_faster_in_L(N, n, alpha):
    exact = math.sqrt(oracles.gaussian_seminorm_sq(N, alpha, 0.5))
    errs = {}
    for L in (8.0, 16.0):
        u = gaussian(GridSpec(N, n, L), 0.5)
        errs[L] = (abs(hs_seminorm(u, alpha) - exact), abs(hs_seminorm(u, alpha, corrected=True) - exact))
    # plain error ~ L^-(N + 2 alpha); corrected one is orders of magnitude smaller
    assert errs[8.0][0] / errs[16.0][0] > 2 ** (N + 2 * alpha) * 0.7
    assert errs[8.0][1] < 0.02 * errs[8.0][0] and errs[16.0][1] < 0.02 * errs[16.0][0]


def test_l2_norm_examples():
    u = gaussian(G, 0.5)
    assert l2_norm(u) == pytest.approx(math.sqrt(math.pi), abs=1e-8)
    assert abs(l2_norm(u) - fourier_l2_norm(u)) < 1e-12
    assert l2_norm(u * 2) == pytest.approx(2 * l2_norm(u), rel=1e-15)
    assert h_alpha_norm(u, 0.5) ** 2 == pytest.approx(l2_norm(u) ** 2 + hs_seminorm(u, 0.5) ** 2)


@pytest.mark.parametrize("s", [-0.4, -1.0, -2.4, 3.0, 4.5])
def test_epstein_zeta_two_dim_closed_form(s):
    # sum over Z^2 of |j|^(-s) = 4 zeta(s/2) beta(s/2), valid by analytic continuation
    t = s / 2
    assert epstein_zeta(2, s) == pytest.approx(float(4 * mp.zeta(t) * mp.dirichlet(t, [0, 1, 0, -1])), rel=1e-10)


def test_epstein_zeta_three_dim_brute_force():
    s, R = 9.0, 40
    r = np.arange(-R, R + 1)
    q = sum(j.astype(float) ** 2 for j in np.meshgrid(r, r, r, indexing="ij"))
    q = q[q > 0]
    direct = float(np.sum(q ** (-s / 2)))
    tail = 4 * math.pi * R ** (3 - s) / (s - 3)  # integral estimate of the cut-off part
    assert epstein_zeta(3, s) == pytest.approx(direct, rel=2 * tail / direct + 1e-12)


def test_epstein_pole():
    with pytest.raises(InvalidParameterError):
        epstein_zeta(2, 2.0)


def test_weighted_integral_examples():
    u = gaussian(G, 0.5)
    assert weighted_power_integral(u, weight_grid(G, 0.0), 2) == pytest.approx(l2_norm(u) ** 2, rel=1e-13)
    expected = 2 * math.pi * math.gamma(1.5) / (2 * 1.5 ** 1.5)
    assert weighted_power_integral(u, weight_grid(G, 1.0), 3) == pytest.approx(expected, abs=1e-5)
    assert weighted_power_integral(Field.zeros(G), weight_grid(G, 1.0), 3) == 0.0


@pytest.mark.parametrize("N, gamma", [(2, 0.4), (2, 0.7), (3, 0.5), (2, -0.5)])
def test_corrected_weights_beat_plain_samples(N, gamma):
    g = GridSpec(N, 64, 6.0)
    u = gaussian(g, 0.7)
    exact = oracles.gaussian_weighted_power(N, gamma, 0.7, 3.0)
    corrected = weighted_power_integral(u, weight_grid(g, gamma), 3.0)
    plain = weighted_power_integral(u, weight_grid(g, gamma, corrected=False), 3.0)
    assert abs(corrected - exact) < 0.05 * abs(plain - exact)
    assert abs(corrected - exact) / exact < 1e-5


def test_weights_scale_with_grid():
    g = GridSpec(2, 32, 5.0)
    w1 = weight_grid(g, 0.4).quadrature
    w2 = weight_grid(g.scaled(2.0), 0.4).quadrature
    assert np.allclose(w2, 2 ** 0.4 * w1, rtol=1e-13, atol=0)


def test_radial_decay_sup_examples():
    g = GridSpec(3, 32, 8.0)
    assert radial_decay_sup(Field.zeros(g), 0.75) == 0.0
    vals = np.zeros(g.shape, dtype=complex)
    idx = (20, 16, 16)
    vals[idx] = 3 - 4j
    r = radius(g)[idx]
    assert radial_decay_sup(Field(g, vals), 0.75) == pytest.approx(r ** 0.75 * 5.0, rel=1e-14)
    g = GridSpec(3, 64, 10.0)
    u = gaussian(g, 0.5)
    assert radial_decay_sup(u, 0.75) <= 1.02 * strauss_constant(3, 0.75) * hs_seminorm(u, 0.75)
    with pytest.raises(InvalidParameterError):
        radial_decay_sup(u, 0.4)


def test_amplitude_dilation_examples():
    u = gaussian(G, 0.5)
    assert np.array_equal(scale_field_amplitude_dilation(u, 1, 1).values, u.values)
    assert l2_norm(scale_field_amplitude_dilation(u, 2, 1)) == 2 * l2_norm(u)
    v = scale_field_amplitude_dilation(u, 1, 2)
    assert l2_norm(v) ** 2 == pytest.approx(0.25 * l2_norm(u) ** 2, rel=1e-6)
    # pointwise oracle for the interpolated dilation
    assert np.allclose(v.values, gaussian(G, 2.0).values, atol=1e-10)


def test_dilation_pushing_mass_out_raises():
    with pytest.raises(DomainError):
        scale_field_amplitude_dilation(gaussian(G, 0.05), 1.0, 0.5)


def test_scale_exponent_examples():
    u = gaussian(G, 0.5)
    assert np.array_equal(scale_field_exponent(u, 1, 1, 1.0).values, u.values)
    assert np.allclose(scale_field_exponent(u, 0, 0, 2.0).values, u.values, atol=1e-13)
    v = scale_field_exponent(u, 1, 1, 1.5)
    assert l2_norm(v) ** 2 == pytest.approx(1.5 ** 4 * l2_norm(u) ** 2, rel=1e-6)


def test_dilate_exact_matches_interpolation():
    u = gaussian(G, 0.5)
    d = dilate_exact(u, 1.3, 1.25)
    r = resample_to_grid(d, G)
    assert np.allclose(r.values, 1.3 * gaussian(G, 0.5 * 1.25 ** 2).values, atol=1e-9)
    assert l2_norm(d) ** 2 == pytest.approx(1.3 ** 2 / 1.25 ** 2 * l2_norm(u) ** 2, rel=1e-13)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10, deadline=None)
def test_symmetrize_is_idempotent_projection(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(2, 16, 3.0)
    v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    s = symmetrize(v)
    assert np.allclose(symmetrize(s), s, atol=1e-13)
    assert angular_asymmetry(Field(g, s)) < 1e-13


def test_radial_profile_and_ring():
    u = ring(G, 2, 1.0)
    r, v = radial_profile(u)
    assert r[0] == 0.0 and np.allclose(v.real, r ** 2 * np.exp(-r ** 2), atol=1e-15)
    assert angular_asymmetry(u) < 1e-13


def test_field_arithmetic_grid_mismatch():
    with pytest.raises(InvalidParameterError):
        gaussian(G, 0.5) + gaussian(GridSpec(2, 128, 12.0), 0.5)
    with pytest.raises(InvalidParameterError):
        Field(G, np.zeros((3, 3)))


def test_resample_reads_zero_outside_source_box():
    src = GridSpec(2, 64, 6.0)
    wide = GridSpec(2, 64, 12.0)
    u = gaussian(src, 1.0)
    v = resample_to_grid(u, wide, 1.0, 1.0)
    x, y = np.meshgrid(wide.axis(), wide.axis(), indexing="ij")
    box = np.maximum(np.abs(x), np.abs(y))
    far = box > 6.5
    assert np.max(np.abs(v.values[far])) == 0.0
    near = box < 4
    ref = np.exp(-(x ** 2 + y ** 2))
    assert np.max(np.abs(v.values[near] - ref[near])) < 1e-10
