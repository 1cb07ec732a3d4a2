"""Periodic Cartesian grids, sampled complex fields and spectral operators.

Conventions
-----------
The box is ``[-L, L)^dim`` with ``n`` points per axis, ``x_j = -L + j h`` and
``h = 2L/n``.  Fourier modes use the unitary DFT (``norm="ortho"``) with
angular frequencies ``xi_k = pi k / L``.  Integrals are approximated by
``h^dim * sum``; with the unitary transform Parseval holds exactly, so
``||u||^2 = h^dim sum |u_j|^2 = h^dim sum |u_hat_k|^2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .exceptions import DomainError, InvalidParameterError

#: default desk-scale grids, keyed by dimension
DEFAULT_GRIDS = {1: (1024, 20.0), 2: (256, 12.0), 3: (64, 10.0)}


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridSpec:
    dim: int
    n: int
    L: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidParameterError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 16 or self.n & (self.n - 1):
            raise InvalidParameterError(f"n must be a power of two >= 16, got {self.n}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidParameterError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @classmethod
    def default(cls, dim: int) -> "GridSpec":
        n, L = DEFAULT_GRIDS[dim]
        return cls(dim, n, L)

    @property
    def h(self) -> float:
        return 2 * self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def xi_max(self) -> float:
        return math.pi * self.n / (2 * self.L)

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    def frequencies(self) -> np.ndarray:
        """Angular frequencies in FFT order, ``pi k / L``."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def coords(self) -> list:
        """Sparse open mesh of coordinates (one broadcastable array per axis)."""
        return np.meshgrid(*([self.axis()] * self.dim), indexing="ij", sparse=True)

    def scaled(self, factor: float) -> "GridSpec":
        return GridSpec(self.dim, self.n, self.L * factor)

    def as_dict(self) -> dict:
        return {"dim": self.dim, "n": self.n, "L": self.L}


@lru_cache(maxsize=32)
def radius(grid: GridSpec) -> np.ndarray:
    r2 = sum(c ** 2 for c in grid.coords())
    return _readonly(np.sqrt(r2 * np.ones(grid.shape)))


@lru_cache(maxsize=32)
def xi_abs(grid: GridSpec) -> np.ndarray:
    k = np.meshgrid(*([grid.frequencies()] * grid.dim), indexing="ij", sparse=True)
    return _readonly(np.sqrt(sum(c ** 2 for c in k) * np.ones(grid.shape)))


@lru_cache(maxsize=64)
def symbol(grid: GridSpec, order: float) -> np.ndarray:
    """Fourier symbol ``|xi|^(2 order)``; ``0^0 = 1``."""
    return _readonly(xi_abs(grid) ** (2 * order))


@lru_cache(maxsize=64)
def corrected_symbol(grid: GridSpec, order: float) -> np.ndarray:
    """``|xi|^(2 order)`` as quadrature weights on the frequency lattice.

    Sums ``sum_k |xi_k|^(2 order) F(xi_k)`` over the lattice of spacing
    ``pi/L`` carry an ``O((pi/L)^(N + 2 order))`` error from the cusp at
    ``xi = 0``; this is the reciprocal-space twin of the ``|x|^gamma`` weight
    and takes the same origin and neighbour corrections (see
    :func:`weight_grid`).  Used for continuum values of seminorms and of
    ``(-Delta)^order u`` for decaying ``u``; the torus operator itself keeps
    the plain :func:`symbol`.
    """
    q = np.array(symbol(grid, order))
    s = 2 * float(order)
    if s > 0 and not float(s / 2).is_integer():
        c0, c1 = _origin_corrections(grid.dim, s)
        dk = (math.pi / grid.L) ** s
        q[(0,) * grid.dim] = c0 * dk
        for ax in range(grid.dim):
            for step in (-1, 1):
                idx = [0] * grid.dim
                idx[ax] = step
                q[tuple(idx)] += c1 * dk
    return _readonly(q)


def fft(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, norm="ortho")


def ifft(hat: np.ndarray) -> np.ndarray:
    return sfft.ifftn(hat, norm="ortho")


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a :class:`GridSpec`.

    Values are stored read-only; operations return new fields.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.shape != self.grid.shape:
            raise InvalidParameterError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", _readonly(v))

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable) -> "Field":
        """Sample ``func(r)`` for radial profiles (called with the radius array)."""
        return cls(grid, func(radius(grid)))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @cached_property
    def fourier(self) -> np.ndarray:
        return _readonly(fft(self.values))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def __mul__(self, c) -> "Field":
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def __repr__(self) -> str:
        return f"Field(grid={self.grid!r}, l2={l2_norm(self):.6g})"


def _same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise InvalidParameterError(f"grid mismatch: {u.grid} vs {v.grid}")


def fourier_multiplier(u: Field, sym: np.ndarray) -> Field:
    return Field(u.grid, ifft(sym * u.fourier))


def apply_fractional_laplacian(u: Field, order: float, corrected: bool = False) -> Field:
    """``(-Delta)^order u`` via the multiplier ``|xi|^(2 order)``.

    The plain torus operator annihilates the zero mode.  With ``corrected``
    the multiplier carries the low-mode quadrature corrections, giving the
    whole-space values for decaying ``u``.
    """
    if not (0 < order <= 2):
        raise InvalidParameterError(f"order must lie in (0, 2], got {order}")
    return fourier_multiplier(u, corrected_symbol(u.grid, order) if corrected else symbol(u.grid, order))


def l2_norm(u: Field) -> float:
    return math.sqrt(float(np.vdot(u.values, u.values).real) * u.grid.cell_volume)


def fourier_l2_norm(u: Field) -> float:
    return math.sqrt(float(np.vdot(u.fourier, u.fourier).real) * u.grid.cell_volume)


def hs_seminorm(u: Field, alpha: float, corrected: bool = False) -> float:
    """Homogeneous Sobolev seminorm ``||(-Delta)^(alpha/2) u||``.

    The default is the seminorm of the torus operator, the one entering the
    discrete functionals.  ``corrected=True`` approximates the whole-space
    value of a decaying field instead (see :func:`corrected_symbol`).
    """
    w = corrected_symbol(u.grid, alpha) if corrected else symbol(u.grid, alpha)
    return math.sqrt(float(np.sum(w * np.abs(u.fourier) ** 2)) * u.grid.cell_volume)


def l2_inner(u: Field, v: Field) -> complex:
    """``int u conj(v) dx``."""
    _same_grid(u, v)
    return complex(np.vdot(v.values, u.values)) * u.grid.cell_volume


def h_alpha_inner(u: Field, v: Field, alpha: float) -> complex:
    """Inner product of ``H^alpha`` with weight ``1 + |xi|^(2 alpha)``."""
    _same_grid(u, v)
    w = 1.0 + symbol(u.grid, alpha)
    return complex(np.sum(w * u.fourier * np.conj(v.fourier))) * u.grid.cell_volume


def h_alpha_norm(u: Field, alpha: float) -> float:
    return math.sqrt(l2_norm(u) ** 2 + hs_seminorm(u, alpha) ** 2)


# --------------------------------------------------------------------------
# the weight |x|^gamma
# --------------------------------------------------------------------------

def unit_ball_volume(N: int) -> float:
    return math.pi ** (N / 2) / gamma_fn(N / 2 + 1)


def sphere_area(N: int) -> float:
    """Surface measure ``S_{N-1}`` of the unit sphere in R^N."""
    return 2 * math.pi ** (N / 2) / gamma_fn(N / 2)


@dataclass(frozen=True, eq=False)
class WeightGrid:
    """Samples of ``|x|^gamma`` and the quadrature weights built from them.

    ``samples`` are the pointwise values (origin regularized, see
    :func:`weight_grid`).  ``quadrature`` holds the weights actually used in
    integrals and in the nonlinearity: ``samples`` away from the origin plus
    a lattice-sum correction on the origin and its ``2N`` neighbours.
    """

    grid: GridSpec
    gamma: float
    samples: np.ndarray
    quadrature: np.ndarray


def epstein_zeta(N: int, s: float, cutoff: int = 7) -> float:
    """``Z_N(s) = sum_{j in Z^N, j != 0} |j|^(-s)``, analytically continued in ``s``.

    Uses the theta-function splitting

        pi^(-s/2) Gamma(s/2) Z_N(s) = 2/(s-N) - 2/s
            + sum_{j != 0} [E(s/2, pi|j|^2) + E((N-s)/2, pi|j|^2)],

    with ``E(a, x) = int_1^inf t^(a-1) exp(-x t) dt``; terms decay like
    ``exp(-pi |j|^2)`` so ``|j_i| <= cutoff`` is ample.
    """
    if s == N:
        raise InvalidParameterError("Z_N has a pole at s = N")
    if s <= 0 and float(s / 2).is_integer():
        return -1.0 if s == 0 else 0.0
    r = np.arange(-cutoff, cutoff + 1)
    q = sum(j ** 2 for j in np.meshgrid(*([r] * N), indexing="ij")).ravel()
    vals, counts = np.unique(q[q > 0], return_counts=True)
    total = 0.0
    for v, c in zip(vals, counts):
        x = math.pi * float(v)
        total += c * (_upper_tail(s / 2, x) + _upper_tail((N - s) / 2, x))
    return (2 / (s - N) - 2 / s + total) * math.pi ** (s / 2) / gamma_fn(s / 2)


def _upper_tail(a: float, x: float) -> float:
    # int_1^inf t^(a-1) e^(-x t) dt
    return quad(lambda t: t ** (a - 1) * math.exp(-x * t), 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]


@lru_cache(maxsize=64)
def _origin_corrections(N: int, gamma: float) -> tuple[float, float]:
    """Coefficients ``(c0, c1)``: origin weight ``c0 h^gamma``, neighbour shift ``c1 h^gamma``."""
    z0 = epstein_zeta(N, -gamma)
    z2 = epstein_zeta(N, -gamma - 2)
    return -z0 + z2, -z2 / (2 * N)


@lru_cache(maxsize=32)
def weight_grid(grid: GridSpec, gamma: float, corrected: bool = True) -> WeightGrid:
    """Samples of ``|x|^gamma`` with their quadrature weights.

    Pointwise samples: for ``gamma > 0`` the origin sample is 0, for
    ``gamma = 0`` it is 1, and for ``-N < gamma < 0`` the origin cell gets the
    mean of ``|x|^gamma`` over the ball with the cell's volume,
    ``N/(N+gamma) R^gamma`` with ``V_N R^N = h^N``.

    Quadrature weights: the trapezoidal sum of ``|x|^gamma f`` has error
    ``-Z_N(-gamma) h^(N+gamma) f(0) - Z_N(-gamma-2) h^(N+gamma+2) Lap f(0)/(2N)``
    for smooth ``f``.  Both terms are cancelled by reweighting the origin and
    its axis neighbours (the Laplacian by the 5/7-point stencil), leaving an
    ``O(h^(N+gamma+4))`` error.  The correction vanishes when ``gamma`` is an
    even integer (the weight is then a polynomial).  Every weight scales like
    ``h^gamma``, so exact grid dilations commute with the weight.
    """
    N = grid.dim
    if gamma <= -N:
        raise InvalidParameterError("gamma must exceed -N")
    r = radius(grid)
    if gamma == 0:
        w = np.ones(grid.shape)
    else:
        with np.errstate(divide="ignore"):
            w = r ** gamma
        if gamma < 0:
            R = grid.h / unit_ball_volume(N) ** (1 / N)
            w[r == 0] = N / (N + gamma) * R ** gamma
        else:
            w[r == 0] = 0.0
    q = w.copy()
    if corrected and not (gamma >= 0 and float(gamma / 2).is_integer()):
        c0, c1 = _origin_corrections(N, float(gamma))
        hg = grid.h ** gamma
        centre = (grid.n // 2,) * N
        q[centre] = c0 * hg
        for ax in range(N):
            for step in (-1, 1):
                idx = list(centre)
                idx[ax] += step
                q[tuple(idx)] += c1 * hg
    return WeightGrid(grid, gamma, _readonly(w), _readonly(q))


def weighted_power_integral(u: Field, w: WeightGrid, q: float) -> float:
    """``int w |u|^q dx``."""
    if q < 1:
        raise InvalidParameterError("q must be >= 1")
    if w.grid != u.grid:
        raise InvalidParameterError("weight and field live on different grids")
    return float(np.sum(w.quadrature * np.abs(u.values) ** q)) * u.grid.cell_volume


def sigma_norm(u: Field, w: WeightGrid, p: float) -> float:
    return weighted_power_integral(u, w, p + 1) ** (1 / (p + 1))


def radial_decay_sup(u: Field, alpha: float) -> float:
    """``max_{x != 0} |x|^(N/2 - alpha) |u(x)|`` over the grid."""
    N = u.grid.dim
    if not (0.5 < alpha < N / 2):
        raise InvalidParameterError(f"need 1/2 < alpha < N/2, got alpha={alpha}, N={N}")
    r = radius(u.grid)
    mask = r > 0
    return float(np.max(r[mask] ** (N / 2 - alpha) * np.abs(u.values[mask])))


# --------------------------------------------------------------------------
# scalings
# --------------------------------------------------------------------------

def _interp_matrix(grid: GridSpec, targets: np.ndarray, outside_zero: bool = False) -> np.ndarray:
    """Trigonometric interpolation matrix acting on unnormalized FFT coefficients.

    With ``outside_zero`` rows for targets more than half a cell outside the
    box are zeroed, so the field reads as vanishing there instead of
    repeating periodically.
    """
    n = grid.n
    xi = grid.frequencies()
    shift = targets[:, None] + grid.L
    E = np.exp(1j * shift * xi[None, :]) / n
    E[:, n // 2] = np.cos(shift[:, 0] * abs(xi[n // 2])) / n
    if outside_zero:
        E[np.abs(targets) > grid.L + grid.h / 2] = 0.0
    return E


def boundary_mass_fraction(u: Field, band: float = 0.1) -> float:
    """Fraction of the mass in the outer band ``max_i |x_i| >= (1 - band) L``."""
    c = u.grid.coords()
    m = np.zeros(u.grid.shape, dtype=bool)
    for ax in c:
        m = m | (np.abs(ax) >= (1 - band) * u.grid.L)
    tot = float(np.sum(np.abs(u.values) ** 2))
    return float(np.sum(np.abs(u.values[m]) ** 2)) / tot if tot > 0 else 0.0


def scale_field_amplitude_dilation(u: Field, a: float, b: float, support_tol: float = 1e-12) -> Field:
    """Resample ``a u(b x)`` on the same grid by band-limited interpolation.

    ``u`` is read as a function vanishing outside its box, so points with
    some ``|b x_i| > L`` get the value 0.  For ``b < 1`` the part of
    ``u`` outside ``[-bL, bL)^dim`` is pushed out of the box; a
    :class:`DomainError` is raised if it carries more than ``support_tol`` of
    the mass.
    """
    if not b > 0:
        raise InvalidParameterError("dilation factor b must be positive")
    grid = u.grid
    if b < 1:
        c = grid.coords()
        outside = np.zeros(grid.shape, dtype=bool)
        for ax in c:
            outside = outside | (np.abs(ax) > b * grid.L)
        tot = float(np.sum(np.abs(u.values) ** 2))
        if tot > 0 and float(np.sum(np.abs(u.values[outside]) ** 2)) > support_tol * tot:
            raise DomainError(f"dilation b={b} pushes more than {support_tol:g} of the mass out of the box")
    if b == 1:
        return Field(grid, a * u.values)
    E = _interp_matrix(grid, b * grid.axis(), outside_zero=True)
    arr = u.values
    for ax in range(grid.dim):
        arr = np.fft.fft(arr, axis=ax)
        arr = np.moveaxis(np.tensordot(E, arr, axes=([1], [ax])), 0, ax)
    return Field(grid, a * arr)


def resample_to_grid(u: Field, target: GridSpec, a: float = 1.0, b: float = 1.0) -> Field:
    """Evaluate ``a u(b x)`` at the points of ``target`` (same ``dim`` and ``n``).

    ``u`` is read as the trigonometric interpolant of its samples inside its
    box and as 0 outside it; reading periodic images instead would plant
    copies of ``u`` at the symmetric points of the target torus.
    """
    if target.dim != u.grid.dim or target.n != u.grid.n:
        raise InvalidParameterError("resampling keeps dim and n")
    if not b > 0:
        raise InvalidParameterError("dilation factor b must be positive")
    E = _interp_matrix(u.grid, b * target.axis(), outside_zero=True)
    arr = u.values
    for ax in range(target.dim):
        arr = np.fft.fft(arr, axis=ax)
        arr = np.moveaxis(np.tensordot(E, arr, axes=([1], [ax])), 0, ax)
    return Field(target, a * arr)


def scale_field_exponent(u: Field, a: float, b: float, lam: float, support_tol: float = 1e-12) -> Field:
    """``lam^a u(x / lam^b)`` resampled on the same grid."""
    if not lam > 0:
        raise InvalidParameterError("lambda must be positive")
    return scale_field_amplitude_dilation(u, lam ** a, lam ** (-b), support_tol=support_tol)


def dilate_exact(u: Field, a: float, b: float) -> Field:
    """``a u(b x)`` represented exactly: same samples on the box ``[-L/b, L/b)``."""
    if not b > 0:
        raise InvalidParameterError("dilation factor b must be positive")
    return Field(u.grid.scaled(1 / b), a * u.values)


# --------------------------------------------------------------------------
# symmetry diagnostics
# --------------------------------------------------------------------------

def _reflect(values: np.ndarray, ax: int) -> np.ndarray:
    n = values.shape[ax]
    idx = (-np.arange(n)) % n
    return np.take(values, idx, axis=ax)


def symmetrize(values: np.ndarray) -> np.ndarray:
    """Average ``values`` over axis reflections and axis permutations.

    This is the orthogonal projection onto grid functions with the symmetry
    of a radial function.
    """
    v = values
    for ax in range(v.ndim):
        v = 0.5 * (v + _reflect(v, ax))
    if v.ndim == 2:
        v = 0.5 * (v + v.T)
    elif v.ndim == 3:
        perms = list(itertools.permutations(range(3)))
        v = sum(np.transpose(v, q) for q in perms) / len(perms)
    return v


def angular_asymmetry(u: Field) -> float:
    """Max relative L2 change under axis reflections and axis swaps.

    Radial fields on the grid are invariant under this group (which contains
    the 90 degree rotations).
    """
    nrm = float(np.linalg.norm(u.values))
    if nrm == 0:
        return 0.0
    v = u.values
    out = 0.0
    for ax in range(u.grid.dim):
        out = max(out, float(np.linalg.norm(v - _reflect(v, ax))) / nrm)
    for i in range(u.grid.dim):
        for j in range(i + 1, u.grid.dim):
            out = max(out, float(np.linalg.norm(v - np.swapaxes(v, i, j))) / nrm)
    return out


def radial_profile(u: Field) -> tuple[np.ndarray, np.ndarray]:
    """Samples along the positive first axis through the origin: ``(r, u(r))``."""
    n = u.grid.n
    mid = n // 2
    idx = (slice(mid, None),) + (mid,) * (u.grid.dim - 1)
    return u.grid.axis()[mid:], np.asarray(u.values[idx])


def gaussian(grid: GridSpec, c: float = 0.5, amplitude: float = 1.0) -> Field:
    """``amplitude * exp(-c |x|^2)``."""
    return Field.from_function(grid, lambda r: amplitude * np.exp(-c * r ** 2))


def ring(grid: GridSpec, k: float, c: float = 1.0, amplitude: float = 1.0) -> Field:
    """``amplitude * |x|^k exp(-c |x|^2)``."""
    return Field.from_function(grid, lambda r: amplitude * r ** k * np.exp(-c * r ** 2))


def default_grid(dim: int, n: Optional[int] = None, L: Optional[float] = None) -> GridSpec:
    n0, L0 = DEFAULT_GRIDS[dim]
    return GridSpec(dim, n or n0, L or L0)
