"""Estimator-style wrappers around the solvers.

Each estimator stores its hyperparameters verbatim in ``__init__`` (so
``get_params``/``set_params``/``clone`` work), takes a seed field in
``fit`` and exposes results as trailing-underscore attributes.  The spatial
dimension is read from the seed's grid.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .evolution import EvolutionConfig, evolve, propagate
from .field import Field
from .functionals import weinstein_J
from .groundstate import (
    DEFAULT_PAIRS,
    compute_m,
    minimize_J,
    petviashvili_solve,
    rescale_minimizer_to_groundstate,
)
from .params import ModelParams
from .sharpconst import gn_constant_from_groundstate
from .validation import check_field


class _ModelMixin:
    alpha: float
    gamma: float
    p: float
    epsilon: int

    def _model(self, u: Field) -> ModelParams:
        return ModelParams(u.grid.dim, self.alpha, self.gamma, self.p, self.epsilon,
                           debug=getattr(self, "debug", False))

    def _check_fitted(self, attr: str) -> None:
        if not hasattr(self, attr):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")


class PetviashviliSolver(_ModelMixin, BaseEstimator):
    """Ground state of ``(-Delta)^alpha phi + phi = |x|^gamma |phi|^(p-1) phi``.

    Fitted attributes: ``record_``, ``profile_``, ``residual_``, ``n_iter_``,
    ``converged_``, ``action_`` (= ``m``), ``K_`` and ``gn_constant_``.
    """

    def __init__(self, alpha=0.8, gamma=0.0, p=3.0, epsilon=1, tol=1e-10, max_iter=3000,
                 theta=None, radial=True, debug=False):
        self.alpha = alpha
        self.gamma = gamma
        self.p = p
        self.epsilon = epsilon
        self.tol = tol
        self.max_iter = max_iter
        self.theta = theta
        self.radial = radial
        self.debug = debug

    def fit(self, X: Field, y=None):
        seed = check_field(X, allow_zero=False)
        params = self._model(seed)
        rec = petviashvili_solve(params, seed.grid, seed=seed, tol=self.tol, max_iter=self.max_iter,
                                 theta=self.theta, radial=self.radial)
        rep = compute_m(rec, params, DEFAULT_PAIRS)
        self.params_ = params
        self.record_ = rec
        self.profile_ = rec.profile
        self.residual_ = rec.residual
        self.n_iter_ = rec.iterations
        self.converged_ = rec.converged
        self.action_ = rep.m
        self.K_ = rep.K
        self.gn_constant_ = gn_constant_from_groundstate(rec, params.exponents) if rec.converged else np.nan
        return self


class WeinsteinMinimizer(_ModelMixin, BaseEstimator):
    """Minimizer ``psi`` of ``J`` on the unit-pair manifold.

    ``transform`` maps fields to ``J(u)/beta_`` (at least 1 up to
    discretization for every admissible ``u``).
    """

    def __init__(self, alpha=0.8, gamma=0.0, p=3.0, epsilon=1, tol=1e-8, residual_tol=1e-2,
                 max_iter=2000, radial=True, debug=False):
        self.alpha = alpha
        self.gamma = gamma
        self.p = p
        self.epsilon = epsilon
        self.tol = tol
        self.residual_tol = residual_tol
        self.max_iter = max_iter
        self.radial = radial
        self.debug = debug

    def fit(self, X: Field, y=None):
        seed = check_field(X, allow_zero=False)
        params = self._model(seed)
        rec = minimize_J(params, seed.grid, seed=seed, tol=self.tol, residual_tol=self.residual_tol,
                         max_iter=self.max_iter, radial=self.radial)
        self.params_ = params
        self.record_ = rec
        self.psi_ = rec.profile
        self.beta_ = rec.beta_value
        self.sharp_constant_ = 1 / rec.beta_value
        self.residual_ = rec.residual
        self.n_iter_ = rec.iterations
        self.converged_ = rec.converged
        self.groundstate_ = rescale_minimizer_to_groundstate(rec, params)
        return self

    def transform(self, X: Sequence[Field]) -> np.ndarray:
        self._check_fitted("beta_")
        return np.array([weinstein_J(check_field(u, allow_zero=False), self.params_) / self.beta_ for u in X])


class StrangSplitting(_ModelMixin, BaseEstimator):
    """Strang split-step integrator.

    ``fit(u0)`` runs the recorded evolution (``trace_``, ``final_``);
    ``transform(fields)`` advances each field by ``T`` without diagnostics.
    """

    def __init__(self, alpha=0.8, gamma=0.0, p=3.0, epsilon=1, dt=1e-3, T=1.0, record_every=10,
                 blowup_norm_factor=1e3, spectral_tail_limit=0.1, debug=False):
        self.alpha = alpha
        self.gamma = gamma
        self.p = p
        self.epsilon = epsilon
        self.dt = dt
        self.T = T
        self.record_every = record_every
        self.blowup_norm_factor = blowup_norm_factor
        self.spectral_tail_limit = spectral_tail_limit
        self.debug = debug

    def _config(self) -> EvolutionConfig:
        return EvolutionConfig(dt=self.dt, T=self.T, record_every=self.record_every,
                               blowup_norm_factor=self.blowup_norm_factor,
                               spectral_tail_limit=self.spectral_tail_limit)

    def fit(self, X: Field, y=None, phi: Optional[Field] = None, pairs: Optional[Sequence[tuple]] = None):
        u0 = check_field(X, allow_zero=False)
        params = self._model(u0)
        self.params_ = params
        self.trace_ = evolve(u0, params, self._config(), phi=phi, pairs=pairs)
        self.final_ = self.trace_.final
        self.outcome_ = self.trace_.outcome
        return self

    def transform(self, X: Sequence[Field]) -> list:
        cfg = self._config()
        out = []
        for u in X:
            u = check_field(u)
            out.append(propagate(u, self._model(u), cfg.dt, cfg.n_steps))
        return out
