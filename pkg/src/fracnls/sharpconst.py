"""Sharp Gagliardo-Nirenberg constant and the radial (Strauss) decay constant.

The weighted inequality is ``P(u) <= C M^(A/2) T^(B/2)``; its best constant
is obtained two ways: in closed form from a ground state ``phi``,

    C = (p+1)/A (A/B)^(B/2) ||phi||^(-(p-1)),

and as ``1/beta`` with ``beta = inf J``.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import asdict, dataclass, field as dc_field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.special import gamma as gamma_fn

from .exceptions import InvalidParameterError
from .field import Field, GridSpec, gaussian, hs_seminorm, l2_norm, radial_decay_sup, ring
from .functionals import _parts
from .groundstate import GroundStateRecord, ProfileKind
from .params import DerivedExponents, ModelParams, check_gn_window
from .storage import atomic_write_text

#: default GN-inequality slack: J(u) >= beta (1 - INEQUALITY_RTOL)
INEQUALITY_RTOL = 1e-3

CONSTANT_CSV_FIELDS = ("N", "alpha", "gamma", "p", "C_formula", "C_variational",
                       "relative_gap", "beta", "strauss_C", "n", "L")


def gn_constant(norm_phi: float, exps: DerivedExponents) -> float:
    """Closed-form constant for a ground state of L2 norm ``norm_phi``."""
    A, B = exps.A, exps.B
    if not B > 0:
        raise InvalidParameterError("B must be positive: the linear case has no GN constant")
    if not A > 0:
        raise InvalidParameterError("A must be positive")
    if not norm_phi > 0:
        raise InvalidParameterError("the ground state norm must be positive")
    p = A + B - 1
    return (p + 1) / A * (A / B) ** (B / 2) * norm_phi ** (-(p - 1))


def gn_constant_from_groundstate(phi: Union[GroundStateRecord, Field], exps: DerivedExponents) -> float:
    """Evaluate the closed formula with ``||phi||`` from a ground-state record or field."""
    if isinstance(phi, GroundStateRecord):
        if phi.kind is not ProfileKind.EULER_LAGRANGE_UNIT:
            raise InvalidParameterError("expected a ground state of the unit equation, not a J-minimizer")
        if not phi.converged:
            raise InvalidParameterError("ground state did not converge")
        nrm = l2_norm(phi.profile)
    else:
        nrm = l2_norm(phi)
    return gn_constant(nrm, exps)


def strauss_constant(N: int, alpha: float) -> float:
    """``C(N, alpha)`` in ``sup |x|^(N/2 - alpha) |u(x)| <= C ||u||_{Hdot^alpha}`` for radial ``u``."""
    if not (0.5 < alpha < N / 2):
        raise InvalidParameterError(f"need 1/2 < alpha < N/2, got alpha={alpha}, N={N}")
    num = gamma_fn(2 * alpha - 1) * gamma_fn(N / 2 - alpha) * gamma_fn(N / 2)
    den = 2 ** (2 * alpha) * math.pi ** (N / 2) * gamma_fn(alpha) ** 2 * gamma_fn(N / 2 - 1 + alpha)
    return math.sqrt(num / den)


# --------------------------------------------------------------------------
# test battery and inequality check
# --------------------------------------------------------------------------

def gn_test_battery(grid: GridSpec, seed: int = 0, count: int = 20) -> list[Field]:
    """Radial test fields: Gaussians, rings ``r^k e^{-r^2}`` and random positive mixtures.

    Deterministic given ``seed``.  Roughly 8 Gaussians on a log grid of
    ``c`` in ``[0.15, 4]``, 4 rings and the rest mixtures.
    """
    if count < 1:
        raise InvalidParameterError("count must be positive")
    rng = np.random.default_rng(seed)
    n_gauss = max(1, min(8, count))
    n_ring = max(0, min(4, count - n_gauss))
    n_mix = count - n_gauss - n_ring
    out = [gaussian(grid, c) for c in np.geomspace(0.15, 4.0, n_gauss)]
    out += [ring(grid, k) for k in (1, 2, 3, 4)[:n_ring]]
    for _ in range(n_mix):
        cs = rng.uniform(0.2, 3.0, size=3)
        ws = rng.uniform(0.1, 1.0, size=3)
        ks = rng.integers(0, 3, size=3)
        u = Field.zeros(grid)
        for c, wt, k in zip(cs, ws, ks):
            u = u + (ring(grid, int(k), c) if k else gaussian(grid, c)) * float(wt)
        out.append(u)
    return out


@dataclass
class InequalityReport:
    beta: float
    J_values: list
    min_J: float
    gap: float  # min_J / beta - 1
    violations: list = dc_field(default_factory=list)
    constant_violations: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.constant_violations

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def verify_gn_inequality(samples: Sequence[Field], params: ModelParams, beta: float,
                         C: Optional[float] = None, rtol: float = INEQUALITY_RTOL) -> InequalityReport:
    """Check ``J(u) >= beta (1 - rtol)`` over ``samples``.

    With ``C`` given, also checks ``P <= C M^(A/2) T^(B/2) (1 + rtol)``.
    Violations are returned as sample indices, never raised.
    """
    admissible, _ = check_gn_window(params)
    if not admissible:
        raise InvalidParameterError("parameters outside the GN window")
    if not beta > 0:
        raise InvalidParameterError("beta must be positive")
    e = params.exponents
    Js, bad, bad_c = [], [], []
    for i, u in enumerate(samples):
        M, T, P = _parts(u, params)
        if M == 0:
            continue
        J = T ** (e.B / 2) * M ** (e.A / 2) / P if P > 0 else math.inf
        Js.append(J)
        if J < beta * (1 - rtol):
            bad.append(i)
        if C is not None and P > C * M ** (e.A / 2) * T ** (e.B / 2) * (1 + rtol):
            bad_c.append(i)
    min_J = min(Js) if Js else math.inf
    return InequalityReport(beta=beta, J_values=Js, min_J=min_J, gap=min_J / beta - 1,
                            violations=bad, constant_violations=bad_c)


def strauss_check(samples: Iterable[Field], alpha: float, slack: float = 0.05) -> list[tuple[float, float]]:
    """``(radial_decay_sup(u), C(N, alpha) ||u||_{Hdot^alpha})`` for each sample.

    Pairs whose first entry exceeds ``(1 + slack)`` times the second violate
    the bound.
    """
    out = []
    for u in samples:
        C = strauss_constant(u.grid.dim, alpha)
        out.append((radial_decay_sup(u, alpha), C * hs_seminorm(u, alpha, corrected=True)))
    return out


# --------------------------------------------------------------------------
# reporting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantReport:
    N: int
    alpha: float
    gamma: float
    p: float
    C_formula: float
    C_variational: float
    relative_gap: float
    beta: float
    strauss_C: Optional[float]
    n: int
    L: float

    def __post_init__(self):
        if not (self.C_formula > 0 and self.C_variational > 0):
            raise InvalidParameterError("constants must be positive")

    @classmethod
    def build(cls, params: ModelParams, grid: GridSpec, C_formula: float, beta: float) -> "ConstantReport":
        C_var = 1 / beta
        try:
            sc = strauss_constant(params.N, params.alpha)
        except InvalidParameterError:
            sc = None
        return cls(N=params.N, alpha=params.alpha, gamma=params.gamma, p=params.p,
                   C_formula=C_formula, C_variational=C_var,
                   relative_gap=abs(C_formula - C_var) / C_var, beta=beta,
                   strauss_C=sc, n=grid.n, L=grid.L)

    def key(self) -> tuple:
        return (self.N, self.alpha, self.gamma, self.p)

    def as_dict(self) -> dict:
        return asdict(self)


def append_constant_row(path: Union[str, os.PathLike], report: ConstantReport) -> None:
    """Add ``report`` to the CSV table at ``path``, replacing any row with the same key."""
    rows = []
    if os.path.exists(path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    key = tuple(repr(v) for v in report.key())
    rows = [r for r in rows if (r["N"], r["alpha"], r["gamma"], r["p"]) != key]
    rows.append({k: repr(v) if isinstance(v, float) else str(v) for k, v in report.as_dict().items()})
    rows.sort(key=lambda r: tuple(float(r[k]) for k in ("N", "alpha", "gamma", "p")))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CONSTANT_CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    atomic_write_text(path, buf.getvalue())
