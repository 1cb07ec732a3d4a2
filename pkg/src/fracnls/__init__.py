"""Numerical laboratory for the inhomogeneous fractional NLS

    i u_t - (-Delta)^alpha u + epsilon |x|^gamma |u|^(p-1) u = 0.
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConfigError,
    DegenerateInputError,
    DegenerateSeedError,
    DomainError,
    FracNLSError,
    InvalidParameterError,
)
from .params import (  # noqa: E402
    Criticality,
    DerivedExponents,
    ModelParams,
    RegimeReport,
    classify_regime,
    critical_p,
    derive_exponents,
)
from .field import Field, GridSpec, WeightGrid, weight_grid  # noqa: E402
from .functionals import H_ab, K_ab, action, energy, mass, weinstein_J  # noqa: E402
from .groundstate import (  # noqa: E402
    GroundStateRecord,
    compute_m,
    minimize_J,
    normalize_unit_pair,
    petviashvili_solve,
    rescale_minimizer_to_groundstate,
)
from .sharpconst import (  # noqa: E402
    ConstantReport,
    gn_constant_from_groundstate,
    strauss_constant,
    verify_gn_inequality,
)
from .evolution import (  # noqa: E402
    EvolutionConfig,
    EvolutionTrace,
    evolve,
    orbital_distance,
    stable_set_membership,
    strang_step,
)
from .estimators import PetviashviliSolver, StrangSplitting, WeinsteinMinimizer  # noqa: E402

__all__ = [
    "ConfigError", "DegenerateInputError", "DegenerateSeedError", "DomainError", "FracNLSError",
    "InvalidParameterError", "Criticality", "DerivedExponents", "ModelParams", "RegimeReport",
    "classify_regime", "critical_p", "derive_exponents", "Field", "GridSpec", "WeightGrid",
    "weight_grid", "H_ab", "K_ab", "action", "energy", "mass", "weinstein_J", "GroundStateRecord",
    "compute_m", "minimize_J", "normalize_unit_pair", "petviashvili_solve",
    "rescale_minimizer_to_groundstate", "ConstantReport", "gn_constant_from_groundstate",
    "strauss_constant", "verify_gn_inequality", "EvolutionConfig", "EvolutionTrace", "evolve",
    "orbital_distance", "stable_set_membership", "strang_step", "PetviashviliSolver",
    "StrangSplitting", "WeinsteinMinimizer",
]
