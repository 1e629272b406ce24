"""Two-sided exit functionals for compound-Poisson risk processes with exponential premiums."""

from .errors import (
    CensoringError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
    RegimeError,
    RiskExitError,
    UnsupportedClaimLawError,
)
from .exit import (
    ExitQuery,
    ExitTransforms,
    atom_at_zero,
    exit_transforms,
    limit_pre_exit_density,
    non_exit_prob,
    overshoot_transform,
    pre_exit_density,
    q_lower_mirror,
    q_upper,
    ruin_prob,
    undershoot_distribution,
)
from .model import (
    ExponentialClaims,
    GenericClaims,
    ModelParams,
    Moments,
    charfn_killed,
    cumulant_real,
    drift,
    moments,
    reflect,
    regime,
    variance,
)
from .wiener_hopf import (
    Factorization,
    inf_distribution,
    mean_passage_below,
    mean_passage_below_zero_drift,
    phi_minus,
    phi_plus,
    solve_factorization,
    sup_tail,
)

__version__ = "0.1.0"
