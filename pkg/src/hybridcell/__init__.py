"""Fixed-cell hybrid interference model for downlink cellular networks.

A fixed circular cell is surrounded by guard regions, one dominant
interferer at the guard edge and Poisson fields of interferers beyond.
Interference is summarized by its first two moments and approximated by a
Gamma law, which gives closed forms for coverage and ergodic rate.
"""

from .errors import (
    DomainError,
    GuardClearanceError,
    HybridCellError,
    NumericError,
    SchemaError,
    TruncationError,
    UnsupportedConfigError,
)
from .gamma import (
    GammaMixture,
    GammaParams,
    LogNormalParams,
    composite_fading_params,
    expected_log_gamma,
    expected_log_sum,
    moment_match,
    moschopoulos_mixture,
    sum_moment_match,
)
from .geometry import (
    CrossTierSpec,
    NetworkConfig,
    PathLossModel,
    TierSpec,
    guard_radius,
    path_loss,
    signal_params,
    tier_coefficient,
    typical_cell_radius,
)
from .interference import (
    InterferenceMoments,
    cross_tier_moments,
    exact_moments_n4,
    f_kernel,
    gamma_approx,
    heterogeneous_moments,
    homogeneous_moments,
    laplace_transform,
    total_moments,
)
from .metrics import (
    ergodic_rate_exact,
    ergodic_rate_gamma,
    success_probability,
    success_probability_laplace,
    success_probability_mixture,
)
from .montecarlo import SimPlan, empirical_interference_moments, sample_dominant, sample_ppp, simulate
from .specfun import digamma, regularized_2f1, upper_incomplete_gamma
