"""Bures-Wasserstein geometry and large deviations of empirical barycenters."""

from .barycenter import (
    barycenter,
    barycenter_batch,
    barycenter_fixed_point,
    empirical_barycenter,
    frechet_functional,
    residual,
)
from .exceptions import (
    AnchorSingular,
    BWError,
    DimensionMismatch,
    ExtrapolationOutOfRange,
    GridMismatch,
    InfeasibleAnchor,
    InvalidPopulation,
    NonSymmetric,
    NotPSD,
    OutOfInjectivity,
    SupportViolation,
)
from .gradient import (
    fd_rate_gradient,
    rate_gradient,
    riemannian_gradient,
    sqrt_frechet,
    transport_directional,
)
from .ldp import (
    RateProfile,
    hoeffding_reference,
    hoeffding_report,
    prgd,
    project_ball_complement,
    rate_profile,
)
from .montecarlo import (
    binomial_oracle,
    exact_log_tail,
    rate_slope,
    simulate_distances,
    tail_estimate,
)
from .population import DiscretePopulation, pi_norm_stats, sample, validate
from .spd import (
    Geodesic,
    bw_distance,
    exp_map,
    geodesic_point,
    log_map,
    m_inner,
    m_norm,
    sym_sqrt,
    transport_map,
)
from .tilting import (
    DualSolution,
    TiltedPopulation,
    cgf,
    rate_function,
    relative_entropy,
    solve_dual,
    tilt,
    tilt_interpolation_path,
)
from .univariate import (
    QuantileFunction,
    UnivariatePopulation,
    gaussian_quantile,
    point_mass,
    uv_barycenter,
    uv_rate_function,
    w2_distance,
)

__version__ = "0.1.0"
