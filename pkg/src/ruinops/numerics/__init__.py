"""Numeric infrastructure: quadrature, special functions, grid functions."""
from .gridfn import (
    ConstantTail,
    ExponentialTail,
    GridFunction,
    TailFitError,
    TailModelError,
    ZeroTail,
    cumulative,
    default_grid,
)
from .quadrature import IntegralResult, IntegrationError, integrate
from .special import (
    BranchSensitivityWarning,
    exp_integral_e1,
    gauss_2f1,
    kummer_m,
    kummer_m_prime,
    kummer_u,
    kummer_u_prime,
    log_upper_incomplete_gamma,
    upper_incomplete_gamma,
)

__all__ = [
    "ConstantTail",
    "ExponentialTail",
    "GridFunction",
    "TailFitError",
    "TailModelError",
    "ZeroTail",
    "cumulative",
    "default_grid",
    "IntegralResult",
    "IntegrationError",
    "integrate",
    "BranchSensitivityWarning",
    "exp_integral_e1",
    "gauss_2f1",
    "kummer_m",
    "kummer_m_prime",
    "kummer_u",
    "kummer_u_prime",
    "log_upper_incomplete_gamma",
    "upper_incomplete_gamma",
]
