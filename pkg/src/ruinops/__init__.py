"""Ruin probabilities and discounted penalty functions under
surplus-dependent premiums.

The package provides four routes to the same quantities and the glue to
compare them:

* closed forms for the classical benchmark families,
* a Green's-operator boundary-value solver for exponential claim and
  interclaim laws with a general premium rate,
* large-surplus asymptotics,
* a Monte Carlo simulator.
"""
from .acceptance import (
    CRITERIA,
    QUICK,
    CriterionResult,
    format_report,
    run_all,
    run_one,
)
from .asymptotics import (
    AsymptoticForm,
    AsymptoticTerm,
    ExpansionConditionError,
    PremiumClassError,
    TurningPointError,
    fedoryuk_solutions,
    gs_asymptote,
    penalty_expansion,
    pi_constants,
    ruin_asymptote,
)
from .gerber_shiu import (
    AssemblyError,
    GerberShiuSolution,
    SegerdahlOrderError,
    phi,
    ruin_exponential_premium,
    ruin_quadratic_premium,
    ruin_rational_premium,
    ruin_segerdahl,
    ruin_tichy,
)
from .greens import (
    GreensOperator,
    WronskianTable,
    greens_collapsed,
    greens_factored,
    greens_operator,
    greens_second_order,
    sylvester_lemma_residual,
    wronskian_table,
)
from .model import (
    ConstantPremium,
    CustomPenalty,
    CustomPremium,
    DriftValidationError,
    ExpDecayPremium,
    ExponentialClaims,
    ExponentialInterclaims,
    ExpRecipPremium,
    ExpSurplusPenalty,
    LinearPremium,
    ModelValidationError,
    QuadraticPremium,
    RationalLaplaceClaims,
    RationalLaplaceInterclaims,
    RationalPremium,
    RiskModel,
    RuinIndicatorPenalty,
    model_from_dict,
    model_from_file,
    model_to_dict,
    premium_reciprocal_integral,
    validate_drift,
)
from .montecarlo import (
    SimConfig,
    SimEstimate,
    estimate_penalty,
    estimate_ruin,
    flow,
)
from .numerics import (
    BranchSensitivityWarning,
    GridFunction,
    default_grid,
    integrate,
)
from .operator import (
    FundamentalSystem,
    LinearODE,
    build_operator,
    build_rhs,
    characteristic_roots,
    fundamental_system,
    penalty_transform,
)

__version__ = "0.1.0"

__all__ = [
    "CRITERIA",
    "QUICK",
    "CriterionResult",
    "format_report",
    "run_all",
    "run_one",
    "AsymptoticForm",
    "AsymptoticTerm",
    "ExpansionConditionError",
    "PremiumClassError",
    "TurningPointError",
    "fedoryuk_solutions",
    "gs_asymptote",
    "penalty_expansion",
    "pi_constants",
    "ruin_asymptote",
    "AssemblyError",
    "GerberShiuSolution",
    "SegerdahlOrderError",
    "phi",
    "ruin_exponential_premium",
    "ruin_quadratic_premium",
    "ruin_rational_premium",
    "ruin_segerdahl",
    "ruin_tichy",
    "GreensOperator",
    "WronskianTable",
    "greens_collapsed",
    "greens_factored",
    "greens_operator",
    "greens_second_order",
    "sylvester_lemma_residual",
    "wronskian_table",
    "ConstantPremium",
    "CustomPenalty",
    "CustomPremium",
    "DriftValidationError",
    "ExpDecayPremium",
    "ExponentialClaims",
    "ExponentialInterclaims",
    "ExpRecipPremium",
    "ExpSurplusPenalty",
    "LinearPremium",
    "ModelValidationError",
    "QuadraticPremium",
    "RationalLaplaceClaims",
    "RationalLaplaceInterclaims",
    "RationalPremium",
    "RiskModel",
    "RuinIndicatorPenalty",
    "model_from_dict",
    "model_from_file",
    "model_to_dict",
    "premium_reciprocal_integral",
    "validate_drift",
    "SimConfig",
    "SimEstimate",
    "estimate_penalty",
    "estimate_ruin",
    "flow",
    "BranchSensitivityWarning",
    "GridFunction",
    "default_grid",
    "integrate",
    "FundamentalSystem",
    "LinearODE",
    "build_operator",
    "build_rhs",
    "characteristic_roots",
    "fundamental_system",
    "penalty_transform",
    "__version__",
]
