"""Problem instances: premium functions, claim/interclaim laws, penalties.

Everything here is immutable after construction and safe to share between
threads. Numeric methods accept floats or numpy arrays and vectorize.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ModelValidationError",
    "DriftValidationError",
    "PremiumFunction",
    "ConstantPremium",
    "LinearPremium",
    "ExpDecayPremium",
    "RationalPremium",
    "QuadraticPremium",
    "ExpRecipPremium",
    "CustomPremium",
    "ClaimLaw",
    "ExponentialClaims",
    "RationalLaplaceClaims",
    "InterclaimLaw",
    "ExponentialInterclaims",
    "RationalLaplaceInterclaims",
    "Penalty",
    "RuinIndicatorPenalty",
    "ExpSurplusPenalty",
    "CustomPenalty",
    "RiskModel",
    "validate_drift",
    "premium_reciprocal_integral",
    "model_from_dict",
    "model_from_file",
    "model_to_dict",
]

LN2 = math.log(2.0)


class ModelValidationError(ValueError):
    """A model component violates its declared invariants."""


class DriftValidationError(ModelValidationError):
    """Premium income does not dominate expected claim outflow."""


# ---------------------------------------------------------------------------
# Premium functions
# ---------------------------------------------------------------------------


class PremiumFunction:
    """Base class for the premium rate p(u).

    Subclasses provide the rate ``p``, its derivatives, the reciprocal
    integral ``q(x) = int_0^x du / p(u)``, the limiting rate at infinity
    (``math.inf`` for exploding premiums), and optionally a closed-form
    surplus flow used by the simulator.
    """

    family: str = "Abstract"
    #: smallest admissible surplus; nonzero only for rates singular at 0
    u_min: float = 0.0

    def p(self, u):
        raise NotImplementedError

    def p_prime(self, u):
        raise NotImplementedError

    def p_double_prime(self, u):
        raise NotImplementedError

    def q(self, x):
        """Reciprocal integral q(x) = int_0^x du/p(u)."""
        raise NotImplementedError

    @property
    def p_limit(self) -> float:
        """lim p(u) as u -> infinity (may be math.inf)."""
        raise NotImplementedError

    def flow(self, u0, t):
        """Closed-form solution of du/dt = p(u), u(0)=u0, or None.

        Families without an elementary flow return None and the simulator
        falls back to Runge-Kutta stepping.
        """
        return None

    def premium_class(self) -> str | None:
        """Large-u classification.

        "P1" when p tends to a constant with p' = O(1/u^2), "P2" when p is
        polynomial of degree >= 1, None when unknown (custom rates).
        """
        return None

    def polynomial_degree(self) -> int | None:
        """Degree l for P2 rates, else None."""
        return None

    def check_positive(self, u_max: float, n: int = 512) -> None:
        """Sampled positivity check on a log-spaced validation grid."""
        lo = max(self.u_min, 1e-9)
        grid = np.geomspace(lo, max(u_max, lo * 10), n)
        vals = np.asarray(self.p(grid), dtype=float)
        if not np.all(vals > 0.0):
            bad = float(grid[np.argmin(vals)])
            raise ModelValidationError(
                f"premium {self.family} is nonpositive near u={bad:.6g}"
            )


@dataclass(frozen=True)
class ConstantPremium(PremiumFunction):
    """p(u) = c."""

    c: float
    family = "Constant"

    def __post_init__(self):
        if self.c <= 0:
            raise ModelValidationError("Constant premium needs c > 0")

    def p(self, u):
        return self.c + 0.0 * np.asarray(u, dtype=float) if np.ndim(u) else self.c

    def p_prime(self, u):
        return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0

    def p_double_prime(self, u):
        return self.p_prime(u)

    def q(self, x):
        return np.asarray(x, dtype=float) / self.c if np.ndim(x) else x / self.c

    @property
    def p_limit(self) -> float:
        return self.c

    def flow(self, u0, t):
        return u0 + self.c * t

    def premium_class(self):
        return "P1"


@dataclass(frozen=True)
class LinearPremium(PremiumFunction):
    """p(u) = c + eps*u  (interest on the surplus at rate eps)."""

    c: float
    eps: float
    family = "Linear"

    def __post_init__(self):
        if self.c <= 0 or self.eps <= 0:
            raise ModelValidationError("Linear premium needs c > 0 and eps > 0")

    def p(self, u):
        return self.c + self.eps * u

    def p_prime(self, u):
        return self.eps + 0.0 * np.asarray(u, dtype=float) if np.ndim(u) else self.eps

    def p_double_prime(self, u):
        return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0

    def q(self, x):
        return np.log1p(self.eps * np.asarray(x, dtype=float) / self.c) / self.eps

    @property
    def p_limit(self) -> float:
        return math.inf

    def flow(self, u0, t):
        a = self.c / self.eps
        return -a + (u0 + a) * np.exp(self.eps * t)

    def premium_class(self):
        return "P2"

    def polynomial_degree(self):
        return 1


@dataclass(frozen=True)
class ExpDecayPremium(PremiumFunction):
    """p(u) = c*(1 + e^{-u}): starts at 2c, relaxes to c."""

    c: float
    family = "ExpDecay"

    def __post_init__(self):
        if self.c <= 0:
            raise ModelValidationError("ExpDecay premium needs c > 0")

    def p(self, u):
        return self.c * (1.0 + np.exp(-np.asarray(u, dtype=float))) if np.ndim(u) \
            else self.c * (1.0 + math.exp(-u))

    def p_prime(self, u):
        return -self.c * np.exp(-np.asarray(u, dtype=float)) if np.ndim(u) \
            else -self.c * math.exp(-u)

    def p_double_prime(self, u):
        return self.c * np.exp(-np.asarray(u, dtype=float)) if np.ndim(u) \
            else self.c * math.exp(-u)

    def q(self, x):
        # q = (1/c) * ln((e^x + 1)/2), written overflow-safe
        x = np.asarray(x, dtype=float) if np.ndim(x) else x
        return (x + np.log1p(np.exp(-x)) - LN2) / self.c

    @property
    def p_limit(self) -> float:
        return self.c

    def flow(self, u0, t):
        # v = e^u obeys v' = c(v+1), so u(t) = ln((e^{u0}+1) e^{ct} - 1)
        ct = self.c * t
        return u0 + ct + np.log1p(np.exp(-u0) * -np.expm1(-ct))

    def premium_class(self):
        return "P1"


@dataclass(frozen=True)
class RationalPremium(PremiumFunction):
    """p(u) = c + 1/(1 + eps*u)."""

    c: float
    eps: float
    family = "Rational"

    def __post_init__(self):
        if self.c <= 0 or self.eps <= 0:
            raise ModelValidationError("Rational premium needs c > 0 and eps > 0")

    def p(self, u):
        return self.c + 1.0 / (1.0 + self.eps * u)

    def p_prime(self, u):
        return -self.eps / (1.0 + self.eps * u) ** 2

    def p_double_prime(self, u):
        return 2.0 * self.eps**2 / (1.0 + self.eps * u) ** 3

    def q(self, x):
        c, eps = self.c, self.eps
        x = np.asarray(x, dtype=float) if np.ndim(x) else x
        return (x - np.log((c * (1.0 + eps * x) + 1.0) / (c + 1.0)) / (c * eps)) / c

    @property
    def p_limit(self) -> float:
        return self.c

    def premium_class(self):
        return "P1"


@dataclass(frozen=True)
class QuadraticPremium(PremiumFunction):
    """p(u) = c + u^2."""

    c: float
    family = "Quadratic"

    def __post_init__(self):
        if self.c <= 0:
            raise ModelValidationError("Quadratic premium needs c > 0")

    def p(self, u):
        return self.c + np.square(u) if np.ndim(u) else self.c + u * u

    def p_prime(self, u):
        return 2.0 * np.asarray(u, dtype=float) if np.ndim(u) else 2.0 * u

    def p_double_prime(self, u):
        return 2.0 + 0.0 * np.asarray(u, dtype=float) if np.ndim(u) else 2.0

    def q(self, x):
        rc = math.sqrt(self.c)
        return np.arctan(np.asarray(x, dtype=float) / rc) / rc if np.ndim(x) \
            else math.atan(x / rc) / rc

    @property
    def p_limit(self) -> float:
        return math.inf

    def flow(self, u0, t):
        # du/dt = c + u^2 is separable; blows up at a finite horizon, which
        # the simulator treats as hitting the survival barrier.
        rc = math.sqrt(self.c)
        phase = t * rc + np.arctan(np.asarray(u0, dtype=float) / rc)
        out = rc * np.tan(np.clip(phase, None, math.pi / 2 - 1e-12))
        if np.ndim(phase):
            out = np.where(phase >= math.pi / 2 - 1e-12, np.inf, out)
            return out
        return math.inf if phase >= math.pi / 2 - 1e-12 else float(out)

    def premium_class(self):
        return "P2"

    def polynomial_degree(self):
        return 2


@dataclass(frozen=True)
class ExpRecipPremium(PremiumFunction):
    """p(u) = c * e^{eps/u}, singular at u = 0 for eps > 0.

    The working domain starts at ``u_min`` (default 1e-3); the rate is huge
    there and relaxes to c as u grows.
    """

    c: float
    eps: float
    u_min: float = 1e-3
    family = "ExpRecip"

    def __post_init__(self):
        if self.c <= 0:
            raise ModelValidationError("ExpRecip premium needs c > 0")
        if self.eps > 0 and self.u_min <= 0:
            raise ModelValidationError(
                "ExpRecip with eps > 0 needs a positive domain start u_min"
            )
        if self.eps <= 0:
            # limit value at 0 is c*e^{eps*inf} = 0, which violates
            # positivity; only the eps > 0 branch is wired.
            raise ModelValidationError("ExpRecip premium needs eps > 0")

    def p(self, u):
        return self.c * np.exp(self.eps / np.asarray(u, dtype=float)) if np.ndim(u) \
            else self.c * math.exp(self.eps / u)

    def p_prime(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        return self.p(u) * (-self.eps / u**2)

    def p_double_prime(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        return self.p(u) * (self.eps**2 / u**4 + 2.0 * self.eps / u**3)

    def q(self, x):
        # Antiderivative of e^{-eps/u}/c: q(x) = (x e^{-eps/x} - eps E1(eps/x))/c
        from .numerics.special import exp_integral_e1

        def scalar(xv: float) -> float:
            if xv <= 0.0:
                return 0.0
            z = self.eps / xv
            return (xv * math.exp(-z) - self.eps * exp_integral_e1(z)) / self.c

        if np.ndim(x):
            return np.array([scalar(float(v)) for v in np.asarray(x, dtype=float)])
        return scalar(float(x))

    @property
    def p_limit(self) -> float:
        return self.c

    def premium_class(self):
        return "P1"


@dataclass(frozen=True)
class CustomPremium(PremiumFunction):
    """User-supplied rate with optional analytic derivative and q."""

    fn: Callable[[float], float]
    fn_prime: Callable[[float], float] | None = None
    fn_q: Callable[[float], float] | None = None
    limit: float | None = None
    u_min: float = 0.0
    family = "Custom"

    def p(self, u):
        if np.ndim(u):
            return np.array([float(self.fn(float(v))) for v in np.asarray(u)])
        return float(self.fn(float(u)))

    def p_prime(self, u):
        if self.fn_prime is not None:
            if np.ndim(u):
                return np.array([float(self.fn_prime(float(v))) for v in np.asarray(u)])
            return float(self.fn_prime(float(u)))
        h = 1e-6 * max(1.0, abs(float(np.max(u) if np.ndim(u) else u)))
        return (self.p(np.asarray(u) + h) - self.p(np.asarray(u) - h)) / (2 * h) \
            if np.ndim(u) else (self.p(u + h) - self.p(u - h)) / (2 * h)

    def p_double_prime(self, u):
        h = 1e-4 * max(1.0, abs(float(np.max(u) if np.ndim(u) else u)))
        return (self.p_prime(np.asarray(u) + h) - self.p_prime(np.asarray(u) - h)) / (2 * h) \
            if np.ndim(u) else (self.p_prime(u + h) - self.p_prime(u - h)) / (2 * h)

    def q(self, x):
        if self.fn_q is not None:
            if np.ndim(x):
                return np.array([float(self.fn_q(float(v))) for v in np.asarray(x)])
            return float(self.fn_q(float(x)))
        from .numerics.quadrature import integrate

        def scalar(xv: float) -> float:
            if xv <= self.u_min:
                return 0.0
            return integrate(lambda y: 1.0 / self.p(y), self.u_min, xv,
                             tol=1e-12).value

        if np.ndim(x):
            return np.array([scalar(float(v)) for v in np.asarray(x)])
        return scalar(float(x))

    @property
    def p_limit(self) -> float:
        return self.limit if self.limit is not None else math.nan

    def premium_class(self):
        return None


# ---------------------------------------------------------------------------
# Claim / interclaim laws
# ---------------------------------------------------------------------------


def _check_monic_denominator(coeffs: Sequence[float], what: str) -> None:
    """coeffs are b_0..b_{k-1} of x^k + b_{k-1}x^{k-1} + ... + b_0; all roots
    must lie strictly in the left half-plane (density integrability)."""
    poly = np.array([1.0, *reversed([float(b) for b in coeffs])])
    roots = np.roots(poly)
    if np.any(roots.real >= -1e-12):
        raise ModelValidationError(
            f"{what}: Laplace-transform denominator has a root with "
            f"nonnegative real part ({roots})"
        )


class ClaimLaw:
    family: str = "Abstract"

    def mean(self) -> float:
        raise NotImplementedError

    @property
    def order(self) -> int:
        """Degree of the Laplace-transform denominator."""
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialClaims(ClaimLaw):
    """Exp(mu) claim sizes: density mu*e^{-mu*y}."""

    mu: float
    family = "Exponential"

    def __post_init__(self):
        if self.mu <= 0:
            raise ModelValidationError("Exponential claims need mu > 0")

    def mean(self) -> float:
        return 1.0 / self.mu

    @property
    def order(self) -> int:
        return 1

    def density(self, y):
        return self.mu * np.exp(-self.mu * np.asarray(y, dtype=float))

    def survival(self, y):
        return np.exp(-self.mu * np.asarray(y, dtype=float))


@dataclass(frozen=True)
class RationalLaplaceClaims(ClaimLaw):
    """Claim law with rational Laplace transform beta_0 / denom(x).

    ``beta`` lists the non-leading coefficients b_0..b_{m-1} of the monic
    denominator. Accepted in the data model; only the exponential case is
    wired end-to-end through the second-order pipeline.
    """

    beta: tuple[float, ...]
    family = "RationalLaplace"

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if not self.beta:
            raise ModelValidationError("RationalLaplace claims need coefficients")
        _check_monic_denominator(self.beta, "claims")

    def mean(self) -> float:
        b1 = self.beta[1] if len(self.beta) > 1 else 1.0
        return b1 / self.beta[0]

    @property
    def order(self) -> int:
        return len(self.beta)


class InterclaimLaw:
    family: str = "Abstract"

    def mean(self) -> float:
        raise NotImplementedError

    @property
    def order(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialInterclaims(InterclaimLaw):
    """Exp(lam) interclaim times (compound Poisson arrivals)."""

    lam: float
    family = "Exponential"

    def __post_init__(self):
        if self.lam <= 0:
            raise ModelValidationError("Exponential interclaims need lambda > 0")

    def mean(self) -> float:
        return 1.0 / self.lam

    @property
    def order(self) -> int:
        return 1


@dataclass(frozen=True)
class RationalLaplaceInterclaims(InterclaimLaw):
    """Interclaim law with rational Laplace transform alpha_0 / denom(x)."""

    alpha: tuple[float, ...]
    family = "RationalLaplace"

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if not self.alpha:
            raise ModelValidationError("RationalLaplace interclaims need coefficients")
        _check_monic_denominator(self.alpha, "interclaims")

    def mean(self) -> float:
        a1 = self.alpha[1] if len(self.alpha) > 1 else 1.0
        return a1 / self.alpha[0]

    @property
    def order(self) -> int:
        return len(self.alpha)


# ---------------------------------------------------------------------------
# Penalties
# ---------------------------------------------------------------------------


class Penalty:
    """Bivariate penalty w(x, y): x = surplus just before ruin, y = deficit."""

    family: str = "Abstract"

    def w(self, x, y):
        raise NotImplementedError


@dataclass(frozen=True)
class RuinIndicatorPenalty(Penalty):
    """w == 1: the discounted penalty reduces to the (discounted) ruin
    probability."""

    family = "RuinIndicator"

    def w(self, x, y):
        if np.ndim(x) or np.ndim(y):
            return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return 1.0


@dataclass(frozen=True)
class ExpSurplusPenalty(Penalty):
    """w(x, y) = e^{-nu*x}: penalizes the surplus held just before ruin."""

    nu: float
    family = "ExpSurplus"

    def __post_init__(self):
        if self.nu < 0:
            raise ModelValidationError("ExpSurplus penalty needs nu >= 0")

    def w(self, x, y):
        return np.exp(-self.nu * np.asarray(x, dtype=float)) if np.ndim(x) \
            else math.exp(-self.nu * x)


@dataclass(frozen=True)
class CustomPenalty(Penalty):
    fn: Callable[[float, float], float]
    family = "Custom"

    def w(self, x, y):
        if np.ndim(x) or np.ndim(y):
            xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float),
                                         np.asarray(y, dtype=float))
            return np.array([float(self.fn(a, b)) for a, b in zip(xs.ravel(), ys.ravel())]
                            ).reshape(xs.shape)
        return float(self.fn(float(x), float(y)))


# ---------------------------------------------------------------------------
# RiskModel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskModel:
    """One problem instance.

    Attributes:
        premium: surplus-dependent premium rate p(u).
        claims: claim-size law.
        interclaims: interclaim-time law.
        delta: discount rate, >= 0.
        penalty: penalty w(x, y) applied at ruin.
        u_max: upper end of the working grid (money units).
    """

    premium: PremiumFunction
    claims: ClaimLaw
    interclaims: InterclaimLaw
    delta: float
    penalty: Penalty
    u_max: float

    def __post_init__(self):
        if self.delta < 0:
            raise ModelValidationError("delta must be >= 0")
        if self.u_max <= 0:
            raise ModelValidationError("u_max must be > 0")
        if self.u_max <= self.premium.u_min:
            raise ModelValidationError("u_max must exceed the premium's u_min")
        self.premium.check_positive(self.u_max)
        if isinstance(self.premium, CustomPremium) and self.premium.fn_prime:
            self._check_custom_derivative()

    def _check_custom_derivative(self) -> None:
        lo = max(self.premium.u_min, 1e-3)
        grid = np.geomspace(lo, self.u_max, 64)
        h = 1e-5
        for u in grid:
            fd = (self.premium.fn(u + h) - self.premium.fn(u - h)) / (2 * h)
            claimed = self.premium.fn_prime(u)
            if abs(fd - claimed) > 1e-6 * max(1.0, abs(claimed)):
                raise ModelValidationError(
                    f"custom premium derivative disagrees with finite "
                    f"differences at u={u:.6g}: {claimed:.8g} vs {fd:.8g}")

    @property
    def u_min(self) -> float:
        return self.premium.u_min

    def is_exp_exp(self) -> bool:
        return (isinstance(self.claims, ExponentialClaims)
                and isinstance(self.interclaims, ExponentialInterclaims))


def validate_drift(model: RiskModel, varsigma: float, u_check: float) -> bool:
    """True iff p(u) > E[X]/E[tau] + varsigma on a grid over [u_check, u_max].

    This is the transience condition guaranteeing the surplus drifts to
    infinity, which makes barrier-based survival declaration in the
    simulator sound.
    """
    if varsigma <= 0 or u_check <= 0:
        raise ModelValidationError("validate_drift needs varsigma > 0, u_check > 0")
    ex = model.claims.mean()
    etau = model.interclaims.mean()
    if not (math.isfinite(ex) and math.isfinite(etau)) or etau <= 0:
        raise ModelValidationError("law moments undefined")
    outflow = ex / etau
    hi = max(model.u_max, u_check * (1 + 1e-9))
    grid = np.linspace(u_check, hi, 256)
    return bool(np.all(np.asarray(model.premium.p(grid)) > outflow + varsigma))


def premium_reciprocal_integral(p: PremiumFunction, x: float):
    """q(x) = int_0^x du/p(u), closed form where the family admits one."""
    if np.ndim(x) == 0 and x < 0:
        raise ModelValidationError("q(x) needs x >= 0")
    return p.q(x)


# ---------------------------------------------------------------------------
# JSON interface (field names fixed: premium{family,c,eps|eps_list},
# claims{family,mu|beta}, interclaims{family,lambda|alpha}, delta,
# penalty{family,nu}, u_max)
# ---------------------------------------------------------------------------

_PREMIUM_TAGS = {
    "constant": ConstantPremium,
    "linear": LinearPremium,
    "expdecay": ExpDecayPremium,
    "rational": RationalPremium,
    "quadratic": QuadraticPremium,
    "exprecip": ExpRecipPremium,
}


def _premium_from_dict(d: dict) -> PremiumFunction:
    fam = str(d.get("family", "")).lower()
    if fam not in _PREMIUM_TAGS:
        raise ModelValidationError(f"unknown premium family {d.get('family')!r}")
    cls = _PREMIUM_TAGS[fam]
    c = float(d["c"])
    eps = d.get("eps")
    if eps is None and d.get("eps_list"):
        eps = d["eps_list"][0]
    if cls in (ConstantPremium, ExpDecayPremium, QuadraticPremium):
        return cls(c=c)
    if eps is None:
        raise ModelValidationError(f"premium family {fam!r} needs eps")
    return cls(c=c, eps=float(eps))


def model_from_dict(data: dict) -> RiskModel:
    """Build a RiskModel from the JSON object layout."""
    try:
        premium = _premium_from_dict(data["premium"])

        cd = data["claims"]
        cfam = str(cd.get("family", "")).lower()
        if cfam == "exponential":
            claims: ClaimLaw = ExponentialClaims(mu=float(cd["mu"]))
        elif cfam == "rationallaplace":
            claims = RationalLaplaceClaims(beta=tuple(cd["beta"]))
        else:
            raise ModelValidationError(f"unknown claims family {cd.get('family')!r}")

        idd = data["interclaims"]
        ifam = str(idd.get("family", "")).lower()
        if ifam == "exponential":
            inter: InterclaimLaw = ExponentialInterclaims(lam=float(idd["lambda"]))
        elif ifam == "rationallaplace":
            inter = RationalLaplaceInterclaims(alpha=tuple(idd["alpha"]))
        else:
            raise ModelValidationError(f"unknown interclaims family {idd.get('family')!r}")

        pd = data.get("penalty", {"family": "RuinIndicator"})
        pfam = str(pd.get("family", "")).lower()
        if pfam == "ruinindicator":
            penalty: Penalty = RuinIndicatorPenalty()
        elif pfam == "expsurplus":
            penalty = ExpSurplusPenalty(nu=float(pd["nu"]))
        else:
            raise ModelValidationError(f"unknown penalty family {pd.get('family')!r}")

        return RiskModel(
            premium=premium,
            claims=claims,
            interclaims=inter,
            delta=float(data.get("delta", 0.0)),
            penalty=penalty,
            u_max=float(data["u_max"]),
        )
    except KeyError as exc:
        raise ModelValidationError(f"missing model field: {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelValidationError):
            raise
        raise ModelValidationError(f"malformed model data: {exc}") from exc


def model_from_file(path) -> RiskModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelValidationError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(data)


def model_to_dict(model: RiskModel) -> dict:
    """Echo a model back into the JSON layout (for reports)."""
    prem: dict = {"family": model.premium.family}
    for field in ("c", "eps"):
        if hasattr(model.premium, field):
            prem[field] = getattr(model.premium, field)
    claims: dict = {"family": model.claims.family}
    if isinstance(model.claims, ExponentialClaims):
        claims["mu"] = model.claims.mu
    elif isinstance(model.claims, RationalLaplaceClaims):
        claims["beta"] = list(model.claims.beta)
    inter: dict = {"family": model.interclaims.family}
    if isinstance(model.interclaims, ExponentialInterclaims):
        inter["lambda"] = model.interclaims.lam
    elif isinstance(model.interclaims, RationalLaplaceInterclaims):
        inter["alpha"] = list(model.interclaims.alpha)
    pen: dict = {"family": model.penalty.family}
    if isinstance(model.penalty, ExpSurplusPenalty):
        pen["nu"] = model.penalty.nu
    return {
        "premium": prem,
        "claims": claims,
        "interclaims": inter,
        "delta": model.delta,
        "penalty": pen,
        "u_max": model.u_max,
    }
