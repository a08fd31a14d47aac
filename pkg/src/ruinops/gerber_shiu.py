"""Discounted-penalty assembly and reference ruin-probability formulas.

The expected discounted penalty is put together as Phi = gamma * s + Gg:
the stable homogeneous solution s scaled by a matching constant gamma
(fixed by evaluating the underlying integro-differential equation at the
left domain edge) plus the Green's-operator image of the forcing term.

The classical quadrature formula for the ruin probability under a
surplus-dependent premium,

    psi(u) = gamma0 * lam * int_u^inf e^{lam q(x) - mu x} / p(x) dx,
    1/gamma0 = 1 + lam * int_0^inf e^{lam q(x) - mu x} / p(x) dx,

is wired as ``ruin_tichy`` and doubles as the oracle for every printed
closed form. Two of those forms are defective and ship with loud
diagnostics instead of silent fixes: the linear-premium incomplete-gamma
formula circulates with its two gamma arguments in an order that makes
it grow in u (``ruin_segerdahl`` evaluates both orders and the default
``diagnose`` mode raises when they disagree), and the
exponential-premium hypergeometric display needs ``2F1`` past its branch
point and comes out wrong (``ruin_exponential_premium`` returns the
quadrature truth unless the display is explicitly requested).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .greens import GreensApplication, greens_second_order
from .model import (
    ConstantPremium,
    ExpDecayPremium,
    LinearPremium,
    ModelValidationError,
    PremiumFunction,
    QuadraticPremium,
    RationalPremium,
    RiskModel,
    RuinIndicatorPenalty,
    model_to_dict,
)
from .numerics import GridFunction, ZeroTail, default_grid, integrate
from .numerics.special import (
    BranchSensitivityWarning,
    gauss_2f1,
    log_upper_incomplete_gamma,
)
from .operator import (
    FundamentalSystem,
    build_operator,
    build_rhs,
    fundamental_system,
    penalty_transform,
)

__all__ = [
    "AssemblyError",
    "DegenerateConstantError",
    "SegerdahlOrderError",
    "GerberShiuSolution",
    "omega",
    "gamma_constant",
    "phi",
    "ruin_tichy",
    "ruin_segerdahl",
    "ruin_exponential_premium",
    "ruin_rational_premium",
    "ruin_quadratic_premium",
]


class AssemblyError(RuntimeError):
    """A stage of the Phi pipeline failed; the message carries the stage tag."""


class DegenerateConstantError(ZeroDivisionError):
    """The denominator fixing the matching constant vanishes."""


class SegerdahlOrderError(RuntimeError):
    """The two incomplete-gamma argument orders disagree.

    Carries ``printed``, ``standard`` and ``oracle`` arrays so callers
    can inspect all three evaluations.
    """

    def __init__(self, msg: str, *, printed, standard, oracle):
        super().__init__(msg)
        self.printed = printed
        self.standard = standard
        self.oracle = oracle


# ---------------------------------------------------------------------------
# Penalty transform and matching constant
# ---------------------------------------------------------------------------


def omega(model: RiskModel) -> GridFunction:
    """Expected penalty against the overshooting claim:
    omega(u) = int_u^inf w(u, y - u) f_X(y) dy."""
    return penalty_transform(model)


def gamma_constant(model: RiskModel, fs: FundamentalSystem, gg) -> float:
    """Matching constant for Phi = gamma * s + Gg.

    Evaluating the integro-differential equation at the left edge u0
    gives p(u0) Phi'(u0) = (lam + delta) Phi(u0) - lam omega(u0), and
    with Gg(u0) = 0 this pins

        gamma = [lam omega(u0) + p(u0) (Gg)'(u0)]
                / [(lam + delta) s(u0) - p(u0) s'(u0)].

    ``gg`` may be a GreensApplication (its exposed derivative is the
    cancellation-free form), a GridFunction (interpolated derivative), or
    None when the forcing vanishes.
    """
    lam = model.interclaims.lam
    delta = model.delta
    u0 = model.u_min
    p0 = float(np.asarray(model.premium.p(u0), dtype=float))
    s = fs.solutions[0]
    s0 = float(np.asarray(s(u0), dtype=float))
    s0p = float(np.asarray(s.derivs[1](u0), dtype=float))

    den = (lam + delta) * s0 - p0 * s0p
    scale = max(abs((lam + delta) * s0), abs(p0 * s0p), 1e-300)
    if abs(den) < 1e-12 * scale:
        raise DegenerateConstantError(
            f"(lam+delta) s(u0) - p(u0) s'(u0) = {den:.3g} is degenerate")

    om0 = float(np.asarray(omega(model)(u0), dtype=float))
    if gg is None:
        ggp0 = 0.0
    elif isinstance(gg, GreensApplication):
        ggp0 = float(np.asarray(gg.deriv(u0), dtype=float))
    else:
        ggp0 = float(np.asarray(gg.derivative(u0), dtype=float))
    return (lam * om0 + p0 * ggp0) / den


# ---------------------------------------------------------------------------
# Full assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GerberShiuSolution:
    """Phi with its decomposition into gamma * s + Gg.

    ``route`` records how the value was produced ("closed_form" or
    "greens" here; asymptotic and simulation estimates carry their own
    result types).
    """

    phi: GridFunction
    gamma: float
    s: GridFunction
    gg: GridFunction
    route: str
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, u):
        return self.phi(u)

    def to_json(self, model: RiskModel | None = None) -> dict:
        out = {
            "route": self.route,
            "gamma": self.gamma,
            "grid": [[float(u), float(v)]
                     for u, v in zip(self.phi.nodes, self.phi.values)],
            "diagnostics": dict(self.diagnostics),
        }
        if model is not None:
            out["model"] = model_to_dict(model)
        return out


def _staged(tag: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except AssemblyError:
        raise
    except Exception as exc:
        raise AssemblyError(f"[{tag}] {exc}") from exc


def _closed_form_psi(model: RiskModel):
    """Dispatch to a closed-form ruin probability when one matches the
    (premium family, delta, penalty) triple; None otherwise."""
    if model.delta != 0.0 or not isinstance(model.penalty, RuinIndicatorPenalty):
        return None
    if not model.is_exp_exp():
        return None
    lam = model.interclaims.lam
    mu = model.claims.mu
    prem = model.premium
    if isinstance(prem, ConstantPremium):
        c = prem.c
        return lambda u: (lam / (c * mu)) * np.exp(
            -(mu - lam / c) * np.asarray(u, dtype=float))
    if isinstance(prem, LinearPremium):
        return lambda u: ruin_segerdahl(prem.c, prem.eps, lam, mu, u,
                                        order="standard")
    if isinstance(prem, ExpDecayPremium):
        return lambda u: ruin_exponential_premium(prem.c, lam, mu, u)
    if isinstance(prem, RationalPremium) and prem.eps == 1.0:
        return lambda u: ruin_rational_premium(prem.c, lam, mu, u)
    if isinstance(prem, QuadraticPremium):
        return lambda u: ruin_quadratic_premium(prem.c, lam, mu, u)
    return None


def _validate_ruin_shape(model: RiskModel, vals: np.ndarray) -> None:
    if model.delta != 0.0 or not isinstance(model.penalty, RuinIndicatorPenalty):
        return
    slack = 1e-9
    if np.min(vals) < -slack or np.max(vals) > 1.0 + slack:
        raise AssemblyError(
            f"[validate] ruin probability escapes [0, 1]: "
            f"range [{np.min(vals):.6g}, {np.max(vals):.6g}]")
    if np.max(np.diff(vals)) > slack:
        worst = int(np.argmax(np.diff(vals)))
        raise AssemblyError(
            f"[validate] ruin probability increases near node {worst}")


def phi(model: RiskModel, route: str = "auto", *,
        fs: FundamentalSystem | None = None,
        tol: float = 1e-10) -> GerberShiuSolution:
    """Assemble Phi(u) = gamma s(u) + Gg(u) on the model's working grid.

    route "closed_form" uses the matching reference formula (delta = 0
    ruin probabilities only), "greens" runs the full operator pipeline,
    and "auto" prefers the closed form when one exists. A user-built
    fundamental system can be passed to bypass the wired solver.
    """
    if route not in ("auto", "greens", "closed_form"):
        raise ValueError(f"unknown route {route!r}")

    closed = _closed_form_psi(model) if route in ("auto", "closed_form") else None
    if route == "closed_form" and closed is None:
        raise AssemblyError(
            "[dispatch] no closed form matches this model; use route='greens'")

    if closed is not None:
        grid = default_grid(model.u_min, model.u_max)
        vals = _staged("closed_form",
                       lambda: np.asarray(closed(grid), dtype=float))
        _validate_ruin_shape(model, vals)
        gamma = float(vals[0])
        s_vals = vals / gamma if gamma != 0.0 else np.ones_like(vals)
        value = GridFunction(grid, vals,
                             exact=lambda x: np.asarray(closed(x), dtype=float),
                             meta={"phi": "closed_form"})
        try:
            value = value.fit_tail()
        except Exception:
            pass
        return GerberShiuSolution(
            phi=value, gamma=gamma,
            s=GridFunction(grid, s_vals),
            gg=GridFunction(grid, np.zeros_like(grid), tail=ZeroTail()),
            route="closed_form",
            diagnostics={"tail": float(vals[-1])})

    ode = _staged("operator", build_operator, model)
    if fs is None:
        fs = _staged("fundamental_system", fundamental_system, ode, model)
    g = _staged("rhs", build_rhs, model)
    grid = np.asarray(g.nodes, dtype=float)
    if fs.grid.shape != grid.shape or not np.allclose(fs.grid, grid):
        raise AssemblyError(
            "[rhs] fundamental system and forcing term use different grids")

    s_sol, r_sol = fs.solutions
    if np.all(g.values == 0.0):
        gg_app = None
        gg_fn = GridFunction(grid, np.zeros_like(grid), tail=ZeroTail(),
                             meta={"greens": "zero"})
    else:
        w = lambda u: (np.asarray(s_sol(u), dtype=float)
                       * np.asarray(r_sol.derivs[1](u), dtype=float)
                       - np.asarray(s_sol.derivs[1](u), dtype=float)
                       * np.asarray(r_sol(u), dtype=float))
        gg_app = _staged("greens", greens_second_order, s_sol, r_sol, w, g,
                         tol=tol, exact_kernels=fs.route != "kummer")
        gg_fn = gg_app.value
    gamma = _staged("constant", gamma_constant, model, fs, gg_app)

    s_vals = np.asarray(s_sol(grid), dtype=float)
    vals = gamma * s_vals + gg_fn.values
    _validate_ruin_shape(model, vals)

    exact = None
    if gg_app is None:
        exact = lambda x: gamma * np.asarray(s_sol(x), dtype=float)
    value = GridFunction(grid, vals, exact=exact,
                         meta={"phi": "greens", "fs": fs.route})
    try:
        value = value.fit_tail()
    except Exception:
        pass

    diagnostics = {"tail": float(vals[-1]), "fs_route": fs.route}
    if gg_app is not None and gg_app.deriv2 is not None:
        probes = grid[4:-4:max(1, grid.size // 64)]
        resid = (gg_app.deriv2(probes)
                 + np.asarray(ode.coeffs[1](probes), dtype=float)
                 * (gamma * np.asarray(s_sol.derivs[1](probes), dtype=float)
                    + gg_app.deriv(probes))
                 + np.asarray(ode.coeffs[0](probes), dtype=float)
                 * (gamma * np.asarray(s_sol(probes), dtype=float)
                    + gg_fn(probes))
                 + gamma * np.asarray(s_sol.derivs[2](probes), dtype=float)
                 - np.asarray(g(probes), dtype=float))
        g_scale = float(np.max(np.abs(g.values)))
        diagnostics["residual"] = float(np.max(np.abs(resid))
                                        / max(g_scale, 1e-300))

    s_fn = GridFunction(grid, s_vals)
    try:
        s_fn = s_fn.fit_tail()
    except Exception:
        pass
    return GerberShiuSolution(phi=value, gamma=gamma, s=s_fn, gg=gg_fn,
                              route="greens", diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# Reference quadrature formula (general premium)
# ---------------------------------------------------------------------------


def _check_survival_decay(p: PremiumFunction, lam: float, mu: float) -> None:
    limit = p.p_limit
    rate = mu if math.isinf(limit) else mu - lam / limit
    if rate <= 0.0:
        raise ModelValidationError(
            f"survival integrand does not decay: mu - lam/p(inf) = {rate:.4g}"
            " <= 0 (net-profit condition fails)")


def ruin_tichy(p: PremiumFunction, lam: float, mu: float, u, *,
               tol: float = 1e-12):
    """Ruin probability by direct quadrature of the survival weight
    e^{lam q(x) - mu x} / p(x); scalar or array u."""
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError("claim and interclaim rates must be positive")
    _check_survival_decay(p, lam, mu)

    def weight(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([math.exp(lam * float(p.q(v)) - mu * v)
                         / float(p.p(v)) for v in xs])

    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    u0 = p.u_min
    if np.any(uu < u0 - 1e-12):
        raise ValueError(f"u below the domain edge {u0}")

    pts = np.unique(np.concatenate(([u0], uu)))
    # Suffix integrals accumulated from the far end: one semi-infinite
    # piece plus finite segments between requested points.
    suffix = {float(pts[-1]): integrate(weight, float(pts[-1]), math.inf,
                                        tol=tol).value}
    for right, left in zip(pts[:0:-1], pts[-2::-1]):
        seg = 0.0
        if right > left:
            seg = integrate(weight, float(left), float(right), tol=tol).value
        suffix[float(left)] = seg + suffix[float(right)]
    full = suffix[float(pts[0])]
    gamma0 = 1.0 / (1.0 + lam * full)
    psi = np.array([gamma0 * lam * suffix[float(v)] for v in uu])
    return float(psi[0]) if scalar else psi


# ---------------------------------------------------------------------------
# Linear premium: incomplete-gamma formula, both argument orders
# ---------------------------------------------------------------------------


def _segerdahl_log_terms(c: float, eps: float, lam: float, mu: float,
                         order: str):
    """Log-space numerator pieces; ``order`` picks which slot holds the
    u-dependent quantity inside Gamma(. , .)."""
    log_front = math.log(lam) + (lam / eps - 1.0) * math.log(eps)

    def log_gamma_term(u):
        grow = mu * (c + eps * float(u)) / eps
        if order == "printed":
            return log_upper_incomplete_gamma(grow, lam / eps)
        return log_upper_incomplete_gamma(lam / eps, grow)

    log_t1 = (lam / eps) * (math.log(mu) + math.log(c)) - mu * c / eps
    log_den = np.logaddexp(log_t1, log_front + log_gamma_term(0.0))
    return log_front, log_gamma_term, float(log_den)


def ruin_segerdahl(c: float, eps: float, lam: float, mu: float, u, *,
                   order: str = "diagnose"):
    """Linear-premium ruin probability via the incomplete-gamma formula

        psi(u) = lam eps^{lam/eps - 1} Gamma(. , .)
                 / [mu^{lam/eps} c^{lam/eps} e^{-mu c/eps}
                    + lam eps^{lam/eps - 1} Gamma(. , .)|_{u=0}],

    evaluated entirely in log space (the prefactors overflow for small
    eps). The formula circulates in two argument orders for Gamma:
    "printed" puts the u-dependent quantity mu (c + eps u)/eps in the
    order slot, which makes psi grow in u; "standard" puts lam/eps there
    and decays. The default "diagnose" evaluates both plus the
    general-premium quadrature oracle and raises SegerdahlOrderError
    when the printed order disagrees, rather than silently swapping.
    """
    if c <= 0.0 or eps <= 0.0:
        raise ValueError("need c > 0 and eps > 0 for a linear premium")
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError("claim and interclaim rates must be positive")
    if order not in ("printed", "standard", "diagnose"):
        raise ValueError(f"unknown order {order!r}")

    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(np.asarray(u, dtype=float))

    def evaluate(which: str) -> np.ndarray:
        log_front, log_gamma_term, log_den = _segerdahl_log_terms(
            c, eps, lam, mu, which)
        return np.array([math.exp(log_front + log_gamma_term(v) - log_den)
                         for v in uu])

    if order in ("printed", "standard"):
        vals = evaluate(order)
        return float(vals[0]) if scalar else vals

    printed = evaluate("printed")
    standard = evaluate("standard")
    oracle = np.atleast_1d(ruin_tichy(LinearPremium(c=c, eps=eps), lam, mu, uu))
    rel_printed = np.max(np.abs(printed - oracle) / np.maximum(oracle, 1e-300))
    if rel_printed > 1e-6:
        rel_standard = np.max(np.abs(standard - oracle)
                              / np.maximum(oracle, 1e-300))
        raise SegerdahlOrderError(
            "incomplete-gamma argument orders disagree: printed order "
            f"deviates from the quadrature oracle by {rel_printed:.3g} "
            f"relative (standard order deviates by {rel_standard:.3g}); "
            f"at u={uu[0]:.4g}: printed={printed[0]:.10g}, "
            f"standard={standard[0]:.10g}, oracle={oracle[0]:.10g}. "
            "Pass order='standard' for the decaying evaluation or "
            "order='printed' to reproduce the defective form.",
            printed=printed if not scalar else float(printed[0]),
            standard=standard if not scalar else float(standard[0]),
            oracle=oracle if not scalar else float(oracle[0]))
    return float(printed[0]) if scalar else printed


# ---------------------------------------------------------------------------
# Exponential, rational and quadratic premiums
# ---------------------------------------------------------------------------


def ruin_exponential_premium(c: float, lam: float, mu: float, u, *,
                             display: bool = False):
    """Ruin probability for p(u) = c (1 + e^{-u}).

    The authoritative value is the general-premium quadrature. The
    hypergeometric display for this premium needs 2F1 past its branch
    point (argument e^u + 1 > 1) and does not reproduce the quadrature;
    ``display=True`` returns that evaluation anyway, branch warning and
    all, so the discrepancy stays visible.
    """
    if c <= lam / mu:
        raise ValueError(f"net-profit condition fails: c = {c} <= lam/mu "
                         f"= {lam / mu}")
    if not display:
        return ruin_tichy(ExpDecayPremium(c=c), lam, mu, u)

    warnings.warn(
        "the hypergeometric display evaluates 2F1 at argument e^u + 1 > 1, "
        "past the branch point; the value depends on the branch convention "
        "and the quadrature route is authoritative",
        BranchSensitivityWarning, stacklevel=2)
    a = lam / c
    den = 2.0 * mu * gauss_2f1(1.0 + mu, 1.0 + a, 2.0 + a, 2.0)

    def one(v: float) -> float:
        z = math.exp(v) + 1.0
        num = -(1.0 + a) * gauss_2f1(a, mu, 1.0 + a, z) * (0.5 * z) ** a
        return num / den

    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    vals = np.array([one(float(v)) for v in uu])
    return float(vals[0]) if scalar else vals


def ruin_rational_premium(c: float, lam: float, mu: float, u):
    """Ruin probability for p(u) = c + 1/(1 + u), in the rearranged
    quadrature form with weight e^{-x (c mu - lam)/c} (c + c x + 1)^{-(lam
    + c^2)/c^2} (1 + x)."""
    if c <= lam / mu:
        raise ValueError(f"net-profit condition fails: c = {c} <= lam/mu "
                         f"= {lam / mu}")
    power = -(lam + c * c) / (c * c)

    def weight(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        return (np.exp(-xs * (c * mu - lam) / c)
                * (c + c * xs + 1.0) ** power * (1.0 + xs))

    pref = lam * (c + 1.0) ** (lam / (c * c))
    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    den = 1.0 + pref * integrate(weight, 0.0, math.inf, tol=1e-12).value
    vals = np.array([pref * integrate(weight, float(v), math.inf,
                                      tol=1e-12).value / den for v in uu])
    return float(vals[0]) if scalar else vals


def ruin_quadratic_premium(c: float, lam: float, mu: float, u):
    """Ruin probability for p(u) = c + u^2, with the arctan reciprocal
    integral q(x) = arctan(x/sqrt(c))/sqrt(c) in the exponent."""
    if c <= 0.0:
        raise ValueError("need c > 0")
    rc = math.sqrt(c)

    def weight(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(-(-lam * np.arctan(xs / rc) + mu * xs * rc) / rc) \
            / (c + xs * xs)

    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    den = 1.0 + lam * integrate(weight, 0.0, math.inf, tol=1e-12).value
    vals = np.array([lam * integrate(weight, float(v), math.inf,
                                     tol=1e-12).value / den for v in uu])
    return float(vals[0]) if scalar else vals
