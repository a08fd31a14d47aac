"""Large-surplus behavior of the ruin and discounted-penalty solutions.

Four tools live here, all built on the second-order machinery:

* :func:`fedoryuk_solutions` produces the pair of frozen-coefficient
  (WKB-style) approximants ``exp(int (rho_i + rho_i^(1)))`` of the
  homogeneous equation, with analytic logarithmic derivatives and a
  residual diagnostic.
* :func:`pi_constants` evaluates the signed-permutation weights attached
  to a vector of expansion rates, plus an independent determinant-ratio
  route used to cross-check the enumeration.
* :func:`ruin_asymptote` returns the zero-discount ruin asymptote
  ``K e^{-mu u + lam q(u)} / (mu p(u) + p'(u) - lam)`` with its constant
  fixed by the exact quadrature at u = 0.
* :func:`gs_asymptote` and :func:`penalty_expansion` describe the
  discounted penalty as ``h1 s(u)`` plus a source-shaped correction,
  computed through the cancellation-free tail form
  ``Phi - h1 s = s int_u^inf (r/w) g - r int_u^inf (s/w) g``.

Every returned :class:`AsymptoticForm` carries ratio checkpoints against
the exact route, so claims about convergence are recorded next to the
form itself rather than asserted blindly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gerber_shiu import gamma_constant, ruin_tichy
from .greens import greens_second_order
from .model import (
    ConstantPremium,
    ExpDecayPremium,
    LinearPremium,
    QuadraticPremium,
    RiskModel,
    RuinIndicatorPenalty,
)
from .numerics import (
    ExponentialTail,
    GridFunction,
    TailFitError,
    cumulative,
    default_grid,
)
from .operator import (
    FundamentalSystem,
    LinearODE,
    build_operator,
    build_rhs,
    fundamental_system,
)

__all__ = [
    "AsymptoticForm",
    "AsymptoticTerm",
    "DegenerateRatesError",
    "ExpansionConditionError",
    "FedoryukSolution",
    "PremiumClassError",
    "TurningPointError",
    "fedoryuk_solutions",
    "gs_asymptote",
    "penalty_expansion",
    "pi_constants",
    "ruin_asymptote",
]


class PremiumClassError(ValueError):
    """The premium fits neither large-u class the analysis covers
    (constant limit with settling derivatives, or polynomial growth)."""


class TurningPointError(RuntimeError):
    """The frozen-coefficient roots collide or turn complex on the working
    domain; the two-branch construction is undefined there."""


class DegenerateRatesError(ValueError):
    """Coinciding or vanishing rates make the permutation weights blow up."""


class ExpansionConditionError(RuntimeError):
    """A prerequisite of the large-u expansion failed.

    ``failed`` maps the name of each violated check to a description;
    the message lists them all.
    """

    def __init__(self, failed: dict):
        self.failed = dict(failed)
        detail = "; ".join(f"{name}: {why}" for name, why in self.failed.items())
        super().__init__(f"expansion preconditions violated ({detail})")


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticTerm:
    """One ``K * u^power * e^{rate u}`` skeleton.

    ``coefficient`` is None when only the shape is pinned and the
    magnitude is a late-u estimate (look for bands in the owning form's
    diagnostics).
    """

    rate: float
    power: float
    coefficient: float | None
    label: str = ""

    def describe(self) -> dict:
        coef = "estimated" if self.coefficient is None else float(self.coefficient)
        return {"coef": coef, "power": float(self.power),
                "rate": float(self.rate), "label": self.label}


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if math.isinf(v) or math.isnan(v) else v
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return str(obj)


@dataclass(frozen=True)
class AsymptoticForm:
    """A one- or two-term large-u description with its own evaluator.

    ``terms`` are sorted dominant-first (strictly decreasing exponential
    rate; equal rates must differ in power). ``evaluate`` is the honest
    functional form: it uses the actual stable solution and source, not
    just the power-law skeletons, so it is meaningful at moderate u too.
    ``ratio_checkpoints`` record exact-route agreement at a few late-u
    points and ``validity`` is the first checkpoint from which the ratio
    stays within 10 percent of one (``inf`` when that never happens).
    """

    terms: tuple[AsymptoticTerm, ...]
    validity: float
    evaluate: Callable
    ratio_checkpoints: tuple[tuple[float, float], ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        rates = [t.rate for t in self.terms]
        if any(b > a + 1e-12 for a, b in zip(rates, rates[1:])):
            raise ValueError("terms must be sorted by decreasing rate")
        for a, b in itertools.combinations(self.terms, 2):
            if abs(a.rate - b.rate) < 1e-9 and abs(a.power - b.power) < 1e-9:
                raise ValueError(
                    f"asymptotically equivalent terms: {a.describe()} "
                    f"vs {b.describe()}")

    def __call__(self, u):
        return self.evaluate(u)

    def to_json(self) -> dict:
        validity = None if math.isinf(self.validity) else float(self.validity)
        return {
            "terms": [t.describe() for t in self.terms],
            "validity": validity,
            "ratio_checkpoints": [[float(u), float(r)]
                                  for u, r in self.ratio_checkpoints],
            "diagnostics": _jsonify(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# Coefficient limits and premium classification
# ---------------------------------------------------------------------------


def _sequence_limit(values) -> float | None:
    """Limit of a sequence sampled at geometrically growing arguments.

    Accepts when successive absolute differences shrink (they must fall
    below 60 percent over two doublings and end small on the value
    scale); extrapolates the tail pair with the 1/u Richardson step.
    Returns None for sequences that do not settle.
    """
    v = [float(x) for x in values]
    if len(v) < 5:
        raise ValueError("need at least five probes")
    d = [abs(b - a) for a, b in zip(v, v[1:])]
    scale = 1.0 + max(abs(x) for x in v)
    if max(d) <= 1e-12 * scale:
        return v[-1]
    settled = (d[2] <= 0.6 * d[0] + 1e-12 * scale
               and d[3] <= 0.6 * d[1] + 1e-12 * scale
               and d[3] <= 0.05 * scale)
    if not settled:
        return None
    return 2.0 * v[-1] - v[-2]


def _coefficient_limits(ode: LinearODE) -> tuple[float, float]:
    """Large-u limits (c0_bar, c1_bar) of the second-order coefficients.

    Probes beyond the working domain at u_max * {1, 2, 4, 8, 16}. A c0
    limit within 5 percent of its first probe is snapped to zero: c0 is
    -delta*mu/p(u), so a vanishing limit is the exploding-premium
    signature, not noise.
    """
    if ode.order != 2:
        raise PremiumClassError("large-u classification is wired for order 2")
    base = float(ode.domain[1])
    probes = base * np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    c0_vals = [float(np.asarray(ode.coeffs[0](u), dtype=float)) for u in probes]
    c1_vals = [float(np.asarray(ode.coeffs[1](u), dtype=float)) for u in probes]
    c1_bar = _sequence_limit(c1_vals)
    c0_bar = _sequence_limit(c0_vals)
    if c1_bar is None or c0_bar is None:
        raise PremiumClassError(
            "equation coefficients do not settle at large u "
            f"(c0 probes {np.round(c0_vals, 6).tolist()}, "
            f"c1 probes {np.round(c1_vals, 6).tolist()}); the premium is "
            "outside the constant-limit and polynomial-growth classes")
    if abs(c0_bar) <= max(1e-8, 0.05 * abs(c0_vals[0])):
        c0_bar = 0.0
    return c0_bar, c1_bar


def _limit_roots(ode: LinearODE) -> tuple[float, float]:
    """Characteristic roots of the frozen equation at infinity, ascending."""
    c0_bar, c1_bar = _coefficient_limits(ode)
    disc = c1_bar * c1_bar - 4.0 * c0_bar
    if disc <= 0.0:
        raise TurningPointError(
            f"limiting characteristic roots are complex (disc = {disc:.4g})")
    sq = math.sqrt(disc)
    return (-c1_bar - sq) / 2.0, (-c1_bar + sq) / 2.0


def _probe_premium_limit(premium, u_hi: float) -> float:
    """p(infinity) for rates that do not declare one; raises when the
    probes neither settle nor grow monotonically."""
    limit = premium.p_limit
    if not math.isnan(limit):
        return limit
    probes = [float(np.asarray(premium.p(u), dtype=float))
              for u in float(u_hi) * np.array([1.0, 2.0, 4.0, 8.0, 16.0])]
    settled = _sequence_limit(probes)
    if settled is not None:
        return settled
    if all(b > a * 1.2 for a, b in zip(probes, probes[1:])):
        return math.inf
    raise PremiumClassError(
        f"premium has no detectable large-u limit (probes {probes})")


# ---------------------------------------------------------------------------
# Frozen-coefficient (WKB) approximants
# ---------------------------------------------------------------------------


def _branch_terms(ode: LinearODE, u, branch: int) -> tuple[np.ndarray, np.ndarray]:
    """(rho, eta) for one branch, vectorized over u.

    rho solves ``rho^2 + c1 rho + c0 = 0`` (branch 0 is the smaller root),
    ``rho' = -(c1' rho + c0')/(2 rho + c1)`` by implicit differentiation,
    and ``eta = rho - rho'/(2 rho + c1)`` is the corrected logarithmic
    derivative. The denominator ``2 rho + c1`` equals minus/plus the
    discriminant square root for branch 0/1, so its sign is per-branch.
    """
    if ode.coeff_primes is None:
        raise ValueError("the corrected branches need coefficient derivatives")
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    ones = np.ones_like(uu)
    c0 = np.asarray(ode.coeffs[0](uu), dtype=float) * ones
    c1 = np.asarray(ode.coeffs[1](uu), dtype=float) * ones
    c0p = np.asarray(ode.coeff_primes[0](uu), dtype=float) * ones
    c1p = np.asarray(ode.coeff_primes[1](uu), dtype=float) * ones
    disc = c1 * c1 - 4.0 * c0
    if np.any(disc <= 0.0):
        bad = float(uu[np.argmin(disc)])
        raise TurningPointError(
            f"characteristic roots are complex near u = {bad:.4g}")
    sq = np.sqrt(disc)
    sign = -1.0 if branch == 0 else 1.0
    denom = sign * sq
    floor = 1e-10 * (1.0 + np.abs(c1))
    if np.any(np.abs(denom) <= floor):
        bad = float(uu[np.argmin(np.abs(denom))])
        raise TurningPointError(
            f"characteristic roots collide near u = {bad:.4g}; no "
            "two-branch splitting exists there")
    rho = 0.5 * (-c1 + sign * sq)
    rho_prime = -(c1p * rho + c0p) / denom
    eta = rho - rho_prime / denom
    return rho, eta


@dataclass(frozen=True)
class FedoryukSolution:
    """One frozen-coefficient approximant ``exp(int_{u0}^u eta)``.

    ``rate`` is the limiting exponential rate (the frozen root at
    infinity); calling the object evaluates the approximant itself,
    normalized to 1 at the left domain edge.
    """

    branch: int
    rate: float
    ode: LinearODE
    log_integral: GridFunction

    def __call__(self, u):
        out = np.exp(np.asarray(self.log_integral(u), dtype=float))
        return float(out) if np.ndim(u) == 0 else out

    def characteristic_rate(self, u):
        """The uncorrected frozen root rho(u)."""
        rho, _ = _branch_terms(self.ode, u, self.branch)
        return float(rho[0]) if np.ndim(u) == 0 else rho

    def log_derivative(self, u):
        """rho(u) + rho^(1)(u), the corrected logarithmic derivative."""
        _, eta = _branch_terms(self.ode, u, self.branch)
        return float(eta[0]) if np.ndim(u) == 0 else eta

    def correction(self, u):
        """The first-order correction rho^(1)(u) alone."""
        rho, eta = _branch_terms(self.ode, u, self.branch)
        out = eta - rho
        return float(out[0]) if np.ndim(u) == 0 else out

    def residual_ratio(self, u, h: float = 1e-4):
        """|t'' + c1 t' + c0 t| / |t| with eta' by central difference.

        For t = exp(int eta) the ratio equals |eta' + eta^2 + c1 eta + c0|,
        which needs no evaluation of t itself.
        """
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        _, eta = _branch_terms(self.ode, uu, self.branch)
        _, eta_hi = _branch_terms(self.ode, uu + h, self.branch)
        _, eta_lo = _branch_terms(self.ode, uu - h, self.branch)
        eta_p = (eta_hi - eta_lo) / (2.0 * h)
        c0 = np.asarray(self.ode.coeffs[0](uu), dtype=float)
        c1 = np.asarray(self.ode.coeffs[1](uu), dtype=float)
        out = np.abs(eta_p + eta * eta + c1 * eta + c0)
        return float(out[0]) if np.ndim(u) == 0 else out


def fedoryuk_solutions(ode: LinearODE) -> tuple[FedoryukSolution, FedoryukSolution]:
    """The two corrected frozen-coefficient approximants of a second-order
    homogeneous equation, (decaying branch, growing branch).

    Each approximant is ``exp(int_{u0}^u (rho_i + rho_i^(1)))`` with the
    branch roots and corrections evaluated analytically and the integral
    accumulated on a fine grid. The coefficient limits are probed first:
    premiums outside the constant-limit and polynomial classes raise
    :class:`PremiumClassError`, and root collisions on the domain raise
    :class:`TurningPointError`.
    """
    if ode.order != 2:
        raise ValueError("the two-branch construction needs a second-order"
                         " equation")
    k_lo, k_hi = _limit_roots(ode)
    lo, hi = float(ode.domain[0]), float(ode.domain[1])
    grid = default_grid(lo, hi, 1536)
    out = []
    for branch, rate in ((0, k_lo), (1, k_hi)):
        _, eta = _branch_terms(ode, grid, branch)

        def eta_exact(u, _b=branch):
            _, vals = _branch_terms(ode, u, _b)
            return vals

        gf = GridFunction(grid, eta, exact=eta_exact)
        log_int = cumulative(gf, "A", tol=1e-11)
        out.append(FedoryukSolution(branch=branch, rate=rate, ode=ode,
                                    log_integral=log_int))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Signed-permutation weights
# ---------------------------------------------------------------------------


def _parity(perm: tuple) -> float:
    inv = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                inv += 1
    return -1.0 if inv % 2 else 1.0


def _pi_enumeration(y: np.ndarray) -> np.ndarray:
    n = y.size
    powers = np.empty((n, n + 1))
    powers[:, 0] = 1.0
    for e in range(1, n + 1):
        powers[:, e] = powers[:, e - 1] * y
    den_terms = []
    num_terms: list[list[float]] = [[] for _ in range(n)]
    for perm in itertools.permutations(range(1, n + 1)):
        sgn = _parity(perm)
        i = perm.index(n)
        partial = 1.0
        for k in range(n):
            if k != i:
                partial *= powers[k, perm[k]]
        num_terms[i].append(sgn * partial)
        den_terms.append(sgn * partial * powers[i, n])
    den = math.fsum(den_terms)
    if den == 0.0:
        raise DegenerateRatesError("permutation-sum denominator vanished")
    return np.array([math.fsum(terms) for terms in num_terms]) / den


def _pi_determinant(y: np.ndarray) -> np.ndarray:
    n = y.size
    mat = np.column_stack([y ** e for e in range(1, n + 1)])
    den = float(np.linalg.det(mat))
    if den == 0.0:
        raise DegenerateRatesError("rate matrix is singular")
    out = np.empty(n)
    for i in range(n):
        minor = np.delete(np.delete(mat, i, axis=0), n - 1, axis=1)
        minor_det = float(np.linalg.det(minor)) if n > 1 else 1.0
        out[i] = (-1.0) ** (i + n - 1) * minor_det / den
    return out


def pi_constants(rates, *, method: str = "enumeration") -> np.ndarray:
    """Signed-permutation weights pi_i for a vector of expansion rates.

    For a permutation phi of the exponents {1..N}, the weight of rate i is
    the ratio of the signed sum over permutations fixing phi(i) = N of
    ``prod_{k != i} y_k^{phi(k)}`` to the signed sum over all permutations
    of ``prod_k y_k^{phi(k)}``. The default route enumerates those sums
    directly (factorial work, capped at N = 8); ``method="determinant"``
    reads the same numbers off an LU-based cofactor/determinant ratio and
    exists to cross-check the enumeration.
    """
    y = np.asarray(rates, dtype=float).ravel()
    n = y.size
    if n == 0:
        raise ValueError("need at least one rate")
    if n > 8:
        raise ValueError(f"enumeration over {n}! permutations refused; "
                         "cap is 8 rates")
    scale = float(np.max(np.abs(y)))
    if scale == 0.0 or float(np.min(np.abs(y))) <= 1e-12 * scale:
        raise DegenerateRatesError(
            "a zero rate annihilates every permutation product")
    for i in range(n):
        for j in range(i + 1, n):
            if abs(y[i] - y[j]) <= 1e-12 * scale:
                raise DegenerateRatesError(
                    f"rates y[{i}] = {y[i]:.6g} and y[{j}] = {y[j]:.6g} "
                    "coincide")
    if method == "enumeration":
        return _pi_enumeration(y)
    if method == "determinant":
        return _pi_determinant(y)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Shared second-order assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Assembly:
    """Everything the penalty asymptotes need from one pipeline run."""

    model: RiskModel
    ode: LinearODE
    fs: FundamentalSystem
    g: GridFunction
    grid: np.ndarray
    gamma: float
    h1: float
    s: Callable
    r: Callable
    phi: Callable
    corr: Callable | None
    f_s: float
    f_r: float


def _suffix_kernel(grid, sol, w, g, exact_ok, fallback_rate) -> GridFunction:
    """Suffix cumulative of (sol/w) g with a fitted (or analytic) tail."""
    def kernel(u):
        return (np.asarray(sol(u), dtype=float) * np.asarray(g(u), dtype=float)
                / np.asarray(w(u), dtype=float))

    vals = kernel(grid)
    gf = GridFunction(grid, vals, exact=kernel if exact_ok else None)
    try:
        gf = gf.fit_tail()
    except TailFitError:
        gf = GridFunction(grid, vals, exact=kernel if exact_ok else None,
                          tail=ExponentialTail(rate=fallback_rate))
    return cumulative(gf, "B", tol=1e-11)


def _assemble(model: RiskModel, fs: FundamentalSystem | None = None) -> _Assembly:
    """Run operator -> fundamental system -> Green's application once and
    derive the boundary constant, the stable coefficient h1, and the
    cancellation-free correction."""
    ode = build_operator(model)
    if fs is None:
        fs = fundamental_system(ode, model)
    if fs.order != 2:
        raise ValueError("the large-u analysis is wired for second-order"
                         " systems (one decaying, one growing solution)")
    g = build_rhs(model)
    grid = np.asarray(g.nodes, dtype=float)
    if fs.grid.shape != grid.shape or not np.allclose(fs.grid, grid):
        raise ValueError("fundamental system and source use different grids")
    s_sol, r_sol = fs.solutions

    if np.all(g.values == 0.0):
        gamma = gamma_constant(model, fs, None)

        def phi_fn(u):
            return gamma * np.asarray(s_sol(u), dtype=float)

        return _Assembly(model=model, ode=ode, fs=fs, g=g, grid=grid,
                         gamma=gamma, h1=gamma, s=s_sol, r=r_sol,
                         phi=phi_fn, corr=None, f_s=0.0, f_r=0.0)

    def w(u):
        return (np.asarray(s_sol(u), dtype=float)
                * np.asarray(r_sol.derivs[1](u), dtype=float)
                - np.asarray(s_sol.derivs[1](u), dtype=float)
                * np.asarray(r_sol(u), dtype=float))

    exact_ok = fs.route != "kummer"
    app = greens_second_order(s_sol, r_sol, w, g, exact_kernels=exact_ok)
    gamma = gamma_constant(model, fs, app)

    nu_g = g.tail.rate if isinstance(g.tail, ExponentialTail) else None
    try:
        k_lo, k_hi = _limit_roots(ode)
    except (PremiumClassError, TurningPointError):
        k_lo = k_hi = 0.0
    fall_r = (nu_g + k_lo) if nu_g is not None else 1.0
    fall_s = (nu_g + k_hi) if nu_g is not None else 1.0
    b_r = _suffix_kernel(grid, r_sol, w, g, exact_ok, max(fall_r, 1e-3))
    b_s = _suffix_kernel(grid, s_sol, w, g, exact_ok, max(fall_s, 1e-3))

    u0 = float(grid[0])
    f_r = float(np.asarray(b_r(u0), dtype=float))
    f_s = float(np.asarray(b_s(u0), dtype=float))
    k0 = float(np.asarray(r_sol(u0), dtype=float)
               / np.asarray(s_sol(u0), dtype=float))
    h1 = gamma - f_r + k0 * f_s

    gg = app.value

    def phi_fn(u):
        return (gamma * np.asarray(s_sol(u), dtype=float)
                + np.asarray(gg(u), dtype=float))

    def corr(u):
        return (np.asarray(s_sol(u), dtype=float)
                * np.asarray(b_r(u), dtype=float)
                - np.asarray(r_sol(u), dtype=float)
                * np.asarray(b_s(u), dtype=float))

    return _Assembly(model=model, ode=ode, fs=fs, g=g, grid=grid,
                     gamma=gamma, h1=h1, s=s_sol, r=r_sol,
                     phi=phi_fn, corr=corr, f_s=f_s, f_r=f_r)


def _checkpoints(grid: np.ndarray, fracs) -> list[float]:
    lo, hi = float(grid[0]), float(grid[-1])
    out: list[float] = []
    for f in fracs:
        u = float(grid[np.argmin(np.abs(grid - (lo + f * (hi - lo))))])
        if not out or u > out[-1]:
            out.append(u)
    return out


def _validity_from(us, ratios, tol: float = 0.1) -> float:
    """First checkpoint from which every later ratio stays within tol."""
    for i, u in enumerate(us):
        if all(abs(r - 1.0) <= tol for r in ratios[i:]):
            return float(u)
    return math.inf


def _fit_log_derivative(sol, window: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit of t'/t against y + beta/u on the window.

    Returns (y, beta, rms residual). Needs a FundamentalSolution (or any
    object with ``derivs``) so the derivative is analytic-grade rather
    than re-differenced.
    """
    vals = np.asarray(sol(window), dtype=float)
    d1 = np.asarray(sol.derivs[1](window), dtype=float)
    eta = d1 / vals
    design = np.column_stack([np.ones_like(window), 1.0 / window])
    coef, *_ = np.linalg.lstsq(design, eta, rcond=None)
    resid = float(np.sqrt(np.mean((eta - design @ coef) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def _fit_prefactor(fn, window: np.ndarray, rate: float, power: float) -> float:
    """Median of fn(u) / (u^power e^{rate u}) over the window."""
    vals = np.asarray(fn(window), dtype=float)
    skel = np.power(window, power) * np.exp(rate * window)
    return float(np.median(vals / skel))


def _fit_skeleton(window: np.ndarray, vals: np.ndarray) -> tuple[float, float, float]:
    """Least-squares (K, power, rate) for vals ~ K u^power e^{rate u}."""
    sign = float(np.sign(vals[-1]))
    design = np.column_stack([np.ones_like(window), np.log(window), window])
    coef, *_ = np.linalg.lstsq(design, np.log(sign * vals), rcond=None)
    return sign * math.exp(float(coef[0])), float(coef[1]), float(coef[2])


# ---------------------------------------------------------------------------
# Expansion of the discounted penalty (general two-term form)
# ---------------------------------------------------------------------------


def penalty_expansion(model: RiskModel, *,
                      fs: FundamentalSystem | None = None,
                      nu: float | None = None) -> AsymptoticForm:
    """Two-term large-u expansion ``h1 s(u) + C g(u)`` of the penalty.

    ``h1`` combines the boundary constant with the full-line kernel
    integrals, so ``Phi - h1 s`` reduces to pure suffix integrals (no
    cancellation). The correction coefficient C is the frozen-equation
    particular-solution weight ``1/((nu + y1)(nu + y2))`` when the
    coefficients are constant on the domain, and a late-u fit of the
    suffix form otherwise. ``nu`` is the decay rate of the source g
    (defaulting to its fitted tail rate).

    The signed-permutation combination ``sum_i pi_i / (y_i + nu)`` is
    exposed as ``diagnostics["coefficient_heuristic"]``; it disagrees with
    the particular-solution weight already at constant coefficients, so it
    never drives the returned terms.

    Raises :class:`ExpansionConditionError` when the solutions fail the
    log-derivative fit, the rate ordering, or the source decay margin.
    """
    asm = _assemble(model, fs)
    grid = asm.grid
    hi = float(grid[-1])
    window = grid[grid >= hi / 2.0]
    zero_g = asm.corr is None

    y1, b1, r1 = _fit_log_derivative(asm.s, window)
    failed: dict[str, str] = {}
    if r1 > 1e-2:
        failed["log-derivative fit (decaying)"] = (
            f"rms residual {r1:.3e} exceeds 1e-2")
    if y1 > 1e-9:
        failed["rate ordering"] = f"decaying rate {y1:.4g} is positive"

    y2 = b2 = None
    nu_val = float(nu) if nu is not None else None
    if not zero_g:
        y2, b2, r2 = _fit_log_derivative(asm.r, window)
        if r2 > 1e-2:
            failed["log-derivative fit (growing)"] = (
                f"rms residual {r2:.3e} exceeds 1e-2")
        if y2 <= y1 + 1e-12 and "rate ordering" not in failed:
            failed["rate ordering"] = (
                f"growing rate {y2:.4g} does not exceed decaying rate "
                f"{y1:.4g}")
        if nu_val is None:
            if isinstance(asm.g.tail, ExponentialTail):
                nu_val = float(asm.g.tail.rate)
            else:
                raise ValueError(
                    "the source has no exponential tail; pass nu explicitly")
        if nu_val <= -y1:
            failed["source decay margin"] = (
                f"source rate {nu_val:.4g} does not exceed -y1 = {-y1:.4g}")
    if failed:
        raise ExpansionConditionError(failed)

    c_s = _fit_prefactor(asm.s, window, y1, b1)
    term1 = AsymptoticTerm(rate=y1, power=b1, coefficient=asm.h1 * c_s,
                           label="stable")
    diagnostics: dict = {
        "gamma": asm.gamma, "h1": asm.h1,
        "fit": {"decaying": {"rate": y1, "power": b1, "residual": r1}},
    }

    if zero_g:
        def evaluate(u):
            return asm.h1 * np.asarray(asm.s(u), dtype=float)

        us = _checkpoints(grid, (0.5, 0.75, 1.0))
        ratios = [float(asm.phi(u) / evaluate(u)) for u in us]
        return AsymptoticForm(
            terms=(term1,), validity=_validity_from(us, ratios),
            evaluate=evaluate,
            ratio_checkpoints=tuple(zip(us, ratios)),
            diagnostics=diagnostics)

    diagnostics["fit"]["growing"] = {"rate": y2, "power": b2}
    # constant-coefficient detection on the working grid
    c0_vals = np.asarray(asm.ode.coeffs[0](grid), dtype=float) * np.ones_like(grid)
    c1_vals = np.asarray(asm.ode.coeffs[1](grid), dtype=float) * np.ones_like(grid)
    spread = max(float(np.ptp(c0_vals)), float(np.ptp(c1_vals)))
    scale = 1.0 + max(float(np.max(np.abs(c0_vals))),
                      float(np.max(np.abs(c1_vals))))
    if spread <= 1e-10 * scale:
        roots = np.sort(np.roots([1.0, float(c1_vals[0]), float(c0_vals[0])]).real)
        y_pair = (float(roots[0]), float(roots[1]))
        coefficient = 1.0 / ((nu_val + y_pair[0]) * (nu_val + y_pair[1]))
        coefficient_is_exact = True
    else:
        y_pair = (y1, float(y2))
        ratios_window = (np.asarray(asm.corr(window), dtype=float)
                         / np.asarray(asm.g(window), dtype=float))
        design = np.column_stack([np.ones_like(window), 1.0 / window])
        fit_coef, *_ = np.linalg.lstsq(design, ratios_window, rcond=None)
        coefficient = float(fit_coef[0])
        diagnostics["coefficient_band"] = [float(np.min(ratios_window)),
                                           float(np.max(ratios_window))]
        coefficient_is_exact = False

    try:
        pis = pi_constants(list(y_pair))
        heuristic = float(np.sum(pis / (np.asarray(y_pair) + nu_val)))
    except DegenerateRatesError:
        heuristic = None
    diagnostics["coefficient"] = coefficient
    diagnostics["coefficient_is_exact"] = coefficient_is_exact
    diagnostics["coefficient_heuristic"] = heuristic
    diagnostics["nu"] = nu_val

    g_pow = asm.g.tail.power if isinstance(asm.g.tail, ExponentialTail) else 0.0
    term2 = AsymptoticTerm(rate=-nu_val, power=float(g_pow),
                           coefficient=coefficient if coefficient_is_exact else None,
                           label="source")

    def evaluate(u):
        return (asm.h1 * np.asarray(asm.s(u), dtype=float)
                + coefficient * np.asarray(asm.g(u), dtype=float))

    us = _checkpoints(grid, (0.5, 0.75, 1.0))
    ratios = [float(asm.corr(u) / (coefficient * asm.g(u))) for u in us]
    return AsymptoticForm(
        terms=(term1, term2), validity=_validity_from(us, ratios),
        evaluate=evaluate, ratio_checkpoints=tuple(zip(us, ratios)),
        diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# Ruin asymptote (zero discount)
# ---------------------------------------------------------------------------


def ruin_asymptote(model: RiskModel) -> AsymptoticForm:
    """Large-u ruin asymptote ``K e^{-mu u + lam q(u)} / (mu p + p' - lam)``.

    The constant ``K = lam (1 - psi(0))`` is fixed by the exact survival
    quadrature at u = 0, which makes the asymptote exact (not merely
    asymptotic) for a constant premium. Skeleton metadata (rate, power,
    prefactor) is closed-form for the constant, linear, exponential-decay
    and quadratic families and fitted otherwise.
    """
    if model.delta != 0.0:
        raise ValueError("ruin_asymptote covers delta = 0 only; use "
                         "gs_asymptote for discounted problems")
    if not isinstance(model.penalty, RuinIndicatorPenalty):
        raise ValueError("ruin_asymptote needs the plain ruin indicator "
                         "penalty")
    if not model.is_exp_exp():
        raise ValueError("ruin_asymptote is wired for exponential claim "
                         "and interclaim laws")
    prem = model.premium
    lam = model.interclaims.lam
    mu = model.claims.mu
    limit = _probe_premium_limit(prem, model.u_max)

    psi0 = float(ruin_tichy(prem, lam, mu, 0.0))
    big_k = lam * (1.0 - psi0)

    def evaluate(u):
        uu = np.asarray(u, dtype=float)
        p = np.asarray(prem.p(uu), dtype=float)
        pp = np.asarray(prem.p_prime(uu), dtype=float)
        q = np.asarray(prem.q(uu), dtype=float)
        out = big_k * np.exp(-mu * uu + lam * q) / (mu * p + pp - lam)
        return float(out) if np.ndim(u) == 0 else out

    rate = -mu if math.isinf(limit) else lam / limit - mu
    diagnostics: dict = {"K": big_k, "psi0": psi0,
                         "premium_limit": None if math.isinf(limit) else limit}

    term: AsymptoticTerm
    if isinstance(prem, ConstantPremium):
        term = AsymptoticTerm(rate=rate, power=0.0,
                              coefficient=big_k / (mu * prem.c - lam))
    elif isinstance(prem, LinearPremium):
        le = lam / prem.eps
        coef = big_k * (prem.eps / prem.c) ** le / (mu * prem.eps)
        term = AsymptoticTerm(rate=-mu, power=le - 1.0, coefficient=coef)
    elif isinstance(prem, ExpDecayPremium):
        # q(u) = [u + ln(1 + e^{-u}) - ln 2]/c, so e^{lam q} tends to
        # 2^{-lam/c} e^{lam u / c}
        coef = big_k * 2.0 ** (-lam / prem.c) / (mu * prem.c - lam)
        term = AsymptoticTerm(rate=rate, power=0.0, coefficient=coef)
    elif isinstance(prem, QuadraticPremium):
        q_inf = math.pi / (2.0 * math.sqrt(prem.c))
        term = AsymptoticTerm(rate=-mu, power=-2.0,
                              coefficient=big_k * math.exp(lam * q_inf) / mu)
    else:
        lo = max(model.u_min, 1e-6)
        window = np.linspace(lo + 0.6 * (model.u_max - lo), model.u_max, 48)
        k_fit, p_fit, r_fit = _fit_skeleton(window, evaluate(window))
        term = AsymptoticTerm(rate=rate, power=p_fit, coefficient=None)
        diagnostics["skeleton_fit"] = {"coef": k_fit, "power": p_fit,
                                       "rate": r_fit}

    grid = default_grid(model.u_min, model.u_max)
    us = _checkpoints(grid, (0.5, 0.75, 0.9))
    exact = ruin_tichy(prem, lam, mu, np.asarray(us))
    ratios = [float(e / evaluate(u)) for u, e in zip(us, exact)]
    return AsymptoticForm(terms=(term,),
                          validity=_validity_from(us, ratios),
                          evaluate=evaluate,
                          ratio_checkpoints=tuple(zip(us, ratios)),
                          diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# Discounted-penalty asymptote (premium-class dispatch)
# ---------------------------------------------------------------------------


def gs_asymptote(model: RiskModel) -> AsymptoticForm:
    """Large-u form of the discounted penalty, ``h1 s + correction``.

    The correction term depends on the premium's large-u class:

    * constant-limit premiums carry the explicit coefficient
      ``K1 = (k1 + k2) / (k1 k2 (k2 - k1))`` built from the limiting
      characteristic roots, applied to the source shape g;
    * degree-1 polynomial premiums are reported with the u-weighted source
      shape ``u g(u)`` and an estimated magnitude (with its spread), as
      the two-term description prescribes for that class;
    * higher-degree polynomial premiums fall back to the source shape with
      an estimated magnitude.

    ``diagnostics["shape_ratios"]`` always exposes the cancellation-free
    correction divided by both candidate shapes, so the convergence of
    either claim can be judged from the returned object alone.
    """
    if model.delta <= 0.0:
        raise ValueError("gs_asymptote needs delta > 0; ruin_asymptote "
                         "covers the undiscounted case")
    klass = model.premium.premium_class()
    if klass is None:
        raise PremiumClassError(
            f"premium family {model.premium.family!r} declares no large-u "
            "class")

    asm = _assemble(model)
    grid = asm.grid
    hi = float(grid[-1])
    window = grid[grid >= 0.75 * hi]

    y1, b1, _ = _fit_log_derivative(asm.s, window)
    c_s = _fit_prefactor(asm.s, window, y1, b1)
    term1 = AsymptoticTerm(rate=y1, power=b1, coefficient=asm.h1 * c_s,
                           label="stable")
    diagnostics: dict = {"gamma": asm.gamma, "h1": asm.h1,
                         "premium_class": klass}

    if asm.corr is None:
        def evaluate(u):
            return asm.h1 * np.asarray(asm.s(u), dtype=float)

        us = _checkpoints(grid, (0.5, 0.75, 0.9, 1.0))
        ratios = [float(asm.phi(u) / evaluate(u)) for u in us]
        return AsymptoticForm(terms=(term1,),
                              validity=_validity_from(us, ratios),
                              evaluate=evaluate,
                              ratio_checkpoints=tuple(zip(us, ratios)),
                              diagnostics=diagnostics)

    if not isinstance(asm.g.tail, ExponentialTail):
        raise ValueError("the source term has no exponential tail; the "
                         "two-term description does not apply")
    nu_g = float(asm.g.tail.rate)
    g_pow = float(asm.g.tail.power)
    us = _checkpoints(grid, (0.5, 0.75, 0.9, 1.0))
    corr_at = np.array([float(asm.corr(u)) for u in us])
    g_at = np.array([float(asm.g(u)) for u in us])
    diagnostics["shape_ratios"] = {
        "g": [[u, float(c / gv)] for u, c, gv in zip(us, corr_at, g_at)],
        "ug": [[u, float(c / (u * gv))] for u, c, gv in zip(us, corr_at, g_at)],
    }

    degree = model.premium.polynomial_degree()
    if klass == "P1":
        c_inf = model.premium.p_limit
        a = model.claims.mu - (model.interclaims.lam + model.delta) / c_inf
        b = -model.delta * model.claims.mu / c_inf
        disc = math.sqrt(a * a - 4.0 * b)
        k1, k2 = (-a - disc) / 2.0, (-a + disc) / 2.0
        big_k1 = (k1 + k2) / (k1 * k2 * (k2 - k1))
        c_g = _fit_prefactor(asm.g, window, -nu_g, g_pow)
        term2 = AsymptoticTerm(rate=-nu_g, power=g_pow,
                               coefficient=big_k1 * c_g, label="source")
        diagnostics["k_roots"] = [k1, k2]
        diagnostics["K1"] = big_k1
        coef_fn = big_k1

        def shape(u):
            return np.asarray(asm.g(u), dtype=float)
    elif degree == 1:
        ratios_win = (np.asarray(asm.corr(window), dtype=float)
                      / (window * np.asarray(asm.g(window), dtype=float)))
        est = float(np.mean(ratios_win))
        diagnostics["K2"] = {"estimate": est,
                             "band": [float(np.min(ratios_win)),
                                      float(np.max(ratios_win))]}
        term2 = AsymptoticTerm(rate=-nu_g, power=g_pow + 1.0,
                               coefficient=None, label="source, u-weighted")
        coef_fn = est

        def shape(u):
            return np.asarray(u, dtype=float) * np.asarray(asm.g(u), dtype=float)
    else:
        ratios_win = (np.asarray(asm.corr(window), dtype=float)
                      / np.asarray(asm.g(window), dtype=float))
        est = float(np.mean(ratios_win))
        diagnostics["K"] = {"estimate": est,
                            "band": [float(np.min(ratios_win)),
                                     float(np.max(ratios_win))]}
        term2 = AsymptoticTerm(rate=-nu_g, power=g_pow, coefficient=None,
                               label="source")
        coef_fn = est

        def shape(u):
            return np.asarray(asm.g(u), dtype=float)

    def evaluate(u):
        return (asm.h1 * np.asarray(asm.s(u), dtype=float)
                + coef_fn * np.asarray(shape(u), dtype=float))

    ratios = [float(c / (coef_fn * sv)) for c, sv in
              zip(corr_at, [float(shape(u)) for u in us])]
    return AsymptoticForm(terms=(term1, term2),
                          validity=_validity_from(us, ratios),
                          evaluate=evaluate,
                          ratio_checkpoints=tuple(zip(us, ratios)),
                          diagnostics=diagnostics)
