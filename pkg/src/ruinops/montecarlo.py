"""Simulation oracle for the surplus process.

Paths alternate deterministic premium flow with claim jumps. The flow
solves du/dt = p(u) in closed form for the constant, linear,
exponential-decay and quadratic premium families and by step-doubled
RK4 otherwise; claim sizes and interclaim times are drawn by inverse
CDF from uniforms, with rational-transform laws decomposed into their
exponential phases (the monic denominator's roots) and sampled as the
corresponding phase sums.

Ruin can only happen at claim instants, so each round is: flow to the
next claim, absorb at the barrier if the flow crossed it, otherwise
subtract the claim and test the sign. Paths still open after
``max_claims`` rounds are censored and flagged.

Randomness is counter-based: round r of a run seeded with s uses a
Philox generator keyed (s, r), and each path reads a fixed row of that
round's uniform block. Estimates are therefore bit-reproducible, paths
are comparable across configurations that share a seed (common random
numbers), and the reduction is an fsum in path order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gerber_shiu import ruin_tichy
from .model import (
    ConstantPremium,
    DriftValidationError,
    ExpDecayPremium,
    ExponentialClaims,
    ExponentialInterclaims,
    LinearPremium,
    ModelValidationError,
    PremiumFunction,
    QuadraticPremium,
    RationalLaplaceClaims,
    RationalLaplaceInterclaims,
    RiskModel,
    validate_drift,
)

__all__ = [
    "FlowToleranceError",
    "SimConfig",
    "SimEstimate",
    "UnsampleableLawError",
    "estimate_penalty",
    "estimate_ruin",
    "flow",
]

_ALIVE, _RUINED, _SURVIVED, _CENSORED = 0, 1, 2, 3


class FlowToleranceError(RuntimeError):
    """Step doubling hit the refinement cap before reaching the requested
    relative tolerance."""


class UnsampleableLawError(ModelValidationError):
    """The law's transform denominator has complex roots, so it is not a
    sum of exponential phases and exact sampling is refused."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls.

    ``barrier`` is the surplus level at which a path is declared to
    survive; None resolves to ten times the model's working range, which
    keeps the residual ruin probability negligible. ``ode_step`` is the
    relative tolerance of the inter-claim flow for premium families
    without a closed-form flow.
    """

    paths: int = 10_000
    barrier: float | None = None
    max_claims: int = 10_000
    seed: int = 0
    ode_step: float = 1e-9

    def __post_init__(self):
        if self.paths < 1:
            raise ModelValidationError("need at least one path")
        if self.max_claims < 1:
            raise ModelValidationError("need at least one claim round")
        if self.barrier is not None and self.barrier <= 0.0:
            raise ModelValidationError("barrier must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ModelValidationError("seed must fit in 64 bits")
        if self.ode_step <= 0.0:
            raise ModelValidationError("ode_step must be positive")

    def resolve_barrier(self, model: RiskModel) -> float:
        if self.barrier is not None:
            return float(self.barrier)
        return 10.0 * float(model.u_max)


@dataclass(frozen=True)
class SimEstimate:
    """Sample mean with its standard error and the path accounting.

    ``n_censored`` counts paths cut off by ``max_claims`` with the ruin
    question still open; any censoring makes the estimate biased in a
    direction the simulation cannot determine, which
    ``bias_unknown_direction`` flags. Barrier crossings are not
    censoring: they are survival declarations whose residual error is
    bounded by the reported closed-form ruin value at the barrier when
    one is available (``diagnostics["barrier_bound"]``).
    """

    mean: float
    std_error: float
    n_ruined: int
    n_censored: int
    paths: int
    bias_unknown_direction: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_survived(self) -> int:
        return self.paths - self.n_ruined - self.n_censored

    def to_json(self) -> dict:
        diag = {}
        for key, value in self.diagnostics.items():
            if isinstance(value, (int, np.integer)):
                diag[key] = int(value)
            elif isinstance(value, (float, np.floating)):
                diag[key] = float(value)
            else:
                diag[key] = value
        return {
            "mean": float(self.mean),
            "std_error": float(self.std_error),
            "n_ruined": int(self.n_ruined),
            "n_censored": int(self.n_censored),
            "n_survived": int(self.n_survived),
            "paths": int(self.paths),
            "bias_unknown_direction": bool(self.bias_unknown_direction),
            "diagnostics": diag,
        }


# ---------------------------------------------------------------------------
# Deterministic flow between claims
# ---------------------------------------------------------------------------


def _rk4_fixed(pfun, u0: np.ndarray, t: np.ndarray, n: int,
               barrier: float) -> np.ndarray:
    """n RK4 substeps with per-element dt, absorbing at the barrier.

    Slopes are clipped at 1e12 so premiums that blow up near the left
    edge overflow into the barrier cap instead of into NaNs; any path
    moving that fast crosses the barrier in a time below any tolerance
    anyway.
    """
    u = np.array(u0, dtype=float, copy=True)
    dt = t / n

    def slope(x):
        with np.errstate(over="ignore", invalid="ignore"):
            s = np.asarray(pfun(np.minimum(x, barrier)), dtype=float)
        return np.clip(np.nan_to_num(s, nan=1e12, posinf=1e12), 0.0, 1e12)

    for _ in range(n):
        k1 = slope(u)
        k2 = slope(u + 0.5 * dt * k1)
        k3 = slope(u + 0.5 * dt * k2)
        k4 = slope(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        np.minimum(u, barrier, out=u)
    return u


def _flow_rk(pfun, u0: np.ndarray, t: np.ndarray, tol: float,
             barrier: float) -> np.ndarray:
    n = 4
    prev = _rk4_fixed(pfun, u0, t, n, barrier)
    while n <= 4096:
        n *= 2
        cur = _rk4_fixed(pfun, u0, t, n, barrier)
        scale = np.maximum(np.abs(cur), 1.0)
        capped = (cur >= barrier) & (prev >= barrier)
        close = np.abs(cur - prev) <= tol * scale
        if np.all(capped | close):
            return cur
        prev = cur
    raise FlowToleranceError(
        f"inter-claim flow did not reach relative tolerance {tol:g} "
        "within 8192 RK4 substeps")


def flow(premium: PremiumFunction, u0, t, *, barrier: float = math.inf,
         tol: float = 1e-9):
    """Surplus after flowing for time t from u0 under du/dt = p(u).

    Closed forms cover the constant, linear, exponential-decay and
    quadratic families; anything else is integrated by step-doubled RK4
    to relative tolerance ``tol``. Values at or beyond ``barrier`` are
    returned as exactly ``barrier``: premiums growing super-linearly
    reach infinity in finite time, and the barrier is the absorbing
    event that makes that finite blow-up harmless.
    """
    scalar = np.ndim(u0) == 0 and np.ndim(t) == 0
    u_arr, t_arr = np.broadcast_arrays(np.asarray(u0, dtype=float),
                                       np.asarray(t, dtype=float))
    if np.any(u_arr < 0.0) or np.any(t_arr < 0.0):
        raise ValueError("flow needs u0 >= 0 and t >= 0")

    if isinstance(premium, ConstantPremium):
        out = u_arr + premium.c * t_arr
    elif isinstance(premium, LinearPremium):
        c, eps = premium.c, premium.eps
        out = -c / eps + (u_arr + c / eps) * np.exp(eps * t_arr)
    elif isinstance(premium, ExpDecayPremium):
        # p = c (1 + e^{-u}); v = e^u satisfies v' = c (v + 1), so
        # u(t) = u0 + c t + log(1 + e^{-u0} (1 - e^{-c t}))
        ct = premium.c * t_arr
        out = u_arr + ct + np.log1p(np.exp(-u_arr) * (-np.expm1(-ct)))
    elif isinstance(premium, QuadraticPremium):
        # p = c + u^2: u(t) = sqrt(c) tan(sqrt(c) t + atan(u0/sqrt(c))),
        # hitting infinity when the angle reaches pi/2
        rc = math.sqrt(premium.c)
        angle = np.arctan(u_arr / rc) + rc * t_arr
        with np.errstate(over="ignore"):
            out = np.where(angle < 0.5 * math.pi, rc * np.tan(
                np.minimum(angle, 0.5 * math.pi - 1e-12)), math.inf)
    else:
        out = _flow_rk(premium.p, np.atleast_1d(u_arr), np.atleast_1d(t_arr),
                       tol, barrier).reshape(u_arr.shape)

    out = np.minimum(out, barrier)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Law sampling by exponential phases
# ---------------------------------------------------------------------------


def _phase_rates(law) -> np.ndarray:
    """Exponential phase rates whose sum realizes the law exactly.

    A transform b0 / (x^m + ... + b0) with real roots -k_1..-k_m is the
    law of a sum of independent Exp(k_i) variables (b0 is forced to be
    the product of the k_i by unit mass at x = 0). Complex roots mean no
    such phase representation exists and sampling is refused.
    """
    if isinstance(law, ExponentialClaims):
        return np.array([law.mu])
    if isinstance(law, ExponentialInterclaims):
        return np.array([law.lam])
    if isinstance(law, RationalLaplaceClaims):
        coeffs, what = law.beta, "claim law"
    elif isinstance(law, RationalLaplaceInterclaims):
        coeffs, what = law.alpha, "interclaim law"
    else:
        raise UnsampleableLawError(
            f"no sampler for law family {law.family!r}")
    poly = np.array([1.0, *reversed([float(b) for b in coeffs])])
    roots = np.roots(poly)
    if np.any(np.abs(roots.imag) > 1e-9 * (1.0 + np.abs(roots.real))):
        raise UnsampleableLawError(
            f"{what}: transform denominator roots {roots} are not all "
            "real, so the law is not a sum of exponential phases")
    return np.sort(-roots.real)


def _phase_times(uniforms: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """Inverse-CDF phase sums: one uniform column per rate."""
    out = np.zeros(uniforms.shape[0])
    for j, rate in enumerate(rates):
        out -= np.log1p(-uniforms[:, j]) / rate
    return out


def _round_uniforms(seed: int, rnd: int, paths: int, cols: int) -> np.ndarray:
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed, rnd], dtype=np.uint64)))
    return gen.random((paths, cols))


# ---------------------------------------------------------------------------
# Path simulation
# ---------------------------------------------------------------------------


def _require_drift(model: RiskModel) -> None:
    if not validate_drift(model, 1e-6, max(model.u_min, 1e-6)):
        raise DriftValidationError(
            "premium does not dominate the claim outflow on the working "
            "range; the surplus need not drift to infinity and barrier "
            "survival declaration would be unsound")


def _barrier_bound(model: RiskModel, barrier: float) -> float | None:
    """Closed-form ruin value at the barrier, when one is computable."""
    if not model.is_exp_exp():
        return None
    try:
        return float(ruin_tichy(model.premium, model.interclaims.lam,
                                model.claims.mu, barrier))
    except (ModelValidationError, ValueError, RuntimeError):
        return None


def _simulate(model: RiskModel, u0: float, cfg: SimConfig, *,
              delta: float, use_penalty: bool) -> SimEstimate:
    barrier = cfg.resolve_barrier(model)
    if u0 < 0.0:
        raise ModelValidationError("initial surplus must be nonnegative")
    paths = cfg.paths
    t_rates = _phase_rates(model.interclaims)
    x_rates = _phase_rates(model.claims)
    n_t = t_rates.size

    state = np.full(paths, _ALIVE, dtype=np.int8)
    surplus = np.full(paths, float(u0))
    clock = np.zeros(paths)
    value = np.zeros(paths)
    rounds = 0

    for rnd in range(cfg.max_claims):
        alive = np.flatnonzero(state == _ALIVE)
        if alive.size == 0:
            break
        rounds = rnd + 1
        block = _round_uniforms(cfg.seed, rnd, paths, n_t + x_rates.size)
        tau = _phase_times(block[alive, :n_t], t_rates)
        claim = _phase_times(block[alive, n_t:], x_rates)

        pre = flow(model.premium, surplus[alive], tau, barrier=barrier,
                   tol=cfg.ode_step)
        clock[alive] += tau
        crossed = pre >= barrier
        state[alive[crossed]] = _SURVIVED

        open_idx = alive[~crossed]
        post = pre[~crossed] - claim[~crossed]
        ruined = post < 0.0
        hit = open_idx[ruined]
        if hit.size:
            if use_penalty:
                weights = np.asarray(
                    model.penalty.w(pre[~crossed][ruined], -post[ruined]),
                    dtype=float)
            else:
                weights = np.ones(hit.size)
            value[hit] = np.exp(-delta * clock[hit]) * weights
            state[hit] = _RUINED
        keep = open_idx[~ruined]
        surplus[keep] = post[~ruined]

    censored = state == _ALIVE
    state[censored] = _CENSORED
    n_censored = int(np.count_nonzero(censored))
    n_ruined = int(np.count_nonzero(state == _RUINED))

    total = math.fsum(value.tolist())
    mean = total / paths
    sq = math.fsum((value * value).tolist())
    var = max(sq - paths * mean * mean, 0.0) / max(paths - 1, 1)
    std_error = math.sqrt(var / paths)

    return SimEstimate(
        mean=mean,
        std_error=std_error,
        n_ruined=n_ruined,
        n_censored=n_censored,
        paths=paths,
        bias_unknown_direction=n_censored > 0,
        diagnostics={
            "barrier": barrier,
            "barrier_bound": _barrier_bound(model, barrier),
            "censored_fraction": n_censored / paths,
            "rounds": rounds,
            "u0": float(u0),
        },
    )


def estimate_ruin(model: RiskModel, u0: float,
                  cfg: SimConfig | None = None) -> SimEstimate:
    """Monte Carlo estimate of the ruin probability from surplus u0.

    Requires the drift check to pass so barrier crossings really are
    terminal. Paths that cross the barrier count as survivors; the
    closed-form ruin value at the barrier (when available) bounds the
    probability mass that declaration throws away.
    """
    cfg = cfg or SimConfig()
    _require_drift(model)
    return _simulate(model, u0, cfg, delta=0.0, use_penalty=False)


def estimate_penalty(model: RiskModel, u0: float,
                     cfg: SimConfig | None = None) -> SimEstimate:
    """Monte Carlo estimate of the discounted penalty from surplus u0.

    Ruined paths contribute e^{-delta T} w(surplus before the ruining
    claim, deficit); others contribute zero. With the indicator penalty
    and delta = 0 this reduces bit-for-bit to :func:`estimate_ruin` on
    the same configuration.
    """
    cfg = cfg or SimConfig()
    _require_drift(model)
    return _simulate(model, u0, cfg, delta=float(model.delta),
                     use_penalty=True)
