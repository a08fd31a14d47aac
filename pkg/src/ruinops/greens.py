"""Green's operator for the reduced boundary-value problem.

Given a fundamental system t_1, ..., t_N (N = m + n; m decaying, n
growing) the particular solution with vanishing value (and derivatives,
when m > 1) at the left edge and decay at infinity is assembled from
Wronskians W_k of the leading k solutions and the cofactors cof(i, k) of
their last-row entries. Three independent evaluation routes are wired:

* collapsed: one pass of weighted cumulative integrals against all N
  solutions plus a triangular boundary correction,
* factored: a chain of first-order integral operators applied
  right-to-left, growing directions first,
* second order: the textbook two-solution kernel, for N = 2 only.

The routes share nothing beyond the fundamental system, so their
agreement is a meaningful check. A differentiation identity tying
cof(i, k+1)/W_k to cof(i, k) W_{k+1}/W_k^2 is exposed as a residual for
structural self-tests, with a deliberate sign-flip hook to prove the
check can fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import LinearPremium, RiskModel
from .numerics import (
    GridFunction,
    TailFitError,
    ZeroTail,
    cumulative,
)
from .numerics.special import kummer_m, kummer_u
from .operator import FundamentalSolution, FundamentalSystem

__all__ = [
    "SingularWronskianError",
    "WronskianTable",
    "wronskian_table",
    "sylvester_lemma_residual",
    "GreensOperator",
    "greens_operator",
    "GreensApplication",
    "greens_collapsed",
    "greens_factored",
    "greens_second_order",
    "greens_kummer_display",
]


class SingularWronskianError(RuntimeError):
    """A leading Wronskian vanishes (or changes sign) on the working grid."""


# ---------------------------------------------------------------------------
# Wronskian table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WronskianTable:
    """Evaluators for W_k and cof(i, k) built from a fundamental system.

    W_k is the Wronskian of the first k solutions (W_0 = 1) and cof(i, k)
    the cofactor of the last-row entry t_i^{(k-1)} in that determinant,
    so that W_k = sum_i t_i^{(k-1)} cof(i, k) and cof(k, k) = W_{k-1}.

    ``flip_sign`` negates cof(1, N); it exists so self-tests can verify
    that the differentiation-identity residual actually detects a broken
    table.
    """

    fs: FundamentalSystem
    grid: np.ndarray
    flip_sign: bool = False

    @property
    def order(self) -> int:
        return self.fs.order

    def _rows(self, u: np.ndarray, k: int, rows: Sequence[int]) -> np.ndarray:
        """Stack of solution derivatives: shape (len(u), len(rows), k)."""
        out = np.empty((u.size, len(rows), k))
        for c, sol in enumerate(self.fs.solutions[:k]):
            for r, d in enumerate(rows):
                out[:, r, c] = np.asarray(sol.derivs[d](u), dtype=float)
        return out

    def wronskian(self, k: int) -> Callable:
        if not 0 <= k <= self.order:
            raise ValueError(f"wronskian index k={k} outside 0..{self.order}")

        def w_k(u, _k=k):
            scalar = np.ndim(u) == 0
            uu = np.atleast_1d(np.asarray(u, dtype=float))
            if _k == 0:
                vals = np.ones_like(uu)
            elif _k == 1:
                vals = np.asarray(self.fs.solutions[0](uu), dtype=float)
            else:
                vals = np.linalg.det(self._rows(uu, _k, range(_k)))
            return float(vals[0]) if scalar else vals

        return w_k

    def cofactor(self, i: int, k: int) -> Callable:
        if not 1 <= i <= k <= self.order:
            raise ValueError(f"cofactor needs 1 <= i <= k <= {self.order}, "
                             f"got i={i}, k={k}")
        sign = float((-1) ** (i + k))
        if self.flip_sign and i == 1 and k == self.order:
            sign = -sign
        cols = [c for c in range(k) if c != i - 1]

        def cof(u, _k=k, _cols=tuple(cols), _sign=sign):
            scalar = np.ndim(u) == 0
            uu = np.atleast_1d(np.asarray(u, dtype=float))
            if _k == 1:
                vals = np.ones_like(uu)
            else:
                sub = self._rows(uu, _k, range(_k - 1))[:, :, _cols]
                vals = np.linalg.det(sub)
            vals = _sign * vals
            return float(vals[0]) if scalar else vals

        return cof


def wronskian_table(fs: FundamentalSystem, *,
                    inject_fault: str | None = None) -> WronskianTable:
    """Build the W_k / cof(i, k) table and verify every leading Wronskian
    is bounded away from zero on the grid (a sign change between nodes
    counts as a zero). ``inject_fault="wronskian_sign"`` flips one
    cofactor sign for self-test purposes."""
    if inject_fault not in (None, "wronskian_sign"):
        raise ValueError(f"unknown fault {inject_fault!r}")
    table = WronskianTable(fs=fs, grid=np.asarray(fs.grid, dtype=float),
                           flip_sign=inject_fault == "wronskian_sign")
    for k in range(1, fs.order + 1):
        vals = table.wronskian(k)(table.grid)
        if np.any(vals == 0.0) or not np.all(np.isfinite(vals)):
            bad = table.grid[np.nanargmin(np.abs(vals))]
            raise SingularWronskianError(
                f"W_{k} vanishes or is not finite near u={bad:.6g}")
        if np.min(vals) < 0.0 < np.max(vals):
            raise SingularWronskianError(
                f"W_{k} changes sign on the grid; the system is degenerate "
                "somewhere inside the domain")
    return table


def sylvester_lemma_residual(table: WronskianTable, i: int, k: int,
                             u=None, *, h: float = 3e-4) -> float:
    """Residual of (cof(i, k+1)/W_k)' = -cof(i, k) W_{k+1} / W_k^2.

    Central differences with step ``h`` on the left side; the result is
    max over the probe points of |fd - rhs| / max(|rhs|, 1). Valid for
    1 <= i <= k < N.
    """
    if not 1 <= i <= k < table.order:
        raise ValueError(f"identity defined for 1 <= i <= k < {table.order}, "
                         f"got i={i}, k={k}")
    grid = table.grid
    if u is None:
        lo, hi = grid[0] + 5 * h, grid[-1] - 5 * h
        u = np.linspace(lo, hi, 9)
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    cof_hi = table.cofactor(i, k + 1)
    w_k = table.wronskian(k)
    ratio = lambda x: cof_hi(x) / w_k(x)
    fd = (ratio(uu + h) - ratio(uu - h)) / (2.0 * h)
    rhs = -table.cofactor(i, k)(uu) * table.wronskian(k + 1)(uu) / w_k(uu) ** 2
    return float(np.max(np.abs(fd - rhs) / np.maximum(np.abs(rhs), 1.0)))


# ---------------------------------------------------------------------------
# Boundary-correction coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GreensOperator:
    """Collapsed-form data: cofactor kernels plus the boundary correction.

    alpha[j-1, i-1] holds alpha_i(j) = cof(i, m+j)(u0) / W_{m+j-1}(u0)
    (zero where i > m+j-1 makes no sense); ``s_hat`` and ``s_tilde`` are
    the coefficient rows of the raw and triangularized correction
    functions over the decaying solutions; ``tri`` is the unit lower
    triangular mixing matrix whose forward substitution produces
    ``s_tilde``.
    """

    table: WronskianTable
    alpha: np.ndarray
    s_hat: np.ndarray
    s_tilde: np.ndarray
    tri: np.ndarray
    kernels: tuple[Callable, ...]

    @property
    def fs(self) -> FundamentalSystem:
        return self.table.fs


def _cramer_check(tri: np.ndarray, s_hat: np.ndarray, s_tilde: np.ndarray,
                  tol: float) -> None:
    """Independent solve of tri @ x = s_hat column-by-column via Cramer's
    rule; disagreement beyond ``tol`` means the forward substitution (or
    the table behind it) is inconsistent."""
    n = tri.shape[0]
    det = float(np.linalg.det(tri))
    for col in range(s_hat.shape[1]):
        b = s_hat[:, col]
        for j in range(n):
            mod = tri.copy()
            mod[:, j] = b
            x_j = float(np.linalg.det(mod)) / det
            if abs(x_j - s_tilde[j, col]) > tol * max(1.0, abs(x_j)):
                raise SingularWronskianError(
                    f"triangular boundary solve disagrees with Cramer's rule "
                    f"at row {j + 1}: {s_tilde[j, col]:.12g} vs {x_j:.12g}")


def greens_operator(source, *, check_tol: float = 1e-9) -> GreensOperator:
    """Assemble the collapsed-form operator from a fundamental system or a
    prebuilt Wronskian table."""
    table = source if isinstance(source, WronskianTable) else wronskian_table(source)
    fs = table.fs
    m, n, order = fs.m, fs.n, fs.order
    u0 = float(table.grid[0])

    alpha = np.zeros((n, order))
    for j in range(1, n + 1):
        w_prev = table.wronskian(m + j - 1)(u0)
        for i in range(1, m + j):
            alpha[j - 1, i - 1] = table.cofactor(i, m + j)(u0) / w_prev

    s_hat = alpha[:, :m].copy()
    tri = np.eye(n)
    for j in range(1, n + 1):
        for k in range(1, j):
            tri[j - 1, k - 1] = alpha[j - 1, m + k - 1]

    s_tilde = s_hat.copy()
    for j in range(n):
        for k in range(j):
            s_tilde[j] -= tri[j, k] * s_tilde[k]
    _cramer_check(tri, s_hat, s_tilde, check_tol)

    w_n = table.wronskian(order)
    kernels = tuple(
        (lambda u, _c=table.cofactor(i, order), _w=w_n:
         np.asarray(_c(u), dtype=float) / np.asarray(_w(u), dtype=float))
        for i in range(1, order + 1))
    return GreensOperator(table=table, alpha=alpha, s_hat=s_hat,
                          s_tilde=s_tilde, tri=tri, kernels=kernels)


# ---------------------------------------------------------------------------
# Applications of the operator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GreensApplication:
    """Particular solution Gg with whatever extras the route can offer.

    ``f_s`` and ``f_r`` (second-order systems only) are the full-line
    integrals of (s/w) g and (r/w) g; the boundary constant and the
    asymptotic matching both consume them.
    """

    value: GridFunction
    route: str
    deriv: Callable | None = None
    deriv2: Callable | None = None
    f_all: tuple = ()
    f_s: float | None = None
    f_r: float | None = None


def _weighted(grid: np.ndarray, weight: Callable, g: GridFunction, *,
              fit: bool, exact_ok: bool) -> GridFunction:
    vals = np.asarray(weight(grid), dtype=float) * np.asarray(g(grid), dtype=float)
    exact = None
    if exact_ok:
        exact = lambda u, _w=weight, _g=g: (np.asarray(_w(u), dtype=float)
                                            * np.asarray(_g(u), dtype=float))
    f = GridFunction(grid, vals, exact=exact)
    if not fit:
        return f
    if np.all(vals == 0.0):
        return GridFunction(grid, vals, tail=ZeroTail(), exact=exact)
    return f.fit_tail()


def greens_collapsed(op, g: GridFunction, *, tol: float = 1e-10,
                     exact_kernels: bool | None = None) -> GreensApplication:
    """Collapsed evaluation: weighted A/B cumulatives against every
    solution plus the triangularized full-line correction."""
    if not isinstance(op, GreensOperator):
        op = greens_operator(op)
    table, fs = op.table, op.fs
    m, n, order = fs.m, fs.n, fs.order
    grid = table.grid
    if exact_kernels is None:
        exact_kernels = fs.route != "kummer"

    a_parts: list[GridFunction] = []
    b_parts: list[GridFunction] = []
    f_all: list[float] = []
    for i in range(1, order + 1):
        fit = i > m
        f_i = _weighted(grid, op.kernels[i - 1], g, fit=fit,
                        exact_ok=exact_kernels)
        if i <= m:
            a_parts.append(cumulative(f_i, "A", tol=tol))
            try:
                f_all.append(cumulative(f_i.fit_tail(), "F", tol=tol))
            except TailFitError:
                f_all.append(math.nan)
        else:
            b_parts.append(cumulative(f_i, "B", tol=tol))
            f_all.append(cumulative(f_i, "F", tol=tol))

    sols = fs.solutions

    def tilde_deriv(j: int, k: int, u):
        acc = 0.0
        for i in range(m):
            if op.s_tilde[j, i]:
                acc = acc + op.s_tilde[j, i] * np.asarray(sols[i].derivs[k](u),
                                                          dtype=float)
        return acc

    def eval_deriv(u, k: int):
        u = np.asarray(u, dtype=float)
        acc = 0.0
        for i in range(m):
            acc = acc + np.asarray(sols[i].derivs[k](u), dtype=float) * a_parts[i](u)
        for j in range(n):
            acc = acc - np.asarray(sols[m + j].derivs[k](u), dtype=float) \
                * b_parts[j](u)
            acc = acc - tilde_deriv(j, k, u) * f_all[m + j]
        return acc

    vals = eval_deriv(grid, 0)
    value = GridFunction(grid, vals, meta={"greens": "collapsed"})
    deriv = lambda u: eval_deriv(u, 1)
    deriv2 = None
    if order == 2:
        deriv2 = lambda u: eval_deriv(u, 2) + np.asarray(g(u), dtype=float)
    f_s = f_r = None
    if m == 1 and n == 1:
        f_s = f_all[1]
        f_r = -f_all[0] if math.isfinite(f_all[0]) else None
    return GreensApplication(value=value, route="collapsed", deriv=deriv,
                             deriv2=deriv2, f_all=tuple(f_all), f_s=f_s, f_r=f_r)


def greens_factored(source, g: GridFunction, *,
                    tol: float = 1e-10,
                    exact_kernels: bool | None = None) -> GreensApplication:
    """Factored evaluation: first-order integral steps right-to-left,
    growing directions (suffix integrals) first, then decaying ones."""
    table = source if isinstance(source, WronskianTable) else wronskian_table(source)
    fs = table.fs
    m, n, order = fs.m, fs.n, fs.order
    grid = table.grid
    if exact_kernels is None:
        exact_kernels = fs.route != "kummer"
    sign = 1.0 if n % 2 == 0 else -1.0
    level_tol = tol / order

    w_funcs = [table.wronskian(k) for k in range(order + 1)]
    current = g
    for k in range(order, m, -1):
        ratio = lambda u, _a=w_funcs[k - 1], _b=w_funcs[k]: \
            np.asarray(_a(u), dtype=float) / np.asarray(_b(u), dtype=float)
        integrand = _weighted(grid, ratio, current, fit=True,
                              exact_ok=exact_kernels)
        cum = cumulative(integrand, "B", tol=level_tol)
        back = lambda u, _a=w_funcs[k], _b=w_funcs[k - 1]: \
            np.asarray(_a(u), dtype=float) / np.asarray(_b(u), dtype=float)
        current = _weighted(grid, back, cum, fit=False, exact_ok=exact_kernels)

    before_last = None
    for k in range(m, 0, -1):
        if k == 1:
            before_last = current
        ratio = lambda u, _a=w_funcs[k - 1], _b=w_funcs[k]: \
            np.asarray(_a(u), dtype=float) / np.asarray(_b(u), dtype=float)
        integrand = _weighted(grid, ratio, current, fit=False,
                              exact_ok=exact_kernels)
        cum = cumulative(integrand, "A", tol=level_tol)
        back = lambda u, _a=w_funcs[k], _b=w_funcs[k - 1]: \
            np.asarray(_a(u), dtype=float) / np.asarray(_b(u), dtype=float)
        current = _weighted(grid, back, cum, fit=False, exact_ok=exact_kernels)

    vals = sign * np.asarray(current(grid), dtype=float)
    value = GridFunction(grid, vals, meta={"greens": "factored"})

    t1 = fs.solutions[0]

    def deriv(u, _h=before_last):
        u = np.asarray(u, dtype=float)
        w1 = np.asarray(t1(u), dtype=float)
        w1p = np.asarray(t1.derivs[1](u), dtype=float)
        unsigned = sign * np.asarray(current(u), dtype=float)
        return (w1p / w1) * unsigned + sign * np.asarray(_h(u), dtype=float)

    return GreensApplication(value=value, route="factored", deriv=deriv)


def greens_second_order(s, r, w: Callable, g: GridFunction, *,
                        tol: float = 1e-10,
                        exact_kernels: bool = True) -> GreensApplication:
    """Two-solution kernel for N = 2:

    Gg(u) = -s(u) int_{u0}^u (r/w) g - r(u) int_u^inf (s/w) g
            + (r(u0)/s(u0)) s(u) int_{u0}^inf (s/w) g,   w = s r' - s' r.

    ``s`` and ``r`` may be FundamentalSolutions (enabling derivatives of
    the result) or plain callables.
    """
    grid = np.asarray(g.nodes, dtype=float)
    u0 = float(grid[0])
    s_fn = s if callable(s) else s.derivs[0]
    r_fn = r if callable(r) else r.derivs[0]

    ratio_r = lambda u: np.asarray(r_fn(u), dtype=float) / np.asarray(w(u), dtype=float)
    ratio_s = lambda u: np.asarray(s_fn(u), dtype=float) / np.asarray(w(u), dtype=float)

    f_r_int = _weighted(grid, ratio_r, g, fit=False, exact_ok=exact_kernels)
    f_s_int = _weighted(grid, ratio_s, g, fit=True, exact_ok=exact_kernels)
    a_r = cumulative(f_r_int, "A", tol=tol)
    b_s = cumulative(f_s_int, "B", tol=tol)
    f_s = cumulative(f_s_int, "F", tol=tol)
    try:
        f_r = cumulative(f_r_int.fit_tail(), "F", tol=tol)
    except TailFitError:
        f_r = None

    k0 = float(np.asarray(r_fn(u0), dtype=float)
               / np.asarray(s_fn(u0), dtype=float))

    def eval_k(u, k: int):
        u = np.asarray(u, dtype=float)
        s_k = np.asarray(_deriv_of(s, k)(u), dtype=float)
        r_k = np.asarray(_deriv_of(r, k)(u), dtype=float)
        return -s_k * a_r(u) - r_k * b_s(u) + k0 * s_k * f_s

    vals = eval_k(grid, 0)
    value = GridFunction(grid, vals, meta={"greens": "second_order"})
    deriv = deriv2 = None
    if isinstance(s, FundamentalSolution) and isinstance(r, FundamentalSolution):
        deriv = lambda u: eval_k(u, 1)
        if len(s.derivs) > 2 and len(r.derivs) > 2:
            deriv2 = lambda u: eval_k(u, 2) + np.asarray(g(u), dtype=float)
    return GreensApplication(value=value, route="second_order", deriv=deriv,
                             deriv2=deriv2, f_all=(f_r, f_s), f_s=f_s, f_r=f_r)


def _deriv_of(sol, k: int) -> Callable:
    if isinstance(sol, FundamentalSolution):
        return sol.derivs[k]
    if k == 0:
        return sol
    raise ValueError("derivatives need FundamentalSolution inputs")


# ---------------------------------------------------------------------------
# Independent confluent-hypergeometric display (linear premium, delta > 0)
# ---------------------------------------------------------------------------


def greens_kummer_display(model: RiskModel, g: GridFunction, *,
                          tol: float = 1e-10) -> GreensApplication:
    """Direct closed-form kernel for the linear-premium discounted problem.

    With a = delta/eps + 1, b = (lam + delta)/eps + 1, z(u) = mu (c + eps u)/eps:

        Gg(u) = K P(u) [ -U(z(u)) int_{u0}^u M(z(v)) (eps v + c) g(v) dv
                         - M(z(u)) int_u^inf U(z(v)) (eps v + c) g(v) dv
                         + (M(z(u0))/U(z(u0))) U(z(u)) int_{u0}^inf U ... ],

        K = [Gamma(delta/eps + 1)/Gamma((lam+delta)/eps + 1)]
            (1/eps) (mu/eps)^{(lam+delta)/eps} e^{-mu c/eps},
        P(u) = (eps u + c)^{(lam+delta)/eps} e^{-mu u}.

    Everything here is assembled from scratch (bare M and U values, the
    explicit constant K), so agreement with the kernel routes is an
    end-to-end check rather than a reformulation.
    """
    if not (model.is_exp_exp() and isinstance(model.premium, LinearPremium)
            and model.delta > 0.0):
        raise ValueError("the display needs exponential laws, a linear "
                         "premium and delta > 0")
    lam = model.interclaims.lam
    mu = model.claims.mu
    delta = model.delta
    c, eps = model.premium.c, model.premium.eps
    a = delta / eps + 1.0
    b = (lam + delta) / eps + 1.0

    grid = np.asarray(g.nodes, dtype=float)
    u0 = float(grid[0])
    z = lambda u: mu * (c + eps * np.asarray(u, dtype=float)) / eps

    def m_bare(u):
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        return np.array([kummer_m(a, b, float(zz)) for zz in z(uu)])

    def u_bare(u):
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        return np.array([kummer_u(a, b, float(zz)) for zz in z(uu)])

    lin = lambda u: eps * np.asarray(u, dtype=float) + c
    w_m = _weighted(grid, lambda u: m_bare(u) * lin(u), g, fit=False,
                    exact_ok=False)
    w_u = _weighted(grid, lambda u: u_bare(u) * lin(u), g, fit=True,
                    exact_ok=False)
    a_m = cumulative(w_m, "A", tol=tol)
    b_u = cumulative(w_u, "B", tol=tol)
    f_u = cumulative(w_u, "F", tol=tol)

    big_k = (math.gamma(delta / eps + 1.0) / math.gamma((lam + delta) / eps + 1.0)
             / eps * (mu / eps) ** ((lam + delta) / eps)
             * math.exp(-mu * c / eps))
    log_p = lambda u: ((lam + delta) / eps * np.log(lin(u))
                       - mu * np.asarray(u, dtype=float))
    ratio0 = float(m_bare(u0)[0] / u_bare(u0)[0])

    m_grid = m_bare(grid)
    u_grid = u_bare(grid)
    vals = big_k * np.exp(log_p(grid)) * (
        -u_grid * a_m(grid) - m_grid * b_u(grid) + ratio0 * u_grid * f_u)
    value = GridFunction(grid, vals, meta={"greens": "kummer_display"})
    return GreensApplication(value=value, route="kummer_display",
                             f_all=(f_u,))
