"""Tests for the Wronskian table and the Green's-operator routes.

A synthetic third-order system with closed-form Wronskians (e^{-u},
1 + u, e^{u/2}, giving W_2 = (2 + u) e^{-u} and W_3 = (3/4) u e^{-u/2})
exercises the table, the differentiation identity and the collapsed
versus factored agreement without leaning on any solver. The genuine
second-order systems then pin all routes against each other and against
the independent confluent-hypergeometric display.
"""
import math

import numpy as np
import pytest

from ruinops.greens import (
    SingularWronskianError,
    greens_collapsed,
    greens_factored,
    greens_kummer_display,
    greens_operator,
    greens_second_order,
    sylvester_lemma_residual,
    wronskian_table,
)
from ruinops.model import (
    ExpDecayPremium,
    ExponentialClaims,
    ExponentialInterclaims,
    ExpSurplusPenalty,
    LinearPremium,
    RiskModel,
)
from ruinops.numerics import ExponentialTail, GridFunction, ZeroTail, default_grid
from ruinops.operator import (
    FundamentalSolution,
    FundamentalSystem,
    build_operator,
    build_rhs,
    fundamental_system,
)


def _exp_solution(rate: float, tag: str) -> FundamentalSolution:
    """e^{rate * u} with derivatives through order three."""
    def d(k):
        return lambda u, _k=k: rate**_k * np.exp(rate * np.asarray(u, dtype=float))
    return FundamentalSolution(tag=tag, derivs=(d(0), d(1), d(2), d(3)))


_AFFINE = FundamentalSolution(tag="growing", derivs=(
    lambda u: 1.0 + np.asarray(u, dtype=float),
    lambda u: np.ones_like(np.asarray(u, dtype=float)),
    lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    lambda u: np.zeros_like(np.asarray(u, dtype=float)),
))


def synthetic_system(grid=None, n_nodes=800) -> FundamentalSystem:
    if grid is None:
        grid = default_grid(1e-3, 40.0, n_nodes)
    return FundamentalSystem(
        m=1, n=2, grid=np.asarray(grid, dtype=float),
        solutions=(_exp_solution(-1.0, "decaying"), _AFFINE,
                   _exp_solution(0.5, "growing")),
        route="synthetic")


def decaying_source(grid) -> GridFunction:
    grid = np.asarray(grid, dtype=float)
    return GridFunction(grid, np.exp(-grid), tail=ExponentialTail(rate=1.0),
                        exact=lambda u: np.exp(-np.asarray(u, dtype=float)))


@pytest.fixture(scope="module")
def synthetic():
    fs = synthetic_system()
    return fs, wronskian_table(fs)


@pytest.fixture(scope="module")
def linear_discounted():
    """Linear premium, discounted, deficit-penalty model plus its pieces."""
    model = RiskModel(premium=LinearPremium(c=1.0, eps=0.5),
                      claims=ExponentialClaims(mu=2.0),
                      interclaims=ExponentialInterclaims(lam=1.5),
                      delta=0.5,
                      penalty=ExpSurplusPenalty(nu=1.0),
                      u_max=10.0)
    ode = build_operator(model)
    fs = fundamental_system(ode, model)
    g = build_rhs(model)
    return model, ode, fs, g


# ---------------------------------------------------------------------------
# Wronskian table
# ---------------------------------------------------------------------------

class TestWronskianTable:
    def test_closed_form_wronskians(self, synthetic):
        _, table = synthetic
        u = np.array([0.01, 0.5, 1.7, 8.0, 30.0])
        np.testing.assert_allclose(table.wronskian(2)(u),
                                   (2.0 + u) * np.exp(-u), rtol=1e-12)
        np.testing.assert_allclose(table.wronskian(3)(u),
                                   0.75 * u * np.exp(-0.5 * u), rtol=1e-12)

    def test_trailing_cofactor_is_previous_wronskian(self, synthetic):
        _, table = synthetic
        u = np.array([0.02, 1.0, 4.0, 20.0])
        for k in range(1, 4):
            np.testing.assert_allclose(table.cofactor(k, k)(u),
                                       table.wronskian(k - 1)(u), rtol=1e-12)

    def test_last_row_expansion(self, synthetic):
        """Expanding W_3 along its last row reproduces W_3; replacing that
        row by a lower derivative row gives a determinant with a repeated
        row, hence zero."""
        fs, table = synthetic
        u = np.array([0.1, 2.3, 11.0])
        w3 = table.wronskian(3)(u)
        for j in range(3):
            acc = sum(np.asarray(sol.derivs[j](u), dtype=float)
                      * table.cofactor(i + 1, 3)(u)
                      for i, sol in enumerate(fs.solutions))
            if j == 2:
                np.testing.assert_allclose(acc, w3, rtol=1e-12)
            else:
                np.testing.assert_allclose(
                    acc, 0.0, atol=1e-12 * float(np.max(np.abs(w3))))

    def test_scalar_evaluation(self, synthetic):
        _, table = synthetic
        assert table.wronskian(0)(1.0) == 1.0
        assert table.wronskian(2)(1.0) == pytest.approx(3.0 * math.exp(-1.0),
                                                        rel=1e-12)

    def test_vanishing_wronskian_aborts(self):
        fs = synthetic_system(grid=np.linspace(0.0, 5.0, 64))
        with pytest.raises(SingularWronskianError, match="vanishes"):
            wronskian_table(fs)

    def test_sign_change_aborts(self):
        fs = synthetic_system(grid=np.linspace(-1.0, 5.0, 101))
        with pytest.raises(SingularWronskianError, match="changes sign"):
            wronskian_table(fs)

    def test_unknown_fault_rejected(self, synthetic):
        fs, _ = synthetic
        with pytest.raises(ValueError, match="unknown fault"):
            wronskian_table(fs, inject_fault="bogus")

    def test_index_validation(self, synthetic):
        _, table = synthetic
        with pytest.raises(ValueError):
            table.wronskian(7)
        with pytest.raises(ValueError):
            table.cofactor(0, 1)
        with pytest.raises(ValueError):
            table.cofactor(3, 2)

    def test_model_backed_table(self, linear_discounted):
        _, _, fs, _ = linear_discounted
        table = wronskian_table(fs)
        u = np.array([0.05, 1.0, 6.0])
        np.testing.assert_allclose(table.cofactor(2, 2)(u),
                                   fs.solutions[0](u), rtol=1e-12)


# ---------------------------------------------------------------------------
# Differentiation identity
# ---------------------------------------------------------------------------

class TestSylvesterIdentity:
    @pytest.mark.parametrize("i,k", [(1, 1), (1, 2), (2, 2)])
    def test_residual_small(self, synthetic, i, k):
        _, table = synthetic
        assert sylvester_lemma_residual(table, i, k) <= 1e-6

    def test_residual_small_second_order(self, linear_discounted):
        _, _, fs, _ = linear_discounted
        table = wronskian_table(fs)
        assert sylvester_lemma_residual(table, 1, 1) <= 1e-6

    def test_fault_injection_detected(self, synthetic):
        fs, _ = synthetic
        broken = wronskian_table(fs, inject_fault="wronskian_sign")
        assert sylvester_lemma_residual(broken, 1, 2) > 0.5

    def test_index_validation(self, synthetic):
        _, table = synthetic
        with pytest.raises(ValueError):
            sylvester_lemma_residual(table, 1, 3)
        with pytest.raises(ValueError):
            sylvester_lemma_residual(table, 2, 1)


# ---------------------------------------------------------------------------
# Collapsed-form assembly
# ---------------------------------------------------------------------------

class TestGreensOperatorAssembly:
    def test_triangular_solve_consistency(self, synthetic):
        fs, _ = synthetic
        op = greens_operator(fs)
        n = fs.n
        assert op.tri.shape == (n, n)
        np.testing.assert_allclose(np.diag(op.tri), 1.0)
        assert np.all(np.triu(op.tri, 1) == 0.0)
        np.testing.assert_allclose(op.tri @ op.s_tilde, op.s_hat,
                                   rtol=0, atol=1e-9)

    def test_alpha_support_pattern(self, synthetic):
        """alpha_i(j) only involves the first m + j - 1 solutions."""
        fs, _ = synthetic
        op = greens_operator(fs)
        assert op.alpha[0, 0] != 0.0
        assert op.alpha[0, 1] == 0.0 and op.alpha[0, 2] == 0.0
        assert op.alpha[1, 2] == 0.0

    def test_cramer_check_rejects_corruption(self, synthetic):
        from ruinops.greens import _cramer_check
        fs, _ = synthetic
        op = greens_operator(fs)
        corrupt = op.s_tilde + 1e-3
        with pytest.raises(SingularWronskianError, match="Cramer"):
            _cramer_check(op.tri, op.s_hat, corrupt, 1e-9)

    def test_kernels_expand_identity(self, synthetic):
        """sum_i t_i^{(j)} cof(i, N)/W_N is 0 for j < N - 1 and 1 at
        j = N - 1 (the unit jump the kernel encodes)."""
        fs, _ = synthetic
        op = greens_operator(fs)
        u = np.array([0.3, 2.0, 9.0])
        for j in range(3):
            acc = sum(np.asarray(sol.derivs[j](u), dtype=float) * op.kernels[i](u)
                      for i, sol in enumerate(fs.solutions))
            np.testing.assert_allclose(acc, 1.0 if j == 2 else 0.0,
                                       rtol=0, atol=1e-11)


# ---------------------------------------------------------------------------
# Route agreement, synthetic third-order system
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def applications():
    fs = synthetic_system(n_nodes=1600)
    g = decaying_source(fs.grid)
    return fs, g, greens_collapsed(fs, g), greens_factored(fs, g)


class TestSyntheticRoutes:
    def test_collapsed_factored_agree(self, applications):
        fs, _, col, fac = applications
        scale = float(np.max(np.abs(col.value.values)))
        diff = np.max(np.abs(col.value.values - fac.value.values))
        assert diff <= 1e-6 * scale

    def test_boundary_value_vanishes(self, applications):
        fs, g, col, fac = applications
        u0 = float(fs.grid[0])
        g_norm = float(np.max(np.abs(g.values)))
        assert abs(col.value(u0)) <= 1e-8 * g_norm
        assert abs(fac.value(u0)) <= 1e-8 * g_norm

    def test_derivatives_agree_between_routes(self, applications):
        _, _, col, fac = applications
        u = np.array([0.5, 2.0, 6.0])
        np.testing.assert_allclose(fac.deriv(u), col.deriv(u),
                                   rtol=1e-4, atol=1e-8)

    def test_satisfies_equation(self, applications):
        """The synthetic solutions satisfy y''' + c2 y'' + c1 y' + c0 y = 0
        with c0 = 1/(2u), c1 = -(1+u)/(2u), c2 = (u-2)/(2u); the collapsed
        application must satisfy the same equation with source g. The third
        derivative comes from a central difference of the exposed second
        derivative route."""
        fs, g, col, _ = applications
        u = np.array([0.5, 1.5, 4.0, 12.0])
        h = 1e-4
        val = col.value(u)
        d1 = col.deriv(u)
        # Second and third derivatives via differences of the first.
        d2 = (col.deriv(u + h) - col.deriv(u - h)) / (2 * h)
        d3 = (col.deriv(u + h) - 2 * col.deriv(u) + col.deriv(u - h)) / h**2
        c0 = 1.0 / (2 * u)
        c1 = -(1.0 + u) / (2 * u)
        c2 = (u - 2.0) / (2 * u)
        resid = d3 + c2 * d2 + c1 * d1 + c0 * val - np.asarray(g(u), dtype=float)
        assert np.max(np.abs(resid)) <= 5e-4

    def test_zero_source_short_circuits(self):
        fs = synthetic_system()
        zero = GridFunction(fs.grid, np.zeros_like(fs.grid), tail=ZeroTail())
        col = greens_collapsed(fs, zero)
        assert np.all(col.value.values == 0.0)


# ---------------------------------------------------------------------------
# Route agreement, genuine second-order model
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def routes(linear_discounted):
    model, ode, fs, g = linear_discounted
    col = greens_collapsed(fs, g, exact_kernels=False)
    fac = greens_factored(fs, g, exact_kernels=False)
    s, r = fs.solutions
    w = lambda u: (np.asarray(s(u)) * np.asarray(r.derivs[1](u))
                   - np.asarray(s.derivs[1](u)) * np.asarray(r(u)))
    sec = greens_second_order(s, r, w, g, exact_kernels=False)
    disp = greens_kummer_display(model, g)
    return model, ode, fs, g, col, fac, sec, disp


class TestModelRoutes:
    def test_collapsed_matches_second_order(self, routes):
        *_, col, fac, sec, disp = routes
        scale = float(np.max(np.abs(col.value.values)))
        assert np.max(np.abs(col.value.values - sec.value.values)) <= 1e-12 * scale

    def test_factored_matches_collapsed(self, routes):
        *_, col, fac, sec, disp = routes
        scale = float(np.max(np.abs(col.value.values)))
        assert np.max(np.abs(col.value.values - fac.value.values)) <= 1e-6 * scale

    def test_display_matches_collapsed(self, routes):
        """The from-scratch confluent-hypergeometric kernel (explicit
        normalizing constant, bare M and U evaluations) agrees with the
        table-driven routes; this validates the constant end to end."""
        *_, col, fac, sec, disp = routes
        scale = float(np.max(np.abs(col.value.values)))
        assert np.max(np.abs(col.value.values - disp.value.values)) <= 1e-9 * scale

    def test_right_inverse_residual(self, routes):
        model, ode, fs, g, col, _, sec, _ = routes
        u = np.linspace(0.05, 9.0, 41)
        g_norm = float(np.max(np.abs(g.values)))
        for app in (col, sec):
            resid = (app.deriv2(u) + np.asarray(ode.coeffs[1](u)) * app.deriv(u)
                     + np.asarray(ode.coeffs[0](u)) * app.value(u)
                     - np.asarray(g(u), dtype=float))
            assert np.max(np.abs(resid)) <= 1e-5 * g_norm

    def test_boundary_value_vanishes(self, routes):
        _, _, fs, g, col, fac, sec, disp = routes
        u0 = float(fs.grid[0])
        g_norm = float(np.max(np.abs(g.values)))
        for app in (col, fac, sec, disp):
            assert abs(app.value(u0)) <= 1e-8 * g_norm

    def test_full_line_integrals_agree(self, routes):
        *_, col, fac, sec, disp = routes
        assert col.f_s == pytest.approx(sec.f_s, rel=1e-10)
        assert col.f_r == pytest.approx(sec.f_r, rel=1e-8)

    def test_full_line_integrals_frozen(self, routes):
        """Regression pins, measured once and confirmed by two routes."""
        sec = routes[6]
        assert sec.f_s == pytest.approx(0.142600521716, rel=1e-6)
        assert sec.f_r == pytest.approx(0.336013156973, rel=1e-6)

    def test_left_edge_derivative_formula(self, routes):
        """(Gg)'(u0) reduces to -F[(s/w) g] w(u0)/s(u0); the cancellation-free
        form the boundary constant uses."""
        _, _, fs, g, col, _, sec, _ = routes
        s, r = fs.solutions
        u0 = float(fs.grid[0])
        w0 = (float(s(u0)) * float(r.derivs[1](u0))
              - float(s.derivs[1](u0)) * float(r(u0)))
        expected = -sec.f_s * w0 / float(s(u0))
        assert float(sec.deriv(u0)) == pytest.approx(expected, rel=1e-9)
        assert float(col.deriv(u0)) == pytest.approx(expected, rel=1e-7)

    def test_normalization_invariance(self, routes):
        """Rescaling the fundamental solutions must not move Gg."""
        model, ode, fs, g, col, *_ = routes

        def scaled(sol, factor):
            return FundamentalSolution(
                tag=sol.tag,
                derivs=tuple(
                    (lambda u, _d=d, _f=factor: _f * np.asarray(_d(u), dtype=float))
                    for d in sol.derivs))

        fs2 = FundamentalSystem(m=fs.m, n=fs.n, grid=fs.grid,
                                solutions=(scaled(fs.solutions[0], 2.0),
                                           scaled(fs.solutions[1], 3.0)),
                                route=fs.route)
        col2 = greens_collapsed(fs2, g, exact_kernels=False)
        scale = float(np.max(np.abs(col.value.values)))
        assert np.max(np.abs(col.value.values - col2.value.values)) <= 1e-8 * scale

    def test_second_order_plain_callables(self, routes):
        _, _, fs, g, *_ = routes
        s, r = fs.solutions
        w = lambda u: (np.asarray(s(u)) * np.asarray(r.derivs[1](u))
                       - np.asarray(s.derivs[1](u)) * np.asarray(r(u)))
        sec = greens_second_order(s.derivs[0], r.derivs[0], w, g,
                                  exact_kernels=False)
        assert sec.deriv is None and sec.deriv2 is None
        ref = greens_second_order(s, r, w, g, exact_kernels=False)
        np.testing.assert_allclose(sec.value.values, ref.value.values,
                                   rtol=1e-12)


class TestKummerDisplayPreconditions:
    def test_requires_discounting(self):
        model = RiskModel(premium=LinearPremium(c=1.0, eps=0.5),
                          claims=ExponentialClaims(mu=2.0),
                          interclaims=ExponentialInterclaims(lam=1.5),
                          delta=0.0,
                          penalty=ExpSurplusPenalty(nu=1.0),
                          u_max=10.0)
        g = decaying_source(default_grid(0.0, 10.0, 64))
        with pytest.raises(ValueError, match="delta > 0"):
            greens_kummer_display(model, g)

    def test_requires_linear_premium(self):
        model = RiskModel(premium=ExpDecayPremium(c=2.0),
                          claims=ExponentialClaims(mu=2.0),
                          interclaims=ExponentialInterclaims(lam=1.5),
                          delta=0.5,
                          penalty=ExpSurplusPenalty(nu=1.0),
                          u_max=10.0)
        g = decaying_source(default_grid(0.0, 10.0, 64))
        with pytest.raises(ValueError, match="linear"):
            greens_kummer_display(model, g)
