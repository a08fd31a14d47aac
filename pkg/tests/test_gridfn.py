"""GridFunction and cumulative-integral tests.

The A/B/F trio shares panel integrals, so their consistency bounds are
much tighter than the quadrature tolerance; several later boundary
identities depend on B(first node) being bitwise equal to F.
"""
import math

import numpy as np
import pytest

from ruinops.numerics import (
    ConstantTail,
    ExponentialTail,
    GridFunction,
    TailFitError,
    TailModelError,
    ZeroTail,
    cumulative,
    default_grid,
)


@pytest.fixture
def exp_grid():
    grid = default_grid(0.0, 15.0, 1024)
    return GridFunction(grid, np.exp(-2.0 * grid), tail=ExponentialTail(rate=2.0))


class TestConstruction:
    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            GridFunction(np.array([0.0]), np.array([1.0]))
        with pytest.raises(ValueError):
            GridFunction(np.array([0.0, 1.0]), np.array([1.0]))

    def test_rejects_unsorted_nodes(self):
        with pytest.raises(ValueError):
            GridFunction(np.array([0.0, 2.0, 1.0]), np.zeros(3))

    def test_rejects_nonfinite_values(self):
        with pytest.raises(ValueError):
            GridFunction(np.array([0.0, 1.0]), np.array([1.0, np.inf]))


class TestEvaluation:
    def test_interpolation_accuracy(self, exp_grid):
        # PCHIP is third order: h ~ 0.027 on the uniform part gives ~1e-6
        u = np.linspace(0.05, 14.9, 777)
        err = np.abs(exp_grid(u) - np.exp(-2.0 * u))
        assert np.max(err) < 5e-6
        assert np.max(err / np.exp(-2.0 * u)) < 5e-5

    def test_exact_channel_preferred(self):
        grid = np.linspace(0.0, 5.0, 16)  # deliberately coarse
        f = GridFunction(grid, np.exp(-grid), exact=lambda u: np.exp(-u))
        assert f(2.345) == math.exp(-2.345)

    def test_tail_models(self):
        grid = np.linspace(0.0, 5.0, 64)
        vals = np.exp(-grid)
        f = GridFunction(grid, vals, tail=ExponentialTail(rate=1.0))
        assert f(9.0) == pytest.approx(math.exp(-9.0), rel=1e-9)
        z = GridFunction(grid, vals, tail=ZeroTail())
        assert z(9.0) == 0.0
        c = GridFunction(grid, vals, tail=ConstantTail(level=0.25))
        assert c(9.0) == 0.25
        bare = GridFunction(grid, vals)
        with pytest.raises(TailModelError):
            bare(9.0)

    def test_tail_power_factor(self):
        grid = np.linspace(1.0, 10.0, 128)
        vals = grid * np.exp(-grid)
        f = GridFunction(grid, vals, tail=ExponentialTail(rate=1.0, power=1.0))
        assert f(14.0) == pytest.approx(14.0 * math.exp(-14.0), rel=1e-10)

    def test_below_domain_raises(self, exp_grid):
        shifted = GridFunction(exp_grid.nodes + 1.0, exp_grid.values)
        with pytest.raises(ValueError):
            shifted(0.5)

    def test_scalar_and_array_calls(self, exp_grid):
        out = exp_grid(np.array([0.0, 1.0, 20.0]))
        assert out.shape == (3,)
        assert isinstance(exp_grid(1.0), float)

    def test_derivative(self, exp_grid):
        # the PCHIP derivative is one order less accurate than the values
        u = np.linspace(0.5, 10.0, 50)
        assert np.max(np.abs(exp_grid.derivative(u) + 2.0 * np.exp(-2.0 * u))) < 5e-4


class TestTailFit:
    def test_recovers_rate_and_power(self):
        grid = np.linspace(0.5, 30.0, 600)
        f = GridFunction(grid, grid * np.exp(-1.5 * grid))
        fitted = f.fit_tail()
        assert fitted.tail.rate == pytest.approx(1.5, rel=1e-6)
        assert fitted.tail.power == pytest.approx(1.0, abs=1e-4)

    def test_negative_data_is_fit_with_signed_coef(self):
        grid = np.linspace(0.5, 30.0, 600)
        f = GridFunction(grid, -np.exp(-grid))
        fitted = f.fit_tail()
        assert fitted.tail.rate == pytest.approx(1.0, rel=1e-6)
        assert fitted.tail.coef < 0
        assert fitted(35.0) == pytest.approx(-math.exp(-35.0), rel=1e-6)

    def test_refuses_growth(self):
        grid = np.linspace(0.5, 30.0, 200)
        f = GridFunction(grid, np.exp(0.3 * grid))
        with pytest.raises(TailFitError):
            f.fit_tail()

    def test_refuses_sign_change(self):
        grid = np.linspace(0.5, 30.0, 200)
        f = GridFunction(grid, np.sin(grid) * np.exp(-0.1 * grid))
        with pytest.raises(TailFitError):
            f.fit_tail()

    def test_all_zero_window_becomes_zero_tail(self):
        grid = np.linspace(0.0, 10.0, 100)
        vals = np.where(grid < 5.0, np.exp(-grid), 0.0)
        fitted = GridFunction(grid, vals).fit_tail()
        assert isinstance(fitted.tail, ZeroTail)


class TestCumulative:
    def test_full_mass_with_exact_channel(self):
        grid = default_grid(0.0, 15.0, 512)
        f = GridFunction(grid, np.exp(-2.0 * grid),
                         tail=ExponentialTail(rate=2.0),
                         exact=lambda u: np.exp(-2.0 * u))
        total = cumulative(f, "F")
        assert total == pytest.approx(0.5, rel=1e-11)

    def test_a_plus_b_equals_f_everywhere(self, exp_grid):
        a = cumulative(exp_grid, "A")
        b = cumulative(exp_grid, "B")
        full = cumulative(exp_grid, "F")
        assert np.max(np.abs(a.values + b.values - full)) <= 2e-10
        # the shared-panel construction actually achieves rounding level
        assert np.max(np.abs(a.values + b.values - full)) <= 4 * np.finfo(float).eps

    def test_b_at_first_node_is_bitwise_f(self, exp_grid):
        b = cumulative(exp_grid, "B")
        full = cumulative(exp_grid, "F")
        assert b.values[0] == full

    def test_b_keeps_relative_accuracy_deep_in_tail(self):
        grid = default_grid(0.0, 20.0, 800)
        f = GridFunction(grid, np.exp(-2.0 * grid),
                         tail=ExponentialTail(rate=2.0),
                         exact=lambda u: np.exp(-2.0 * u))
        b = cumulative(f, "B")
        i = np.searchsorted(grid, 15.0)
        ref = 0.5 * math.exp(-2.0 * grid[i])
        assert b.values[i] == pytest.approx(ref, rel=1e-8)

    def test_a_is_monotone_for_positive_integrand(self, exp_grid):
        a = cumulative(exp_grid, "A")
        assert np.all(np.diff(a.values) >= 0)
        assert a.values[0] == 0.0

    def test_b_requires_integrable_tail(self):
        grid = np.linspace(0.0, 5.0, 64)
        f = GridFunction(grid, np.exp(-grid), tail=ConstantTail(level=1.0))
        with pytest.raises(TailModelError):
            cumulative(f, "B")
        g = GridFunction(grid, np.exp(-grid), tail=ExponentialTail(rate=-0.5))
        with pytest.raises(TailModelError):
            cumulative(g, "B")
        bare = GridFunction(grid, np.exp(-grid))
        with pytest.raises(TailModelError):
            cumulative(bare, "F")

    def test_bad_kind_rejected(self, exp_grid):
        with pytest.raises(ValueError):
            cumulative(exp_grid, "C")

    def test_power_law_tail_mass(self):
        # tail integral of u e^{-u} from the last node, via incomplete gamma
        grid = np.linspace(0.0, 12.0, 500)
        f = GridFunction(grid, grid * np.exp(-grid),
                         tail=ExponentialTail(rate=1.0, power=1.0),
                         exact=lambda u: u * np.exp(-u))
        full = cumulative(f, "F")
        assert full == pytest.approx(1.0, rel=1e-10)


class TestPersistence:
    def test_csv_round_trip(self, tmp_path, exp_grid):
        path = tmp_path / "fn.csv"
        exp_grid.to_csv(path)
        back = GridFunction.from_csv(path)
        assert np.array_equal(back.nodes, exp_grid.nodes)
        assert np.array_equal(back.values, exp_grid.values)
        assert back.tail == exp_grid.tail
        assert (tmp_path / "fn.json").exists()

    def test_meta_round_trip(self, tmp_path):
        grid = np.linspace(0.0, 1.0, 8)
        f = GridFunction(grid, grid**2, tail=ZeroTail(), meta={"route": "test"})
        f.to_csv(tmp_path / "m.csv")
        back = GridFunction.from_csv(tmp_path / "m.csv")
        assert back.meta == {"route": "test"}
        assert isinstance(back.tail, ZeroTail)

    def test_header_validation(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n0,1\n1,2\n")
        with pytest.raises(ValueError):
            GridFunction.from_csv(bad)


class TestDefaultGrid:
    def test_shape_and_bounds(self):
        g = default_grid(0.0, 15.0, 1024)
        assert len(g) == 1024
        assert g[0] == 0.0 and g[-1] == 15.0
        assert np.all(np.diff(g) > 0)

    def test_log_density_below_one(self):
        g = default_grid(0.0, 15.0, 1024)
        assert np.sum(g < 1.0) >= 400
        # uniform spacing beyond the knee
        high = g[g >= 1.0]
        assert np.allclose(np.diff(high), np.diff(high)[0])

    def test_positive_start(self):
        g = default_grid(1e-3, 40.0, 1024)
        assert g[0] == 1e-3 and g[-1] == 40.0
        assert np.all(np.diff(g) > 0)

    def test_small_domain(self):
        g = default_grid(0.0, 0.5, 64)
        assert len(g) == 64 and g[0] == 0.0 and g[-1] == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            default_grid(2.0, 1.0)
