"""Special-function tests.

Closed-form spot values are frozen as literals; sweeps compare against
mpmath and quadrature oracles. The Wronskian and contiguous-relation
checks are structural identities that catch sign or normalization slips.
"""
import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruinops.numerics import (
    BranchSensitivityWarning,
    exp_integral_e1,
    gauss_2f1,
    integrate,
    kummer_m,
    kummer_m_prime,
    kummer_u,
    kummer_u_prime,
    log_upper_incomplete_gamma,
    upper_incomplete_gamma,
)
from ruinops.numerics.special import _upper_gamma_real_eta

mp.mp.dps = 30


# ---------------------------------------------------------------------------
# Upper incomplete gamma
# ---------------------------------------------------------------------------

class TestUpperIncompleteGamma:
    def test_spot_values(self):
        assert upper_incomplete_gamma(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-13)
        assert upper_incomplete_gamma(2.0, 1.0) == pytest.approx(2.0 / math.e, rel=1e-13)
        assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-13)

    @pytest.mark.parametrize("eta", [0.5, 1.0, 2.5])
    @pytest.mark.parametrize("x", [0.0, 1.0, 10.0])
    def test_against_quadrature(self, eta, x):
        if x == 0.0 and eta < 1.0:
            # integrable endpoint singularity: quadrature from a tiny cut
            # plus the analytic sliver int_0^cut t^{eta-1} e^{-t} ~ cut^eta/eta
            cut = 1e-12
            ref = integrate(lambda t: t ** (eta - 1.0) * np.exp(-t),
                            cut, math.inf, tol=1e-13).value
            ref += cut**eta / eta
        else:
            ref = integrate(lambda t: t ** (eta - 1.0) * np.exp(-t),
                            max(x, 1e-12), math.inf, tol=1e-13).value
        assert upper_incomplete_gamma(eta, x) == pytest.approx(ref, rel=1e-9)

    def test_against_mpmath_sweep(self):
        for eta in (0.25, 0.5, 1.0, 2.5, 7.3, 20.0):
            for x in (0.0, 0.3, 1.0, 5.0, 10.0, 50.0):
                ref = float(mp.gammainc(eta, x, mp.inf))
                assert upper_incomplete_gamma(eta, x) == pytest.approx(ref, rel=1e-12)

    def test_series_cf_crossover_is_seamless(self):
        eta = 2.5
        below = upper_incomplete_gamma(eta, eta + 1.0 - 1e-9)
        above = upper_incomplete_gamma(eta, eta + 1.0 + 1e-9)
        assert abs(below - above) <= 1e-8 * above

    def test_log_channel_matches_plain(self):
        for eta, x in [(0.5, 0.2), (2.5, 8.0), (10.0, 3.0)]:
            assert log_upper_incomplete_gamma(eta, x) == pytest.approx(
                math.log(upper_incomplete_gamma(eta, x)), abs=1e-12)

    def test_log_channel_beyond_float_range(self):
        # plain value overflows ~exp(1359); the log channel must not
        val = log_upper_incomplete_gamma(300.0, 500.0)
        assert val == pytest.approx(1359.0719241331278, rel=1e-13)

    def test_log_channel_deep_tail(self):
        # Gamma(0.5, 800) underflows; log stays informative
        val = log_upper_incomplete_gamma(0.5, 800.0)
        ref = float(mp.log(mp.gammainc(0.5, 800, mp.inf)))
        assert val == pytest.approx(ref, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            upper_incomplete_gamma(0.0, 1.0)
        with pytest.raises(ValueError):
            upper_incomplete_gamma(-1.0, 1.0)
        with pytest.raises(ValueError):
            upper_incomplete_gamma(1.0, -0.5)

    def test_extended_parameter_recurrence(self):
        for eta in (-0.5, -1.0, -1.5, -2.0, -3.7):
            for x in (0.5, 3.0, 12.0):
                ref = float(mp.gammainc(eta, x, mp.inf))
                assert _upper_gamma_real_eta(eta, x) == pytest.approx(ref, rel=1e-9)


# ---------------------------------------------------------------------------
# Exponential integral
# ---------------------------------------------------------------------------

class TestExpIntegral:
    def test_spot_value(self):
        # E1(1), the classical Gompertz-ish constant
        assert exp_integral_e1(1.0) == pytest.approx(0.21938393439552029, rel=1e-13)

    def test_sweep_against_mpmath(self):
        for x in (0.01, 0.3, 1.0, 1.0000001, 2.0, 10.0, 50.0, 300.0):
            assert exp_integral_e1(x) == pytest.approx(float(mp.e1(x)), rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            exp_integral_e1(0.0)


# ---------------------------------------------------------------------------
# Kummer functions
# ---------------------------------------------------------------------------

class TestKummer:
    def test_m_spot_values(self):
        assert kummer_m(1.5, 1.5, 2.0) == pytest.approx(math.exp(2.0), rel=1e-12)
        assert kummer_m(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)

    def test_m_sweep(self):
        for a, b, z in [(0.25, 1.25, 3.0), (2.0, 3.0, -4.0), (1.2, 2.3, 30.0),
                        (5.0, 1.5, 0.7), (0.5, 2.5, 120.0)]:
            ref = float(mp.hyp1f1(a, b, z))
            assert kummer_m(a, b, z) == pytest.approx(ref, rel=1e-10)

    def test_m_scaled_channel(self):
        mant, scale = kummer_m(1.2, 2.3, 800.0, scaled=True)
        ref_log = float(mp.log(mp.hyp1f1(1.2, 2.3, 800)))
        assert math.log(mant) + scale == pytest.approx(ref_log, abs=1e-10)

    def test_m_rejects_nonpositive_integer_b(self):
        with pytest.raises(ValueError):
            kummer_m(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            kummer_m(1.0, -2.0, 1.0)

    def test_u_spot_values(self):
        assert kummer_u(1.0, 2.0, 2.0) == pytest.approx(0.5, rel=1e-10)
        ref = math.e * exp_integral_e1(1.0)
        assert kummer_u(1.0, 1.0, 1.0) == pytest.approx(ref, abs=5e-8)

    def test_u_large_argument_power_law(self):
        # U(a, b, z) ~ z^{-a} for large z
        assert kummer_u(2.0, 3.0, 50.0) * 50.0**2 == pytest.approx(1.0, abs=0.05)

    def test_u_sweep(self):
        cases = [(0.5, 1.75, 0.8), (1.25, 4.0, 1.5), (0.3, 2.0, 5.0),
                 (2.5, -1.0, 3.0), (1.5, 3.0, 0.5), (1.0, 2.5, 0.1)]
        for a, b, z in cases:
            ref = float(mp.hyperu(a, b, z))
            assert kummer_u(a, b, z) == pytest.approx(ref, rel=5e-8)

    def test_u_domain(self):
        with pytest.raises(ValueError):
            kummer_u(-1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            kummer_u(1.0, 2.0, 0.0)

    @pytest.mark.parametrize("z", [0.5, 1.0, 2.0, 5.0, 12.0, 20.0])
    def test_wronskian_identity(self, z):
        # W{M, U}(z) = -Gamma(b)/Gamma(a) z^{-b} e^z
        a, b = 1.25, 2.5
        w = (kummer_m(a, b, z) * kummer_u_prime(a, b, z)
             - kummer_m_prime(a, b, z) * kummer_u(a, b, z))
        ref = -math.gamma(b) / math.gamma(a) * z ** (-b) * math.exp(z)
        assert w == pytest.approx(ref, rel=1e-7)


# ---------------------------------------------------------------------------
# Gauss 2F1
# ---------------------------------------------------------------------------

class TestGauss2F1:
    def test_spot_values(self):
        assert gauss_2f1(2.0, 5.0, 5.0, 0.5) == pytest.approx(4.0, rel=1e-12)
        assert gauss_2f1(1.0, 1.0, 2.0, 0.5) == pytest.approx(2.0 * math.log(2.0), rel=1e-12)
        assert gauss_2f1(0.5, 0.5, 1.5, 1.0) == pytest.approx(math.pi / 2.0, rel=1e-12)

    def test_sweep_inside_disk(self):
        cases = [(0.5, 1.2, 2.3, 0.3), (0.5, 1.2, 2.3, 0.8), (0.5, 1.2, 2.3, -0.8),
                 (0.5, 1.2, 2.3, -5.0), (1.3, 0.7, 3.1, 0.95), (-2.0, 1.5, 2.5, 3.7),
                 (2.2, 0.4, 1.9, -0.99), (0.9, 0.8, 4.0, 0.99)]
        for a, b, c, z in cases:
            ref = float(mp.hyp2f1(a, b, c, z))
            assert gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-8), (a, b, c, z)

    def test_beyond_one_is_flagged_and_matches_principal_real_part(self):
        frozen = [
            (0.5, 1.2, 2.3, 1.5, 1.3729836640726993),
            (1.0, 2.0, 3.0, 2.0, -1.0),
            (0.4, 0.9, 1.7, 4.0, 0.6307169243043393),
        ]
        for a, b, c, z, ref in frozen:
            with pytest.warns(BranchSensitivityWarning):
                val = gauss_2f1(a, b, c, z)
            assert val == pytest.approx(ref, rel=1e-8)

    def test_divergence_at_one(self):
        with pytest.raises(ValueError):
            gauss_2f1(1.0, 2.0, 2.5, 1.0)

    def test_pole_at_nonpositive_c(self):
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 0.7, -1.0, 0.3)

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(0.1, 3.0),
        b=st.floats(0.1, 3.0),
        c=st.floats(3.2, 6.0),
        z=st.floats(-0.8, 0.8),
    )
    def test_contiguous_relation(self, a, b, c, z):
        # Gauss: c(1-z) F(a,b;c;z) - c F(a-1,b;c;z) + (c-b) z F(a,b;c+1;z) = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f0 = gauss_2f1(a, b, c, z)
            fm = gauss_2f1(a - 1.0, b, c, z)
            fp = gauss_2f1(a, b, c + 1.0, z)
        resid = c * (1.0 - z) * f0 - c * fm + (c - b) * z * fp
        scale = max(abs(c * f0), abs(c * fm), abs((c - b) * z * fp), 1.0)
        assert abs(resid) <= 1e-7 * scale
