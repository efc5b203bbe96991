"""Special functions against quadrature oracles and exact identities."""

import math

import numpy as np
import pytest

from cyclofield import specfun

import oracles

# High-precision reference constants, frozen from 30-digit quadrature of the
# defining integrals (they agree with oracles.*_quadrature at runtime too).
CI_1 = 0.337403922900968134662646203889
SI_1 = 0.946083070367183014941353313823


class TestBesselClosedForms:
    def test_half_order_at_pi(self):
        assert abs(specfun.bessel_j(0.5, math.pi)) < 1e-12

    def test_three_half_order_at_pi(self):
        # sqrt(2/(pi*pi)) * (0 - cos(pi)) = sqrt(2)/pi
        expected = math.sqrt(2.0) / math.pi
        assert abs(specfun.bessel_j(1.5, math.pi) - expected) < 1e-12

    def test_j0_at_origin(self):
        assert specfun.bessel_j(0.0, 0.0) == 1.0

    def test_positive_orders_vanish_at_origin(self):
        for order in (0.5, 1.0, 1.5, 2.0, 2.5):
            assert specfun.bessel_j(order, 0.0) == 0.0

    def test_half_order_identity_on_log_grid(self):
        x = np.logspace(-6, 3, 400)
        closed = np.sqrt(2.0 / (np.pi * x)) * np.sin(x)
        assert np.max(np.abs(specfun.bessel_j(0.5, x) - closed)) < 1e-12


class TestBesselAgainstQuadrature:
    @pytest.mark.parametrize("order", [0.0, 0.5, 1.0, 1.5, 2.0, 2.5])
    def test_across_series_asymptotic_switch(self, order):
        for x in (0.05, 0.4, 0.6, 3.0, 14.0, 15.9, 16.1, 25.0, 80.0):
            ref = oracles.bessel_quadrature(order, x)
            assert abs(specfun.bessel_j(order, x) - ref) < 1e-10

    def test_derivative_identity(self):
        # d/dx [x^-nu J_nu(x)] = -x^-nu J_{nu+1}(x)
        h = 1e-5
        for nu in (0.0, 0.5, 1.0):
            for x in (0.5, 2.0, 10.0):
                left = (
                    (x + h) ** -nu * specfun.bessel_j(nu, x + h)
                    - (x - h) ** -nu * specfun.bessel_j(nu, x - h)
                ) / (2.0 * h)
                right = -(x**-nu) * specfun.bessel_j(nu + 1.0, x)
                assert abs(left - right) < 1e-6 * abs(right)

    def test_ratio_matches_and_is_stable_at_zero(self):
        x = np.logspace(-10, 1, 60)
        for order in (0.5, 1.0, 1.5, 2.0, 2.5):
            direct = specfun.bessel_j(order, x) / x**order
            ratio = specfun.bessel_j_ratio(order, x)
            np.testing.assert_allclose(ratio, direct, rtol=1e-9)
            at_zero = specfun.bessel_j_ratio(order, 0.0)
            expected = 0.5**order / specfun.gamma_fn(order + 1.0)
            assert abs(at_zero - expected) < 1e-14

    def test_rejections(self):
        with pytest.raises(ValueError):
            specfun.bessel_j(0.75, 1.0)
        with pytest.raises(ValueError):
            specfun.bessel_j(0.5, -1.0)
        with pytest.raises(ValueError):
            specfun.bessel_j(0.5, np.inf)


class TestSineCosineIntegrals:
    def test_ci_at_one(self):
        value = specfun.cosint(1.0)
        assert abs(value - CI_1) < 1e-10
        assert abs(value - oracles.cosint_quadrature(1.0)) < 1e-10

    def test_si_at_one(self):
        value = specfun.sinint(1.0)
        assert abs(value - SI_1) < 1e-10
        assert abs(value - oracles.sinint_quadrature(1.0)) < 1e-10

    def test_si_at_zero(self):
        assert specfun.sinint(0.0) == 0.0

    def test_ci_small_argument_reduces_to_log_term(self):
        for x in (1e-10, 1e-8, 1e-6):
            residual = specfun.cosint(x) - (specfun.euler_gamma + math.log(x))
            assert abs(residual) < 1e-12

    def test_oracle_agreement_across_switch(self):
        for x in (0.1, 0.9, 1.9, 2.1, 3.7, 8.0, 30.0):
            assert abs(specfun.cosint(x) - oracles.cosint_quadrature(x)) < 1e-10
            assert abs(specfun.sinint(x) - oracles.sinint_quadrature(x)) < 1e-10

    def test_large_argument_envelopes(self):
        for x in (10.0, 50.0, 300.0, 1e4):
            assert abs(specfun.cosint(x)) <= 2.0 / x
            assert abs(specfun.sinint(x) - 0.5 * math.pi) <= 2.0 / x

    def test_si_monotone_on_first_arch(self):
        x = np.linspace(0.0, math.pi, 200)
        values = specfun.sinint(x)
        assert np.all(np.diff(values) > 0.0)

    def test_ci_first_zero_bracketed(self):
        assert specfun.cosint(0.6) < 0.0 < specfun.cosint(0.7)
        assert oracles.cosint_quadrature(0.6) < 0.0 < oracles.cosint_quadrature(0.7)

    def test_rejections(self):
        with pytest.raises(ValueError):
            specfun.cosint(0.0)
        with pytest.raises(ValueError):
            specfun.cosint(-1.0)
        with pytest.raises(ValueError):
            specfun.sinint(-0.5)


class TestGamma:
    def test_reference_points(self):
        assert abs(specfun.gamma_fn(0.5) - math.sqrt(math.pi)) < 1e-12
        assert abs(specfun.gamma_fn(1.0) - 1.0) < 1e-12
        assert abs(specfun.gamma_fn(2.5) - 0.75 * math.sqrt(math.pi)) < 1e-12

    def test_recurrence(self):
        for x in (0.5, 1.0, 1.5, 2.0):
            lhs = specfun.gamma_fn(x + 1.0)
            rhs = x * specfun.gamma_fn(x)
            assert abs(lhs / rhs - 1.0) < 1e-12

    def test_against_scipy(self):
        from scipy.special import gamma as scipy_gamma

        x = np.linspace(0.05, 50.0, 500)
        mine = specfun.gamma_fn(x)
        np.testing.assert_allclose(mine, scipy_gamma(x), rtol=1e-12)

    def test_rejections(self):
        for bad in (0.0, -1.0, 50.5):
            with pytest.raises(ValueError):
                specfun.gamma_fn(bad)


class TestSpecialValueBounds:
    """The documented error bounds hold against independent references."""

    def test_absolute_bounds(self):
        from scipy.special import jv, sici

        cases = [
            ("bessel_j", (1.0, 7.3), jv(1.0, 7.3)),
            ("bessel_j", (1.5, 0.2), jv(1.5, 0.2)),
            ("cosint", (3.0,), sici(3.0)[1]),
            ("sinint", (3.0,), sici(3.0)[0]),
        ]
        for kind, args, reference in cases:
            sv = specfun.special_value(kind, *args)
            assert sv.abs_error_bound <= 1e-10
            assert abs(sv.value - reference) <= sv.abs_error_bound

    def test_gamma_relative_bound(self):
        from scipy.special import gamma as scipy_gamma

        sv = specfun.special_value("gamma_fn", 41.5)
        assert sv.abs_error_bound <= 1e-12 * abs(sv.value)
        assert abs(sv.value - scipy_gamma(41.5)) <= sv.abs_error_bound
