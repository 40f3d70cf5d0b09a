import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ihtlab.asymptotics import (
    RootResult,
    TailInputs,
    binom_entropy_limit,
    chi2_cdf,
    chi2_rate,
    f_cdf,
    f_rate,
    regularized_beta,
    regularized_gamma_p,
    regularized_gamma_q,
    scaled_f_cdf,
    shannon_entropy,
    tail_if,
    tail_il,
    tail_iu,
    temme_beta_eta,
    temme_gamma_eta,
)
from ihtlab.core import RngSpec
from ihtlab.errors import InvalidArgumentError


def bisect(g, target, lo, hi, iters=200):
    """Plain bisection oracle, independent of the package root-finder."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if g(mid) <= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestShannonEntropy:
    def test_half(self):
        assert shannon_entropy(0.5) == pytest.approx(math.log(2), abs=1e-12)

    def test_boundaries(self):
        assert shannon_entropy(0.0) == 0.0
        assert shannon_entropy(1.0) == 0.0

    @given(st.floats(0.0, 1.0))
    def test_symmetry(self, p):
        assert shannon_entropy(p) == pytest.approx(shannon_entropy(1 - p), abs=1e-12)

    def test_domain(self):
        with pytest.raises(InvalidArgumentError):
            shannon_entropy(1.5)


class TestTailUpper:
    def test_small_target_small_root(self):
        res = tail_iu(TailInputs(1e-4, 1e-4, 1.0))
        assert 0 < res.value < 0.2

    def test_target_one_matches_bisection_oracle(self):
        # Choose rho with 2*H(rho) = 1 so the target is exactly one.
        rho = bisect(shannon_entropy, 0.5, 1e-9, 0.5)
        res = tail_iu(TailInputs(1.0, rho, 1.0))
        oracle = bisect(lambda nu: nu - math.log1p(nu), 1.0, 0.0, 10.0)
        assert oracle == pytest.approx(2.1461932206205825, abs=1e-10)
        assert res.value == pytest.approx(oracle, abs=1e-4)

    def test_strictly_increasing_in_target(self):
        values = []
        for lam in np.linspace(1.0, 0.05, 100):
            values.append(tail_iu(TailInputs(0.5, 0.3, lam)).value)
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_boundary_flag(self):
        res = tail_iu(TailInputs(1.0, 1.0, 1.0))
        assert res.boundary
        assert res.value == 0.0


class TestTailLower:
    def test_small_target_small_root(self):
        res = tail_il(TailInputs(1e-4, 1e-4, 1.0))
        assert 0 < res.value < 0.2

    def test_target_one_matches_bisection_oracle(self):
        rho = bisect(shannon_entropy, 0.5, 1e-9, 0.5)
        res = tail_il(TailInputs(1.0, rho, 1.0))
        oracle = bisect(lambda nu: -nu - math.log1p(-nu), 1.0, 0.0, 1 - 1e-15)
        assert oracle == pytest.approx(0.8414056604369606, abs=1e-10)
        assert res.value == pytest.approx(oracle, abs=1e-4)

    def test_always_below_one(self):
        for lam in (1.0, 0.5, 0.2):
            for rho in (0.1, 0.5, 0.9):
                assert tail_il(TailInputs(0.9, rho, lam)).value < 1.0

    def test_decreasing_in_lambda(self):
        lams = np.linspace(0.05, 1.0, 50)
        vals = [tail_il(TailInputs(0.5, 0.3, lam)).value for lam in lams]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestTailF:
    def test_limit_small_delta(self):
        rho = 0.3
        res = tail_if(1e-9, rho)
        assert res.value == pytest.approx(rho / (1 - rho), rel=1e-3)

    def test_half_half_matches_oracle(self):
        res = tail_if(0.5, 0.5)
        target = 2 * shannon_entropy(0.25) + shannon_entropy(0.5)
        oracle = bisect(lambda f: math.log1p(f) - 0.5 * math.log(f), target, 1.0, 100.0)
        assert res.value == pytest.approx(oracle, rel=1e-10)
        assert res.value == pytest.approx(35.89806927457370, rel=1e-10)

    def test_increasing_in_delta(self):
        vals = [tail_if(d, 0.25).value for d in np.linspace(0.05, 1.0, 40)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_above_lower_limit(self):
        for delta in (0.1, 0.5, 1.0):
            for rho in (0.05, 0.25, 0.5):
                assert tail_if(delta, rho).value > rho / (1 - rho)


def test_root_residuals_on_grid():
    deltas = np.linspace(0.02, 1.0, 25)
    rhos = np.linspace(0.02, 0.5, 25)
    worst = 0.0
    for delta in deltas:
        for rho in rhos:
            for res in (
                tail_iu(TailInputs(delta, rho, 1.0 - rho)),
                tail_il(TailInputs(delta, rho, 1.0 - rho)),
                tail_if(delta, rho),
            ):
                target = 1.0  # residuals are absolute; compare to 1e-12*(1+|target|)
                assert abs(res.residual) <= 1e-12 * (1 + target)
                worst = max(worst, abs(res.residual))
    assert worst <= 2e-12


class TestCdfOracles:
    def test_chi2_closed_form_dof2(self):
        assert chi2_cdf(2 * math.log(2), 2) == pytest.approx(0.5, abs=1e-14)
        x = np.linspace(0.0, 10.0, 50)
        np.testing.assert_allclose(chi2_cdf(x, 2), 1 - np.exp(-x / 2), atol=1e-13)

    def test_chi2_at_zero(self):
        for dof in (1, 5, 10):
            assert chi2_cdf(0.0, dof) == 0.0

    def test_f_median_equal_dof(self):
        for d in (2, 5, 10):
            assert f_cdf(1.0, d, d) == pytest.approx(0.5, abs=1e-12)

    def test_dkw_band_chi2(self):
        gen = RngSpec(21).generator()
        m = 1_000_000
        samples = gen.chisquare(7, size=m)
        xs = np.sort(samples)
        emp_hi = np.arange(1, m + 1) / m
        emp_lo = np.arange(0, m) / m
        theo = chi2_cdf(xs, 7)
        dkw = math.sqrt(math.log(2 / 0.01) / (2 * m))
        assert max(np.max(np.abs(emp_hi - theo)), np.max(np.abs(emp_lo - theo))) <= dkw

    def test_dkw_band_f(self):
        gen = RngSpec(22).generator()
        m = 1_000_000
        samples = gen.f(5, 17, size=m)
        xs = np.sort(samples)
        theo = f_cdf(xs, 5, 17)
        emp_hi = np.arange(1, m + 1) / m
        emp_lo = np.arange(0, m) / m
        dkw = math.sqrt(math.log(2 / 0.01) / (2 * m))
        assert max(np.max(np.abs(emp_hi - theo)), np.max(np.abs(emp_lo - theo))) <= dkw

    def test_scaled_f_cdf_consistency(self):
        n, k = 60, 6
        x = 0.37
        assert scaled_f_cdf(x, k, n) == pytest.approx(f_cdf(x * (n - k + 1) / k, k, n - k + 1))


class TestTemmeGamma:
    def test_eta_frozen_value(self):
        eta, _ = temme_gamma_eta(10.0, 20.0, "Q")
        assert eta == pytest.approx(0.7833936678835931, abs=1e-13)

    def test_erfc_contract(self):
        assert math.erfc(0.0) == 1.0
        for w in np.linspace(0.0, 6.0, 50):
            assert math.erfc(w) <= math.exp(-(w**2)) + 1e-300

    def test_leading_term_tracks_oracle_upper(self):
        # |Q(s, 2s) - leading| must shrink like s^(-1/2) exp(-s eta^2 / 2).
        svals = np.array([50, 100, 200, 400, 800], dtype=float)
        errs, etas = [], []
        for s in svals:
            eta, leading = temme_gamma_eta(s, 2.0 * s, "Q")
            errs.append(abs(regularized_gamma_q(s, 2.0 * s) - leading))
            etas.append(eta)
        errs = np.array(errs)
        assert np.all(errs > 0)
        corrected = np.log(errs) + svals * np.array(etas) ** 2 / 2
        slope = np.polyfit(np.log(svals), corrected, 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.15)

    def test_leading_term_tracks_oracle_lower(self):
        svals = np.array([50, 100, 200, 400, 800], dtype=float)
        errs, etas = [], []
        for s in svals:
            eta, leading = temme_gamma_eta(s, 0.5 * s, "P")
            errs.append(abs(regularized_gamma_p(s, 0.5 * s) - leading))
            etas.append(eta)
        errs = np.array(errs)
        corrected = np.log(errs) + svals * np.array(etas) ** 2 / 2
        slope = np.polyfit(np.log(svals), corrected, 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.15)

    def test_branch_domains(self):
        with pytest.raises(InvalidArgumentError):
            temme_gamma_eta(10.0, 5.0, "Q")
        with pytest.raises(InvalidArgumentError):
            temme_gamma_eta(5.0, 10.0, "P")


class TestTemmeBeta:
    def test_sign_change_point(self):
        eta, leading = temme_beta_eta(20.0, 10.0, 20.0 / 30.0)
        assert eta == 0.0
        assert leading == pytest.approx(0.5, abs=1e-14)

    def test_frozen_value(self):
        eta, _ = temme_beta_eta(20.0, 10.0, 0.8)
        assert eta == pytest.approx(0.3121778448022659, abs=1e-13)

    def test_sign_rule(self):
        eta_lo, _ = temme_beta_eta(20.0, 10.0, 0.5)
        eta_hi, _ = temme_beta_eta(20.0, 10.0, 0.9)
        assert eta_lo < 0 < eta_hi

    def test_leading_term_tracks_incomplete_beta(self):
        # Proportional family d1 = 0.6 m, d2 = 0.4 m at fixed beta.
        ms = np.array([50, 100, 200, 400, 800], dtype=float)
        beta = 0.45
        errs, etas = [], []
        for m in ms:
            d1, d2 = 0.6 * m, 0.4 * m
            eta, leading = temme_beta_eta(d1, d2, beta)
            errs.append(abs(regularized_beta(d1, d2, beta) - leading))
            etas.append(eta)
        errs = np.array(errs)
        corrected = np.log(errs) + ms * np.array(etas) ** 2 / 2
        slope = np.polyfit(np.log(ms), corrected, 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.15)


class TestRates:
    def test_chi2_rate_zero_limit(self):
        assert chi2_rate(1e-9, 1.0, "upper") == pytest.approx(0.0, abs=1e-12)

    def test_chi2_rate_composition_identity(self):
        # nu solving nu - ln(1+nu) = 1 gives rate exactly -1/2 at gamma = 1.
        rho = bisect(shannon_entropy, 0.5, 1e-9, 0.5)
        nu = tail_iu(TailInputs(1.0, rho, 1.0)).value
        assert chi2_rate(nu, 1.0, "upper") == pytest.approx(-0.5, abs=1e-10)

    def test_chi2_rate_finite_n_upper(self):
        n = l = 400
        nu = 1.0
        prob = regularized_gamma_q(l / 2.0, l * (1 + nu) / 2.0)
        empirical = math.log(prob) / n
        assert abs(empirical - chi2_rate(nu, 1.0, "upper")) <= 0.05

    def test_chi2_rate_finite_n_lower(self):
        n = l = 400
        nu = 0.5
        prob = regularized_gamma_p(l / 2.0, l * (1 - nu) / 2.0)
        empirical = math.log(prob) / n
        assert abs(empirical - chi2_rate(nu, 1.0, "lower")) <= 0.05

    def test_f_rate_boundary_zero(self):
        rho = 0.05
        f = rho / (1 - rho) * (1 + 1e-12)
        assert f_rate(f, rho) == pytest.approx(0.0, abs=1e-10)

    def test_f_rate_direct_value(self):
        expected = 0.5 * (math.log(2) - shannon_entropy(0.25))
        assert f_rate(1.0, 0.25) == pytest.approx(expected, abs=1e-14)
        assert f_rate(1.0, 0.25) == pytest.approx(0.06540601797056848, abs=1e-12)

    def test_f_rate_finite_n(self):
        n, k = 400, 100
        rho = k / n
        f = 1.0
        # P(X >= f) for X ~ (k/(n-k+1)) F(k, n-k+1), via the exact F CDF.
        prob = 1.0 - f_cdf(f * (n - k + 1) / k, k, n - k + 1)
        empirical = -math.log(prob) / n
        assert abs(empirical - f_rate(f, rho)) <= 0.05

    def test_f_rate_domain(self):
        with pytest.raises(InvalidArgumentError):
            f_rate(0.2, 0.25)


class TestBinomEntropyLimit:
    def test_simple_value(self):
        assert binom_entropy_limit(1.0, 0.5) == pytest.approx(math.log(2), abs=1e-14)

    def test_finite_n_log_binomial(self):
        n, N, k = 200, 400, 50
        exact = (math.lgamma(N + 1) - math.lgamma(k + 1) - math.lgamma(N - k + 1)) / n
        assert abs(exact - binom_entropy_limit(0.5, 0.25)) <= 0.02

    def test_vanishes_at_small_rho(self):
        assert binom_entropy_limit(0.5, 1e-9) <= 1e-7


def test_root_result_value_inside_bracket():
    for res in (
        tail_iu(TailInputs(0.5, 0.25, 0.75)),
        tail_il(TailInputs(0.5, 0.25, 0.75)),
        tail_if(0.5, 0.25),
    ):
        assert isinstance(res, RootResult)
        lo, hi = res.bracket
        assert lo < res.value < hi
