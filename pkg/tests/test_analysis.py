"""Exponents, ODE branches, weight functions, sign constants, thresholds.

Frozen reference values were computed with a 60-digit mpmath evaluation of
the same closed-form expressions before the implementation was written.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from thermoflux import (PMBranchParams, find_thresholds, gamma_exponents,
                        gtilde_ideal_signs, gtilde_pm, psi_branches,
                        weight_function)
from thermoflux.analysis import (adaptive_quadrature, exact_gamma_residual,
                                 psi_prime_branches, quadratic_residual)
from thermoflux.errors import (ConfigError, DomainError,
                               ThresholdNotFoundError)

P111 = PMBranchParams(a=1.0, kappa2=1.0, d=1.0)

# Gt_plus zero for (a, kappa2, D) = (1, 1, 1), 30-digit bisection
RHO_STAR = 1.1692837079926507
# High-precision Gt values at the standard scan endpoints, same parameters
GT_PLUS_SMALL = -39999.99959995      # rho = 1e-4
GT_PLUS_LARGE = 9.998000399870062e-5  # rho = 1e+4
GT_MINUS_SMALL = 0.9999999900009994
GT_MINUS_LARGE = 1000400040001.0


class TestGammaExponents:
    def test_frozen_values_beta2(self):
        e = gamma_exponents(1.0, 1.0, 1.0)  # beta = 2, Dt = 1
        assert e.gamma_plus == pytest.approx((-3 + math.sqrt(5)) / 2, abs=1e-14)
        assert e.gamma_minus == pytest.approx((-3 - math.sqrt(5)) / 2, abs=1e-14)
        assert e.disc == pytest.approx(5.0, abs=1e-14)
        assert e.c_plus == pytest.approx(-0.2360679774997896, abs=1e-14)
        assert e.c_minus == pytest.approx(4.23606797749979, abs=1e-13)

    @settings(max_examples=200, deadline=None)
    @given(beta=st.floats(1.001, 10.0), kappa2=st.floats(0.1, 10.0),
           d_tilde=st.floats(1e-6, 10.0))
    def test_quadratic_roots_and_claims(self, beta, kappa2, d_tilde):
        e = gamma_exponents((beta - 1.0) * kappa2, kappa2, d_tilde)
        for g in (e.gamma_plus, e.gamma_minus):
            assert abs(exact_gamma_residual(g, e.beta, e.d_tilde)) < 1e-13
        assert e.gamma_plus * e.gamma_minus == pytest.approx(e.d_tilde, abs=1e-12, rel=1e-12)
        assert -1 < e.gamma_plus < 0
        assert e.gamma_minus < -1
        ident = (e.d_tilde + e.beta - 2.0) ** 2 + 4.0 * (e.beta - 1.0)
        assert e.disc == pytest.approx(ident, rel=1e-12)
        assert e.disc >= 4.0 * (e.beta - 1.0) - 1e-12

    def test_rejects_nonpositive_input(self):
        with pytest.raises(ConfigError):
            gamma_exponents(1.0, 1.0, 0.0)
        with pytest.raises(ConfigError):
            gamma_exponents(-1.0, 1.0, 1.0)


class TestIdealGasSigns:
    def test_fixture_signs(self):
        assert gtilde_ideal_signs(gamma_exponents(1.0, 1.0, 1.0)) == (-1, 1)

    def test_thousand_random_parameter_sets(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            beta = rng.uniform(1.0 + 1e-9, 10.0)
            kappa2 = rng.uniform(0.1, 10.0)
            d_tilde = rng.uniform(1e-9, 10.0)
            e = gamma_exponents((beta - 1.0) * kappa2, kappa2, d_tilde)
            assert gtilde_ideal_signs(e) == (-1, 1)

    def test_small_d_tilde_limit_keeps_sign(self):
        # gamma_plus -> 0^- and c_plus -> 0^- like -Dt^2/4 at beta = 2
        e = gamma_exponents(1.0, 1.0, 1e-8)
        assert -1e-8 < e.gamma_plus < 0
        assert e.c_plus < 0
        assert e.c_plus == pytest.approx(-2.5e-17, rel=1e-4)


class TestPsiBranches:
    def test_hand_value_at_unity(self):
        pp, pm, delta = psi_branches(1.0, P111)
        assert delta == pytest.approx(8.0, rel=1e-15)
        assert pp == pytest.approx(-1.0 + math.sqrt(2.0), rel=1e-14)
        assert pm == pytest.approx(-1.0 - math.sqrt(2.0), rel=1e-14)

    def test_small_rho_discriminant_tends_to_d_squared(self):
        for d in (0.5, 1.0, 3.0):
            params = PMBranchParams(a=1.0, kappa2=1.0, d=d)
            _, _, delta = psi_branches(1e-9, params)
            assert delta == pytest.approx(d * d, rel=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0.1, 5.0), kappa2=st.floats(0.1, 10.0),
           d=st.floats(0.01, 10.0), log_rho=st.floats(-3, 3))
    def test_residual_ordering_positivity(self, a, kappa2, d, log_rho):
        params = PMBranchParams(a=a, kappa2=kappa2, d=d)
        rho = 10.0 ** log_rho
        pp, pm, delta = psi_branches(rho, params)
        assert delta > 0
        assert pp > pm
        assert pm < 0  # every weight solution is monotone decreasing somewhere
        assert quadratic_residual(rho, pp, params) < 1e-10
        assert quadratic_residual(rho, pm, params) < 1e-10

    def test_vectorized_matches_scalar(self):
        rhos = np.geomspace(1e-4, 1e4, 17)
        pp_vec, pm_vec, _ = psi_branches(rhos, P111)
        for i, r in enumerate(rhos):
            pp, pm, _ = psi_branches(float(r), P111)
            assert pp_vec[i] == pytest.approx(pp, rel=1e-14)
            assert pm_vec[i] == pytest.approx(pm, rel=1e-14)

    def test_rejects_nonpositive_rho(self):
        with pytest.raises(DomainError):
            psi_branches(0.0, P111)


class TestPsiPrime:
    @pytest.mark.parametrize("rho", [0.3, 1.0, 3.0, 30.0])
    def test_matches_central_difference(self, rho):
        dpp, dpm = psi_prime_branches(rho, P111)
        eps = 1e-6 * rho
        pp1, pm1, _ = psi_branches(rho + eps, P111)
        pp0, pm0, _ = psi_branches(rho - eps, P111)
        assert dpp == pytest.approx((pp1 - pp0) / (2 * eps), abs=1e-6, rel=1e-6)
        assert dpm == pytest.approx((pm1 - pm0) / (2 * eps), abs=1e-6, rel=1e-6)


class TestWeightFunction:
    def test_anchor_value_exact(self):
        table = weight_function("plus", P111, 2.0, 3.0, [2.0])
        assert table.f[0] == 3.0

    def test_unsorted_duplicate_targets(self):
        table = weight_function("plus", P111, 1.0, 1.0, [3.0, 0.5, 3.0, 1.0])
        assert list(table.rho) == [0.5, 1.0, 3.0]
        assert table.f[list(table.rho).index(1.0)] == 1.0

    def test_minus_branch_strictly_decreasing(self):
        table = weight_function("minus", P111, 1.0, 1.0, np.geomspace(1e-4, 1e4, 81))
        assert np.all(np.diff(table.ln_f) < 0)

    @pytest.mark.parametrize("rho,want", [(1e-4, -1.0), (1e4, 1.0)])
    def test_plus_branch_loglog_slopes(self, rho, want):
        d = 0.02
        table = weight_function("plus", P111, 1.0, 1.0,
                                [rho * math.exp(-d), rho * math.exp(d)])
        slope = (table.ln_f[1] - table.ln_f[0]) / (2 * d)
        assert abs(slope - want) < 0.05

    def test_minus_branch_asymptotic_profiles(self):
        # ln f(rho) - ln f(2 rho) against the closed asymptotic forms:
        # the singularity grows like exp(D/(k2*(a+1)) * rho^(-a-1)) near zero
        # and the tail decays like exp(-rho^a / k2) (Psi- -> -a*rho^(a-1)/k2,
        # confirmed against a 50-digit evaluation of the branch formula)
        a, k2, d = P111.a, P111.kappa2, P111.d
        rho = 1e-3
        table = weight_function("minus", P111, 1.0, 1.0, [rho, 2 * rho])
        got = table.ln_f[0] - table.ln_f[1]
        want = d / (k2 * (a + 1)) * (rho ** (-a - 1) - (2 * rho) ** (-a - 1))
        assert got == pytest.approx(want, rel=1e-4)
        rho = 1e3
        table = weight_function("minus", P111, 1.0, 1.0, [rho, 2 * rho])
        got = table.ln_f[0] - table.ln_f[1]
        want = ((2 * rho) ** a - rho ** a) / k2
        assert got == pytest.approx(want, rel=2e-3)

    @pytest.mark.parametrize("branch", ["plus", "minus"])
    def test_agrees_with_independent_ode_integration(self, branch):
        # high-order adaptive ODE solve of (ln f)' in the log-density variable
        targets = np.geomspace(1e-4, 1e4, 9)
        table = weight_function(branch, P111, 1.0, 1.0, targets)
        idx = 0 if branch == "plus" else 1

        def rhs_lnf(s, _y):
            r = math.exp(s)
            return [psi_branches(r, P111)[idx] * r]

        for rho, ln_f in zip(table.rho, table.ln_f):
            sol = solve_ivp(rhs_lnf, (0.0, math.log(rho)), [0.0], method="DOP853",
                            rtol=1e-12, atol=1e-12)
            assert sol.success
            want = sol.y[0, -1]
            assert abs(ln_f - want) <= 1e-8 * max(1.0, abs(want))

    def test_plus_branch_interior_minimum(self):
        # Psi_plus changes sign where a^2 r^(2a+1) + k2*a*r^(a+1) = D;
        # for (1,1,1) that root is r^3 + r^2 = 1 -> 0.754877666246693
        lo, hi = 1e-2, 1e2
        for _ in range(80):
            mid = math.sqrt(lo * hi)
            if psi_branches(mid, P111)[0] < 0:
                lo = mid
            else:
                hi = mid
        assert math.sqrt(lo * hi) == pytest.approx(0.7548776662466928, rel=1e-9)

    def test_quadrature_helper_on_closed_form(self):
        val = adaptive_quadrature(lambda s: np.exp(s), 0.0, 1.0)
        assert val == pytest.approx(math.e - 1.0, rel=1e-12)

    @pytest.mark.parametrize("a,k2,d", [(1.0, 1.0, 1.0), (2.5, 0.7, 3.0), (0.5, 3.0, 0.2)])
    def test_branch_sum_has_closed_form(self, a, k2, d):
        # Vieta: Psi+ + Psi- = -(a r^(a-1)/k2 + (1-a)/r + D/(k2 r^(a+2))),
        # which integrates in closed form, so ln f+ + ln f- is known exactly
        params = PMBranchParams(a=a, kappa2=k2, d=d)
        targets = np.geomspace(1e-3, 1e3, 13)
        wp = weight_function("plus", params, 1.0, 1.0, targets)
        wm = weight_function("minus", params, 1.0, 1.0, targets)
        for rho, lp, lm in zip(wp.rho, wp.ln_f, wm.ln_f):
            want = (-(rho ** a - 1.0) / k2 - (1 - a) * math.log(rho)
                    + d / (k2 * (a + 1)) * (rho ** (-a - 1) - 1.0))
            assert lp + lm == pytest.approx(want, rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("rho", [1e-3, 0.3, 1.0, 40.0, 1e3])
    def test_branch_pair_satisfies_vieta(self, rho):
        params = PMBranchParams(a=1.7, kappa2=2.2, d=0.9)
        a, k2, d = params.a, params.kappa2, params.d
        pp, pm, _ = psi_branches(rho, params)
        A = k2 * rho ** (a + 3)
        B = a * rho ** (2 * a + 2) + k2 * (1 - a) * rho ** (a + 2) + d * rho
        C = d - k2 * a * rho ** (a + 1) - a * a * rho ** (2 * a + 1)
        assert pp + pm == pytest.approx(-B / A, rel=1e-13)
        assert pp * pm == pytest.approx(C / A, rel=1e-13, abs=1e-300)


def _gtilde_raw(rho, params, plus):
    """Independent reassembly of Gt from the pre-reduction coefficient rows."""
    a, k2, d = params.a, params.kappa2, params.d
    pp, pm, _ = psi_branches(rho, params)
    dpp, dpm = psi_prime_branches(rho, params)
    fp = pp if plus else pm
    fpp = fp * fp + (dpp if plus else dpm)
    f = 1.0
    row1 = a * a * (a + 1) * f * f * rho ** 2 / (fp * rho + f) ** 2 * (
        k2 * fp * rho ** a + a * f * rho ** (2 * a - 1) + (k2 + a * rho ** a) * f * rho ** (a - 1))
    row2 = -a * f * rho / (fp * rho + f) * (
        2 * k2 * (a + 1) * fp * rho ** (a + 1)
        + 3 * (k2 + a * rho ** a) * (a + 1) * f * rho ** a + a * a * f * rho ** (2 * a))
    row3 = a * ((k2 + a * rho ** a) * f * rho ** (a + 1) + d * f)
    f_over_theta = a * (k2 * rho ** a * (fp * rho + f) / f + a * rho ** (2 * a) + d / rho)
    l_bracket = (fpp * rho + 2 * fp) * f * f * rho ** 2 / (fp * rho + f) ** 2 - 2 * f * rho
    return row1 + row2 + row3 - f_over_theta * l_bracket


def _gtilde_decomposition_residual(rho, theta, params, plus, seed):
    """Check Gt against the raw second-derivative balance at a critical point.

    At a spatial extremum of f*rho*theta the gradients satisfy
    (f'rho + f)*theta*grad_rho = -f*rho*grad_theta.  For f on an ODE branch
    the time derivative of k2*f*rho*theta decomposes as Ft*L + Gt*|grad
    theta|^2 with L the raw Laplacian expansion of f*rho*theta.  This
    assembles both sides from the coefficient rows of the pre-reduction
    expansion for random (grad theta, lap rho, lap theta) data and returns
    the relative mismatch; Ft and Gt come from the production formulas.
    """
    rng = np.random.default_rng(seed)
    a, k2, d = params.a, params.kappa2, params.d
    pp, pm, _ = psi_branches(rho, params)
    dpp, dpm = psi_prime_branches(rho, params)
    f = 1.0
    fp = pp if plus else pm
    fpp = fp * fp + (dpp if plus else dpm)
    gt = rng.normal()          # one gradient component suffices in 1D
    gr = -f * rho * gt / ((fp * rho + f) * theta)  # critical-point relation
    lap_r, lap_t = rng.normal(), rng.normal()
    kap3 = a * d * theta       # conductivity law, d(kap3)/drho = 0
    dkap3_dtheta = a * d
    lhs = ((k2 * a * fp * rho ** (a + 2) * theta
            + (k2 * a + a * a * rho ** a) * f * rho ** (a + 1) * theta + kap3 * f) * lap_t
           + (k2 * a * (a + 1) * fp * rho ** (a + 1) * theta ** 2
              + (k2 * a + a * a * rho ** a) * (a + 1) * f * rho ** a * theta ** 2) * lap_r
           + (k2 * a * a * (a + 1) * fp * rho ** a * theta ** 2
              + a ** 3 * (a + 1) * f * rho ** (2 * a - 1) * theta ** 2
              + (k2 * a + a * a * rho ** a) * a * (a + 1) * f * rho ** (a - 1) * theta ** 2) * gr * gr
           + (2 * k2 * a * (a + 1) * fp * rho ** (a + 1) * theta
              + 3 * (k2 * a + a * a * rho ** a) * (a + 1) * f * rho ** a * theta
              + a ** 3 * f * rho ** (2 * a) * theta) * gt * gr
           + ((k2 * a + a * a * rho ** a) * f * rho ** (a + 1) + f * dkap3_dtheta) * gt * gt)
    l_raw = (theta * (fp * rho + f) * lap_r + f * rho * lap_t
             + 2 * (fp * rho + f) * gr * gt + theta * (fpp * rho + 2 * fp) * gr * gr)
    f_tilde = a * theta * (k2 * rho ** a * (fp * rho + f) / f + a * rho ** (2 * a) + d / rho)
    gt_val = gtilde_pm("plus" if plus else "minus", rho, params)
    rhs = f_tilde * l_raw + gt_val * gt * gt
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)


class TestGtilde:
    def test_frozen_endpoint_values(self):
        assert gtilde_pm("plus", 1e-4, P111) == pytest.approx(GT_PLUS_SMALL, rel=1e-6)
        assert gtilde_pm("plus", 1e4, P111) == pytest.approx(GT_PLUS_LARGE, rel=1e-6)
        assert gtilde_pm("minus", 1e-4, P111) == pytest.approx(GT_MINUS_SMALL, rel=1e-9)
        assert gtilde_pm("minus", 1e4, P111) == pytest.approx(GT_MINUS_LARGE, rel=1e-9)

    def test_minus_branch_small_rho_magnitude(self):
        # Gt_minus -> a*D*f as rho -> 0+, well within the 25% band
        val = gtilde_pm("minus", 1e-4, P111)
        assert val > 0
        assert abs(val - 1.0) < 0.25

    def test_minus_branch_large_rho_magnitude(self):
        # dominant term a^2 rho^(2a+1) f
        val = gtilde_pm("minus", 1e4, P111)
        assert val == pytest.approx(1e12, rel=0.01)

    @pytest.mark.parametrize("rho", [0.3, 1.0, 3.0])
    @pytest.mark.parametrize("plus", [True, False])
    def test_matches_raw_reassembly(self, rho, plus):
        got = gtilde_pm("plus" if plus else "minus", rho, P111)
        want = _gtilde_raw(rho, P111, plus)
        assert got == pytest.approx(want, rel=1e-8)

    @pytest.mark.parametrize("plus", [True, False])
    @pytest.mark.parametrize("rho,theta", [(0.4, 1.3), (1.0, 1.0), (5.0, 0.2)])
    def test_decomposes_raw_second_derivative_balance(self, plus, rho, theta):
        for seed in range(5):
            res = _gtilde_decomposition_residual(rho, theta, P111, plus, seed)
            assert res < 1e-10
        other = PMBranchParams(a=2.5, kappa2=0.7, d=3.0)
        for seed in range(5):
            assert _gtilde_decomposition_residual(rho, theta, other, plus, seed) < 1e-10

    def test_escalation_zone_sign_is_right(self):
        # float64 alone gets the wrong sign here; escalation must not
        params = PMBranchParams(a=2.0, kappa2=1.0, d=1.0)
        assert gtilde_pm("plus", 1e-6, params) < 0

    def test_rejects_bad_branch_and_rho(self):
        with pytest.raises(ConfigError):
            gtilde_pm("both", 1.0, P111)
        with pytest.raises(DomainError):
            gtilde_pm("plus", -1.0, P111)


class TestThresholds:
    def test_fixture_single_zero(self):
        thr = find_thresholds(P111)
        assert thr.rho_bar == pytest.approx(RHO_STAR, rel=1e-7)
        assert thr.rho_under == pytest.approx(RHO_STAR, rel=1e-7)
        assert thr.rho_bar == pytest.approx(thr.rho_under, rel=1e-7)
        assert thr.g_minus_positive

    def test_post_hoc_sign_evaluation(self):
        thr = find_thresholds(P111)
        assert gtilde_pm("plus", 2.0 * thr.rho_bar, P111) > 0
        assert gtilde_pm("plus", thr.rho_under / 2.0, P111) < 0

    def test_no_sign_change_raises_with_profile(self):
        with pytest.raises(ThresholdNotFoundError) as err:
            find_thresholds(P111, rho_min=10.0, rho_max=100.0, points=20)
        assert len(err.value.profile) == 20
        assert all(sign == 1 for _, sign in err.value.profile)
