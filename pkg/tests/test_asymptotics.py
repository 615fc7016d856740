import math
from fractions import Fraction

import pytest

from cpmoments import asymptotics as asym
from cpmoments import moments, weights
from cpmoments.errors import DomainError, SaddleError, TruncatedModelError

UNIT = weights.unit()
GAUSS = weights.gaussian_centered(1)
GAMMA = weights.gamma(2, Fraction(1, 2))
BERN = weights.bernoulli_centered()
EXP = weights.exponential()
LOGF = weights.log_factorial()

ALL = [UNIT, GAUSS, GAMMA, BERN, EXP, LOGF]

OMEGA = 0.5671432904097838  # solution of u e^u = 1


def fixed_point_unit_tilt(chi, iterations=200):
    # u <- ln(1 / (chi u)) converges for the unit model when 1/chi > e^-1
    u = 0.5
    for _ in range(iterations):
        u = 0.5 * (u + math.log(1.0 / (chi * u)))
    return u


class TestSolveSaddle:
    def test_unit_matches_fixed_point(self):
        sol = asym.solve_saddle(UNIT, 1.0)
        assert sol.u == pytest.approx(OMEGA, abs=1e-13)
        assert sol.u == pytest.approx(fixed_point_unit_tilt(1.0), abs=1e-10)

    def test_gamma11_closed_form(self):
        for chi in (0.3, 1.0, 4.0):
            sol = asym.solve_saddle(weights.gamma(1, 1), chi)
            closed = (2.0 + chi - math.sqrt(chi * (4.0 + chi))) / 2.0
            assert sol.u == pytest.approx(closed, rel=1e-12)

    def test_residual_bound_over_grid(self):
        for model in ALL:
            for exp10 in range(-3, 7):
                chi = 10.0**exp10
                sol = asym.solve_saddle(model, chi)
                assert sol.residual <= 1e-12 * max(1.0, 1.0 / chi), (model.name, chi)
                assert 0.0 < sol.u < model.radius

    def test_large_chi_tilt_scales_like_inverse_first_moment(self):
        chi = 1e6
        for model in (UNIT, GAMMA, EXP, LOGF):
            v1 = float(model.moment(1))
            sol = asym.solve_saddle(model, chi)
            assert sol.u == pytest.approx(1.0 / (chi * v1), rel=1e-3), model.name

    def test_monotone_along_trace(self):
        for model in ALL:
            sol = asym.solve_saddle(model, 0.7)
            seen = sorted(set(sol.trace))
            gs = [g for _, g in seen if math.isfinite(g)]
            assert all(a < b for a, b in zip(gs, gs[1:])), model.name

    def test_rejects_bad_chi(self):
        with pytest.raises(DomainError):
            asym.solve_saddle(UNIT, 0.0)

    def test_unreachable_target_for_truncated_model(self):
        # finite declared radius makes u H'(u) bounded
        model = weights.custom_model([1, 1, 1], radius=1.0)
        with pytest.raises(SaddleError):
            asym.solve_saddle(model, 0.01)


class TestRateFunction:
    def test_unit_alternative_expression(self):
        # (H-1)/(uH') - 1 + ln H' with H = e^u collapses to u - 1 + 1/u - 1/(u e^u)
        for chi in (0.5, 1.0, 2.0):
            rv = asym.rate_function(UNIT, chi)
            u = rv.saddle.u
            alt = u - 1.0 + 1.0 / u - 1.0 / (u * math.exp(u))
            assert rv.psi == pytest.approx(alt, abs=1e-12)

    def test_large_chi_limit_is_log_first_moment(self):
        for model in (UNIT, GAMMA, EXP, LOGF):
            rv = asym.rate_function(model, 1e6)
            assert rv.psi == pytest.approx(math.log(float(model.moment(1))), abs=1e-4)

    def test_prefactor_in_unit_interval(self):
        for model in ALL:
            for chi in (1e-3, 0.1, 1.0, 10.0, 1e3, 1e6):
                rv = asym.rate_function(model, chi)
                assert 0.0 < rv.prefactor <= 1.0

    def test_prefactor_limits_at_large_chi(self):
        # -> 1 when V_1 > 0; -> 1/sqrt(2) for centered (even-only) sequences
        for model in (UNIT, GAMMA, EXP, LOGF):
            assert asym.rate_function(model, 1e6).prefactor == pytest.approx(1.0, abs=1e-3)
        for model in (GAUSS, BERN):
            assert asym.rate_function(model, 1e6).prefactor == pytest.approx(
                1.0 / math.sqrt(2.0), abs=1e-3
            )

    def test_rejects_truncated_models(self):
        with pytest.raises(TruncatedModelError):
            asym.rate_function(weights.custom_model([1, 1, 2, 6]), 1.0)

    def test_gamma_exponent_equals_closed_form_at_matched_tilt(self):
        # (H-1)/(uH') for gamma weights collapses to (1-tu)(1-(1-tu)^m)/(m t u)
        m, theta = 2.0, 0.5
        for chi in (0.4, 1.3, 5.0):
            rv = asym.rate_function(GAMMA, chi)
            u = rv.saddle.u
            tu = 1.0 - theta * u
            closed = tu * (1.0 - tu**m) / (m * theta * u)
            generic = (rv.saddle.H_u - 1.0) / (u * rv.saddle.H1_u)
            assert generic == pytest.approx(closed, abs=1e-10)


class TestRateConvergence:
    def test_normalized_log_moments_approach_psi(self):
        ladders = {False: [25, 50, 100, 200], True: [26, 50, 100, 200]}
        for model in (UNIT, GAMMA, EXP, LOGF, GAUSS, BERN):
            for chi in (0.5, 1.0, 2.0):
                rv = asym.rate_function(model, chi)
                gaps = []
                for k in ladders[model.parity_even_only]:
                    x = chi * k
                    lg = moments.log_moment(model, k, x)
                    gaps.append(abs(lg / k - math.log(x) - rv.psi))
                assert all(a > b for a, b in zip(gaps, gaps[1:])), (model.name, chi, gaps)
                assert gaps[-1] < 0.05


class TestRefinedPrediction:
    def test_unit_and_gamma11_within_five_percent_at_200(self):
        for model in (UNIT, weights.gamma(1, 1)):
            exact = moments.log_moment(model, 200, 200.0)
            pred = asym.refined_prediction(model, 200, 1.0)
            assert abs(math.expm1(exact - pred)) < 0.05, model.name

    def test_bernoulli_within_ten_percent_at_200(self):
        exact = moments.log_moment(BERN, 200, 200.0)
        pred = asym.refined_prediction(BERN, 200, 1.0)
        assert abs(math.expm1(exact - pred)) < 0.10

    def test_log_prediction_normalizes_to_rate(self):
        chi = 1.5
        rv = asym.rate_function(EXP, chi)
        for k in (100, 400):
            pred = asym.refined_prediction(EXP, k, chi)
            assert pred / k - math.log(chi * k) == pytest.approx(rv.psi, abs=0.01)

    def test_parity_rejects_odd_orders(self):
        with pytest.raises(DomainError):
            asym.refined_prediction(BERN, 101, 1.0)


class TestRegimeB:
    def test_exponential_large_intensity(self):
        k = 20
        for x in (1e2 * k, 1e3 * k, 1e4 * k):
            exact = moments.log_moment(EXP, k, x)
            pred = asym.regime_b_prediction(EXP, k, x)
            gap = (exact - pred) / k
            assert abs(math.expm1(gap)) < 0.01

    def test_gap_shrinks_with_intensity(self):
        k = 20
        gaps = []
        for x in (1e2 * k, 1e3 * k, 1e4 * k):
            exact = moments.log_moment(EXP, k, x)
            gaps.append(abs(exact - asym.regime_b_prediction(EXP, k, x)) / k)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_centered_formula_matches_paired_shape(self):
        # (k/2) ln(x k V_2 / e) coincides with the per-pair product form
        for order, x in ((10, 500.0), (40, 4000.0)):
            pred = asym.regime_b_prediction(GAUSS, order, x)
            half = order // 2
            pair_form = half * math.log(order * x * 1.0 / math.e)
            assert pred == pytest.approx(pair_form, rel=1e-12)

    def test_hat_model_uses_centered_second_moment(self):
        hat = weights.hat_transform(EXP)
        assert hat.moment(1) == 0 and hat.moment(2) == 1
        pred = asym.regime_b_prediction(hat, 12, 900.0)
        assert pred == pytest.approx(0.5 * 12 * math.log(900.0 * 12 / math.e), rel=1e-12)

    def test_centered_branch_tracks_exact_moments(self):
        k = 20
        for x in (2e3 * k, 2e4 * k):
            exact = moments.log_moment(BERN, k, x)
            pred = asym.regime_b_prediction(BERN, k, x)
            assert abs(math.expm1((exact - pred) / k)) < 0.02

    def test_degenerate_inputs_rejected(self):
        with pytest.raises(DomainError):
            asym.regime_b_prediction(weights.custom_model([1, 0, 0]), 4, 10.0)


class TestSpecialCaseAgreement:
    def test_closed_forms_match_generic_saddle(self):
        cases = [
            ("gamma", GAMMA, 200, 200.0, {"m": 2, "theta": 0.5}),
            ("gamma", weights.gamma(1, 1), 150, 300.0, {"m": 1, "theta": 1}),
            ("bernoulli", BERN, 200, 200.0, {}),
            ("exponential", EXP, 200, 200.0, {}),
            ("exponential", EXP, 300, 120.0, {}),
            ("logfact", LOGF, 200, 500.0, {}),
        ]
        for case, model, k, x, params in cases:
            generic = asym.refined_prediction(model, k, x / k)
            special = asym.special_case_prediction(case, k, x, **params)
            assert abs(special - generic) <= 1e-8, (case, k, x)

    def test_gaussian_closed_form_prefactor_discrepancy(self):
        # The classical normal-weight prefactor carries an extra sqrt(x)
        # relative to the generic one; the k-th power part agrees.  Document
        # the exact offset so any transcription change is caught.
        for k, x in ((200, 200.0), (400, 100.0)):
            generic = asym.refined_prediction(GAUSS, k, x / k)
            special = asym.gaussian_moment_prediction(k, x, 1.0)
            assert special - generic == pytest.approx(0.5 * math.log(x), abs=1e-8)

    def test_gaussian_beta_solves_lambert_equation(self):
        # x = khalf means beta e^beta = 1, same tilt as the unit model at chi 1
        beta = asym.solve_saddle(UNIT, 1.0).u
        assert beta == pytest.approx(OMEGA, abs=1e-12)

    def test_exponential_sum_prediction_tracks_exact(self):
        k, x = 300, 300.0
        s_exact = moments.exp_identity_sum(k, Fraction(300))
        log_exact = math.log(s_exact.numerator) - math.log(s_exact.denominator)
        pred = asym.exponential_sum_prediction(k, x)
        assert abs(math.expm1(log_exact - pred)) < 0.02

    def test_logfact_sum_prediction_tracks_exact(self):
        k, x = 500, 500.0
        t_exact = moments.factorial_identity_rising(k, Fraction(500))
        log_exact = math.log(t_exact.numerator) - math.log(t_exact.denominator)
        pred = asym.logfact_sum_prediction(k, x)
        assert abs(math.expm1(log_exact - pred)) < 0.01

    def test_unknown_case_rejected(self):
        with pytest.raises(DomainError):
            asym.special_case_prediction("uniform", 10, 10.0)


class TestBernoulliSmallIntensity:
    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_leading_shape_at_unit_intensity(self):
        # (1/k) ln M_k(1) - ln( k / (e ln k) ) shrinks as the order grows
        gaps = []
        for order in (40, 80, 160):
            exact = moments.log_moment(BERN, order, 1.0)
            pred = asym.bernoulli_small_x_prediction(order, 1.0).log_value
            gaps.append(abs(exact - pred) / order)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_consistent_with_full_saddle_at_moderate_ratio(self):
        order = 1000
        x = order / 4.0
        exact_style = asym.refined_prediction(BERN, order, x / order)
        small = asym.bernoulli_small_x_prediction(order, x).log_value
        # leading order only; the log-ratio formula is rough at this ratio
        assert abs(exact_style - small) / abs(exact_style) < 0.10

    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_tilt_expansion_tracks_solver(self):
        order, x = 4000, 1.0
        sol = asym.solve_saddle(BERN, x / order)
        approx_u = asym.bernoulli_small_x_prediction(order, x).tilt_expansion
        assert abs(sol.u - approx_u) / sol.u < 0.25

    def test_wrong_regime_rejected(self):
        with pytest.raises(DomainError):
            asym.bernoulli_small_x_prediction(10, 20.0)
        with pytest.raises(DomainError):
            asym.bernoulli_small_x_prediction(10, 0.0)

    def test_warns_below_admissible_scale(self):
        with pytest.warns(UserWarning):
            asym.bernoulli_small_x_prediction(40, 1e-12)
