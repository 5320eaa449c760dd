"""Statistics harness: tail fits, moment growth, transport estimators."""

import numpy as np
import pytest

from bbmlab.mcstats import (
    ASpec,
    InsufficientTail,
    MassOutOfRange,
    concentration_selfcheck,
    cov_identity,
    density_moment_probe,
    fit_tail_curve,
    hyper_growth,
    lp_growth,
    tail_fn,
    transport_growth,
)
from bbmlab.sampling import GaussianSpec, SeedPlan, calibrate_r
from bbmlab.trilinear import TOTAL
from bbmlab.wick import wick_variance

PLAN = SeedPlan(31415)


@pytest.fixture(scope="module")
def radius():
    return calibrate_r(GaussianSpec(s=1.5, k_sample=256), 0.5, 500, SeedPlan(999))


class TestTailFitter:
    def test_recovers_known_exponents(self):
        rng = np.random.default_rng(0)
        n = 200_000
        ones = np.ones(n, bool)
        exp_fit = fit_tail_curve(rng.exponential(1.0, n), ones)
        assert exp_fit.alpha_fit == pytest.approx(1.0, abs=0.12)
        weib_fit = fit_tail_curve(rng.weibull(2.0 / 3.0, n), ones)
        assert weib_fit.alpha_fit == pytest.approx(2.0 / 3.0, abs=0.1)
        weib3 = fit_tail_curve(rng.weibull(3.0, n), ones)
        assert weib3.alpha_fit == pytest.approx(3.0, abs=0.45)

    def test_survival_monotone_and_anchored(self):
        rng = np.random.default_rng(1)
        vals = rng.exponential(1.0, 50_000)
        acc = rng.random(50_000) < 0.5
        curve = fit_tail_curve(vals, acc)
        assert np.all(np.diff(curve.survival) <= 0)
        # survival at tiny thresholds approaches the acceptance mass
        assert curve.survival[0] <= curve.acceptance_mass + 1e-12
        assert curve.acceptance_mass == pytest.approx(0.5, abs=0.02)

    def test_confidence_width_scaling(self):
        rng = np.random.default_rng(2)
        ones_a = np.ones(30_000, bool)
        ones_b = np.ones(120_000, bool)
        a = fit_tail_curve(rng.exponential(1.0, 30_000), ones_a)
        b = fit_tail_curve(rng.exponential(1.0, 120_000), ones_b)
        # quadrupling the samples halves the binomial error at a fixed
        # survival level
        s_target = 0.02
        ia = np.argmin(np.abs(a.survival - s_target))
        ib = np.argmin(np.abs(b.survival - s_target))
        assert b.stderr[ib] == pytest.approx(a.stderr[ia] / 2.0, rel=0.35)

    def test_insufficient_tail(self):
        with pytest.raises(InsufficientTail):
            fit_tail_curve(np.ones(200), np.ones(200, bool))

    def test_survival_monotone_in_radius(self):
        # a larger energy ball accepts a superset of draws, so its survival
        # curve dominates pointwise on any shared threshold grid
        from bbmlab.fields import energy_batch
        from bbmlab.sampling import GaussianSpec, draw_coeffs_batch
        from bbmlab.trilinear import f_total_derivative_batch
        from bbmlab.fields import Grid

        spec = GaussianSpec(s=1.5, k_sample=16)
        coeffs = draw_coeffs_batch(spec, PLAN, 0, 20_000)
        e = energy_batch(coeffs)
        v = np.abs(f_total_derivative_batch(coeffs, 16, 1.5, Grid.for_extent(16)))
        r_small, r_large = np.quantile(e, 0.35), np.quantile(e, 0.7)
        grid = np.geomspace(np.quantile(v, 0.5), np.quantile(v, 0.999), 12)
        s_small = [(v[e <= r_small] >= t).sum() for t in grid]
        s_large = [(v[e <= r_large] >= t).sum() for t in grid]
        assert all(b >= a for a, b in zip(s_small, s_large))


class TestMomentGrowth:
    def test_lp_monotone_in_p(self, radius):
        out = lp_growth(16, 1.5, radius, (2, 4, 6, 8), 30_000, PLAN, k_sample=64)
        norms = [row["lp_norm"] for row in out["table"]]
        assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_p2_matches_contraction_sum_unrestricted(self):
        # with no energy restriction the squared L2 norm of the full
        # functional is the exact contraction value
        out = lp_growth(12, 1.5, np.inf, (2,), 60_000, PLAN, k_sample=12)
        mc_sq = out["table"][0]["lp_norm"] ** 2
        exact = wick_variance(TOTAL, TOTAL, 1.5, 12, 0).total
        assert mc_sq == pytest.approx(exact, rel=0.05)

    def test_p_grid_validated(self, radius):
        with pytest.raises(ValueError):
            lp_growth(8, 1.5, radius, (2, 14), 1000, PLAN)

    def test_unstable_top_moment_rejected(self):
        from bbmlab.mcstats import MomentUnstable

        rng = np.random.default_rng(3)
        heavy = rng.pareto(0.4, 20_000) + 1.0
        with pytest.raises(MomentUnstable):
            lp_growth(
                8, 1.5, np.inf, (2, 12), 20_000, PLAN,
                values=heavy, accepted=np.ones(20_000, bool),
            )

    def test_hyper_p2_matches_contraction_sum(self):
        out = hyper_growth(16, 8, 1.5, (2, 4), 60_000, PLAN)
        exact = wick_variance(TOTAL, TOTAL, 1.5, 16, 8).total
        assert abs(out["l2"].mean - exact) <= 5 * out["l2"].stderr


class TestChangeOfVariables:
    def test_zero_time_same_estimator(self, radius):
        a_spec = ASpec(kind="hs_ball", sigma=0.5, radius=1.0)
        out = cov_identity(8, 1.5, radius, 0.0, a_spec, 5000, PLAN)
        assert out["lhs"].mean == pytest.approx(out["rhs"].mean, abs=1e-12)

    def test_full_space_masses_agree(self, radius):
        full = ASpec(kind="hs_ball", sigma=0.5, radius=1e9)
        out = cov_identity(16, 1.5, radius, 0.5, full, 20_000, PLAN)
        assert out["z"] <= 3.0
        # the transported total mass is the acceptance mass
        assert out["lhs"].mean == pytest.approx(0.5, abs=0.02)

    def test_ball_and_box_agree_through_the_identity(self, radius):
        for a_spec in (
            ASpec(kind="hs_ball", sigma=0.5, radius=1.0),
            ASpec(kind="coeff_box", mode=1, re_lo=0.0, re_hi=0.5),
        ):
            out = cov_identity(8, 1.5, radius, 0.25, a_spec, 30_000, PLAN)
            assert out["z"] <= 3.0

    def test_flow_regularity_guard(self, radius):
        with pytest.raises(ValueError):
            cov_identity(8, 0.9, radius, 0.1, ASpec(kind="hs_ball"), 100, PLAN)

    def test_flow_tolerance_guard(self, radius):
        from bbmlab.mcstats import FlowToleranceExceeded

        with pytest.raises(FlowToleranceExceeded):
            cov_identity(
                16, 1.5, radius, 1.0, ASpec(kind="hs_ball", radius=1.0),
                2000, PLAN, dt=0.25,
            )


class TestTransport:
    def test_zero_time_is_base_mass(self, radius):
        a_spec = ASpec(kind="hs_ball", sigma=0.5, radius=0.55)
        out = transport_growth(16, 1.5, radius, a_spec, [0.0, 0.25], 20_000, PLAN)
        rows = {row["t"]: row["mass"] for row in out["rows"]}
        assert rows[0.0] == out["base_mass"].mean

    def test_masses_bounded_by_total(self, radius):
        a_spec = ASpec(kind="hs_ball", sigma=0.5, radius=0.55)
        out = transport_growth(16, 1.5, radius, a_spec, [0.5, 1.0], 20_000, PLAN)
        assert all(row["mass"] <= out["total_mass"] + 1e-12 for row in out["rows"])
        assert out["envelope_exists"] and out["envelope_c"] >= 1.0

    def test_mass_range_guard(self, radius):
        huge = ASpec(kind="hs_ball", sigma=0.5, radius=100.0)
        with pytest.raises(MassOutOfRange):
            transport_growth(16, 1.5, radius, huge, [0.5], 5000, PLAN)

    def test_density_probe_reports_theory_exponent(self, radius):
        out = density_moment_probe(
            8, 1.5, radius, 0.25, (1, 2), 4000, PLAN, envelope_c=1.1
        )
        assert out["p_theory"] > 1.0
        assert all(row["moment"] > 0 for row in out["table"])


class TestDeterminism:
    def test_tail_curve_reproducible(self, radius):
        a = tail_fn(16, 1.5, radius, 20_000, PLAN, k_sample=64)
        b = tail_fn(16, 1.5, radius, 20_000, PLAN, k_sample=64)
        np.testing.assert_array_equal(a.survival, b.survival)
        assert a.alpha_fit == b.alpha_fit

    def test_battery_equals_individual_statistics(self, radius):
        from bbmlab.mcstats import tail_battery, tail_dx_inf, tail_hs

        fused = tail_battery(16, 1.5, radius, 20_000, PLAN, k_sample=64)
        single = tail_fn(16, 1.5, radius, 20_000, PLAN, k_sample=64)
        np.testing.assert_array_equal(fused["fn"].survival, single.survival)
        assert fused["fn"].alpha_fit == single.alpha_fit
        dx = tail_dx_inf(16, 1.5, radius, 1.0, 20_000, PLAN, k_sample=64)
        assert fused["dx"].alpha_fit == dx.alpha_fit
        hs = tail_hs(16, 1.5, radius, 1.0, 20_000, PLAN, k_sample=64)
        assert fused["hs"].alpha_fit == hs.alpha_fit


class TestConcentrationSelfcheck:
    def test_known_aggregates(self):
        out = concentration_selfcheck(16, 1_000_000, PLAN)
        # a single absolute Gaussian: the fitted exponent approaches the
        # square law from below at this sampling depth
        assert 1.4 <= out["abs_gauss_alpha"] <= 2.2
        # sums of absolute values stay square-exponential (or steeper, near
        # the mean) below the dimension scale
        assert out["hoeffding_alpha"] >= 1.8
        # the centered quadratic aggregate crosses over at the dimension
        # scale: the square envelope fitted below it overshoots beyond it,
        # the two-regime envelope keeps dominating
        assert out["quad_envelope_overshoot"] >= 1.5
        assert out["two_regime_overshoot"] <= 1.3
