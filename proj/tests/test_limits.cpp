#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qfridge/limits.hpp"

using namespace qfridge;

namespace {

Reservoirs ion(double wm, const SpectralDensity& IB) {
    return Reservoirs(Reservoir(Label::A, SpectralDensity::dirac(1e-6, wm), 0.0), Reservoir(Label::B, IB, 0.0));
}

const SpectralDensity kOhmic = SpectralDensity::ohmic(1e-3, 50.0);

}  // namespace

TEST(Limits, RatioLimitsInOccupation) {
    const SystemParams s(1.0, 1e-3);
    FloquetResponse r(s, DrivePlan::harmonic(1.0, 1e-3, 0.95), 4);
    auto res = ion(0.05, kOhmic);
    const auto sums = balance_sums(r, kOhmic, 0.05);
    EXPECT_NEAR(rp_nrh_ratio(r, res, INFINITY), sums.pump / sums.pair, 1e-15 * sums.pump / sums.pair);
    EXPECT_EQ(rp_nrh_ratio(r, res, 0.0), 0.0);
    const double n = steady_occupation(r, res);
    ASSERT_TRUE(std::isfinite(n));
    EXPECT_NEAR(rp_nrh_ratio(r, res, n), 1.0, 1e-8);
}

TEST(Limits, ExactMatchesLeadingOrderAtSmallDrive) {
    const SystemParams s(1.0, 1e-3);
    const double wm = 0.02, wd = 0.97;
    auto res = ion(wm, kOhmic);
    const double exact = steady_occupation(FloquetResponse(s, DrivePlan::harmonic(1, 1e-3, wd), 4), res);
    const double lo = occupation_leading_order(s, kOhmic, wm, wd);
    EXPECT_NEAR(exact, lo, 1e-2 * lo);
    const double pert = steady_occupation(
        FloquetResponse(s, DrivePlan::harmonic(1, 1e-3, wd), 4, CoefficientMode::Perturbative), res);
    EXPECT_NEAR(pert, lo, 1e-6 * lo);
}

TEST(Limits, LeadingOrderSidebandValue) {
    const SystemParams s(1.0, 1e-5);
    const double wm = 1e-3;
    EXPECT_NEAR(occupation_leading_order(s, kOhmic, wm, 1.0 - wm), 2.5e-5, 0.05 * 2.5e-5);
}

TEST(Limits, DetunedAboveCarrierIsInfeasible) {
    const SystemParams s(1.0, 1e-3);
    const double wm = 0.01;
    EXPECT_TRUE(std::isinf(steady_occupation(FloquetResponse(s, DrivePlan::harmonic(1, 1e-3, 1.0 + wm), 4),
                                             ion(wm, kOhmic))));
}

TEST(Limits, HalfFrequencyFallback) {
    const SystemParams s(1.0, 1e-3);
    const double wm = 0.5, wd = 0.5;
    auto IB = SpectralDensity::power_law(1.0, 1.0, 1.0, 50.0);
    EXPECT_THROW(occupation_leading_order(s, IB, wm, wd), OutOfRegimeError);
    EXPECT_DOUBLE_EQ(occupation_leading_order(s, IB, wm, wd, 1e-3), half_frequency_limit(s, IB, wm, 1e-3));
    EXPECT_NEAR(IB(wm) / IB(2 * wm), 0.5, 1e-15);
    const double n1 = half_frequency_limit(s, IB, wm, 1e-3), n2 = half_frequency_limit(s, IB, wm, 2e-3);
    EXPECT_NEAR(n2 / n1, 4.0, 1e-12);
    const SystemParams exact_half(2.0 * wm, 1e-3);
    const double closed = (1e-6 / (wm * wm)) * 0.5 * 1e-6 / (9.0 * std::pow(wm, 4));
    EXPECT_NEAR(half_frequency_limit(exact_half, IB, wm, 1e-3), closed, 1e-5 * closed);
}

TEST(Limits, HalfFrequencyEstimateWithinFactorTwoOfExact) {
    const SystemParams s(1.0, 1e-3);
    const double wm = 0.5;
    auto IB = SpectralDensity::power_law(1.0, 1.0, 1.0, 50.0);
    const double exact = steady_occupation(FloquetResponse(s, DrivePlan::harmonic(1, 1e-3, wm), 4), ion(wm, IB));
    const double est = half_frequency_limit(s, IB, wm, 1e-3);
    EXPECT_GT(exact, 0.5 * est);
    EXPECT_LT(exact, 2.0 * est);
}

TEST(Limits, SidebandClosedForm) {
    const SystemParams s(1.0, 1e-5);
    auto r = sideband_limit(s, kOhmic, 1e-3);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.n_bar, 2.5e-5, 0.01 * 2.5e-5);
    EXPECT_NEAR(r.omega_d, std::sqrt(1 - 1e-10) - 1e-3, 1e-15);
    EXPECT_LT(sideband_limit(SystemParams(1.0, 1e-9), kOhmic, 1e-3).n_bar, 1e-11);
    EXPECT_THROW(sideband_limit(SystemParams(1.0, 1e-3), kOhmic, 1e-3), OutOfRegimeError);
}

TEST(Limits, SidebandAgreesWithLeadingOrderSweep) {
    const double wm = 1e-2;
    for (double ratio : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
        const SystemParams s(1.0, ratio * wm);
        auto r = sideband_limit(s, kOhmic, wm);
        const double lo = occupation_leading_order(s, kOhmic, wm, r.omega_d);
        EXPECT_NEAR(r.n_bar, lo, 0.02 * lo) << ratio;
    }
}

TEST(Limits, SidebandMonotonicity) {
    double prev = 0.0;
    for (double g = 1e-5; g < 1e-3; g *= 1.5) {
        const double n = sideband_limit(SystemParams(1.0, g), kOhmic, 1e-2).n_bar;
        EXPECT_GT(n, prev);
        prev = n;
    }
    prev = INFINITY;
    for (double wm = 1e-3; wm < 0.2; wm *= 1.5) {
        const double n = sideband_limit(SystemParams(1.0, 1e-4), kOhmic, wm).n_bar;
        EXPECT_LT(n, prev);
        prev = n;
    }
}

TEST(Limits, SlowSpectralDensity) {
    const SystemParams s(1.0, 0.02);
    const double wm = 1e-3;
    EXPECT_NEAR(occupation_slow_sd(s, wm, 1.0 - 0.02), 10.0, 1.0);
    const SystemParams t(1.0, 0.01);
    EXPECT_NEAR(occupation_slow_sd(t, 1e-5, 0.99) / (0.01 / 2e-5), 1.0, 0.02);
    const double edge = std::sqrt(1.0 - wm * wm - 0.02 * 0.02);
    EXPECT_TRUE(std::isinf(occupation_slow_sd(s, wm, edge)));
    EXPECT_TRUE(std::isinf(occupation_slow_sd(s, wm, edge * (1 + 1e-12))));
    EXPECT_TRUE(std::isfinite(occupation_slow_sd(s, wm, edge * (1 - 1e-9))));
}

TEST(Limits, DopplerClosedForm) {
    auto r = doppler_limit(SystemParams(1.0, 0.02), 1e-3);
    EXPECT_DOUBLE_EQ(r.n_bar, 10.0);
    EXPECT_DOUBLE_EQ(r.omega_d, 0.98);
    EXPECT_THROW(doppler_limit(SystemParams(1.0, 1e-3), 1e-3), OutOfRegimeError);
    // 2 gamma wd = wm^2 exactly at w0 = gamma + wm^2 / (2 gamma)
    EXPECT_TRUE(doppler_limit(SystemParams(1.125, 1.0), 0.5).feasible);
    EXPECT_FALSE(doppler_limit(SystemParams(1.12, 1.0), 0.5).feasible);
}

TEST(Limits, SlowSdOptimumNearDopplerDrive) {
    for (double g : {0.02, 0.05}) {
        const SystemParams s(1.0, g);
        const double wm = g / 20.0;
        auto r = optimize_slow_sd(s, wm);
        EXPECT_NEAR(r.omega_d, 1.0 - g, 0.05 * (1.0 - g));
        EXPECT_NEAR(r.n_bar, g / (2 * wm), 0.1 * g / (2 * wm));
        EXPECT_EQ(r.regime, Regime::Doppler);
    }
}

TEST(Limits, StructuredEnhancement) {
    EXPECT_NEAR(enhancement_factor(3.0, 0.3), 0.064 / 0.49, 1e-14);
    EXPECT_LT(enhancement_factor(0.5, 0.47), 1.0);
    EXPECT_GT(enhancement_factor(0.5, 0.45), 1.0);
    const SystemParams s(1.0, 1e-6);
    EXPECT_NEAR(structured_limit(s, 3.0, 1e-5), 0.25 * 0.01, 1e-6);
    EXPECT_THROW(structured_limit(s, 3.0, 0.5), OutOfRegimeError);
    for (double k : {1.0, 3.0})
        for (int i = 1; i < 1000; ++i) EXPECT_LT(enhancement_factor(k, 0.5 * i / 1000.0), 1.0);
}

TEST(Limits, CriticalRatio) {
    EXPECT_NEAR(critical_ratio(0.5).lower, 0.457, 0.002);
    auto one = critical_ratio(1.0);
    EXPECT_TRUE(one.full_band);
    EXPECT_EQ(one.lower, 0.0);
    EXPECT_EQ(one.upper, 0.5);
    auto small = critical_ratio(0.1);
    EXPECT_NEAR(small.lower, small.small_kappa_approx, 1e-6);
    EXPECT_NEAR(small.small_kappa_approx, 0.5 * (1 - std::pow(2.0, -20)), 1e-15);
    EXPECT_THROW(critical_ratio(0.0), DomainError);
}

TEST(Limits, OptimizerFindsSidebandDrive) {
    const SystemParams s(1.0, 1e-5);
    const double wm = 1e-3;
    auto r = optimize_drive(s, ion(wm, kOhmic), DrivePlan::harmonic(1, 1e-3, 1.0), {1e-3, 1.0 + wm});
    EXPECT_NEAR(r.omega_d, sideband_optimal_drive(s, wm), 1e-3 * r.omega_d);
    EXPECT_NEAR(r.n_bar, 2.5e-5, 0.05 * 2.5e-5);
    EXPECT_TRUE(r.analytic_agrees);
    EXPECT_EQ(r.regime, Regime::SidebandResolved);
    EXPECT_LT(r.k_convergence, 1e-6);
    // scan guard: no scanned drive does better
    for (int i = 1; i <= 64; ++i) {
        const double wd = 1e-3 + (1.0 + wm - 1e-3) * i / 65.0;
        EXPECT_GE(steady_occupation(FloquetResponse(s, DrivePlan::harmonic(1, 1e-3, wd), 4), ion(wm, kOhmic)),
                  r.n_bar);
    }
}

TEST(Limits, OccupationInvariantUnderBathScaling) {
    const SystemParams s(1.0, 1e-3);
    const double wm = 0.02;
    FloquetResponse r(s, DrivePlan::harmonic(1, 1e-3, 0.97), 4);
    const double a = steady_occupation(r, ion(wm, kOhmic)), b = steady_occupation(r, ion(wm, kOhmic.scaled(7.5)));
    EXPECT_NEAR(a, b, 1e-14 * a);
    auto o1 = optimize_drive(s, ion(wm, kOhmic), r.drive(), {0.5, 1.02});
    auto o2 = optimize_drive(s, ion(wm, kOhmic.scaled(7.5)), r.drive(), {0.5, 1.02});
    EXPECT_NEAR(o1.omega_d, o2.omega_d, 1e-8);
}

TEST(Limits, ConsistencyChainInSidebandCorner) {
    const SystemParams s(1.0, 2e-4);
    const double wm = 1e-2;
    auto sb = sideband_limit(s, kOhmic, wm);
    const double lo = occupation_leading_order(s, kOhmic, wm, sb.omega_d);
    const double ex = steady_occupation(FloquetResponse(s, DrivePlan::harmonic(1, 1e-3, sb.omega_d), 4),
                                        ion(wm, kOhmic));
    EXPECT_NEAR(ex, lo, 0.02 * lo);
    EXPECT_NEAR(sb.n_bar, lo, 0.02 * lo);
}

TEST(Limits, RegimeClassifier) {
    EXPECT_EQ(classify_regime(SystemParams(1, 1e-3), 0.1, 0.9), Regime::SidebandResolved);
    EXPECT_EQ(classify_regime(SystemParams(1, 0.1), 0.01, 0.9), Regime::Doppler);
    EXPECT_EQ(classify_regime(SystemParams(1, 0.05), 0.1, 0.9), Regime::Intermediate);
    EXPECT_EQ(classify_regime(SystemParams(1, 1e-3), 0.5, 0.51), Regime::HalfFrequency);
}
