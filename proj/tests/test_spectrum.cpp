#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qfridge/spectrum.hpp"

using namespace qfridge;

namespace {

std::size_t argmax_in(const SpectrumTable& t, const std::vector<double>& f, double lo, double hi) {
    std::size_t best = 0;
    double v = -1.0;
    for (std::size_t i = 0; i < t.omega.size(); ++i)
        if (t.omega[i] > lo && t.omega[i] < hi && f[i] > v) {
            v = f[i];
            best = i;
        }
    return best;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

}  // namespace

TEST(Spectrum, ResonantPumpingNeedsPhonons) {
    auto p = figure_spectrum_params();
    p.occupation = 0.0;
    PhotonSpectrum s(p);
    EXPECT_EQ(s.rp(s.rp_center()), 0.0);
    EXPECT_EQ(s.line_rate_rp(), 0.0);
    EXPECT_GT(s.nrh(s.nrh_center()), 0.0);
}

TEST(Spectrum, LinePeaksSitAtSidebands) {
    auto p = figure_spectrum_params();
    const auto t = build_spectrum(p);
    const double wd = p.drive.frequency(), G = p.gamma_m();
    const auto i = argmax_in(t, t.rp, wd, INFINITY);
    const auto j = argmax_in(t, t.nrh, 0.0, wd);
    EXPECT_NEAR(t.omega[i], wd + p.omega_m, G);
    EXPECT_NEAR(t.omega[j], wd - p.omega_m, G);
}

TEST(Spectrum, RpRateLinearInOccupation) {
    auto p = figure_spectrum_params();
    const double a = PhotonSpectrum(p).line_rate_rp();
    p.occupation *= 2.0;
    EXPECT_NEAR(PhotonSpectrum(p).line_rate_rp() / a, 2.0, 1e-12);
}

TEST(Spectrum, LinesBalanceAtSteadyOccupation) {
    PhotonSpectrum s(figure_spectrum_params());
    const double rp = s.line_rate_rp(), nrh = s.line_rate_nrh();
    EXPECT_NEAR(rp / nrh, 1.0, 0.02);
}

TEST(Spectrum, PairReflectionSymmetry) {
    PhotonSpectrum s(figure_spectrum_params());
    const double wd = s.drive_frequency();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, wd);
    for (int i = 0; i < 200; ++i) {
        const double w = u(rng);
        const double a = s.pairs(w), b = s.pairs(wd - w);
        EXPECT_LE(std::abs(a - b), 1e-12 * std::max(a, b)) << w;
    }
}

TEST(Spectrum, PairMeanFrequencyIsHalfDrive) {
    PhotonSpectrum s(figure_spectrum_params());
    EXPECT_NEAR(s.pair_mean_frequency() / (0.5 * s.drive_frequency()), 1.0, 1e-8);
}

TEST(Spectrum, UndrivenAndColdGivesNothing) {
    auto p = figure_spectrum_params();
    p.drive = DrivePlan::harmonic(1.0, 0.0, p.drive.frequency());
    p.occupation = 0.0;
    const auto t = build_spectrum(p, {0.0, NAN, 401, 21});
    for (std::size_t i = 0; i < t.omega.size(); ++i) {
        EXPECT_EQ(t.rp[i], 0.0);
        EXPECT_EQ(t.nrh[i], 0.0);
        EXPECT_EQ(t.pairs[i], 0.0);
    }
    EXPECT_EQ(t.rate_pairs, 0.0);
}

TEST(Spectrum, DensitiesNonNegativeAndSupported) {
    auto p = figure_spectrum_params();
    const auto t = build_spectrum(p);
    const double wd = p.drive.frequency();
    for (std::size_t i = 0; i < t.omega.size(); ++i) {
        EXPECT_GE(t.rp[i], 0.0);
        EXPECT_GE(t.nrh[i], 0.0);
        EXPECT_GE(t.pairs[i], 0.0);
        if (t.omega[i] <= wd) {
            EXPECT_EQ(t.rp[i], 0.0);
        }
        if (t.omega[i] >= wd) {
            EXPECT_EQ(t.nrh[i], 0.0);
            EXPECT_EQ(t.pairs[i], 0.0);
        }
    }
}

TEST(Spectrum, GridRefinementOfPairIntegral) {
    auto p = figure_spectrum_params();
    const auto a = build_spectrum(p, {0.0, NAN, 4001, 0});
    const auto b = build_spectrum(p, {0.0, NAN, 8001, 0});
    const double ia = trapezoid(a.omega, a.pairs), ib = trapezoid(b.omega, b.pairs);
    EXPECT_NEAR(ia / ib, 1.0, 5e-3);
    EXPECT_NEAR(ib / b.rate_pairs, 1.0, 5e-3);
    EXPECT_EQ(a.rate_pairs, b.rate_pairs);
}

TEST(Spectrum, CasimirRatioScalesWithBath) {
    auto p = figure_spectrum_params();
    const auto r1 = casimir_ratio(p);
    p.bath = p.bath.scaled(2.0);
    const auto r2 = casimir_ratio(p);
    EXPECT_NEAR(r2.quadrature / r1.quadrature, 2.0, 1e-8);
    EXPECT_NEAR(r2.closed_form / r1.closed_form, 2.0, 1e-14);
    p.weight_a = 0.0;
    EXPECT_THROW(casimir_ratio(p), DomainError);
}

TEST(Spectrum, IonMappingRatio) {
    const auto ion = IonPreset::calcium();
    const auto m = ion_mapping(ion);
    EXPECT_NEAR(m.ratio, ion.gamma / std::pow(ion.rabi * ion.lamb_dicke, 2), 1e-12 * m.ratio);
    const auto& p = m.spectrum;
    EXPECT_NEAR(p.bath(1.0) / p.weight_a, m.ratio * m.time_scale, 1e-12 * p.bath(1.0) / p.weight_a);
    EXPECT_TRUE(m.lamb_dicke_ok);
    auto weak = ion;
    weak.lamb_dicke = 1e-3;
    EXPECT_GT(ion_mapping(weak).ratio, 1e3 * m.ratio);
    auto strong = ion;
    strong.lamb_dicke = 1.2;
    EXPECT_FALSE(ion_mapping(strong).lamb_dicke_ok);
}

TEST(Spectrum, CalciumRates) {
    const auto m = ion_mapping(IonPreset::calcium());
    PhotonSpectrum s(m.spectrum);
    const double lines = (s.line_rate_rp() + s.line_rate_nrh()) * m.time_scale;
    const auto R = casimir_ratio(s);
    const double pairs = R.pair_rate * m.time_scale;
    EXPECT_GT(lines, 1.5e3);
    EXPECT_LT(lines, 6e3);
    EXPECT_LT(pairs, 1.0);
    EXPECT_GE(R.quadrature, 0.3e-4);
    EXPECT_LE(R.quadrature, 3e-4);
    EXPECT_LT(std::abs(std::log(R.quadrature / R.closed_form)), std::log(2.0));
    EXPECT_NEAR(m.spectrum.occupation, 1.5616, 1e-3);
}
