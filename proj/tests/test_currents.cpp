#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qfridge/currents.hpp"

using namespace qfridge;

namespace {

const SystemParams kSys(1.0, 0.01);
constexpr double kWm = 0.1;
constexpr double kWd = 0.9;

Reservoirs dirac_ohmic(double TA, double TB, double IA = 1e-3) {
    return Reservoirs(Reservoir(Label::A, SpectralDensity::dirac(IA, kWm), TA),
                      Reservoir(Label::B, matched_bath_density(kSys, 1, 50), TB));
}

Reservoirs two_baths(double TA, double TB, double kA = 1.0, double kB = 3.0) {
    return Reservoirs(Reservoir(Label::A, SpectralDensity::power_law(0.004, kA, 1.0, 5.0), TA),
                      Reservoir(Label::B, matched_bath_density(kSys, kB, 50), TB));
}

FloquetResponse drive(double V, CoefficientMode m = CoefficientMode::Exact, double wd = kWd) {
    return FloquetResponse(kSys, DrivePlan::harmonic(1.0, V, wd), 4, m);
}

}  // namespace

TEST(TransitionWeight, VanishesWithoutDrive) {
    auto r = drive(0.0);
    auto res = two_baths(0.1, 0.1);
    EXPECT_EQ(transition_weight(r, res, 1, Label::A, Label::B, 0.3).weight, 0.0);
    EXPECT_GT(transition_weight(r, res, 0, Label::B, Label::B, 0.3).weight, 0.0);
}

TEST(TransitionWeight, ReflectionWithSwappedLabels) {
    auto r = drive(1e-3, CoefficientMode::Perturbative);
    auto res = two_baths(0.1, 0.1, 1.0, 3.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, kWd - 0.01);
    for (int i = 0; i < 100; ++i) {
        const double w = u(rng);
        const double p = transition_weight(r, res, -1, Label::A, Label::B, w).weight;
        const double q = transition_weight(r, res, -1, Label::B, Label::A, kWd - w).weight;
        EXPECT_NEAR(p, q, 1e-12 * p);
    }
}

TEST(TransitionWeight, DiracIsSymbolic) {
    auto r = drive(1e-3);
    EXPECT_THROW(transition_weight(r, dirac_ohmic(0.1, 0), 1, Label::B, Label::A, 0.1), SymbolicDensityError);
}

TEST(Currents, EquilibriumUndrivenVanishes) {
    auto r = drive(0.0);
    for (const auto& res : {two_baths(0.2, 0.2), two_baths(0.2, 0.2, 0.5, 1.0), dirac_ohmic(0.2, 0.2)}) {
        auto h = heat_breakdown(r, res);
        const double scale = 1e-12 * std::abs(heat_rp(r, Reservoirs(res.a, Reservoir(Label::B, res.b.density, 0.0)),
                                                      Label::A));
        for (Label l : {Label::A, Label::B}) {
            EXPECT_LE(std::abs(h[l].rp), scale + 1e-300);
            EXPECT_EQ(h[l].rh, 0.0);
            EXPECT_EQ(h[l].nrh, 0.0);
        }
        EXPECT_LE(std::abs(h.work), scale + 1e-300);
    }
}

TEST(Currents, SidebandCoolingExtractsHeatFromA) {
    const SystemParams s(1.0, 1e-5);
    const double wm = 1e-3;
    FloquetResponse r(s, DrivePlan::harmonic(1.0, 1e-3, 1.0 - wm), 4);
    Reservoirs res(Reservoir(Label::A, SpectralDensity::dirac(1e-9, wm), 5 * wm),
                   Reservoir(Label::B, matched_bath_density(s, 1, 50), 0.0));
    auto h = heat_breakdown(r, res);
    EXPECT_GT(h.a.rp, 0.0);  // A loses energy
    EXPECT_LT(h.reservoir_energy_rate(Label::A), 0.0);
    EXPECT_GT(h.work, 0.0);
    EXPECT_EQ(h.a.rh, 0.0);
}

TEST(Currents, DeltaCollapseMatchesNarrowLorentzian) {
    auto r = drive(1e-3);
    const double IA = 1e-3;
    auto make = [&](const SpectralDensity& a, double TA) {
        return Reservoirs(Reservoir(Label::A, a, TA), Reservoir(Label::B, matched_bath_density(kSys, 3, 50), 0.0));
    };
    const auto dirac = SpectralDensity::dirac(IA, kWm);
    const auto lor = SpectralDensity::lorentzian(IA, kWm, 1e-4 * kWm);
    for (Label l : {Label::A, Label::B}) {
        const double d = heat_rp(r, make(dirac, 0.05), l), q = heat_rp(r, make(lor, 0.05), l);
        EXPECT_NEAR(q, d, 5e-3 * std::abs(d)) << "rp " << to_string(l);
        const double dn = heat_nrh(r, make(dirac, 0.0), l), qn = heat_nrh(r, make(lor, 0.0), l);
        EXPECT_NEAR(qn, dn, 5e-3 * std::abs(dn)) << "nrh " << to_string(l);
    }
}

TEST(Currents, ResonantHeating) {
    auto r = drive(0.01);
    EXPECT_EQ(heat_rh(r, dirac_ohmic(0.3, 0.3), Label::A), 0.0);
    EXPECT_EQ(heat_rh(r, two_baths(0.0, 0.3), Label::A), 0.0);
    EXPECT_LT(heat_rh(r, two_baths(0.3, 0.3), Label::A), 0.0);
    EXPECT_LT(heat_rh(r, two_baths(0.3, 0.3), Label::B), 0.0);
}

TEST(Currents, ZeroTemperatureOnlyPairCreation) {
    auto r = drive(0.01);
    for (const auto& res : {two_baths(0, 0), dirac_ohmic(0, 0)}) {
        auto h = heat_breakdown(r, res);
        for (Label l : {Label::A, Label::B}) {
            EXPECT_EQ(h[l].rp, 0.0);
            EXPECT_EQ(h[l].rh, 0.0);
            EXPECT_LT(h[l].nrh, 0.0);
            EXPECT_EQ(h[l].total(), h[l].nrh);
        }
        EXPECT_DOUBLE_EQ(h.work, -(h.a.nrh + h.b.nrh));
        EXPECT_GT(h.work, 0.0);
    }
}

TEST(Currents, UndrivenHasNoPairs) {
    auto r = drive(0.0);
    EXPECT_EQ(heat_nrh(r, two_baths(0.2, 0.1), Label::A), 0.0);
    EXPECT_EQ(heat_nrh(r, dirac_ohmic(0.2, 0.1), Label::B), 0.0);
}

TEST(Currents, PairCurrentScalesAsVSquared) {
    for (Label l : {Label::A, Label::B}) {
        const double q1 = heat_nrh(drive(1e-3), dirac_ohmic(0, 0), l);
        const double q2 = heat_nrh(drive(2e-3), dirac_ohmic(0, 0), l);
        EXPECT_NEAR(q2 / q1, 4.0, 0.08);
    }
    // Broad baths: the k = 2 channel passes through two resonances of
    // A_{-2}, so the quadratic regime needs a smaller drive.
    for (Label l : {Label::A, Label::B}) {
        const double q1 = heat_nrh(drive(1e-4), two_baths(0, 0), l);
        const double q2 = heat_nrh(drive(2e-4), two_baths(0, 0), l);
        EXPECT_NEAR(q2 / q1, 4.0, 0.08);
    }
}

TEST(Currents, AllChannelsScaleAsVSquaredAtEqualTemperature) {
    auto res = two_baths(0.15, 0.15);
    auto h1 = heat_breakdown(drive(1e-4), res), h2 = heat_breakdown(drive(2e-4), res);
    for (Label l : {Label::A, Label::B}) {
        EXPECT_NEAR(std::log2(h2[l].rp / h1[l].rp), 2.0, 0.04);
        EXPECT_NEAR(std::log2(h2[l].rh / h1[l].rh), 2.0, 0.04);
        EXPECT_NEAR(std::log2(h2[l].nrh / h1[l].nrh), 2.0, 0.04);
    }
}

TEST(Currents, PairChannelNonPositiveRandomized) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uV(1e-4, 0.05), uT(0.0, 0.5), uwd(0.3, 1.8);
    std::uniform_int_distribution<int> uk(0, 2);
    const double kappas[] = {0.5, 1.0, 3.0};
    for (int i = 0; i < 30; ++i) {
        auto r = drive(uV(rng), CoefficientMode::Exact, uwd(rng));
        auto res = two_baths(uT(rng), uT(rng), kappas[uk(rng)], kappas[uk(rng)]);
        for (Label l : {Label::A, Label::B}) EXPECT_LE(heat_nrh(r, res, l), 0.0);
    }
}

TEST(Currents, ClosureByConstruction) {
    auto h = heat_breakdown(drive(0.02), two_baths(0.3, 0.05));
    EXPECT_EQ(h.closure_defect, 0.0);
    EXPECT_GT(h.work, 0.0);
}
