#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "qfridge/config.hpp"

using namespace qfridge;
using namespace qfridge::config;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ShortestFormatRoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mant(-1, 1);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::ldexp(mant(rng), ex(rng));
        EXPECT_EQ(*parse_double(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-5), "1e-05");
    EXPECT_FALSE(parse_double("1.0x"));
    EXPECT_FALSE(parse_double(""));
    EXPECT_EQ(*parse_double("inf"), INFINITY);
}

TEST(Config, PresetsRoundTripThroughDump) {
    for (const auto& n : preset_names()) {
        const auto c = preset(n);
        const auto again = parse(dump(c));
        EXPECT_TRUE(c == again) << n;
        EXPECT_EQ(dump(again), dump(c)) << n;
    }
}

TEST(Config, ShippedPresetFilesMatchBuiltins) {
    for (const auto& n : preset_names()) {
        std::ifstream f(std::string(QFRIDGE_SOURCE_DIR) + "/presets/" + n + ".cfg");
        ASSERT_TRUE(f) << n;
        std::stringstream ss;
        ss << f.rdbuf();
        EXPECT_TRUE(parse(ss.str()) == preset(n)) << n;
    }
}

TEST(Config, UnknownPresetIsAConfigError) { EXPECT_THROW(preset("nope"), ConfigError); }

TEST(Config, ErrorsNameLineAndField) {
    EXPECT_EQ(error_of("[system]\ngamma = -1\n"), "config line 2: system.gamma: must be > 0");
    EXPECT_EQ(error_of("[system]\n\ngama = 1\n"), "config line 3: system.gama: unknown key");
    EXPECT_EQ(error_of("[systen]\n"), "config line 1: unknown section [systen]");
    EXPECT_EQ(error_of("[drive]\namplitude = big\n"),
              "config line 2: drive.amplitude: expected a number, got 'big'");
    EXPECT_EQ(error_of("omega0 = 1\n"), "config line 1: key outside of any section");
    EXPECT_EQ(error_of("[system]\nomega0 = 1\nomega0 = 2\n"), "config line 3: system.omega0: duplicate key");
    EXPECT_EQ(error_of("[system\n"), "config line 1: unterminated section header");
    EXPECT_EQ(error_of("[reservoir.B]\nkind = ohmic\n"),
              "config line 1: reservoir.B.rate: required for kind = ohmic");
    EXPECT_EQ(error_of("[reservoir.B]\nkind = ohmic\nrate = 1\nweight = 2\n"),
              "config line 4: reservoir.B.weight: unknown key");
    EXPECT_NE(error_of("[reservoir.A]\nkind = dirac\nweight = 1\nfrequency = 1\ntemperature = 1\noccupation = 1\n")
                  .find("not both"),
              std::string::npos);
    EXPECT_NE(error_of("[solver]\nmode = fast\n").find("expected exact, perturbative"), std::string::npos);
}

TEST(Config, CommentsAndWhitespace) {
    const auto c = parse("# top\n  [system]  \n omega0=2 # inline\n\tgamma =\t0.5\n");
    EXPECT_EQ(c.omega0, 2.0);
    EXPECT_EQ(c.gamma, 0.5);
}

TEST(Config, BuildsModelObjects) {
    const auto c = preset("figure67");
    EXPECT_EQ(c.system().omega0, 1.0);
    EXPECT_EQ(c.drive().frequency(), 0.9);
    EXPECT_EQ(c.drive().component(1).real(), 1e-3);
    EXPECT_EQ(c.drive().static_part(), 1.0);
    EXPECT_EQ(c.motional_frequency(), 0.1);
    const auto IB = c.density(Label::B);
    EXPECT_NEAR(IB(0.5), 4 * 0.01 / std::numbers::pi * 0.125, 1e-16);
    EXPECT_EQ(IB(11.0), 0.0);
}

TEST(Config, OccupationSetsTemperature) {
    auto c = parse("[reservoir.A]\nkind = dirac\nweight = 1e-6\nfrequency = 0.1\noccupation = 2\n");
    const auto r = c.reservoirs();
    EXPECT_NEAR(r.a.occupation(0.1), 2.0, 1e-12);
}

TEST(Config, FourierHarmonics) {
    const auto c = parse("[drive]\nfrequency = 0.5\namplitude = 0.01\nfourier.2 = 0.001 -0.002\n");
    ASSERT_EQ(c.fourier.size(), 1u);
    const auto d = c.drive();
    EXPECT_EQ(d.max_harmonic(), 2);
    EXPECT_EQ(d.component(-2), std::conj(d.component(2)));
    EXPECT_TRUE(parse(dump(c)) == c);
    EXPECT_THROW(parse("[drive]\nfourier.1 = 1 0\n"), ConfigError);
    EXPECT_THROW(parse("[drive]\nfourier.3 = 1 0 9\n"), ConfigError);
}

TEST(Config, MergeOverridesPresetKeys) {
    auto d = merge(parse_document(preset_text("sideband")), parse_document("[system]\ngamma = 2e-5\n"));
    const auto c = parse(d);
    EXPECT_EQ(c.gamma, 2e-5);
    EXPECT_EQ(c.omega0, 1.0);
    EXPECT_EQ(c.limits_method, LimitsMethod::Optimize);
}

TEST(Config, WithValueRewritesOneField) {
    const auto c = preset("sideband");
    const auto d = with_value(c, "drive.frequency", 0.95);
    EXPECT_EQ(d.drive_frequency, 0.95);
    auto back = d;
    back.drive_frequency = c.drive_frequency;
    EXPECT_TRUE(back == c);
    EXPECT_EQ(with_value(c, "limits.kappa", 3.0).kappa, 3.0);
    EXPECT_EQ(with_value(c, "reservoir.A.frequency", 2e-3).motional_frequency(), 2e-3);
    EXPECT_THROW(with_value(c, "system.nonsense", 1.0), ConfigError);
    EXPECT_THROW(with_value(c, "system.gamma", -1.0), ConfigError);
    EXPECT_THROW(with_value(c, "gamma", 1.0), ConfigError);
}

TEST(Config, IonPresetMatchesCalcium) {
    const auto c = preset("ca-ion");
    ASSERT_TRUE(c.ion.has_value());
    const auto ca = IonPreset::calcium();
    EXPECT_DOUBLE_EQ(c.ion->omega_m, ca.omega_m);
    EXPECT_DOUBLE_EQ(c.ion->omega0, ca.omega0);
    EXPECT_DOUBLE_EQ(c.ion->gamma, ca.gamma);
    EXPECT_DOUBLE_EQ(c.ion->rabi, ca.rabi);
    EXPECT_DOUBLE_EQ(c.ion->lamb_dicke, ca.lamb_dicke);
}
