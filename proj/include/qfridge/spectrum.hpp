// spectrum.hpp - photon emission into reservoir B: the two transition lines
// at wd +- w_m, the broad pair continuum, the Casimir ratio and the trapped-ion
// parameter mapping.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qfridge/errors.hpp"
#include "qfridge/floquet.hpp"
#include "qfridge/limits.hpp"
#include "qfridge/model.hpp"
#include "qfridge/optimize.hpp"
#include "qfridge/quadrature.hpp"

namespace qfridge {

struct SpectrumParams {
    SystemParams system;
    DrivePlan drive;
    SpectralDensity bath;       // I_B
    double omega_m = 0.0;
    double weight_a = 1.0;      // weight of the motional line in I_A
    double occupation = 0.0;    // N_A(w_m)
    double line_width = std::numeric_limits<double>::quiet_NaN();  // Gamma_m; NaN -> 1e-2 w_m
    double line_window = 5.0;   // integrated line rates use +- line_window * Gamma_m
    CoefficientMode mode = CoefficientMode::Exact;
    int order = -1;
    GreenConvention convention = GreenConvention::Adopted;

    double gamma_m() const { return std::isnan(line_width) ? 1e-2 * omega_m : line_width; }

    void validate() const {
        system.validate();
        if (!(omega_m > 0)) throw ConfigError("spectrum needs w_m > 0");
        if (!(weight_a >= 0)) throw ConfigError("motional line weight must be >= 0");
        if (!(occupation >= 0)) throw ConfigError("occupation must be >= 0");
        if (!(gamma_m() > 0)) throw ConfigError("line width must be > 0");
        if (!(line_window > 0)) throw ConfigError("line window must be > 0");
        if (bath.symbolic()) throw ConfigError("reservoir B must have a sampled spectral density");
        if (!drive.is_harmonic() && !drive.undriven())
            throw UnsupportedDriveError("photon spectra need a harmonic drive");
        if (!(drive.frequency() > 0)) throw ConfigError("drive frequency must be > 0");
    }
};

/// Pointwise photon rate densities for one configuration.
class PhotonSpectrum {
public:
    explicit PhotonSpectrum(SpectrumParams p)
        : p_(std::move(p)), resp_((p_.validate(), p_.system), p_.drive, p_.order, p_.mode, p_.convention) {}

    const SpectrumParams& params() const { return p_; }
    const FloquetResponse& response() const { return resp_; }
    double drive_frequency() const { return p_.drive.frequency(); }

    /// Lorentzian-smoothed motional density.
    double motional_density(double x) const {
        const double G = p_.gamma_m(), d = x - p_.omega_m;
        return p_.weight_a * (G / (2.0 * std::numbers::pi)) / (d * d + 0.25 * G * G);
    }

    double rp(double w) const {
        const double wd = drive_frequency(), x = w - wd;
        if (!(x > 0)) return 0.0;
        const double IA = motional_density(x);
        if (IA == 0.0 || p_.occupation == 0.0) return 0.0;
        return 0.5 * std::numbers::pi * p_.bath(w) * IA * std::norm(resp_.coefficient(1, x)) * p_.occupation;
    }

    double nrh(double w) const {
        const double wd = drive_frequency();
        if (!(w > 0 && w < wd)) return 0.0;
        const double IA = motional_density(wd - w);
        if (IA == 0.0) return 0.0;
        return 0.5 * std::numbers::pi * p_.bath(w) * IA * std::norm(resp_.coefficient(-1, w)) *
               (p_.occupation + 1.0);
    }

    double pairs(double w) const {
        const double wd = drive_frequency();
        if (!(w > 0 && w < wd)) return 0.0;
        const double b = p_.bath(w) * p_.bath(wd - w);
        if (b == 0.0) return 0.0;
        return 0.25 * std::numbers::pi * b * std::norm(resp_.coefficient(-1, w));
    }

    double rp_center() const { return drive_frequency() + p_.omega_m; }
    double nrh_center() const { return drive_frequency() - p_.omega_m; }

    /// Fraction of a unit Lorentzian inside the integration window.
    double window_weight() const { return (2.0 / std::numbers::pi) * std::atan(2.0 * p_.line_window); }

    /// Integrated line rates: window integral divided by the window's share of
    /// the Lorentzian weight.
    double line_rate_rp() const { return line_rate([this](double w) { return rp(w); }, rp_center(), true); }
    double line_rate_nrh() const { return line_rate([this](double w) { return nrh(w); }, nrh_center(), false); }

    double pair_rate() const { return pair_moment(0); }

    /// First moment of the pair continuum over its integral.
    double pair_mean_frequency() const {
        const double z = pair_moment(0);
        if (!(z > 0)) throw DomainError("pair continuum vanishes; mean frequency undefined");
        return pair_moment(1) / z;
    }

    /// Breakpoints for the pair integral, mirrored about wd / 2.
    std::vector<double> pair_breakpoints() const {
        const double wd = drive_frequency(), w0 = p_.system.omega0, G = resp_.green().width();
        std::vector<double> b{0.5 * wd};
        for (double c : {w0, wd - w0, w0 - wd})
            for (double off : {0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0}) b.push_back(c + off * G);
        for (double f : p_.bath.features()) b.push_back(f);
        for (int j = 1; j <= 12; ++j) b.push_back(wd * std::pow(10.0, -j));
        const auto n = b.size();
        for (std::size_t i = 0; i < n; ++i) b.push_back(wd - b[i]);
        std::erase_if(b, [&](double x) { return !(x > 0 && x < wd); });
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

private:
    template <class F>
    double line_rate(F&& f, double c, bool above) const {
        const double wd = drive_frequency(), W = p_.line_window * p_.gamma_m();
        double lo = c - W, hi = c + W;
        if (above) lo = std::max(lo, wd);
        else {
            lo = std::max(lo, 0.0);
            hi = std::min(hi, wd);
        }
        if (!(hi > lo)) return 0.0;
        const double G = p_.gamma_m();
        std::vector<double> bp;
        for (double off : {0.0, -0.5, 0.5, -2.0, 2.0}) bp.push_back(c + off * G);
        std::erase_if(bp, [&](double x) { return !(x > lo && x < hi); });
        quad::Options o;
        o.rel_tol = 1e-10;
        return quad::integrate(f, lo, hi, bp, o).value / window_weight();
    }

    double pair_moment(int m) const {
        const double wd = drive_frequency();
        if (!(wd > 0)) return 0.0;
        quad::Options o;
        o.rel_tol = 1e-11;
        o.max_intervals = 40000;
        const auto bp = pair_breakpoints();
        // Symmetric halves, so the first moment sees no left/right integration bias.
        auto f = [&](double w) { return (m == 0 ? 1.0 : w) * pairs(w); };
        return quad::integrate(f, 0.0, 0.5 * wd, bp, o).value + quad::integrate(f, 0.5 * wd, wd, bp, o).value;
    }

    SpectrumParams p_;
    FloquetResponse resp_;
};

inline double photon_rate_rp(const SpectrumParams& p, double w) { return PhotonSpectrum(p).rp(w); }
inline double photon_rate_nrh(const SpectrumParams& p, double w) { return PhotonSpectrum(p).nrh(w); }
inline double photon_rate_pairs(const SpectrumParams& p, double w) { return PhotonSpectrum(p).pairs(w); }

struct CasimirRatio {
    double quadrature = std::numeric_limits<double>::quiet_NaN();
    // (1/4)(w_m/w0)(I_B(w0)/weight_a) gamma, meaningful for w0 >> gamma >> w_m
    // and a cubic bath.
    double closed_form = std::numeric_limits<double>::quiet_NaN();
    double pair_rate = 0.0;
    double line_rate = 0.0;
};

inline CasimirRatio casimir_ratio(const PhotonSpectrum& s) {
    const auto& p = s.params();
    CasimirRatio r;
    r.line_rate = s.line_rate_nrh();
    if (!(r.line_rate > 0)) throw DomainError("NRH line rate is zero; Casimir ratio undefined");
    r.pair_rate = s.pair_rate();
    r.quadrature = r.pair_rate / r.line_rate;
    const double w0 = p.system.omega0;
    if (p.weight_a > 0)
        r.closed_form = 0.25 * (p.omega_m / w0) * (p.bath(w0) / p.weight_a) * p.system.gamma;
    return r;
}

inline CasimirRatio casimir_ratio(const SpectrumParams& p) { return casimir_ratio(PhotonSpectrum(p)); }

struct GridSpec {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::quiet_NaN();  // NaN -> wd + 2 w_m
    int points = 4001;
    int line_points = 201;  // extra nodes across each line window; 0 disables
};

struct SpectrumTable {
    std::vector<double> omega, rp, nrh, pairs;
    double rate_rp = 0.0, rate_nrh = 0.0, rate_pairs = 0.0;
    double line_width = 0.0;
    double occupation = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();  // pairs / NRH line
};

inline SpectrumTable build_spectrum(const PhotonSpectrum& s, const GridSpec& g = {}) {
    const auto& p = s.params();
    const double wd = s.drive_frequency();
    const double hi = std::isnan(g.upper) ? wd + 2.0 * p.omega_m : g.upper;
    if (!(hi > g.lower) || g.lower < 0) throw ConfigError("spectrum grid needs 0 <= lower < upper");
    if (g.points < 2) throw ConfigError("spectrum grid needs >= 2 points");
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(g.points + 2 * g.line_points + 2));
    for (int i = 0; i < g.points; ++i) w.push_back(g.lower + (hi - g.lower) * i / (g.points - 1));
    if (g.line_points > 0) {
        const double W = p.line_window * p.gamma_m();
        for (double c : {s.rp_center(), s.nrh_center()})
            for (int i = 0; i < g.line_points; ++i) {
                const double x = c - W + 2.0 * W * i / std::max(1, g.line_points - 1);
                if (x >= g.lower && x <= hi) w.push_back(x);
            }
        for (double c : {s.rp_center(), s.nrh_center()})
            if (c >= g.lower && c <= hi) w.push_back(c);
    }
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());

    SpectrumTable t;
    t.omega = w;
    t.rp.reserve(w.size());
    t.nrh.reserve(w.size());
    t.pairs.reserve(w.size());
    for (double x : w) {
        t.rp.push_back(s.rp(x));
        t.nrh.push_back(s.nrh(x));
        t.pairs.push_back(s.pairs(x));
    }
    t.rate_rp = s.line_rate_rp();
    t.rate_nrh = s.line_rate_nrh();
    t.rate_pairs = s.pair_rate();
    t.line_width = p.gamma_m();
    t.occupation = p.occupation;
    if (t.rate_nrh > 0) t.ratio = t.rate_pairs / t.rate_nrh;
    return t;
}

inline SpectrumTable build_spectrum(const SpectrumParams& p, const GridSpec& g = {}) {
    return build_spectrum(PhotonSpectrum(p), g);
}

/// Parameters of the emission-spectrum figure: w_m/w0 = 0.1, gamma/w0 = 1e-2,
/// wd = w0 - w_m, Gamma_m = 1e-2 w_m, cubic I_B. The occupation is the
/// self-consistent steady state.
inline SpectrumParams figure_spectrum_params(double V = 1e-3) {
    SpectrumParams p;
    p.system = SystemParams(1.0, 1e-2);
    p.omega_m = 0.1;
    p.drive = DrivePlan::harmonic(1.0, V, 1.0 - p.omega_m);
    p.bath = SpectralDensity::power_law(4.0 * p.system.gamma / std::numbers::pi, 3.0, 1.0, 10.0);
    p.line_width = 1e-2 * p.omega_m;
    const Reservoirs res(Reservoir(Label::A, SpectralDensity::dirac(p.weight_a, p.omega_m), 0.0),
                         Reservoir(Label::B, p.bath, 0.0));
    p.occupation = steady_occupation(FloquetResponse(p.system, p.drive, p.order, p.mode, p.convention), res);
    return p;
}

// ---------------------------------------------------------------------------
// Trapped ion

struct IonPreset {
    double omega_m;
    double omega0;
    double gamma;
    double rabi;
    double lamb_dicke;

    /// 40Ca+ on the 397 nm S1/2 -> P1/2 line (angular frequencies in rad/s).
    static IonPreset calcium() {
        constexpr double tp = 2.0 * std::numbers::pi;
        return {tp * 5e6, tp * 755e12, tp * 20e6, tp * 1e6, 0.078};
    }

    void validate() const {
        if (!(omega_m > 0 && omega0 > 0 && gamma > 0 && rabi > 0))
            throw ConfigError("ion preset frequencies must be > 0");
        if (!(lamb_dicke > 0)) throw ConfigError("Lamb-Dicke parameter must be > 0");
    }
};

struct IonMapping {
    double ratio = 0.0;       // I_B~ / I_A~ = gamma / (Omega^2 eta^2), seconds
    double time_scale = 1.0;  // w0 in rad/s; scaled rates times this are per second
    bool lamb_dicke_ok = true;
    std::string warning;
    SpectrumParams spectrum;  // in units of w0
};

/// Model parameters imitating a Doppler-cooled ion. Frequencies are scaled by
/// w0. I_A = C eta^2 Omega^2 delta(w - w_m), I_B = C gamma (w / w0)^3 with
/// C = 4 w0 / pi, which makes I_B reproduce the linewidth gamma. The drive
/// amplitude V = (sqrt(pi)/2) w0^2 makes the line rates equal the Lamb-Dicke
/// rates eta^2 Omega^2 gamma / (2((delta +- w_m)^2 + gamma^2)). The drive sits
/// at the leading-order optimum and A_{+-1} are taken to first order in V.
inline IonMapping ion_mapping(const IonPreset& ion) {
    ion.validate();
    IonMapping m;
    m.ratio = ion.gamma / (ion.rabi * ion.rabi * ion.lamb_dicke * ion.lamb_dicke);
    if (!(ion.lamb_dicke < 1.0)) {
        m.lamb_dicke_ok = false;
        m.warning = "Lamb-Dicke parameter >= 1; the ion mapping is unreliable";
    }
    m.time_scale = ion.omega0;
    const double s = ion.omega0;
    const double wm = ion.omega_m / s, G = ion.gamma / s, Om = ion.rabi / s, eta = ion.lamb_dicke;
    const double C = 4.0 / std::numbers::pi;
    auto& p = m.spectrum;
    p.system = SystemParams(1.0, G);
    p.omega_m = wm;
    p.weight_a = C * eta * eta * Om * Om;
    p.bath = SpectralDensity::power_law(C * G, 3.0, 1.0, 10.0);
    p.line_width = 1e-2 * wm;
    p.mode = CoefficientMode::Perturbative;
    const double V = 0.5 * std::sqrt(std::numbers::pi);
    auto occ = [&](double d) { return occupation_leading_order(p.system, p.bath, wm, 1.0 - d * G); };
    auto best = opt::minimize(occ, 0.05, 5.0, std::vector<double>{1.0}, 64, 1e-10);
    if (!best.found) throw NumericalError(NumericalError::Kind::NotConverged, "no cooling detuning for ion preset");
    p.drive = DrivePlan::harmonic(1.0, V, 1.0 - best.x * G);
    p.occupation = best.fx;
    return m;
}

}  // namespace qfridge
