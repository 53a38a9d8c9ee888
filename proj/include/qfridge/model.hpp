// model.hpp - physical configuration: reservoirs, spectral densities, drive
// protocols, system parameters, and the elementary thermal/response kernels.
//
// Units: hbar = k_B = M = 1. Frequencies, temperatures and energies share one
// unit; the CLI may express everything in units of omega0.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qfridge/errors.hpp"
#include "qfridge/quadrature.hpp"

namespace qfridge {

using cplx = std::complex<double>;

enum class Label { A, B };

inline Label other(Label l) { return l == Label::A ? Label::B : Label::A; }
inline const char* to_string(Label l) { return l == Label::A ? "A" : "B"; }

// ---------------------------------------------------------------------------
// Spectral densities

enum class DensityKind { PowerLaw, DiracMode, Lorentzian, Tabulated };

inline const char* to_string(DensityKind k) {
    switch (k) {
        case DensityKind::PowerLaw: return "powerlaw";
        case DensityKind::DiracMode: return "dirac";
        case DensityKind::Lorentzian: return "lorentzian";
        case DensityKind::Tabulated: return "tabulated";
    }
    return "?";
}

/// I(w) = prefactor * (w / reference)^exponent on [0, cutoff], zero above.
struct PowerLaw {
    double prefactor;
    double exponent;
    double reference;
    double cutoff;
};

/// I(w) = weight * delta(w - frequency). Never sampled pointwise.
struct DiracMode {
    double weight;
    double frequency;
};

/// I(w) = weight * (width / 2pi) / ((w - center)^2 + (width / 2)^2) for
/// |w - center| <= half_window, zero outside. The window keeps I(0) = 0.
struct Lorentzian {
    double weight;
    double center;
    double width;
    double half_window;
};

/// Linear interpolation between sorted nodes, zero outside.
struct Tabulated {
    std::vector<double> omega;
    std::vector<double> value;
};

class SpectralDensity {
public:
    using Variant = std::variant<PowerLaw, DiracMode, Lorentzian, Tabulated>;

    SpectralDensity() : v_(PowerLaw{0.0, 1.0, 1.0, 1.0}) {}

    static SpectralDensity power_law(double prefactor, double exponent, double reference,
                                     double cutoff) {
        if (!(prefactor >= 0) || !std::isfinite(prefactor))
            throw ConfigError("power-law prefactor must be finite and >= 0");
        if (!(exponent > -1.0) || !std::isfinite(exponent))
            throw ConfigError("power-law exponent must exceed -1");
        if (!(reference > 0)) throw ConfigError("power-law reference frequency must be > 0");
        if (!(cutoff > 0)) throw ConfigError("power-law cutoff must be > 0");
        return SpectralDensity(PowerLaw{prefactor, exponent, reference, cutoff});
    }

    static SpectralDensity dirac(double weight, double frequency) {
        if (!(weight >= 0) || !std::isfinite(weight))
            throw ConfigError("dirac weight must be finite and >= 0");
        if (!(frequency > 0)) throw ConfigError("dirac mode frequency must be > 0");
        return SpectralDensity(DiracMode{weight, frequency});
    }

    static SpectralDensity lorentzian(double weight, double center, double width) {
        if (!(weight >= 0)) throw ConfigError("lorentzian weight must be >= 0");
        if (!(center > 0)) throw ConfigError("lorentzian center must be > 0");
        if (!(width > 0)) throw ConfigError("lorentzian width must be > 0");
        return SpectralDensity(Lorentzian{weight, center, width, std::min(1e4 * width, 0.5 * center)});
    }

    static SpectralDensity tabulated(std::vector<double> omega, std::vector<double> value) {
        if (omega.size() != value.size() || omega.size() < 2)
            throw ConfigError("tabulated density needs >= 2 (omega, value) pairs");
        for (std::size_t i = 0; i < omega.size(); ++i) {
            if (!(omega[i] >= 0)) throw ConfigError("tabulated omega must be >= 0");
            if (!(value[i] >= 0)) throw ConfigError("tabulated values must be >= 0");
            if (i > 0 && !(omega[i] > omega[i - 1]))
                throw ConfigError("tabulated omega must be strictly increasing");
        }
        return SpectralDensity(Tabulated{std::move(omega), std::move(value)});
    }

    /// Ohmic density whose dissipation kernel has constant real part `rate`.
    static SpectralDensity ohmic(double rate, double cutoff) {
        return power_law(2.0 * rate / std::numbers::pi, 1.0, 1.0, cutoff);
    }

    DensityKind kind() const { return static_cast<DensityKind>(v_.index()); }
    bool symbolic() const { return kind() == DensityKind::DiracMode; }
    const Variant& variant() const { return v_; }

    const DiracMode& dirac_mode() const {
        if (!symbolic()) throw ConfigError("density is not a dirac mode");
        return std::get<DiracMode>(v_);
    }

    /// Pointwise value. DiracMode raises SymbolicDensityError; w < 0 raises
    /// DomainError.
    double operator()(double w) const {
        if (!(w >= 0)) throw DomainError("spectral density evaluated at negative frequency");
        return std::visit([w](const auto& d) { return eval(d, w); }, v_);
    }

    /// Frequency beyond which the density is zero (or negligible for the
    /// Lorentzian tail).
    double support_upper() const {
        switch (kind()) {
            case DensityKind::PowerLaw: return std::get<PowerLaw>(v_).cutoff;
            case DensityKind::DiracMode: return std::get<DiracMode>(v_).frequency;
            case DensityKind::Lorentzian: {
                const auto& l = std::get<Lorentzian>(v_);
                return l.center + l.half_window;
            }
            case DensityKind::Tabulated: return std::get<Tabulated>(v_).omega.back();
        }
        return 0.0;
    }

    /// Frequencies where the density has kinks or narrow structure; used as
    /// quadrature breakpoints.
    std::vector<double> features() const {
        std::vector<double> f;
        switch (kind()) {
            case DensityKind::PowerLaw: f.push_back(std::get<PowerLaw>(v_).cutoff); break;
            case DensityKind::DiracMode: f.push_back(std::get<DiracMode>(v_).frequency); break;
            case DensityKind::Lorentzian: {
                const auto& l = std::get<Lorentzian>(v_);
                for (double m : {0.0, 0.5, 2.0, 10.0, 100.0, 1000.0}) {
                    if (m * l.width >= l.half_window) break;
                    f.push_back(l.center - m * l.width);
                    f.push_back(l.center + m * l.width);
                }
                f.push_back(l.center - l.half_window);
                f.push_back(l.center + l.half_window);
                break;
            }
            case DensityKind::Tabulated: {
                const auto& t = std::get<Tabulated>(v_);
                if (t.omega.size() <= 512) f = t.omega;
                else {
                    f.push_back(t.omega.front());
                    f.push_back(t.omega.back());
                }
                break;
            }
        }
        std::erase_if(f, [](double x) { return !(x > 0); });
        return f;
    }

    /// Characteristic width of narrow structure, or 0 if none.
    double narrow_width() const {
        if (kind() == DensityKind::Lorentzian) return std::get<Lorentzian>(v_).width;
        return 0.0;
    }

    /// Power-law exponent (1 for anything that is not a power law).
    double low_frequency_exponent() const {
        if (kind() == DensityKind::PowerLaw) return std::get<PowerLaw>(v_).exponent;
        return 1.0;
    }

    SpectralDensity scaled(double factor) const {
        if (!(factor >= 0)) throw ConfigError("density scale factor must be >= 0");
        SpectralDensity s = *this;
        std::visit(
            [factor](auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, PowerLaw>) d.prefactor *= factor;
                else if constexpr (std::is_same_v<T, Tabulated>) {
                    for (auto& v : d.value) v *= factor;
                } else d.weight *= factor;
            },
            s.v_);
        return s;
    }

private:
    explicit SpectralDensity(Variant v) : v_(std::move(v)) {}

    static double eval(const PowerLaw& p, double w) {
        if (w > p.cutoff) return 0.0;
        if (w == 0.0) return p.exponent > 0 ? 0.0 : (p.exponent == 0 ? p.prefactor
                                                                     : std::numeric_limits<double>::infinity());
        return p.prefactor * std::pow(w / p.reference, p.exponent);
    }
    static double eval(const DiracMode&, double) {
        throw SymbolicDensityError("dirac-mode density has no pointwise value");
    }
    static double eval(const Lorentzian& l, double w) {
        const double d = w - l.center;
        if (std::abs(d) > l.half_window) return 0.0;
        return l.weight * (l.width / (2.0 * std::numbers::pi)) / (d * d + 0.25 * l.width * l.width);
    }
    static double eval(const Tabulated& t, double w) {
        if (w < t.omega.front() || w > t.omega.back()) return 0.0;
        auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
        if (it == t.omega.end()) return t.value.back();
        const auto i = static_cast<std::size_t>(it - t.omega.begin());
        const double x0 = t.omega[i - 1], x1 = t.omega[i];
        const double s = (w - x0) / (x1 - x0);
        return (1.0 - s) * t.value[i - 1] + s * t.value[i];
    }

    Variant v_;
};

// ---------------------------------------------------------------------------
// Thermal factors and configuration types

/// Bose-Einstein occupation 1/(exp(w/T) - 1); exactly 0 at T = 0.
inline double planck_occupation(double w, double T) {
    if (!(w > 0)) throw DomainError("planck_occupation: frequency must be > 0");
    if (!(T >= 0)) throw DomainError("planck_occupation: temperature must be >= 0");
    if (T == 0.0) return 0.0;
    const double x = w / T;
    if (x > 745.0) return 0.0;
    return 1.0 / std::expm1(x);
}

/// Temperature at which a mode of frequency w holds `occupation` quanta.
inline double temperature_for_occupation(double w, double occupation) {
    if (!(w > 0)) throw DomainError("temperature_for_occupation: frequency must be > 0");
    if (!(occupation >= 0)) throw DomainError("occupation must be >= 0");
    if (occupation == 0.0) return 0.0;
    return w / std::log1p(1.0 / occupation);
}

struct Reservoir {
    Label label = Label::A;
    SpectralDensity density;
    double temperature = 0.0;

    Reservoir() = default;
    Reservoir(Label l, SpectralDensity d, double T) : label(l), density(std::move(d)), temperature(T) {
        if (!(T >= 0) || !std::isfinite(T))
            throw ConfigError(std::string("reservoir ") + to_string(l) + ": temperature must be >= 0");
    }

    double occupation(double w) const { return planck_occupation(w, temperature); }
};

/// Exactly one reservoir per label.
struct Reservoirs {
    Reservoir a;
    Reservoir b;

    Reservoirs() { b.label = Label::B; }
    Reservoirs(Reservoir ra, Reservoir rb) : a(std::move(ra)), b(std::move(rb)) {
        if (a.label != Label::A || b.label != Label::B)
            throw ConfigError("reservoirs must be labelled A and B");
    }

    const Reservoir& operator[](Label l) const { return l == Label::A ? a : b; }
};

/// Renormalized frequency omega0 and decay rate gamma of the working oscillator.
struct SystemParams {
    double omega0 = 1.0;
    double gamma = 0.01;

    SystemParams() = default;
    SystemParams(double w0, double g) : omega0(w0), gamma(g) { validate(); }

    void validate() const {
        if (!(omega0 > 0) || !std::isfinite(omega0)) throw ConfigError("system.omega0 must be > 0");
        if (!(gamma > 0) || !std::isfinite(gamma)) throw ConfigError("system.gamma must be > 0");
    }

    bool underdamped() const { return gamma < omega0; }

    /// V_R derived from (omega0, gamma) under the adopted Green-function
    /// convention g(iw) = 1/(V_R - w^2 + 2 i gamma w).
    double renormalized_potential() const { return omega0 * omega0 + gamma * gamma; }
};

/// Bath density that alone produces the system's damping at omega0 under the
/// adopted convention: pi I(w0) / 2 = 2 gamma w0, shape (w/w0)^exponent.
inline SpectralDensity matched_bath_density(const SystemParams& sys, double exponent, double cutoff) {
    const double scale = 4.0 * sys.gamma * sys.omega0 / std::numbers::pi;
    return SpectralDensity::power_law(scale, exponent, sys.omega0, cutoff);
}

/// Periodic modulation V(t) = sum_k V_k exp(i k wd t) with V_{-k} = conj(V_k).
class DrivePlan {
public:
    DrivePlan() = default;

    DrivePlan(std::map<int, cplx> components, double frequency)
        : comps_(std::move(components)), freq_(frequency) {
        validate();
    }

    /// V(t) = V0 + V (e^{i wd t} + e^{-i wd t}).
    static DrivePlan harmonic(double static_part, double amplitude, double frequency) {
        std::map<int, cplx> c{{0, static_part}};
        if (amplitude != 0.0) {
            c[1] = amplitude;
            c[-1] = amplitude;
        }
        DrivePlan d(std::move(c), frequency);
        d.harmonic_ = true;
        return d;
    }

    double frequency() const { return freq_; }
    double static_part() const { return component(0).real(); }
    const std::map<int, cplx>& components() const { return comps_; }

    cplx component(int k) const {
        auto it = comps_.find(k);
        return it == comps_.end() ? cplx{} : it->second;
    }

    /// Largest |k| with V_k != 0 (0 when undriven).
    int max_harmonic() const {
        int m = 0;
        for (const auto& [k, v] : comps_)
            if (k != 0 && v != cplx{}) m = std::max(m, std::abs(k));
        return m;
    }

    bool undriven() const { return max_harmonic() == 0; }

    /// Only {-1, 0, +1} components, with a real common amplitude.
    bool is_harmonic() const {
        if (max_harmonic() > 1) return false;
        const cplx v = component(1);
        return v.imag() == 0.0 && component(-1) == v;
    }

    /// max_{k != 0} |V_k|
    double amplitude() const {
        double a = 0.0;
        for (const auto& [k, v] : comps_)
            if (k != 0) a = std::max(a, std::abs(v));
        return a;
    }

    double relative_strength() const {
        const double v0 = std::abs(static_part());
        return v0 > 0 ? amplitude() / v0 : std::numeric_limits<double>::infinity();
    }

    bool perturbative(double threshold = 0.05) const { return relative_strength() < threshold; }

    /// Reconstructed V(t); the imaginary part vanishes up to roundoff.
    cplx value(double t) const {
        cplx s{};
        for (const auto& [k, v] : comps_) s += v * std::exp(cplx(0.0, k * freq_ * t));
        return s;
    }

    /// d/dt V(t) (real part).
    double derivative(double t) const {
        cplx s{};
        for (const auto& [k, v] : comps_)
            if (k != 0) s += cplx(0.0, k * freq_) * v * std::exp(cplx(0.0, k * freq_ * t));
        return s.real();
    }

    DrivePlan with_frequency(double w) const {
        DrivePlan d = *this;
        d.freq_ = w;
        d.validate();
        return d;
    }

    DrivePlan with_amplitude_scaled(double factor) const {
        DrivePlan d = *this;
        for (auto& [k, v] : d.comps_)
            if (k != 0) v *= factor;
        return d;
    }

private:
    void validate() const {
        if (!(freq_ > 0) || !std::isfinite(freq_)) throw ConfigError("drive.frequency must be > 0");
        double scale = 0.0;
        for (const auto& [k, v] : comps_) scale = std::max(scale, std::abs(v));
        for (const auto& [k, v] : comps_) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw ConfigError("drive components must be finite");
            if (std::abs(v - std::conj(component(-k))) > 1e-12 * std::max(scale, 1e-300))
                throw ConfigError("drive components must satisfy V_{-k} = conj(V_k) (k = " +
                                  std::to_string(k) + ")");
        }
    }

    std::map<int, cplx> comps_{{0, 1.0}};
    double freq_ = 1.0;
    bool harmonic_ = false;
};

// ---------------------------------------------------------------------------
// Dissipation kernel

namespace detail {

// PV integral over [0, upper] of h(x) / (x^2 - w^2) for w > 0, by singularity
// subtraction on the 1/(x - w) factor.
template <class H>
double pv_even(const H& h, double w, double upper, std::span<const double> features,
               bool singular_origin, const quad::Options& opt) {
    std::vector<double> bp(features.begin(), features.end());
    bp.push_back(w);
    auto run = [&](auto&& f) {
        return singular_origin ? quad::integrate_sqrt_origin(f, upper, bp, opt).value
                               : quad::integrate(f, 0.0, upper, bp, opt).value;
    };
    const double plus = run([&](double x) { return h(x) / (x + w); });
    if (w >= upper) {
        const double minus = run([&](double x) { return h(x) / (x - w); });
        return (minus - plus) / (2.0 * w);
    }
    const double hw = h(w);
    const double logterm = hw * std::log((upper - w) / w);
    // The subtracted integrand can vanish identically (h constant); give the
    // quadrature an absolute floor tied to the size of the other terms.
    quad::Options o2 = opt;
    o2.abs_tol = std::max(opt.abs_tol, 1e-15 * (std::abs(plus) + std::abs(logterm) + std::abs(hw) * upper));
    auto f = [&](double x) { return x == w ? 0.0 : (h(x) - hw) / (x - w); };
    const double minus = (singular_origin ? quad::integrate_sqrt_origin(f, upper, bp, o2).value
                                          : quad::integrate(f, 0.0, upper, bp, o2).value) +
                         logterm;
    return (minus - plus) / (2.0 * w);
}

}  // namespace detail

/// Laplace transform of the dissipation kernel at s = i w (boundary value from
/// Re s > 0): Re = pi I(|w|) / (2|w|), Im = w PV int I(x)/(x (x^2 - w^2)) dx.
inline cplx dissipation_kernel_laplace(std::span<const SpectralDensity> densities, double w,
                                       const quad::Options& opt = {1e-10, 0.0, 1e-15, 20000}) {
    cplx total{};
    const double aw = std::abs(w);
    for (const auto& sd : densities) {
        if (sd.symbolic()) {
            const auto& d = sd.dirac_mode();
            const double den = d.frequency * d.frequency - w * w;
            if (den == 0.0) throw DomainError("dissipation kernel evaluated on a dirac mode");
            total += cplx(0.0, w * d.weight / (d.frequency * den));
            continue;
        }
        const double kappa = sd.low_frequency_exponent();
        if (sd.kind() == DensityKind::PowerLaw && kappa <= 0.0)
            throw ConfigError("dissipation kernel diverges for power-law exponent <= 0");
        if (sd.kind() == DensityKind::Tabulated) {
            const auto& t = std::get<Tabulated>(sd.variant());
            if (t.omega.front() == 0.0 && t.value.front() > 0.0)
                throw ConfigError("dissipation kernel diverges for a tabulated density with I(0) > 0");
        }
        if (aw == 0.0) {
            const double eps = 1e-9 * sd.support_upper();
            total += 0.5 * std::numbers::pi * sd(eps) / eps;
            continue;
        }
        const double re = 0.5 * std::numbers::pi * sd(aw) / aw;
        const auto feats = sd.features();
        auto h = [&sd](double x) { return x > 0 ? sd(x) / x : 0.0; };
        const double pv = detail::pv_even(h, aw, sd.support_upper(), feats, kappa < 1.0, opt);
        total += cplx(re, w * pv);
    }
    return total;
}

/// Real frequency shift PV int x I(x) / (x^2 - w^2) dx a density imprints on
/// the oscillator's restoring term at frequency w.
inline double reactive_shift(const SpectralDensity& sd, double w,
                             const quad::Options& opt = {1e-10, 0.0, 1e-15, 20000}) {
    if (sd.symbolic()) {
        const auto& d = sd.dirac_mode();
        const double den = d.frequency * d.frequency - w * w;
        if (den == 0.0) throw DomainError("reactive shift evaluated on a dirac mode");
        return d.weight * d.frequency / den;
    }
    auto h = [&sd](double x) { return x * sd(x); };
    const auto feats = sd.features();
    if (w == 0.0) return quad::integrate(sd, 0.0, sd.support_upper(), feats, opt).value;
    return detail::pv_even(h, std::abs(w), sd.support_upper(), feats, false, opt);
}

}  // namespace qfridge
