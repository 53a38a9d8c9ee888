// config.hpp - run configuration: flat sectioned key/value text, a typed
// RunConfig, canonical dump and the shipped presets.
#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qfridge/errors.hpp"
#include "qfridge/floquet.hpp"
#include "qfridge/limits.hpp"
#include "qfridge/model.hpp"
#include "qfridge/oracle.hpp"
#include "qfridge/spectrum.hpp"

namespace qfridge::config {

#ifdef QFRIDGE_VERSION
inline constexpr const char* kVersion = QFRIDGE_VERSION;
#else
inline constexpr const char* kVersion = "0.3.0";
#endif

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Raw document

struct Entry {
    std::string value;
    int line = 0;
};

/// section -> key -> entry, with the section header lines kept for messages.
struct Document {
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::map<std::string, int> section_line;
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline ConfigError line_error(int line, const std::string& what) {
    return ConfigError("config line " + std::to_string(line) + ": " + what);
}

inline Document parse_document(std::string_view text) {
    Document d;
    std::string section;
    int n = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string raw(text.substr(pos, end - pos));
        pos = end + 1;
        ++n;
        if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw line_error(n, "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw line_error(n, "empty section name");
            if (d.section_line.count(section)) throw line_error(n, "duplicate section [" + section + "]");
            d.section_line[section] = n;
            d.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw line_error(n, "expected key = value");
        if (section.empty()) throw line_error(n, "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw line_error(n, "empty key");
        auto& sec = d.sections[section];
        if (sec.count(key)) throw line_error(n, section + "." + key + ": duplicate key");
        sec[key] = {value, n};
    }
    return d;
}

// ---------------------------------------------------------------------------
// Typed configuration

enum class DensityShape { None, Dirac, PowerLaw, Ohmic, Matched, Lorentzian };

inline const char* to_string(DensityShape k) {
    switch (k) {
        case DensityShape::None: return "none";
        case DensityShape::Dirac: return "dirac";
        case DensityShape::PowerLaw: return "power-law";
        case DensityShape::Ohmic: return "ohmic";
        case DensityShape::Matched: return "matched";
        case DensityShape::Lorentzian: return "lorentzian";
    }
    return "?";
}

/// Allowed numeric keys per shape, with defaults (NaN = required).
inline const std::vector<std::pair<std::string, double>>& shape_keys(DensityShape k) {
    constexpr double req = std::numeric_limits<double>::quiet_NaN();
    constexpr double inf = std::numeric_limits<double>::infinity();
    static const std::vector<std::pair<std::string, double>> none{},
        dirac{{"weight", req}, {"frequency", req}},
        power{{"prefactor", req}, {"exponent", req}, {"reference", 1.0}, {"cutoff", inf}},
        ohmic{{"rate", req}, {"cutoff", inf}},
        matched{{"exponent", 1.0}, {"cutoff", inf}},
        lorentz{{"weight", req}, {"center", req}, {"width", req}};
    switch (k) {
        case DensityShape::Dirac: return dirac;
        case DensityShape::PowerLaw: return power;
        case DensityShape::Ohmic: return ohmic;
        case DensityShape::Matched: return matched;
        case DensityShape::Lorentzian: return lorentz;
        default: return none;
    }
}

struct ReservoirConfig {
    DensityShape shape = DensityShape::None;
    std::map<std::string, double> params;
    double temperature = 0.0;
    // Set instead of temperature for a single mode: its occupation.
    std::optional<double> occupation;

    bool operator==(const ReservoirConfig&) const = default;
};

enum class LimitsMethod { Optimize, LeadingOrder, Sideband, Doppler, SlowSd, HalfFrequency, Structured };

inline const char* to_string(LimitsMethod m) {
    switch (m) {
        case LimitsMethod::Optimize: return "optimize";
        case LimitsMethod::LeadingOrder: return "leading-order";
        case LimitsMethod::Sideband: return "sideband";
        case LimitsMethod::Doppler: return "doppler";
        case LimitsMethod::SlowSd: return "slow-sd";
        case LimitsMethod::HalfFrequency: return "half-frequency";
        case LimitsMethod::Structured: return "structured";
    }
    return "?";
}

struct RunConfig {
    // [system]
    double omega0 = 1.0;
    double gamma = 0.01;
    GreenConvention convention = GreenConvention::Adopted;
    // [drive]; static_part NaN -> omega0^2
    double drive_frequency = 0.99;
    double amplitude = 1e-3;
    double static_part = std::numeric_limits<double>::quiet_NaN();
    std::map<int, std::complex<double>> fourier;  // extra harmonics k >= 2
    // [reservoir.A], [reservoir.B]
    ReservoirConfig a{DensityShape::Dirac, {{"weight", 1e-6}, {"frequency", 0.01}}, 0.0, std::nullopt};
    ReservoirConfig b{DensityShape::Matched, {{"exponent", 1.0}, {"cutoff", 50.0}}, 0.0, std::nullopt};
    // [solver]; order 0 -> automatic
    CoefficientMode mode = CoefficientMode::Exact;
    int order = 0;
    double residual_tol = 1e-10;
    double convergence_tol = 1e-8;
    int max_order = 32;
    // [grid] frequency grid of the floquet table
    double grid_lower = 0.0;
    double grid_upper = 2.0;
    int grid_points = 401;
    // [limits]; bracket NaN -> (0, w0 + w_m)
    LimitsMethod limits_method = LimitsMethod::Optimize;
    double limits_lower = std::numeric_limits<double>::quiet_NaN();
    double limits_upper = std::numeric_limits<double>::quiet_NaN();
    double kappa = 0.5;
    // [spectrum]; occupation NaN -> self-consistent
    double line_width = std::numeric_limits<double>::quiet_NaN();
    double line_window = 5.0;
    double spectrum_occupation = std::numeric_limits<double>::quiet_NaN();
    double spectrum_lower = 0.0;
    double spectrum_upper = std::numeric_limits<double>::quiet_NaN();
    int spectrum_points = 4001;
    int line_points = 201;
    // [ion]: when present, spectrum parameters come from the ion mapping
    std::optional<IonPreset> ion;
    // [sweep]
    std::string sweep_parameter;  // "section.key", empty -> no sweep
    std::string sweep_command = "limits";
    double sweep_from = 0.0, sweep_to = 0.0;
    int sweep_points = 11;
    bool sweep_log = false;
    // [oracle]
    int oracle_modes = 400;
    int oracle_periods = 200;
    int oracle_window = 100;
    double oracle_boost = 8.0;
    double oracle_focus = 10.0;
    double tol_heat = 0.10;
    double tol_occupation = 0.15;
    double tol_identity = 0.05;

    bool operator==(const RunConfig& o) const;

    double v0() const { return std::isnan(static_part) ? omega0 * omega0 : static_part; }
    SystemParams system() const { return SystemParams(omega0, gamma); }
    DrivePlan drive() const;
    DrivePlan drive_at(double wd) const;
    SpectralDensity density(Label l) const;
    Reservoirs reservoirs() const;
    double motional_frequency() const;
    FloquetResponse response() const;
    SpectrumParams spectrum_params() const;
    oracle::OraclePreset oracle_preset() const;
};

namespace detail {

inline bool same(double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; }

}  // namespace detail

inline bool RunConfig::operator==(const RunConfig& o) const {
    using detail::same;
    auto ion_eq = [](const std::optional<IonPreset>& x, const std::optional<IonPreset>& y) {
        if (x.has_value() != y.has_value()) return false;
        if (!x) return true;
        return x->omega_m == y->omega_m && x->omega0 == y->omega0 && x->gamma == y->gamma && x->rabi == y->rabi &&
               x->lamb_dicke == y->lamb_dicke;
    };
    return omega0 == o.omega0 && gamma == o.gamma && convention == o.convention &&
           drive_frequency == o.drive_frequency && amplitude == o.amplitude && same(static_part, o.static_part) &&
           fourier == o.fourier && a == o.a && b == o.b && mode == o.mode && order == o.order &&
           residual_tol == o.residual_tol && convergence_tol == o.convergence_tol && max_order == o.max_order &&
           grid_lower == o.grid_lower && grid_upper == o.grid_upper && grid_points == o.grid_points &&
           limits_method == o.limits_method && same(limits_lower, o.limits_lower) &&
           same(limits_upper, o.limits_upper) && kappa == o.kappa && same(line_width, o.line_width) &&
           line_window == o.line_window && same(spectrum_occupation, o.spectrum_occupation) &&
           spectrum_lower == o.spectrum_lower && same(spectrum_upper, o.spectrum_upper) &&
           spectrum_points == o.spectrum_points && line_points == o.line_points && ion_eq(ion, o.ion) &&
           sweep_parameter == o.sweep_parameter && sweep_command == o.sweep_command &&
           sweep_from == o.sweep_from && sweep_to == o.sweep_to && sweep_points == o.sweep_points &&
           sweep_log == o.sweep_log && oracle_modes == o.oracle_modes && oracle_periods == o.oracle_periods &&
           oracle_window == o.oracle_window && oracle_boost == o.oracle_boost && oracle_focus == o.oracle_focus &&
           tol_heat == o.tol_heat && tol_occupation == o.tol_occupation && tol_identity == o.tol_identity;
}

inline DrivePlan RunConfig::drive_at(double wd) const {
    std::map<int, cplx> c{{0, v0()}, {1, amplitude}, {-1, amplitude}};
    for (auto [k, v] : fourier) {
        c[k] = v;
        c[-k] = std::conj(v);
    }
    return DrivePlan(std::move(c), wd);
}

inline DrivePlan RunConfig::drive() const { return drive_at(drive_frequency); }

inline SpectralDensity RunConfig::density(Label l) const {
    const auto& r = l == Label::A ? a : b;
    auto p = [&](const char* k) { return r.params.at(k); };
    switch (r.shape) {
        case DensityShape::Dirac: return SpectralDensity::dirac(p("weight"), p("frequency"));
        case DensityShape::PowerLaw:
            return SpectralDensity::power_law(p("prefactor"), p("exponent"), p("reference"), p("cutoff"));
        case DensityShape::Ohmic: return SpectralDensity::ohmic(p("rate"), p("cutoff"));
        case DensityShape::Matched: return matched_bath_density(system(), p("exponent"), p("cutoff"));
        case DensityShape::Lorentzian: return SpectralDensity::lorentzian(p("weight"), p("center"), p("width"));
        case DensityShape::None: break;
    }
    throw ConfigError(std::string("reservoir.") + to_string(l) + ".kind: no spectral density configured");
}

inline double RunConfig::motional_frequency() const {
    if (a.shape != DensityShape::Dirac) throw ConfigError("reservoir.A.kind: this command needs kind = dirac");
    return a.params.at("frequency");
}

inline Reservoirs RunConfig::reservoirs() const {
    auto make = [&](Label l) {
        const auto& r = l == Label::A ? a : b;
        double T = r.temperature;
        if (r.occupation) T = temperature_for_occupation(r.params.at("frequency"), *r.occupation);
        return Reservoir(l, density(l), T);
    };
    return Reservoirs(make(Label::A), make(Label::B));
}

inline FloquetResponse RunConfig::response() const {
    return FloquetResponse(system(), drive(), order > 0 ? order : default_order(drive()), mode, convention);
}

inline SpectrumParams RunConfig::spectrum_params() const {
    if (ion) return ion_mapping(*ion).spectrum;
    SpectrumParams p;
    p.system = system();
    p.drive = drive();
    p.bath = density(Label::B);
    p.omega_m = motional_frequency();
    p.weight_a = a.params.at("weight");
    p.line_width = line_width;
    p.line_window = line_window;
    p.mode = mode;
    p.order = order > 0 ? order : -1;
    p.convention = convention;
    p.occupation = std::isnan(spectrum_occupation) ? steady_occupation(response(), reservoirs()) : spectrum_occupation;
    return p;
}

inline oracle::OraclePreset RunConfig::oracle_preset() const {
    oracle::OraclePreset p;
    if (b.shape != DensityShape::Matched || b.params.at("exponent") != 1.0 || !std::isfinite(b.params.at("cutoff")))
        throw ConfigError("reservoir.B: validate needs kind = matched, exponent = 1 and a finite cutoff");
    if (!fourier.empty() || !std::isnan(static_part)) throw ConfigError("drive: validate needs a plain harmonic drive");
    p.omega0 = omega0;
    p.gamma = gamma;
    p.omega_m = motional_frequency();
    p.weight_a = a.params.at("weight");
    p.amplitude = amplitude;
    p.omega_d = drive_frequency;
    p.cutoff = b.params.at("cutoff");
    p.temperature_b = b.temperature;
    p.modes = oracle_modes;
    p.periods = oracle_periods;
    p.window_first = oracle_window;
    p.boost = oracle_boost;
    p.focus_halfwidth_gammas = oracle_focus;
    return p;
}

// ---------------------------------------------------------------------------
// Reading

namespace detail {

class Reader {
public:
    explicit Reader(const Document& d) : d_(d) {}

    bool has_section(const std::string& s) const { return d_.sections.count(s) > 0; }

    const Entry* find(const std::string& s, const std::string& k) {
        auto it = d_.sections.find(s);
        if (it == d_.sections.end()) return nullptr;
        auto e = it->second.find(k);
        if (e == it->second.end()) return nullptr;
        used_.insert(s + "\n" + k);
        return &e->second;
    }

    ConfigError error(const std::string& s, const std::string& k, const std::string& what) const {
        int line = 0;
        if (auto it = d_.sections.find(s); it != d_.sections.end())
            if (auto e = it->second.find(k); e != it->second.end()) line = e->second.line;
        if (line == 0 && d_.section_line.count(s)) line = d_.section_line.at(s);
        const std::string field = s + "." + k + ": " + what;
        return line > 0 ? line_error(line, field) : ConfigError(field);
    }

    void real(const std::string& s, const std::string& k, double& out) {
        if (auto e = find(s, k)) {
            auto v = parse_double(e->value);
            if (!v) throw error(s, k, "expected a number, got '" + e->value + "'");
            out = *v;
        }
    }

    void integer(const std::string& s, const std::string& k, int& out) {
        if (auto e = find(s, k)) {
            int v = 0;
            auto r = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
            if (r.ec != std::errc() || r.ptr != e->value.data() + e->value.size())
                throw error(s, k, "expected an integer, got '" + e->value + "'");
            out = v;
        }
    }

    void text(const std::string& s, const std::string& k, std::string& out) {
        if (auto e = find(s, k)) out = e->value;
    }

    template <class E>
    void choice(const std::string& s, const std::string& k, E& out, std::initializer_list<E> options) {
        auto e = find(s, k);
        if (!e) return;
        std::string names;
        for (E o : options) {
            if (e->value == to_string(o)) {
                out = o;
                return;
            }
            names += std::string(names.empty() ? "" : ", ") + to_string(o);
        }
        throw error(s, k, "unknown value '" + e->value + "' (expected " + names + ")");
    }

    void boolean(const std::string& s, const std::string& k, bool& out) {
        if (auto e = find(s, k)) {
            if (e->value == "true") out = true;
            else if (e->value == "false") out = false;
            else throw error(s, k, "expected true or false");
        }
    }

    /// Every key not read is an error.
    void check_unused() const {
        for (const auto& [s, keys] : d_.sections) {
            if (!known_section(s)) throw line_error(d_.section_line.at(s), "unknown section [" + s + "]");
            for (const auto& [k, e] : keys)
                if (!used_.count(s + "\n" + k)) throw line_error(e.line, s + "." + k + ": unknown key");
        }
    }

private:
    static bool known_section(const std::string& s) {
        static const std::set<std::string> known{"system", "drive", "reservoir.A", "reservoir.B", "solver", "grid",
                                                 "limits", "spectrum", "ion", "sweep", "oracle"};
        return known.count(s) > 0;
    }

    const Document& d_;
    std::set<std::string> used_;
};

inline void read_reservoir(Reader& r, const std::string& s, ReservoirConfig& out) {
    if (!r.has_section(s)) return;
    ReservoirConfig c;
    c.shape = DensityShape::None;
    r.choice(s, "kind", c.shape,
             {DensityShape::Dirac, DensityShape::PowerLaw, DensityShape::Ohmic, DensityShape::Matched,
              DensityShape::Lorentzian});
    if (c.shape == DensityShape::None) throw r.error(s, "kind", "missing");
    for (const auto& [k, def] : shape_keys(c.shape)) {
        double v = def;
        r.real(s, k, v);
        if (std::isnan(v)) throw r.error(s, k, "required for kind = " + std::string(to_string(c.shape)));
        c.params[k] = v;
    }
    r.real(s, "temperature", c.temperature);
    if (auto e = r.find(s, "occupation")) {
        auto v = parse_double(e->value);
        if (!v) throw r.error(s, "occupation", "expected a number");
        if (c.shape != DensityShape::Dirac) throw r.error(s, "occupation", "only valid for kind = dirac");
        if (r.find(s, "temperature")) throw r.error(s, "occupation", "give temperature or occupation, not both");
        c.occupation = *v;
    }
    out = c;
}

}  // namespace detail

/// Range checks; messages name the field.
inline void validate(const RunConfig& c) {
    auto need = [](bool ok, const std::string& field, const std::string& what) {
        if (!ok) throw ConfigError(field + ": " + what);
    };
    need(c.omega0 > 0 && std::isfinite(c.omega0), "system.omega0", "must be > 0");
    need(c.gamma > 0 && std::isfinite(c.gamma), "system.gamma", "must be > 0");
    need(c.drive_frequency >= 0 && std::isfinite(c.drive_frequency), "drive.frequency", "must be >= 0");
    need(std::isfinite(c.amplitude), "drive.amplitude", "must be finite");
    need(std::isnan(c.static_part) || std::isfinite(c.static_part), "drive.static", "must be finite");
    for (auto [k, v] : c.fourier) need(k >= 2, "drive.fourier", "harmonic index must be >= 2");
    auto check_res = [&](const ReservoirConfig& r, const std::string& name) {
        need(r.temperature >= 0 && std::isfinite(r.temperature), name + ".temperature", "must be >= 0");
        if (r.occupation) need(*r.occupation >= 0 && std::isfinite(*r.occupation), name + ".occupation", "must be >= 0");
        for (const auto& [k, v] : r.params) {
            if (k == "cutoff") need(v > 0, name + ".cutoff", "must be > 0");
            else if (k == "exponent") need(v > -1 && std::isfinite(v), name + ".exponent", "must be > -1");
            else need(std::isfinite(v) && (k == "center" || v > 0), name + "." + k, "must be > 0");
        }
    };
    check_res(c.a, "reservoir.A");
    check_res(c.b, "reservoir.B");
    need(c.order >= 0 && c.order <= 64, "solver.order", "must be in [0, 64]");
    need(c.residual_tol > 0, "solver.residual_tol", "must be > 0");
    need(c.convergence_tol > 0, "solver.convergence_tol", "must be > 0");
    need(c.max_order >= 2, "solver.max_order", "must be >= 2");
    need(c.grid_points >= 1, "grid.points", "must be >= 1");
    need(c.grid_upper >= c.grid_lower, "grid.upper", "must be >= grid.lower");
    need(c.kappa > -1, "limits.kappa", "must be > -1");
    need(c.line_window > 0, "spectrum.line_window", "must be > 0");
    need(std::isnan(c.line_width) || c.line_width > 0, "spectrum.line_width", "must be > 0");
    need(c.spectrum_points >= 2, "spectrum.points", "must be >= 2");
    need(c.line_points >= 0, "spectrum.line_points", "must be >= 0");
    if (c.ion) {
        try {
            c.ion->validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("ion: ") + e.what());
        }
    }
    if (!c.sweep_parameter.empty()) {
        need(c.sweep_points >= 1, "sweep.points", "must be >= 1");
        need(!c.sweep_log || (c.sweep_from > 0 && c.sweep_to > 0), "sweep.from", "log sweeps need positive ends");
        need(c.sweep_command == "limits" || c.sweep_command == "currents" || c.sweep_command == "spectrum",
             "sweep.command", "must be limits, currents or spectrum");
    }
    need(c.oracle_modes >= 50, "oracle.modes", "must be >= 50");
    need(c.oracle_periods >= 2, "oracle.periods", "must be >= 2");
    need(c.oracle_window >= 0 && c.oracle_window < c.oracle_periods, "oracle.window_first",
         "must be in [0, periods)");
    need(c.tol_heat > 0 && c.tol_occupation > 0 && c.tol_identity > 0, "oracle.tolerances", "must be > 0");
}

/// Keys in `over` replace or extend those in `base`.
inline Document merge(Document base, const Document& over) {
    for (const auto& [s, keys] : over.sections) {
        if (!base.section_line.count(s)) base.section_line[s] = over.section_line.at(s);
        for (const auto& [k, e] : keys) base.sections[s][k] = e;
    }
    return base;
}

inline RunConfig parse(const Document& d) {
    detail::Reader r(d);
    RunConfig c;
    r.real("system", "omega0", c.omega0);
    r.real("system", "gamma", c.gamma);
    r.choice("system", "convention", c.convention, {GreenConvention::Adopted, GreenConvention::HalfWidth});
    r.real("drive", "frequency", c.drive_frequency);
    r.real("drive", "amplitude", c.amplitude);
    r.real("drive", "static", c.static_part);
    if (auto it = d.sections.find("drive"); it != d.sections.end()) {
        for (const auto& [k, e] : it->second) {
            if (k.rfind("fourier.", 0) != 0) continue;
            r.find("drive", k);
            int h = 0;
            const std::string idx = k.substr(8);
            auto res = std::from_chars(idx.data(), idx.data() + idx.size(), h);
            if (res.ec != std::errc() || res.ptr != idx.data() + idx.size() || h < 2)
                throw r.error("drive", k, "harmonic index must be an integer >= 2");
            std::istringstream is(e.value);
            std::string re, im;
            is >> re >> im;
            auto vr = parse_double(re), vi = parse_double(im.empty() ? "0" : im);
            std::string rest;
            if (!vr || !vi || (is >> rest)) throw r.error("drive", k, "expected 're im'");
            c.fourier[h] = {*vr, *vi};
        }
    }
    detail::read_reservoir(r, "reservoir.A", c.a);
    detail::read_reservoir(r, "reservoir.B", c.b);
    r.choice("solver", "mode", c.mode, {CoefficientMode::Exact, CoefficientMode::Perturbative});
    r.integer("solver", "order", c.order);
    r.real("solver", "residual_tol", c.residual_tol);
    r.real("solver", "convergence_tol", c.convergence_tol);
    r.integer("solver", "max_order", c.max_order);
    r.real("grid", "lower", c.grid_lower);
    r.real("grid", "upper", c.grid_upper);
    r.integer("grid", "points", c.grid_points);
    r.choice("limits", "method", c.limits_method,
             {LimitsMethod::Optimize, LimitsMethod::LeadingOrder, LimitsMethod::Sideband, LimitsMethod::Doppler,
              LimitsMethod::SlowSd, LimitsMethod::HalfFrequency, LimitsMethod::Structured});
    r.real("limits", "lower", c.limits_lower);
    r.real("limits", "upper", c.limits_upper);
    r.real("limits", "kappa", c.kappa);
    r.real("spectrum", "line_width", c.line_width);
    r.real("spectrum", "line_window", c.line_window);
    if (auto e = r.find("spectrum", "occupation"); e && e->value != "self") r.real("spectrum", "occupation", c.spectrum_occupation);
    r.real("spectrum", "lower", c.spectrum_lower);
    r.real("spectrum", "upper", c.spectrum_upper);
    r.integer("spectrum", "points", c.spectrum_points);
    r.integer("spectrum", "line_points", c.line_points);
    if (r.has_section("ion")) {
        IonPreset ion;
        r.real("ion", "omega_m", ion.omega_m);
        r.real("ion", "omega0", ion.omega0);
        r.real("ion", "gamma", ion.gamma);
        r.real("ion", "rabi", ion.rabi);
        r.real("ion", "lamb_dicke", ion.lamb_dicke);
        c.ion = ion;
    }
    r.text("sweep", "parameter", c.sweep_parameter);
    r.text("sweep", "command", c.sweep_command);
    r.real("sweep", "from", c.sweep_from);
    r.real("sweep", "to", c.sweep_to);
    r.integer("sweep", "points", c.sweep_points);
    if (auto e = r.find("sweep", "scale")) {
        if (e->value != "linear" && e->value != "log") throw r.error("sweep", "scale", "must be linear or log");
        c.sweep_log = e->value == "log";
    }
    r.integer("oracle", "modes", c.oracle_modes);
    r.integer("oracle", "periods", c.oracle_periods);
    r.integer("oracle", "window_first", c.oracle_window);
    r.real("oracle", "boost", c.oracle_boost);
    r.real("oracle", "focus_halfwidth", c.oracle_focus);
    r.real("oracle", "tol_heat", c.tol_heat);
    r.real("oracle", "tol_occupation", c.tol_occupation);
    r.real("oracle", "tol_identity", c.tol_identity);
    r.check_unused();
    try {
        validate(c);
    } catch (const ConfigError& e) {
        // Re-address the message to the offending line when we know it.
        const std::string msg = e.what();
        const auto colon = msg.find(':');
        const auto dot = msg.find('.');
        if (colon != std::string::npos && dot != std::string::npos && dot < colon) {
            const std::string field = msg.substr(0, colon);
            const auto split = field.rfind('.');
            throw r.error(field.substr(0, split), field.substr(split + 1), trim(msg.substr(colon + 1)));
        }
        throw;
    }
    return c;
}

inline RunConfig parse(std::string_view text) { return parse(parse_document(text)); }

// ---------------------------------------------------------------------------
// Canonical dump: every field, fixed order, shortest round-trip numbers.

inline std::string dump(const RunConfig& c) {
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
    auto num = [&](const char* k, double v) { kv(k, format_double(v)); };
    o << "[system]\n";
    num("omega0", c.omega0);
    num("gamma", c.gamma);
    kv("convention", to_string(c.convention));
    o << "\n[drive]\n";
    num("frequency", c.drive_frequency);
    num("amplitude", c.amplitude);
    if (!std::isnan(c.static_part)) num("static", c.static_part);
    for (auto [k, v] : c.fourier)
        kv(("fourier." + std::to_string(k)).c_str(), format_double(v.real()) + " " + format_double(v.imag()));
    auto res = [&](const char* name, const ReservoirConfig& r) {
        if (r.shape == DensityShape::None) return;
        o << "\n[" << name << "]\n";
        kv("kind", to_string(r.shape));
        for (const auto& [k, def] : shape_keys(r.shape)) num(k.c_str(), r.params.at(k));
        if (r.occupation) num("occupation", *r.occupation);
        else num("temperature", r.temperature);
    };
    res("reservoir.A", c.a);
    res("reservoir.B", c.b);
    o << "\n[solver]\n";
    kv("mode", to_string(c.mode));
    kv("order", std::to_string(c.order));
    num("residual_tol", c.residual_tol);
    num("convergence_tol", c.convergence_tol);
    kv("max_order", std::to_string(c.max_order));
    o << "\n[grid]\n";
    num("lower", c.grid_lower);
    num("upper", c.grid_upper);
    kv("points", std::to_string(c.grid_points));
    o << "\n[limits]\n";
    kv("method", to_string(c.limits_method));
    if (!std::isnan(c.limits_lower)) num("lower", c.limits_lower);
    if (!std::isnan(c.limits_upper)) num("upper", c.limits_upper);
    num("kappa", c.kappa);
    o << "\n[spectrum]\n";
    if (!std::isnan(c.line_width)) num("line_width", c.line_width);
    num("line_window", c.line_window);
    kv("occupation", std::isnan(c.spectrum_occupation) ? "self" : format_double(c.spectrum_occupation));
    num("lower", c.spectrum_lower);
    if (!std::isnan(c.spectrum_upper)) num("upper", c.spectrum_upper);
    kv("points", std::to_string(c.spectrum_points));
    kv("line_points", std::to_string(c.line_points));
    if (c.ion) {
        o << "\n[ion]\n";
        num("omega_m", c.ion->omega_m);
        num("omega0", c.ion->omega0);
        num("gamma", c.ion->gamma);
        num("rabi", c.ion->rabi);
        num("lamb_dicke", c.ion->lamb_dicke);
    }
    if (!c.sweep_parameter.empty()) {
        o << "\n[sweep]\n";
        kv("parameter", c.sweep_parameter);
        kv("command", c.sweep_command);
        num("from", c.sweep_from);
        num("to", c.sweep_to);
        kv("points", std::to_string(c.sweep_points));
        kv("scale", c.sweep_log ? "log" : "linear");
    }
    o << "\n[oracle]\n";
    kv("modes", std::to_string(c.oracle_modes));
    kv("periods", std::to_string(c.oracle_periods));
    kv("window_first", std::to_string(c.oracle_window));
    num("boost", c.oracle_boost);
    num("focus_halfwidth", c.oracle_focus);
    num("tol_heat", c.tol_heat);
    num("tol_occupation", c.tol_occupation);
    num("tol_identity", c.tol_identity);
    return o.str();
}

/// Replaces one "section.key" value and re-validates; used by sweeps.
inline RunConfig with_value(const RunConfig& c, const std::string& field, double value) {
    const auto split = field.rfind('.');
    if (split == std::string::npos) throw ConfigError("sweep.parameter: expected section.key, got '" + field + "'");
    const std::string section = field.substr(0, split), key = field.substr(split + 1);
    std::string text = dump(c);
    // Rewrite or append the key in the canonical text, then reparse.
    std::istringstream in(text);
    std::ostringstream out;
    std::string line, current;
    bool done = false;
    auto emit = [&] { out << key << " = " << format_double(value) << "\n"; done = true; };
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '[') {
            if (current == section && !done) emit();
            current = line.substr(1, line.size() - 2);
            out << line << "\n";
            continue;
        }
        if (current == section && line.rfind(key + " = ", 0) == 0) {
            emit();
            continue;
        }
        out << line << "\n";
    }
    if (current == section && !done) emit();
    if (!done) throw ConfigError("sweep.parameter: section [" + section + "] is not in the configuration");
    return parse(out.str());
}

// ---------------------------------------------------------------------------
// Presets

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> n{"sideband", "doppler", "figure67", "ca-ion", "half-frequency",
                                            "oracle"};
    return n;
}

inline std::string preset_text(const std::string& name) {
    if (name == "sideband")
        return R"([system]
omega0 = 1
gamma = 1e-5

[drive]
frequency = 0.999
amplitude = 1e-3

[reservoir.A]
kind = dirac
weight = 1e-6
frequency = 1e-3
temperature = 0

[reservoir.B]
kind = matched
exponent = 1
cutoff = 50

[grid]
lower = 0.99
upper = 1.01
points = 401

[limits]
method = optimize
lower = 1e-3
upper = 1.001
)";
    if (name == "doppler")
        return R"([system]
omega0 = 1
gamma = 0.02

[drive]
frequency = 0.98
amplitude = 1e-3

[reservoir.A]
kind = dirac
weight = 1e-6
frequency = 1e-3

[reservoir.B]
kind = matched
exponent = 1
cutoff = 50

[limits]
method = slow-sd
)";
    if (name == "figure67")
        return R"([system]
omega0 = 1
gamma = 0.01

[drive]
frequency = 0.9
amplitude = 1e-3

[reservoir.A]
kind = dirac
weight = 1
frequency = 0.1

[reservoir.B]
kind = matched
exponent = 3
cutoff = 10

[grid]
lower = 0
upper = 1.2
points = 601

[spectrum]
line_width = 1e-3
occupation = self
)";
    if (name == "ca-ion")
        return R"(# Scaled units: omega0 of the ion is 1; rates are reported per second.
[system]
omega0 = 1
gamma = 2.6490066225165563e-8

[drive]
frequency = 0.99999997
amplitude = 0.886226925452758

[reservoir.A]
kind = dirac
weight = 1e-6
frequency = 6.622516556291391e-9

[reservoir.B]
kind = matched
exponent = 3
cutoff = 10

[solver]
mode = perturbative

[ion]
omega_m = 31415926.535897933
omega0 = 4743804906920588
gamma = 125663706.14359173
rabi = 6283185.307179586
lamb_dicke = 0.078
)";
    if (name == "half-frequency")
        return R"([system]
omega0 = 1
gamma = 1e-3

[drive]
frequency = 0.5
amplitude = 1e-3

[reservoir.A]
kind = dirac
weight = 1e-6
frequency = 0.5

[reservoir.B]
kind = matched
exponent = 1
cutoff = 50

[limits]
method = half-frequency
)";
    if (name == "oracle")
        return R"([system]
omega0 = 1
gamma = 0.01

[drive]
frequency = 0.79995
amplitude = 0.05

[reservoir.A]
kind = dirac
weight = 1e-4
frequency = 0.2

[reservoir.B]
kind = matched
exponent = 1
cutoff = 1.6

[oracle]
modes = 400
periods = 200
window_first = 100
)";
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (available: " + names + ")");
}

inline RunConfig preset(const std::string& name) { return parse(preset_text(name)); }

}  // namespace qfridge::config
