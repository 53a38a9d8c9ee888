// commands.hpp - the analyses behind each CLI subcommand. Each returns a
// table; the binary only parses flags, picks the config and writes files.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qfridge/config.hpp"
#include "qfridge/csv.hpp"
#include "qfridge/currents.hpp"
#include "qfridge/floquet.hpp"
#include "qfridge/limits.hpp"
#include "qfridge/oracle.hpp"
#include "qfridge/spectrum.hpp"

namespace qfridge::commands {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kValidation = 4 };

/// Exit code for a library exception.
inline int exit_code_for(const Error& e) {
    if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
    if (dynamic_cast<const DomainError*>(&e)) return kNumerical;
    return kConfig;
}

using Summary = std::vector<std::pair<std::string, double>>;

// ---------------------------------------------------------------------------
// floquet

inline csv::Table floquet(const config::RunConfig& c) {
    const auto sys = c.system();
    const auto drive = c.drive();
    std::vector<double> grid;
    for (int i = 0; i < c.grid_points; ++i)
        grid.push_back(c.grid_points == 1 ? c.grid_lower
                                          : c.grid_lower + (c.grid_upper - c.grid_lower) * i / (c.grid_points - 1));
    FloquetOptions o;
    o.residual_tol = c.residual_tol;
    o.convergence_tol = c.convergence_tol;
    o.max_order = c.max_order;
    o.mode = c.mode;
    o.convention = c.convention;
    const auto sol = c.order > 0 ? solve_floquet(sys, drive, grid, c.order, o) : solve_floquet_auto(sys, drive, grid, o);
    const double residual = floquet_residual(sol);
    csv::Table t("floquet", {"omega", "k", "re", "im", "abs2"});
    t.meta("order", std::to_string(sol.order));
    t.meta("mode", to_string(sol.mode));
    t.meta("residual", residual);
    if (sol.convergence >= 0) t.meta("convergence", sol.convergence);
    const int kmax = drive.undriven() ? 0 : sol.order;
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
        for (int k = -kmax; k <= kmax; ++k) {
            const cplx a = sol.at(i, k);
            t.row({sol.grid[i], static_cast<long long>(k), a.real(), a.imag(), std::norm(a)});
        }
    return t;
}

// ---------------------------------------------------------------------------
// currents

inline HeatBreakdown breakdown(const config::RunConfig& c) { return heat_breakdown(c.response(), c.reservoirs()); }

inline Summary currents_summary(const config::RunConfig& c) {
    const auto h = breakdown(c);
    return {{"q_a_rp", h.a.rp},   {"q_a_rh", h.a.rh},   {"q_a_nrh", h.a.nrh}, {"q_a", h.a.total()},
            {"q_b_rp", h.b.rp},   {"q_b_rh", h.b.rh},   {"q_b_nrh", h.b.nrh}, {"q_b", h.b.total()},
            {"work", h.work},     {"closure_defect", h.closure_defect}, {"error_estimate", h.error_estimate}};
}

inline csv::Table currents(const config::RunConfig& c) {
    const auto h = breakdown(c);
    csv::Table t("currents", {"reservoir", "rp", "rh", "nrh", "total"});
    t.meta("work", h.work);
    t.meta("closure_defect", h.closure_defect);
    t.meta("error_estimate", h.error_estimate);
    t.meta("sign", "positive heat current means the reservoir loses energy");
    for (Label l : {Label::A, Label::B}) {
        const auto& ch = h[l];
        t.row({std::string(to_string(l)), ch.rp, ch.rh, ch.nrh, ch.total()});
    }
    return t;
}

// ---------------------------------------------------------------------------
// limits

inline CoolingReport cooling_report(const config::RunConfig& c) {
    const auto sys = c.system();
    const double wm = c.motional_frequency();
    switch (c.limits_method) {
        case config::LimitsMethod::Optimize: {
            OptimizeOptions o;
            o.mode = c.mode;
            o.order = c.order > 0 ? c.order : default_order(c.drive());
            o.convention = c.convention;
            const double lo = std::isnan(c.limits_lower) ? 1e-6 * sys.omega0 : c.limits_lower;
            const double hi = std::isnan(c.limits_upper) ? sys.omega0 + wm : c.limits_upper;
            if (!(hi > lo)) throw ConfigError("limits.upper: must be > limits.lower");
            return optimize_drive(sys, c.reservoirs(), c.drive(), {lo, hi}, o);
        }
        case config::LimitsMethod::LeadingOrder: {
            CoolingReport r;
            r.provenance = Provenance::LeadingOrder;
            r.omega_d = c.drive_frequency;
            r.n_bar =
                occupation_leading_order(sys, c.density(Label::B), wm, c.drive_frequency, c.amplitude, c.convention);
            r.feasible = std::isfinite(r.n_bar);
            r.regime = classify_regime(sys, wm, c.drive_frequency);
            return r;
        }
        case config::LimitsMethod::Sideband: return sideband_limit(sys, c.density(Label::B), wm);
        case config::LimitsMethod::Doppler: return doppler_limit(sys, wm);
        case config::LimitsMethod::SlowSd: return optimize_slow_sd(sys, wm);
        case config::LimitsMethod::HalfFrequency: {
            CoolingReport r;
            r.provenance = Provenance::LeadingOrder;
            r.omega_d = wm;
            r.analytic_omega_d = wm;
            r.analytic_agrees = true;
            r.regime = Regime::HalfFrequency;
            r.n_bar = half_frequency_limit(sys, c.density(Label::B), wm, c.amplitude, c.convention);
            r.feasible = std::isfinite(r.n_bar);
            return r;
        }
        case config::LimitsMethod::Structured: {
            CoolingReport r;
            r.provenance = Provenance::ClosedForm;
            r.omega_d = sys.omega0 - wm;
            r.analytic_omega_d = r.omega_d;
            r.analytic_agrees = true;
            r.n_bar = structured_limit(sys, c.kappa, wm);
            r.feasible = true;
            r.regime = classify_regime(sys, wm, r.omega_d);
            return r;
        }
    }
    throw ConfigError("limits.method: unhandled");
}

inline Summary limits_summary(const config::RunConfig& c) {
    const auto r = cooling_report(c);
    return {{"n_bar", r.n_bar}, {"omega_d", r.omega_d}, {"analytic_omega_d", r.analytic_omega_d},
            {"k_convergence", r.k_convergence}};
}

inline csv::Table limits(const config::RunConfig& c) {
    const auto r = cooling_report(c);
    csv::Table t("limits", {"method", "regime", "provenance", "n_bar", "omega_d", "analytic_omega_d",
                            "analytic_agrees", "feasible", "k_convergence", "evaluations"});
    if (c.limits_method == config::LimitsMethod::Structured && c.kappa > 0) {
        const auto band = critical_ratio(c.kappa);
        t.meta("critical_lower", band.lower);
        t.meta("critical_upper", band.upper);
        t.meta("critical_full_band", band.full_band ? "true" : "false");
    }
    t.row({std::string(to_string(c.limits_method)), std::string(to_string(r.regime)),
           std::string(to_string(r.provenance)), r.n_bar, r.omega_d, r.analytic_omega_d,
           static_cast<long long>(r.analytic_agrees), static_cast<long long>(r.feasible), r.k_convergence,
           static_cast<long long>(r.evaluations)});
    return t;
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumRun {
    SpectrumParams params;
    double scale = 1.0;  // multiplies rates into output units
    std::string unit = "omega0";
    std::string warning;
};

inline SpectrumRun spectrum_run(const config::RunConfig& c) {
    SpectrumRun s;
    if (c.ion) {
        const auto m = ion_mapping(*c.ion);
        s.params = m.spectrum;
        s.scale = m.time_scale;
        s.unit = "photons/s";
        s.warning = m.warning;
    } else {
        s.params = c.spectrum_params();
    }
    return s;
}

inline Summary spectrum_summary(const config::RunConfig& c) {
    const auto s = spectrum_run(c);
    const PhotonSpectrum ps(s.params);
    const double nrh = ps.line_rate_nrh(), pairs = ps.pair_rate();
    return {{"occupation", s.params.occupation},
            {"rate_rp", s.scale * ps.line_rate_rp()},
            {"rate_nrh", s.scale * nrh},
            {"rate_lines", s.scale * (ps.line_rate_rp() + nrh)},
            {"rate_pairs", s.scale * pairs},
            {"ratio", nrh > 0 ? pairs / nrh : std::nan("")}};
}

inline csv::Table spectrum(const config::RunConfig& c) {
    const auto s = spectrum_run(c);
    GridSpec g;
    g.lower = c.spectrum_lower;
    g.upper = c.spectrum_upper;
    g.points = c.spectrum_points;
    g.line_points = c.line_points;
    const auto tab = build_spectrum(PhotonSpectrum(s.params), g);
    csv::Table t("spectrum", {"omega", "rp", "nrh", "pairs"});
    t.meta("unit", s.unit);
    t.meta("occupation", tab.occupation);
    t.meta("line_width", tab.line_width);
    t.meta("drive_frequency", s.params.drive.frequency());
    t.meta("motional_frequency", s.params.omega_m);
    t.meta("rate_rp", s.scale * tab.rate_rp);
    t.meta("rate_nrh", s.scale * tab.rate_nrh);
    t.meta("rate_lines", s.scale * (tab.rate_rp + tab.rate_nrh));
    t.meta("rate_pairs", s.scale * tab.rate_pairs);
    t.meta("ratio", tab.ratio);
    if (!s.warning.empty()) t.meta("warning", s.warning);
    for (std::size_t i = 0; i < tab.omega.size(); ++i)
        t.row({tab.omega[i], s.scale * tab.rp[i], s.scale * tab.nrh[i], s.scale * tab.pairs[i]});
    return t;
}

// ---------------------------------------------------------------------------
// sweep

inline std::vector<double> sweep_values(const config::RunConfig& c) {
    std::vector<double> v;
    const int n = c.sweep_points;
    for (int i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        v.push_back(c.sweep_log ? std::exp(std::log(c.sweep_from) + u * (std::log(c.sweep_to) - std::log(c.sweep_from)))
                                : c.sweep_from + u * (c.sweep_to - c.sweep_from));
    }
    return v;
}

/// Runs every sweep point on `jobs` workers; rows come out in axis order.
inline csv::Table sweep(const config::RunConfig& c, int jobs = 0) {
    if (c.sweep_parameter.empty()) throw ConfigError("sweep.parameter: no [sweep] section in the configuration");
    const auto values = sweep_values(c);
    // Build every point first so config errors surface before any work.
    std::vector<config::RunConfig> points;
    for (double v : values) points.push_back(config::with_value(c, c.sweep_parameter, v));
    std::function<Summary(const config::RunConfig&)> run;
    if (c.sweep_command == "limits") run = limits_summary;
    else if (c.sweep_command == "currents") run = currents_summary;
    else run = spectrum_summary;

    std::vector<Summary> out(points.size());
    std::vector<std::string> errors(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
            try {
                out[i] = run(points[i]);
            } catch (const NumericalError& e) {
                errors[i] = e.what();
            }
        }
    };
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(points.size()));
    {
        std::vector<std::jthread> pool;
        for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
    }
    csv::Table t("sweep", {"parameter", "value", "quantity", "result"});
    t.meta("sweep_command", c.sweep_command);
    int failed = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!errors[i].empty()) {
            ++failed;
            t.row({c.sweep_parameter, values[i], std::string("error"), std::nan("")});
            continue;
        }
        for (const auto& [q, r] : out[i]) t.row({c.sweep_parameter, values[i], q, r});
    }
    t.meta("failed_points", std::to_string(failed));
    return t;
}

// ---------------------------------------------------------------------------
// validate

struct Check {
    std::string name;
    double oracle = 0.0, reference = 0.0, error = 0.0, tolerance = 0.0;
    bool pass = false;
};

struct Validation {
    oracle::ValidationReport report;
    std::vector<Check> checks;
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
};

inline Validation validate(const config::RunConfig& c) {
    Validation v;
    v.report = oracle::validate_against_floquet(c.oracle_preset());
    const auto& r = v.report;
    v.checks.push_back({"heat_current_a", r.q_a_oracle, r.q_a_floquet, r.q_a_error(), c.tol_heat,
                        r.q_a_error() <= c.tol_heat});
    v.checks.push_back({"occupation", r.n_bar_oracle, r.n_bar_floquet, r.n_bar_error(), c.tol_occupation,
                        r.n_bar_error() <= c.tol_occupation});
    v.checks.push_back({"drive_identity", r.drive_sxp, r.q_sum, r.identity_error(), c.tol_identity,
                        r.identity_error() <= c.tol_identity});
    const double pos = 0.5 - r.worst_symplectic;
    v.checks.push_back({"positivity", r.worst_symplectic, 0.5, std::max(0.0, pos), 1e-9, pos <= 1e-9});
    return v;
}

inline csv::Table validation_table(const Validation& v) {
    csv::Table t("validate", {"check", "oracle", "reference", "error", "tolerance", "pass"});
    t.meta("t_rec", v.report.t_rec);
    t.meta("horizon", v.report.horizon);
    t.meta("transient_period", std::to_string(v.report.transient));
    t.meta("dressing", v.report.dressing);
    for (const auto& c : v.checks)
        t.row({c.name, c.oracle, c.reference, c.error, c.tolerance, std::string(c.pass ? "PASS" : "FAIL")});
    return t;
}

}  // namespace qfridge::commands
