// limits.hpp - steady occupation of a single motional mode, closed-form
// cooling limits, structured-reservoir bands and drive optimization.
//
// Throughout, reservoir A is the motional mode (a DiracMode density) and B
// is the radiation bath, taken at zero temperature.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qfridge/errors.hpp"
#include "qfridge/floquet.hpp"
#include "qfridge/model.hpp"
#include "qfridge/optimize.hpp"

namespace qfridge {

enum class Regime { SidebandResolved, Doppler, Intermediate, HalfFrequency };
enum class Provenance { ExactFloquet, LeadingOrder, ClosedForm };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::SidebandResolved: return "sideband";
        case Regime::Doppler: return "doppler";
        case Regime::Intermediate: return "intermediate";
        case Regime::HalfFrequency: return "half-frequency";
    }
    return "?";
}

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::ExactFloquet: return "exact-floquet";
        case Provenance::LeadingOrder: return "leading-order";
        case Provenance::ClosedForm: return "closed-form";
    }
    return "?";
}

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

struct CoolingReport {
    double n_bar = kInfeasible;
    double omega_d = std::numeric_limits<double>::quiet_NaN();
    Regime regime = Regime::Intermediate;
    bool feasible = false;
    Provenance provenance = Provenance::ClosedForm;
    // Analytic optimum for the regime (NaN when none) and whether the
    // numeric optimum lies within 5% of it.
    double analytic_omega_d = std::numeric_limits<double>::quiet_NaN();
    bool analytic_agrees = false;
    // Change in n_bar between truncation K and K + 2 (exact Floquet only).
    double k_convergence = std::numeric_limits<double>::quiet_NaN();
    int evaluations = 0;
};

/// Advisory regime label from gamma / w_m and the drive frequency.
inline Regime classify_regime(const SystemParams& sys, double wm, double wd) {
    if (std::isfinite(wd) && std::abs(wd - wm) / wm < 0.05) return Regime::HalfFrequency;
    const double r = sys.gamma / wm;
    if (r < 0.2) return Regime::SidebandResolved;
    if (r > 5.0) return Regime::Doppler;
    return Regime::Intermediate;
}

// ---------------------------------------------------------------------------
// Balance of resonant pumping against pair creation

struct BalanceSums {
    double pump = 0.0;  // sum_k>0 I_B(k wd + wm) |A_k(wm)|^2
    double pair = 0.0;  // sum_k>0 I_B(k wd - wm) |A_{-k}(wm)|^2
};

inline BalanceSums balance_sums(const FloquetResponse& resp, const SpectralDensity& IB, double wm) {
    const auto A = resp.coefficients(wm);
    const int K = resp.order();
    const double wd = resp.drive().frequency();
    BalanceSums s;
    for (int k = 1; k <= K; ++k) {
        s.pump += IB(k * wd + wm) * std::norm(A[K + k]);
        const double u = k * wd - wm;
        if (u > 0) s.pair += IB(u) * std::norm(A[K - k]);
    }
    return s;
}

inline double motional_frequency(const Reservoirs& res) {
    if (!res.a.density.symbolic())
        throw ConfigError("cooling limits need reservoir A to be a single mode (dirac density)");
    return res.a.density.dirac_mode().frequency;
}

/// |Qdot^RP_A / Qdot^NRH_A| at occupation n_bar with T_B = 0. Returns +inf
/// when no pair channel is open.
inline double rp_nrh_ratio(const FloquetResponse& resp, const Reservoirs& res, double n_bar) {
    if (!(n_bar >= 0)) throw DomainError("occupation must be >= 0");
    const double wm = motional_frequency(res);
    const auto s = balance_sums(resp, res.b.density, wm);
    if (s.pair == 0.0) return kInfeasible;
    const double pre = std::isinf(n_bar) ? 1.0 : n_bar / (1.0 + n_bar);
    return pre * s.pump / s.pair;
}

/// n_bar from 1/n_bar = pump/pair - 1; +inf when the bracket is <= 0 and 0
/// when no pair channel is open.
inline double steady_occupation(const FloquetResponse& resp, const Reservoirs& res) {
    const double wm = motional_frequency(res);
    const auto s = balance_sums(resp, res.b.density, wm);
    if (s.pair == 0.0) return 0.0;
    const double inv = s.pump / s.pair - 1.0;
    return inv > 0 ? 1.0 / inv : kInfeasible;
}

inline double steady_occupation(const FloquetSolution& sol, const Reservoirs& res) {
    return steady_occupation(sol.response(), res);
}

/// Second-order pair pathway when wd = wm (w0 ~ 2 wm).
/// Second-order pair channel at wd = wm: pairs need A_{-2} = g(-i wm) V A_{-1},
/// pumping goes through A_1 at wm + wd. With w0 = 2 wm this is
/// (gamma/wm)^2 r V^2 / (9 wm^4), r = I_B(wm)/I_B(2wm).
inline double half_frequency_limit(const SystemParams& sys, const SpectralDensity& IB, double wm, double V,
                                   GreenConvention conv = GreenConvention::Adopted) {
    const GreenStatic g(sys, conv);
    const double r = IB(wm) / IB(2.0 * wm);
    return r * V * V * g.abs2(wm) * g.abs2(0.0) / g.abs2(2.0 * wm);
}

/// Leading-order occupation from perturbative A_{+-1}. When the first-order
/// pair channel is closed (wd <= wm or I_B(wd - wm) = 0) and the drive
/// amplitude is supplied near wd = wm, falls back to half_frequency_limit.
inline double occupation_leading_order(const SystemParams& sys, const SpectralDensity& IB, double wm, double wd,
                                       std::optional<double> V = std::nullopt,
                                       GreenConvention conv = GreenConvention::Adopted) {
    const GreenStatic g(sys, conv);
    const double u = wd - wm;
    const double Iminus = u > 0 ? IB(u) : 0.0;
    if (Iminus == 0.0) {
        if (V && std::abs(wd - wm) / wm < 0.05) return half_frequency_limit(sys, IB, wm, *V, conv);
        throw OutOfRegimeError("first-order pair channel closed (wd - wm = " + std::to_string(u) +
                               "); use half_frequency_limit");
    }
    const double inv = (IB(wd + wm) / Iminus) * (g.abs2(wd + wm) / g.abs2(u)) - 1.0;
    return inv > 0 ? 1.0 / inv : kInfeasible;
}

// ---------------------------------------------------------------------------
// Closed forms

inline double sideband_optimal_drive(const SystemParams& sys, double wm) {
    return std::sqrt(sys.omega0 * sys.omega0 - sys.gamma * sys.gamma) - wm;
}

inline CoolingReport sideband_limit(const SystemParams& sys, const SpectralDensity& IB, double wm) {
    if (!(sys.gamma < wm))
        throw OutOfRegimeError("sideband limit needs gamma < w_m; use doppler_limit");
    const double w0 = sys.omega0, G = sys.gamma;
    CoolingReport r;
    r.omega_d = sideband_optimal_drive(sys, wm);
    r.analytic_omega_d = r.omega_d;
    r.analytic_agrees = true;
    r.regime = Regime::SidebandResolved;
    r.provenance = Provenance::ClosedForm;
    r.feasible = 2.0 * wm * r.omega_d >= G * G && r.omega_d > wm;
    if (r.feasible) {
        const double wd = r.omega_d;
        r.n_bar = (G * G * w0 * w0 / (4.0 * wm * wm * wd * wd + w0 * w0 * G * G)) * (IB(wd - wm) / IB(wd + wm));
    }
    return r;
}

/// Occupation when the bath density is flat across the sidebands.
inline double occupation_slow_sd(const SystemParams& sys, double wm, double wd) {
    const double w0 = sys.omega0, G = sys.gamma;
    const double den = 8.0 * wd * wm * (w0 * w0 - wm * wm - G * G - wd * wd);
    if (!(den > 0)) return kInfeasible;
    const double a = (wd + wm - w0) * (wd + wm - w0) + G * G;
    const double b = (wd + wm + w0) * (wd + wm + w0) + G * G;
    return a * b / den;
}

inline CoolingReport doppler_limit(const SystemParams& sys, double wm) {
    if (!(sys.gamma > wm)) throw OutOfRegimeError("doppler limit needs gamma > w_m; use sideband_limit");
    CoolingReport r;
    r.omega_d = sys.omega0 - sys.gamma;
    r.analytic_omega_d = r.omega_d;
    r.analytic_agrees = true;
    r.regime = Regime::Doppler;
    r.provenance = Provenance::ClosedForm;
    r.feasible = 2.0 * sys.gamma * r.omega_d >= wm * wm;
    if (r.feasible) r.n_bar = sys.gamma / (2.0 * wm);
    return r;
}

/// f(x) = (1 - 2x)^kappa / (1 - x)^2, x = w_m / w0.
inline double enhancement_factor(double kappa, double x) {
    if (!(x > 0 && x < 0.5)) throw DomainError("enhancement factor needs 0 < w_m/w0 < 1/2");
    return std::pow(1.0 - 2.0 * x, kappa) / ((1.0 - x) * (1.0 - x));
}

/// Minimum occupation for I_B ~ w^kappa at wd = w0 - wm.
inline double structured_limit(const SystemParams& sys, double kappa, double wm) {
    const double x = wm / sys.omega0;
    if (!(x < 0.5)) throw OutOfRegimeError("structured limit needs w_m < w0/2; use half_frequency_limit");
    const double r = sys.gamma / wm;
    return 0.25 * r * r * enhancement_factor(kappa, x);
}

struct CriticalBand {
    double lower = 0.0;
    double upper = 0.5;
    bool full_band = false;        // f < 1 on all of (0, 1/2)
    double small_kappa_approx = 0.0;  // (1 - 2^(-2/kappa)) / 2
};

/// Band of w_m / w0 where structure lowers the limit (f < 1).
inline CriticalBand critical_ratio(double kappa) {
    if (!(kappa > 0)) throw DomainError("critical_ratio needs kappa > 0");
    CriticalBand b;
    b.small_kappa_approx = 0.5 * (1.0 - std::pow(2.0, -2.0 / kappa));
    if (kappa >= 1.0) {
        b.full_band = true;
        return b;
    }
    auto h = [kappa](double x) { return std::pow(1.0 - 2.0 * x, kappa) - (1.0 - x) * (1.0 - x); };
    // h(1/2) = -1/4 < 0, so 1/2 itself is a safe right end; for small kappa
    // the root lies above 1/2 - 1e-6.
    b.lower = opt::bisect(h, 1e-6, 0.5, 80);
    return b;
}

// ---------------------------------------------------------------------------
// Drive optimization

struct OptimizeOptions {
    CoefficientMode mode = CoefficientMode::Exact;
    int order = 4;
    double rel_tol = 1e-9;  // on wd; tighter than the 1e-6 requirement
    GreenConvention convention = GreenConvention::Adopted;
};

/// Seeds around the sideband resonances wd = (w0 -+ w_m)/k, k = 1, 2.
inline std::vector<double> resonance_seeds(const SystemParams& sys, double wm) {
    std::vector<double> s;
    const double w0 = sys.omega0, G = sys.gamma;
    const double centers[] = {w0 - wm, w0 + wm, sideband_optimal_drive(sys, wm), w0 - G,
                              0.5 * (w0 - wm), 0.5 * (w0 + wm), wm};
    for (double c : centers)
        for (int j = -12; j <= 12; ++j) s.push_back(c + 0.25 * j * G);
    return s;
}

/// Minimizes steady_occupation over wd in `bracket`; the static part and
/// amplitude of `drive` are kept, its frequency is varied.
inline CoolingReport optimize_drive(const SystemParams& sys, const Reservoirs& res, const DrivePlan& drive,
                                    std::pair<double, double> bracket, const OptimizeOptions& o = {}) {
    const double wm = motional_frequency(res);
    auto occupation = [&](double wd, int K) {
        FloquetResponse resp(sys, drive.with_frequency(wd), K, o.mode, o.convention);
        return steady_occupation(resp, res);
    };
    const auto seeds = resonance_seeds(sys, wm);
    auto m = opt::minimize([&](double wd) { return occupation(wd, o.order); }, bracket.first, bracket.second,
                           seeds, 64, o.rel_tol);
    CoolingReport r;
    r.provenance = o.mode == CoefficientMode::Exact ? Provenance::ExactFloquet : Provenance::LeadingOrder;
    r.evaluations = m.evaluations;
    if (!m.found) {
        r.regime = classify_regime(sys, wm, std::numeric_limits<double>::quiet_NaN());
        return r;
    }
    r.omega_d = m.x;
    r.n_bar = m.fx;
    r.feasible = std::isfinite(r.n_bar);
    r.regime = classify_regime(sys, wm, r.omega_d);
    switch (r.regime) {
        case Regime::SidebandResolved: r.analytic_omega_d = sideband_optimal_drive(sys, wm); break;
        case Regime::Doppler: r.analytic_omega_d = sys.omega0 - sys.gamma; break;
        case Regime::HalfFrequency: r.analytic_omega_d = wm; break;
        case Regime::Intermediate: break;
    }
    if (std::isfinite(r.analytic_omega_d))
        r.analytic_agrees = std::abs(r.omega_d - r.analytic_omega_d) <= 0.05 * r.analytic_omega_d;
    if (o.mode == CoefficientMode::Exact && r.feasible && r.n_bar > 0) {
        const double n2 = occupation(r.omega_d, o.order + 2);
        r.k_convergence = std::abs(n2 - r.n_bar) / r.n_bar;
    }
    return r;
}

/// Minimum of occupation_slow_sd over wd in (0, sqrt(w0^2 - w_m^2 - gamma^2)).
inline CoolingReport optimize_slow_sd(const SystemParams& sys, double wm) {
    const double top2 = sys.omega0 * sys.omega0 - wm * wm - sys.gamma * sys.gamma;
    CoolingReport r;
    r.provenance = Provenance::ClosedForm;
    if (!(top2 > 0)) return r;
    auto m = opt::minimize([&](double wd) { return occupation_slow_sd(sys, wm, wd); }, 0.0, std::sqrt(top2),
                           resonance_seeds(sys, wm), 64, 1e-10);
    r.evaluations = m.evaluations;
    r.omega_d = m.x;
    r.n_bar = m.fx;
    r.feasible = m.found && std::isfinite(m.fx);
    r.regime = classify_regime(sys, wm, r.omega_d);
    r.analytic_omega_d = sys.omega0 - sys.gamma;
    r.analytic_agrees = std::abs(r.omega_d - r.analytic_omega_d) <= 0.05 * r.analytic_omega_d;
    return r;
}

}  // namespace qfridge
