// currents.hpp - transition weights and the resonant-pumping (RP), resonant
// heating (RH) and non-resonant pair-creation (NRH) heat currents.
//
// Sign convention: Qdot_alpha > 0 means energy flows from reservoir alpha into
// the system; the reservoir's own energy changes at -Qdot_alpha.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "qfridge/errors.hpp"
#include "qfridge/floquet.hpp"
#include "qfridge/model.hpp"
#include "qfridge/quadrature.hpp"

namespace qfridge {

struct TransitionWeight {
    int k = 0;
    Label source = Label::A;       // beta: mode w
    Label destination = Label::A;  // alpha: mode |w + k wd|
    double omega = 0.0;
    double weight = 0.0;
};

/// p^(k)_{alpha,beta}(w) = (pi/2) I_alpha(|w + k wd|) I_beta(w) |A_k(w)|^2.
inline TransitionWeight transition_weight(const FloquetResponse& resp, const Reservoirs& res, int k,
                                          Label alpha, Label beta, double w) {
    if (!(w >= 0)) throw DomainError("transition weight needs w >= 0");
    const double u = std::abs(w + k * resp.drive().frequency());
    const double p = 0.5 * std::numbers::pi * res[alpha].density(u) * res[beta].density(w) *
                     std::norm(resp.coefficient(k, w));
    return {k, beta, alpha, w, p};
}

struct ChannelCurrents {
    double rp = 0.0;
    double rh = 0.0;
    double nrh = 0.0;
    double total() const { return rp + rh + nrh; }
};

struct HeatBreakdown {
    ChannelCurrents a;
    ChannelCurrents b;
    double work = 0.0;
    double closure_defect = 0.0;
    double error_estimate = 0.0;  // accumulated quadrature error bound

    const ChannelCurrents& operator[](Label l) const { return l == Label::A ? a : b; }
    /// d<H_alpha>/dt, the reservoir's own energy rate.
    double reservoir_energy_rate(Label l) const { return -(*this)[l].total(); }
};

struct CurrentsOptions {
    quad::Options quad{1e-8, 0.0, 1e-14, 40000};
    // Planck factors are cut at this multiple of the temperature.
    double planck_cut = 60.0;
};

namespace detail {

inline double nplus_half(const Reservoir& r, double w) { return r.occupation(w) + 0.5; }

/// Integration helper collecting error bounds.
class Integrator {
public:
    explicit Integrator(const FloquetResponse& resp, const CurrentsOptions& opt) : resp_(resp), opt_(opt) {}

    /// Breakpoints where any A_k(w) is near-resonant, plus density features.
    std::vector<double> breakpoints(double lo, double hi, std::initializer_list<const SpectralDensity*> direct,
                                    std::initializer_list<std::pair<const SpectralDensity*, double>> shifted,
                                    std::initializer_list<std::pair<const SpectralDensity*, double>> mirrored) const {
        std::vector<double> bp;
        const double w0 = resp_.system().omega0, G = resp_.green().width(), wd = resp_.drive().frequency();
        const int K = resp_.order() + 1;
        for (int j = -K; j <= K; ++j)
            for (double c : {w0 - j * wd, -w0 - j * wd})
                for (double m : {0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0}) bp.push_back(c + m * G);
        for (const auto* d : direct)
            for (double f : d->features()) bp.push_back(f);
        for (const auto& [d, c] : shifted)  // density evaluated at w + c
            for (double f : d->features()) bp.push_back(f - c);
        for (const auto& [d, c] : mirrored)  // density evaluated at c - w
            for (double f : d->features()) bp.push_back(c - f);
        std::erase_if(bp, [&](double x) { return !(x > lo && x < hi); });
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        return bp;
    }

    /// Integrates f; when `mag` is given (an integrand of |terms| before
    /// cancellation) its coarse integral sets an absolute floor, so that
    /// exactly or nearly cancelling integrands do not chase roundoff.
    template <class F, class M = std::nullptr_t>
    double run(F&& f, double lo, double hi, const std::vector<double>& bp, bool singular_origin, M mag = nullptr) {
        if (!(hi > lo)) return 0.0;
        quad::Options o = opt_.quad;
        if constexpr (!std::is_same_v<M, std::nullptr_t>) {
            double S = 0.0;
            if (singular_origin && lo == 0.0) {
                std::vector<double> mapped;
                for (double x : bp) mapped.push_back(std::sqrt(x));
                S = quad::coarse_magnitude([&](double u) { return 2.0 * u * mag(std::min(u * u, hi)); }, 0.0,
                                           std::sqrt(hi), mapped);
            } else {
                S = quad::coarse_magnitude(mag, lo, hi, bp);
            }
            o.abs_tol = std::max(o.abs_tol, 1e-13 * S);
        }
        quad::Result r;
        if (singular_origin && lo == 0.0) r = quad::integrate_sqrt_origin(f, hi, bp, o);
        else r = quad::integrate(f, lo, hi, bp, o);
        error += r.error;
        return r.value;
    }

    double error = 0.0;

private:
    const FloquetResponse& resp_;
    const CurrentsOptions& opt_;
};

inline bool weak_origin(const SpectralDensity& d) { return !d.symbolic() && d.low_frequency_exponent() < 1.0; }

inline double upper_for(const Reservoir& r, const CurrentsOptions& opt) {
    return std::min(r.density.support_upper(), opt.planck_cut * r.temperature);
}

constexpr double half_pi = 0.5 * std::numbers::pi;

}  // namespace detail

/// Resonant pumping current of reservoir alpha (beta is the other one).
inline double heat_rp(const FloquetResponse& resp, const Reservoirs& res, Label alpha,
                      const CurrentsOptions& opt = {}, double* error = nullptr) {
    using detail::half_pi;
    const Reservoir& ra = res[alpha];
    const Reservoir& rb = res[other(alpha)];
    const SpectralDensity& Ia = ra.density;
    const SpectralDensity& Ib = rb.density;
    const double wd = resp.drive().frequency();
    const int K = resp.order();
    detail::Integrator integ(resp, opt);
    double total = 0.0;

    for (int k = -K; k <= K; ++k) {
        if (k != 0 && resp.mode() == CoefficientMode::Perturbative && resp.drive().component(k) == cplx{})
            continue;
        const double lo = std::max(0.0, -k * wd);
        double sum = 0.0;
        if (Ia.symbolic() || Ib.symbolic()) {
            if (Ia.symbolic() && Ib.symbolic()) continue;  // delta x delta: measure zero
            // term 1: w p^(k)_{beta,alpha}(w) N_alpha(w)
            // term 2: -(w + k wd) p^(k)_{alpha,beta}(w) N_beta(w)
            if (Ia.symbolic()) {
                const auto& d = Ia.dirac_mode();
                const double w = d.frequency;  // I_alpha(w) fires
                if (w >= lo && ra.temperature > 0)
                    sum += w * half_pi * Ib(w + k * wd) * d.weight * std::norm(resp.coefficient(k, w)) *
                           ra.occupation(w);
                const double v = d.frequency - k * wd;  // I_alpha(v + k wd) fires
                if (v > 0 && v >= lo && rb.temperature > 0)
                    sum -= d.frequency * half_pi * d.weight * Ib(v) * std::norm(resp.coefficient(k, v)) *
                           rb.occupation(v);
            } else {
                const auto& d = Ib.dirac_mode();
                const double v = d.frequency - k * wd;  // I_beta(v + k wd) fires
                if (v > 0 && v >= lo && ra.temperature > 0)
                    sum += v * half_pi * d.weight * Ia(v) * std::norm(resp.coefficient(k, v)) * ra.occupation(v);
                const double w = d.frequency;  // I_beta(w) fires
                if (w >= lo && rb.temperature > 0)
                    sum -= (w + k * wd) * half_pi * Ia(w + k * wd) * d.weight *
                           std::norm(resp.coefficient(k, w)) * rb.occupation(w);
            }
        } else {
            const double hi1 = std::min({Ia.support_upper(), Ib.support_upper() - k * wd,
                                         opt.planck_cut * ra.temperature});
            const double hi2 = std::min({Ib.support_upper(), Ia.support_upper() - k * wd,
                                         opt.planck_cut * rb.temperature});
            const double hi = std::max(hi1, hi2);
            if (!(hi > lo)) continue;
            auto occ = [](const Reservoir& r, double w) { return r.temperature > 0 ? r.occupation(w) : 0.0; };
            auto f = [&](double w) {
                const double A2 = std::norm(resp.coefficient(k, w));
                if (A2 == 0.0) return 0.0;
                if (k == 0)  // identical weights; cancels exactly at equal temperatures
                    return half_pi * A2 * w * Ib(w) * Ia(w) * (occ(ra, w) - occ(rb, w));
                const double u = w + k * wd;
                return half_pi * A2 * (w * Ib(u) * Ia(w) * occ(ra, w) - u * Ia(u) * Ib(w) * occ(rb, w));
            };
            auto mag = [&](double w) {
                const double A2 = std::norm(resp.coefficient(k, w));
                const double u = w + k * wd;
                return half_pi * A2 * (w * Ib(u) * Ia(w) * occ(ra, w) + u * Ia(u) * Ib(w) * occ(rb, w));
            };
            auto bp = integ.breakpoints(lo, hi, {&Ia, &Ib}, {{&Ia, k * wd}, {&Ib, k * wd}}, {});
            sum = integ.run(f, lo, hi, bp, false, mag);
        }
        total += sum;
    }
    if (error) *error += integ.error;
    return total;
}

/// Resonant heating of reservoir alpha; exactly 0 for a single-mode reservoir.
inline double heat_rh(const FloquetResponse& resp, const Reservoirs& res, Label alpha,
                      const CurrentsOptions& opt = {}, double* error = nullptr) {
    using detail::half_pi;
    const Reservoir& ra = res[alpha];
    const SpectralDensity& Ia = ra.density;
    if (Ia.symbolic() || ra.temperature == 0.0) return 0.0;
    const double wd = resp.drive().frequency();
    detail::Integrator integ(resp, opt);
    double total = 0.0;
    for (int k = 1; k <= resp.order(); ++k) {
        const double hi = std::min(Ia.support_upper() - k * wd, detail::upper_for(ra, opt));
        if (!(hi > 0)) continue;
        auto f = [&](double w) {
            const double A2 = std::norm(resp.coefficient(k, w));
            if (A2 == 0.0) return 0.0;
            const double u = w + k * wd;
            return k * wd * half_pi * Ia(u) * Ia(w) * A2 * (ra.occupation(w) - ra.occupation(u));
        };
        auto bp = integ.breakpoints(0.0, hi, {&Ia}, {{&Ia, k * wd}}, {});
        total -= integ.run(f, 0.0, hi, bp, detail::weak_origin(Ia));
    }
    if (error) *error += integ.error;
    return total;
}

/// Non-resonant (pair creation) current of reservoir alpha; always <= 0.
inline double heat_nrh(const FloquetResponse& resp, const Reservoirs& res, Label alpha,
                       const CurrentsOptions& opt = {}, double* error = nullptr) {
    using detail::half_pi;
    const Reservoir& ra = res[alpha];
    const Reservoir& rb = res[other(alpha)];
    const SpectralDensity& Ia = ra.density;
    const SpectralDensity& Ib = rb.density;
    const double wd = resp.drive().frequency();
    detail::Integrator integ(resp, opt);
    double total = 0.0;

    for (int k = 1; k <= resp.order(); ++k) {
        const double kw = k * wd;
        double sum = 0.0;
        // term 1: kw p^(-k)_{alpha,alpha}(w) (N_alpha(w) + 1/2); delta x delta
        // products vanish, so only a continuous alpha contributes.
        // term 2: (kw - w) p^(-k)_{alpha,beta}(w) (N_beta(w) + 1/2)
        // term 3: w p^(-k)_{beta,alpha}(w) (N_alpha(w) + 1/2)
        if (!Ia.symbolic() && !Ib.symbolic()) {
            auto f = [&](double w) {
                const double A2 = std::norm(resp.coefficient(-k, w));
                if (A2 == 0.0) return 0.0;
                const double u = kw - w;
                const double na = detail::nplus_half(ra, w);
                const double s = kw * Ia(u) * Ia(w) * na + u * Ia(u) * Ib(w) * detail::nplus_half(rb, w) +
                                 w * Ib(u) * Ia(w) * na;
                return half_pi * A2 * s;
            };
            auto bp = integ.breakpoints(0.0, kw, {&Ia, &Ib}, {}, {{&Ia, kw}, {&Ib, kw}});
            sum = integ.run(f, 0.0, kw, bp, detail::weak_origin(Ia) || detail::weak_origin(Ib));
        } else if (Ia.symbolic() && Ib.symbolic()) {
            sum = 0.0;
        } else if (Ia.symbolic()) {
            const auto& d = Ia.dirac_mode();
            const double v = kw - d.frequency;
            if (v > 0) {
                // term 2 fires at w = kw - wm, term 3 at w = wm
                sum += d.frequency * half_pi * d.weight * Ib(v) * std::norm(resp.coefficient(-k, v)) *
                       detail::nplus_half(rb, v);
                sum += d.frequency * half_pi * Ib(v) * d.weight * std::norm(resp.coefficient(-k, d.frequency)) *
                       detail::nplus_half(ra, d.frequency);
            }
        } else {
            const auto& d = Ib.dirac_mode();
            const double v = kw - d.frequency;
            // term 1: continuous alpha with itself
            auto f = [&](double w) {
                const double A2 = std::norm(resp.coefficient(-k, w));
                if (A2 == 0.0) return 0.0;
                return half_pi * A2 * kw * Ia(kw - w) * Ia(w) * detail::nplus_half(ra, w);
            };
            auto bp = integ.breakpoints(0.0, kw, {&Ia}, {}, {{&Ia, kw}});
            sum += integ.run(f, 0.0, kw, bp, detail::weak_origin(Ia));
            if (v > 0) {
                // term 2 fires at w = wm, term 3 at w = kw - wm
                sum += v * half_pi * Ia(v) * d.weight * std::norm(resp.coefficient(-k, d.frequency)) *
                       detail::nplus_half(rb, d.frequency);
                sum += v * half_pi * d.weight * Ia(v) * std::norm(resp.coefficient(-k, v)) *
                       detail::nplus_half(ra, v);
            }
        }
        total -= sum;
    }
    if (error) *error += integ.error;
    return total;
}

/// Wdot = -sum_alpha Qdot_alpha.
inline double work_rate(const ChannelCurrents& a, const ChannelCurrents& b) { return -(a.total() + b.total()); }

inline HeatBreakdown heat_breakdown(const FloquetResponse& resp, const Reservoirs& res,
                                    const CurrentsOptions& opt = {}) {
    HeatBreakdown h;
    double err = 0.0;
    for (Label l : {Label::A, Label::B}) {
        ChannelCurrents c;
        c.rp = heat_rp(resp, res, l, opt, &err);
        c.rh = heat_rh(resp, res, l, opt, &err);
        c.nrh = heat_nrh(resp, res, l, opt, &err);
        (l == Label::A ? h.a : h.b) = c;
    }
    h.work = work_rate(h.a, h.b);
    h.closure_defect = std::abs(h.work + h.a.total() + h.b.total());
    h.error_estimate = err;
    return h;
}

inline HeatBreakdown heat_breakdown(const FloquetSolution& sol, const Reservoirs& res,
                                    const CurrentsOptions& opt = {}) {
    return heat_breakdown(sol.response(), res, opt);
}

}  // namespace qfridge
