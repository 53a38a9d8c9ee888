// quadrature.hpp - globally adaptive Gauss-Kronrod (7/15) integration with
// user breakpoints and a deterministic final reduction.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qfridge/errors.hpp"

namespace qfridge::quad {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    // Absolute floor relative to the integral of |f|; protects integrals that
    // cancel to (almost) zero from chasing roundoff.
    double scale_floor = 1e-14;
    int max_intervals = 20000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    double abs_value = 0.0;  // integral of |f|
    int evaluations = 0;
    int intervals = 0;
};

namespace detail {

// Kronrod abscissae (positive half, descending) and weights; Gauss weights
// belong to the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value, error, abs_value;
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = fc * wgk[7];
    double resg = fc * wg[3];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        resk += wgk[j] * (f1 + f2);
        resabs += wgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
    }
    return {a, b, resk * h, std::abs((resk - resg) * h), resabs * std::abs(h)};
}

inline bool heap_less(const Panel& x, const Panel& y) {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;  // ties: leftmost first
}

}  // namespace detail

/// Integrates f over [a, b]; breakpoints strictly inside (a, b) become initial
/// panel boundaries. Throws AccuracyError when the panel budget runs out.
template <class F>
Result integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
                 const Options& opt = {}) {
    Result out;
    if (!(b > a)) {
        if (a == b) return out;
        Result r = integrate(f, b, a, breakpoints, opt);
        r.value = -r.value;
        return r;
    }
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("quad::integrate: infinite limits are not supported");

    std::vector<double> cuts{a};
    for (double x : breakpoints)
        if (x > a && x < b && std::isfinite(x)) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<detail::Panel> heap;
    heap.reserve(cuts.size() * 4);
    double total = 0.0, total_err = 0.0, total_abs = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto p = detail::gk15(f, cuts[i], cuts[i + 1]);
        out.evaluations += 15;
        total += p.value;
        total_err += p.error;
        total_abs += p.abs_value;
        heap.push_back(p);
    }
    std::make_heap(heap.begin(), heap.end(), detail::heap_less);

    // Panels too narrow to split further are parked here.
    std::vector<detail::Panel> done;
    auto target = [&] {
        return std::max({opt.abs_tol, opt.rel_tol * std::abs(total), opt.scale_floor * total_abs});
    };

    while (!heap.empty() && total_err > target()) {
        if (static_cast<int>(heap.size() + done.size()) >= opt.max_intervals) {
            throw AccuracyError("quadrature did not converge: estimate " + std::to_string(total) +
                                    ", error bound " + std::to_string(total_err),
                                total, total_err);
        }
        std::pop_heap(heap.begin(), heap.end(), detail::heap_less);
        detail::Panel p = heap.back();
        heap.pop_back();
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b) ||
            (p.b - p.a) <= 64.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(std::abs(p.a), std::abs(p.b))) {
            done.push_back(p);
            total_err -= p.error;  // roundoff-limited; stop refining it
            continue;
        }
        auto l = detail::gk15(f, p.a, m);
        auto r = detail::gk15(f, m, p.b);
        out.evaluations += 30;
        total += l.value + r.value - p.value;
        total_err += l.error + r.error - p.error;
        total_abs += l.abs_value + r.abs_value - p.abs_value;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end(), detail::heap_less);
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end(), detail::heap_less);
    }

    // Deterministic reduction: left-to-right over panels.
    heap.insert(heap.end(), done.begin(), done.end());
    std::sort(heap.begin(), heap.end(),
              [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
    out.value = 0.0;
    out.error = 0.0;
    out.abs_value = 0.0;
    for (const auto& p : heap) {
        out.value += p.value;
        out.error += p.error;
        out.abs_value += p.abs_value;
    }
    out.intervals = static_cast<int>(heap.size());
    return out;
}

/// Sum of one 15-point Kronrod pass of |g| over the breakpoint panels; a
/// cheap magnitude estimate used to set absolute floors.
template <class G>
double coarse_magnitude(G&& g, double a, double b, std::span<const double> breakpoints = {}) {
    std::vector<double> cuts{a};
    for (double x : breakpoints)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    auto ag = [&g](double x) { return std::abs(g(x)); };
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) s += detail::gk15(ag, cuts[i], cuts[i + 1]).value;
    return s;
}

/// Integral over [0, b] of a function with an integrable singularity at the
/// origin (e.g. omega^(kappa-1) with 0 < kappa < 1), via omega = u^2.
template <class F>
Result integrate_sqrt_origin(F&& f, double b, std::span<const double> breakpoints = {},
                             const Options& opt = {}) {
    if (b < 0) throw DomainError("integrate_sqrt_origin: upper limit must be >= 0");
    std::vector<double> mapped;
    mapped.reserve(breakpoints.size());
    for (double x : breakpoints)
        if (x > 0) mapped.push_back(std::sqrt(x));
    // Clamp so that u^2 never overshoots b through rounding.
    auto g = [&f, b](double u) { return 2.0 * u * f(std::min(u * u, b)); };
    return integrate(g, 0.0, std::sqrt(b), mapped, opt);
}

}  // namespace qfridge::quad
