// optimize.hpp - bounded scalar minimization: grid scan plus caller seeds to
// locate the basin, then Brent's golden-section/parabolic search inside it.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace qfridge::opt {

struct MinimizeResult {
    double x = std::numeric_limits<double>::quiet_NaN();
    double fx = std::numeric_limits<double>::infinity();
    bool found = false;  // some finite value was seen
    int evaluations = 0;
    // Best point of the initial scan (before refinement).
    double scan_x = std::numeric_limits<double>::quiet_NaN();
    double scan_f = std::numeric_limits<double>::infinity();
};

/// Brent's fminbound on [a, b]; non-finite values are treated as +inf.
template <class F>
std::pair<double, double> brent(F&& f, double a, double b, double rel_tol, double abs_tol, int max_iter,
                                int& evals) {
    constexpr double cgold = 0.3819660112501051;
    auto fe = [&](double x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    double x = a + cgold * (b - a), w = x, v = x;
    double fx = fe(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double m = 0.5 * (a + b);
        const double tol = rel_tol * std::abs(x) + abs_tol;
        const double t2 = 2.0 * tol;
        if (std::abs(x - m) <= t2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::abs(e) > tol && std::isfinite(fx) && std::isfinite(fw) && std::isfinite(fv)) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0) p = -p;
            q = std::abs(q);
            const double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < t2 || b - u < t2) d = (x < m) ? tol : -tol;
                golden = false;
            }
        }
        if (golden) {
            e = (x >= m) ? a - x : b - x;
            d = cgold * e;
        }
        const double u = x + (std::abs(d) >= tol ? d : (d > 0 ? tol : -tol));
        const double fu = fe(u);
        if (fu <= fx) {
            if (u >= x) a = x;
            else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u;
            else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx};
}

/// Minimizes f over the open interval (a, b). A `scan_points` uniform scan
/// and the seeds locate the best sample; Brent then refines between its
/// neighbours. The result is never worse than the best sample.
template <class F>
MinimizeResult minimize(F&& f, double a, double b, std::span<const double> seeds = {}, int scan_points = 64,
                        double rel_tol = 1e-9, double abs_tol = 0.0) {
    MinimizeResult out;
    std::vector<std::pair<double, double>> s;
    auto eval = [&](double x) {
        ++out.evaluations;
        const double v = f(x);
        s.push_back({x, std::isfinite(v) ? v : std::numeric_limits<double>::infinity()});
    };
    for (int i = 1; i <= scan_points; ++i) eval(a + (b - a) * i / (scan_points + 1));
    for (double x : seeds)
        if (x > a && x < b) eval(x);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end(), [](const auto& p, const auto& q) { return p.first == q.first; }),
            s.end());
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].second < s[best].second) best = i;
    if (s.empty() || !std::isfinite(s[best].second)) return out;
    out.found = true;
    out.scan_x = s[best].first;
    out.scan_f = s[best].second;
    const double lo = best > 0 ? s[best - 1].first : a;
    const double hi = best + 1 < s.size() ? s[best + 1].first : b;
    int ev = 0;
    auto [x, fx] = brent(f, lo, hi, rel_tol, abs_tol > 0 ? abs_tol : 1e-3 * rel_tol * (hi - lo), 500, ev);
    out.evaluations += ev;
    if (fx <= out.scan_f) {
        out.x = x;
        out.fx = fx;
    } else {
        out.x = out.scan_x;
        out.fx = out.scan_f;
    }
    return out;
}

/// Bisection for a sign change of f on [a, b].
template <class F>
double bisect(F&& f, double a, double b, int iterations) {
    double fa = f(a);
    for (int i = 0; i < iterations; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace qfridge::opt
