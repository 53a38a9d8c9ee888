// floquet.hpp - static Green function and the truncated Floquet hierarchy for
// the coefficients A_k(w).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfridge/errors.hpp"
#include "qfridge/model.hpp"

namespace qfridge {

/// Which width enters the static Green function. Adopted: g(iw) =
/// 1/(w0^2 - (w - i gamma)^2). HalfWidth: gamma/2 in place of gamma.
enum class GreenConvention { Adopted, HalfWidth };

inline const char* to_string(GreenConvention c) {
    return c == GreenConvention::Adopted ? "adopted" : "half-width";
}

struct GreenStatic {
    double omega0 = 1.0;
    double gamma = 0.01;
    GreenConvention convention = GreenConvention::Adopted;

    GreenStatic() = default;
    explicit GreenStatic(const SystemParams& s, GreenConvention c = GreenConvention::Adopted)
        : omega0(s.omega0), gamma(s.gamma), convention(c) {}
    GreenStatic(double w0, double g, GreenConvention c = GreenConvention::Adopted)
        : omega0(w0), gamma(g), convention(c) {}

    double width() const { return convention == GreenConvention::Adopted ? gamma : 0.5 * gamma; }

    /// g(i w), evaluated in factored form so that the near-resonant factor
    /// keeps full relative precision when gamma << omega0.
    cplx operator()(double w) const {
        const double G = width();
        return 1.0 / (cplx(omega0 - w, G) * cplx(omega0 + w, -G));
    }

    double abs2(double w) const {
        const double G = width();
        const double a = (omega0 - w) * (omega0 - w) + G * G;
        const double b = (omega0 + w) * (omega0 + w) + G * G;
        return 1.0 / (a * b);
    }

    /// Poles in the Laplace variable s = i w; both have Re s = -width < 0.
    std::array<cplx, 2> poles() const {
        const double G = width();
        return {cplx(-G, omega0), cplx(-G, -omega0)};
    }
};

enum class CoefficientMode { Exact, Perturbative };

inline const char* to_string(CoefficientMode m) {
    return m == CoefficientMode::Exact ? "exact" : "perturbative";
}

/// Default truncation order for a drive: max(4, 2 k_max).
inline int default_order(const DrivePlan& d) { return std::max(4, 2 * d.max_harmonic()); }

/// Pointwise evaluator of A_k(w) for fixed system and drive. Indexing of the
/// returned vector is k + K.
class FloquetResponse {
public:
    FloquetResponse(const SystemParams& sys, DrivePlan drive, int order = -1,
                    CoefficientMode mode = CoefficientMode::Exact,
                    GreenConvention conv = GreenConvention::Adopted)
        : sys_(sys), drive_(std::move(drive)), g_(sys, conv), mode_(mode) {
        sys_.validate();
        K_ = order < 0 ? default_order(drive_) : order;
        if (K_ < 1) throw ConfigError("floquet truncation K must be >= 1");
        if (K_ < drive_.max_harmonic())
            throw ConfigError("floquet truncation K = " + std::to_string(K_) +
                              " is below the drive's highest harmonic " +
                              std::to_string(drive_.max_harmonic()));
        for (const auto& [k, v] : drive_.components())
            if (k != 0 && v != cplx{}) harm_.push_back({k, v});
    }

    int order() const { return K_; }
    CoefficientMode mode() const { return mode_; }
    const SystemParams& system() const { return sys_; }
    const DrivePlan& drive() const { return drive_; }
    const GreenStatic& green() const { return g_; }

    std::vector<cplx> coefficients(double w) const {
        const int n = 2 * K_ + 1;
        std::vector<cplx> A(static_cast<std::size_t>(n));
        if (harm_.empty() || mode_ == CoefficientMode::Perturbative) {
            const cplx g0 = g_(w);
            A[K_] = g0;
            for (const auto& [k, v] : harm_) A[k + K_] = -g_(w + k * drive_.frequency()) * v * g0;
            return A;
        }
        solve_exact(w, A);
        return A;
    }

    cplx coefficient(int k, double w) const {
        if (std::abs(k) > K_) return {};
        if (mode_ == CoefficientMode::Perturbative || harm_.empty()) {
            const cplx g0 = g_(w);
            if (k == 0) return g0;
            return -g_(w + k * drive_.frequency()) * drive_.component(k) * g0;
        }
        return coefficients(w)[k + K_];
    }

    /// max_k |lhs - rhs| / max(|lhs|, floor) of the truncated defining system.
    double residual(double w, std::span<const cplx> A, double floor = 1e-30) const {
        double worst = 0.0;
        const double wd = drive_.frequency();
        for (int k = -K_; k <= K_; ++k) {
            cplx rhs = (k == 0) ? g_(w) : cplx{};
            const cplx gk = g_(w + k * wd);
            for (const auto& [j, v] : harm_) {
                const int m = k - j;
                if (std::abs(m) <= K_) rhs -= gk * v * A[m + K_];
            }
            const cplx lhs = A[k + K_];
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), floor));
        }
        return worst;
    }

private:
    // Gaussian elimination without pivoting, eliminating the outermost
    // harmonics first. For decaying A_k this is the continued-fraction
    // recursion and keeps tiny high-order coefficients componentwise accurate.
    void solve_exact(double w, std::vector<cplx>& A) const {
        const int n = 2 * K_ + 1;
        const double wd = drive_.frequency();
        std::vector<int> perm;
        perm.reserve(static_cast<std::size_t>(n));
        for (int m = K_; m >= 1; --m) {
            perm.push_back(m);
            perm.push_back(-m);
        }
        perm.push_back(0);
        std::vector<int> pos(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pos[perm[i] + K_] = i;

        std::vector<cplx> M(static_cast<std::size_t>(n * n));
        std::vector<cplx> b(static_cast<std::size_t>(n));
        auto at = [&](int r, int c) -> cplx& { return M[static_cast<std::size_t>(r * n + c)]; };
        for (int k = -K_; k <= K_; ++k) {
            const int r = pos[k + K_];
            at(r, r) = 1.0;
            const cplx gk = g_(w + k * wd);
            for (const auto& [j, v] : harm_) {
                const int m = k - j;
                if (std::abs(m) <= K_) at(r, pos[m + K_]) += gk * v;
            }
        }
        b[pos[K_]] = g_(w);

        double scale = 0.0;
        for (const auto& x : M) scale = std::max(scale, std::abs(x));
        bool fallback = false;
        for (int p = 0; p < n && !fallback; ++p) {
            const cplx piv = at(p, p);
            if (!(std::abs(piv) > 1e-13 * scale)) {
                fallback = true;
                break;
            }
            for (int r = p + 1; r < n; ++r) {
                const cplx f = at(r, p);
                if (f == cplx{}) continue;
                const cplx l = f / piv;
                at(r, p) = 0.0;
                for (int c = p + 1; c < n; ++c) at(r, c) -= l * at(p, c);
                b[r] -= l * b[p];
            }
        }
        std::vector<cplx> x(static_cast<std::size_t>(n));
        if (!fallback) {
            for (int r = n - 1; r >= 0; --r) {
                cplx s = b[r];
                for (int c = r + 1; c < n; ++c) s -= at(r, c) * x[c];
                x[r] = s / at(r, r);
            }
            for (int k = -K_; k <= K_; ++k) A[k + K_] = x[pos[k + K_]];
            if (residual(w, A) <= 1e-12) return;
        }
        solve_pivoted(w, A);
    }

    void solve_pivoted(double w, std::vector<cplx>& A) const {
        const int n = 2 * K_ + 1;
        const double wd = drive_.frequency();
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(n, n);
        Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
        for (int k = -K_; k <= K_; ++k) {
            const cplx gk = g_(w + k * wd);
            for (const auto& [j, v] : harm_) {
                const int m = k - j;
                if (std::abs(m) <= K_) M(k + K_, m + K_) += gk * v;
            }
        }
        b(K_) = g_(w);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
        if (lu.rank() < n || !(lu.rcond() > 1e-14))
            throw NumericalError(NumericalError::Kind::Conditioning,
                                 "floquet system is singular at w = " + std::to_string(w));
        Eigen::VectorXcd x = lu.solve(b);
        for (int i = 0; i < n; ++i) A[i] = x(i);
        // A few refinement steps; near-singular drives otherwise leave a
        // componentwise residual around 1e-9.
        double best = residual(w, A);
        std::vector<cplx> trial(A);
        for (int it = 0; it < 3 && best > 1e-15; ++it) {
            x += lu.solve(b - M * x);
            for (int i = 0; i < n; ++i) trial[i] = x(i);
            const double r = residual(w, trial);
            if (!(r < best)) break;
            best = r;
            A = trial;
        }
    }

    SystemParams sys_;
    DrivePlan drive_;
    GreenStatic g_;
    CoefficientMode mode_;
    int K_ = 4;
    std::vector<std::pair<int, cplx>> harm_;
};

/// Coefficient table on a frequency grid.
struct FloquetSolution {
    std::vector<double> grid;
    int order = 0;
    std::vector<std::vector<cplx>> table;  // table[i][k + K]
    SystemParams system;
    DrivePlan drive;
    CoefficientMode mode = CoefficientMode::Exact;
    GreenConvention convention = GreenConvention::Adopted;
    double residual = 0.0;
    // K-convergence metric against the next order (auto solve only; -1 if unset).
    double convergence = -1.0;

    cplx at(std::size_t i, int k) const {
        if (std::abs(k) > order) return {};
        return table[i][static_cast<std::size_t>(k + order)];
    }

    FloquetResponse response() const { return FloquetResponse(system, drive, order, mode, convention); }
};

struct FloquetOptions {
    double residual_tol = 1e-10;
    double convergence_tol = 1e-8;
    int max_order = 32;
    CoefficientMode mode = CoefficientMode::Exact;
    GreenConvention convention = GreenConvention::Adopted;
};

/// max over grid of max_k |A_k - B_k| / max_k |A_k|, comparing the common
/// range of k.
inline double order_distance(const FloquetSolution& a, const FloquetSolution& b) {
    double worst = 0.0;
    const int K = std::min(a.order, b.order);
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (int k = -std::max(a.order, b.order); k <= std::max(a.order, b.order); ++k) {
            num = std::max(num, std::abs(a.at(i, k) - b.at(i, k)));
            if (std::abs(k) <= K) den = std::max(den, std::abs(a.at(i, k)));
        }
        if (den > 0) worst = std::max(worst, num / den);
    }
    return worst;
}

inline double floquet_residual(const FloquetSolution& sol) {
    // Perturbative tables are measured against the exact system too.
    const auto resp = sol.response();
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
        worst = std::max(worst, resp.residual(sol.grid[i], sol.table[i]));
    return worst;
}

inline FloquetSolution solve_floquet(const SystemParams& sys, const DrivePlan& drive,
                                     std::span<const double> grid, int K,
                                     const FloquetOptions& opt = {}) {
    for (double w : grid)
        if (!std::isfinite(w)) throw DomainError("floquet grid contains a non-finite frequency");
    FloquetResponse resp(sys, drive, K, opt.mode, opt.convention);
    FloquetSolution sol;
    sol.grid.assign(grid.begin(), grid.end());
    sol.order = resp.order();
    sol.system = sys;
    sol.drive = drive;
    sol.mode = opt.mode;
    sol.convention = opt.convention;
    sol.table.reserve(grid.size());
    for (double w : grid) {
        sol.table.push_back(resp.coefficients(w));
        if (opt.mode == CoefficientMode::Exact)
            sol.residual = std::max(sol.residual, resp.residual(w, sol.table.back()));
    }
    if (sol.residual > opt.residual_tol)
        throw TruncationError("floquet residual " + std::to_string(sol.residual) + " exceeds tolerance",
                              std::min(opt.max_order, sol.order + 2));
    return sol;
}

/// Solves at K = default_order and escalates by 2 until successive orders agree
/// within convergence_tol; returns the higher-order solution.
inline FloquetSolution solve_floquet_auto(const SystemParams& sys, const DrivePlan& drive,
                                          std::span<const double> grid, const FloquetOptions& opt = {}) {
    int K = default_order(drive);
    if (drive.undriven() || opt.mode == CoefficientMode::Perturbative) {
        auto s = solve_floquet(sys, drive, grid, K, opt);
        s.convergence = 0.0;
        return s;
    }
    FloquetSolution lo = solve_floquet(sys, drive, grid, K, opt);
    while (K + 2 <= opt.max_order) {
        FloquetSolution hi = solve_floquet(sys, drive, grid, K + 2, opt);
        const double d = order_distance(hi, lo);
        hi.convergence = d;
        if (d <= opt.convergence_tol) return hi;
        lo = std::move(hi);
        K += 2;
    }
    throw TruncationError("floquet hierarchy not converged at K = " + std::to_string(K), opt.max_order);
}

/// First-order A_{+1}, A_{-1} for a harmonic drive.
inline std::pair<cplx, cplx> perturbative_A1(const SystemParams& sys, const DrivePlan& drive, double w,
                                             GreenConvention conv = GreenConvention::Adopted) {
    if (!drive.is_harmonic()) throw UnsupportedDriveError("perturbative_A1 requires a harmonic drive");
    const GreenStatic g(sys, conv);
    const double V = drive.component(1).real();
    const cplx g0 = g(w);
    return {-g(w + drive.frequency()) * V * g0, -g(w - drive.frequency()) * V * g0};
}

}  // namespace qfridge
