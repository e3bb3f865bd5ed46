#pragma once

// Independent oracles and seeded generators shared by the unit tests and the
// acceptance suite. Nothing here calls the library routine it checks.

#include <mourrelab/mourrelab.hpp>

#include <chrono>
#include <random>

namespace oracle {

using mlab::cplx;
using mlab::kPi;
using mlab::kTwoPi;

/// f_a(theta) straight from the closed form.
inline cplx f_a(double a, double theta) {
    const cplx num = std::exp(cplx(0.0, -theta)) - a;
    const cplx den = std::exp(cplx(0.0, theta)) - a;
    return -num / den;
}

/// |f_a'(theta)| = 2 |a cos theta - 1| / (a^2 - 2 a cos theta + 1).
inline double abs_df_a(double a, double theta) {
    return 2.0 * std::abs(a * std::cos(theta) - 1.0) / (a * a - 2.0 * a * std::cos(theta) + 1.0);
}

/// ||L_{|f_a'|} e_0||^2 = mean of |f_a'|^2 over the circle (trapezoid, spectrally exact).
inline double rate_sq_f_a(double a, int grid = 8192) {
    double s = 0.0;
    for (int k = 0; k < grid; ++k) s += std::pow(abs_df_a(a, kTwoPi * k / grid), 2);
    return s / grid;
}

/// min / max of |f_a'|^2 over {theta : arg f_a(theta) in [lo, hi]}, non-wrapping phases.
inline std::pair<double, double> mourre_pair(double a, double lo, double hi, int grid = 200000) {
    double c = 1e300, C = -1e300;
    for (int k = 0; k < grid; ++k) {
        const double t = kTwoPi * k / grid;
        double ph = std::arg(f_a(a, t));
        if (ph < 0) ph += kTwoPi;
        if (ph < lo || ph > hi) continue;
        const double g = std::pow(abs_df_a(a, t), 2);
        c = std::min(c, g);
        C = std::max(C, g);
    }
    return {c, C};
}

/// Number of eigenvalues of the Hermitian matrix h below sigma, by the inertia
/// of the LDL* factorization of h - sigma (Sylvester's law).
inline int count_below(const mlab::Matrix& h, double sigma) {
    const auto n = h.rows();
    mlab::Matrix a = h;
    for (Eigen::Index k = 0; k < n; ++k) a(k, k) -= sigma;
    int neg = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        double d = a(k, k).real();
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++neg;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const cplx l = a(i, k) / d;
            for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) -= l * std::conj(a(j, k));
        }
    }
    return neg;
}

/// Eigenvalues of a Hermitian matrix by bisection on the inertia count.
inline std::vector<double> bisection_eigenvalues(const mlab::Matrix& h) {
    const auto n = h.rows();
    double r = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) s += std::abs(h(i, j));
        r = std::max(r, s);
    }
    std::vector<double> ev;
    for (Eigen::Index k = 0; k < n; ++k) {
        double lo = -r - 1.0, hi = r + 1.0;  // k-th eigenvalue: count_below(lo) <= k < count_below(hi)
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_below(h, mid) > k)
                hi = mid;
            else
                lo = mid;
        }
        ev.push_back(0.5 * (lo + hi));
    }
    return ev;
}

inline mlab::Matrix random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    mlab::Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double re = g(rng);
            m(i, j) = cplx(re, g(rng));
        }
    return 0.5 * (m + m.adjoint());
}

/// x_norm of e_beta: sqrt(1 + |beta|^2).
inline double x_norm_basis(const std::vector<int>& beta) {
    double s = 1.0;
    for (int v : beta) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

/// Largest distance between two phase multisets (greedy on the circle; exact for well-separated clusters).
inline double multiset_gap(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) return 1e300;
    double worst = 0.0;
    std::vector<bool> used(y.size(), false);
    for (double p : x) {
        double best = 1e300;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (used[j]) continue;
            const double d = mlab::phase_distance(p, y[j]);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace oracle
