#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (a <= 1, non-real weight, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical certificate failed (aliasing risk, unitarity defect, ...).
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// An iterative kernel did not converge within its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Phase in [0, 2pi).
inline double normalize_phase(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

/// Distance between two phases on the circle.
inline double phase_distance(double a, double b) {
    double d = std::fabs(normalize_phase(a) - normalize_phase(b));
    return std::min(d, kTwoPi - d);
}

/// An arc of the unit circle, stored by its endpoint phases in [0, 2pi).
/// `low > high` means the arc wraps through phase 0.
struct Arc {
    double low = 0.0;
    double high = 0.0;
    bool full = false;
    bool empty = false;

    Arc() = default;
    Arc(double lo, double hi) : low(normalize_phase(lo)), high(normalize_phase(hi)) {
        if (low == high) throw DomainError("arc endpoints coincide");
    }

    static Arc full_circle() {
        Arc a;
        a.full = true;
        return a;
    }

    static Arc empty_arc() {
        Arc a;
        a.empty = true;
        return a;
    }

    double width() const {
        if (full) return kTwoPi;
        if (empty) return 0.0;
        return high > low ? high - low : kTwoPi - (low - high);
    }

    bool wraps() const { return !full && !empty && low > high; }

    /// Strict interior test.
    bool contains(double phi) const {
        if (full) return true;
        if (empty) return false;
        phi = normalize_phase(phi);
        if (!wraps()) return phi > low && phi < high;
        return phi > low || phi < high;
    }

    /// Closed test with an absolute slack on both ends.
    bool contains_closed(double phi, double slack = 0.0) const {
        if (full) return true;
        if (empty) return false;
        phi = normalize_phase(phi);
        double off = normalize_phase(phi - low + slack);
        return off <= width() + 2.0 * slack;
    }

    /// Arc with each end moved outwards by `delta` (inwards when negative).
    Arc widened(double delta) const {
        if (full || empty) return *this;
        if (width() + 2.0 * delta <= 0.0) return empty_arc();
        if (width() + 2.0 * delta >= kTwoPi) return full_circle();
        return Arc(low - delta, high + delta);
    }

    double midpoint() const { return full ? 0.0 : normalize_phase(low + 0.5 * width()); }
};

/// "%.17g" formatting, used by every text artifact so values round-trip exactly.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace mlab
