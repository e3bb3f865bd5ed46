#pragma once

// Eigensolvers (cyclic Jacobi), arc projectors and filters, essential-arc
// classification and the weighted-resolvent probe.

#include "lattice.hpp"

#include <numeric>

namespace mlab {

struct SpectralData {
    RealVector phases;   // eigenphases in [0, 2pi) (unitary) or eigenvalues (Hermitian), ascending
    Matrix vectors;      // orthonormal eigenvectors, one per column
    double residual = 0.0;         // max ||M v - lambda v||
    double modulus_defect = 0.0;   // unitary case: max | |lambda| - 1 |
    bool unitary = false;
    int sweeps = 0;

    std::size_t size() const { return static_cast<std::size_t>(phases.size()); }
    cplx eigenvalue(std::size_t k) const { return unitary ? std::polar(1.0, phases(k)) : cplx(phases(k)); }
};

struct JacobiOptions {
    int sweep_cap = 60;
    double tol = 1e-13;  // off-diagonal Frobenius mass relative to max(1, ||M||_F)
};

namespace detail {

inline double off_diagonal_mass(const Matrix& a) {
    double s = 0.0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r)
            if (r != c) s += std::norm(a(r, c));
    return std::sqrt(s);
}

}  // namespace detail

/// Cyclic Jacobi for a Hermitian matrix. Each rotation zeroes one off-diagonal
/// pair; sweeps repeat until the off-diagonal mass drops below tolerance.
inline SpectralData jacobi_eig(Matrix a, const JacobiOptions& opt = {}) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DomainError("jacobi_eig needs a square matrix");
    Matrix v = Matrix::Identity(n, n);
    const double scale = std::max(1.0, a.norm());
    const double target = opt.tol * scale;
    const double negligible = 1e-18 * scale;

    SpectralData out;
    double off = detail::off_diagonal_mass(a);
    int sweep = 0;
    for (; off >= target; ++sweep) {
        if (sweep == opt.sweep_cap)
            throw ConvergenceError("Jacobi did not converge after " + std::to_string(opt.sweep_cap) +
                                   " sweeps; off-diagonal mass " + fmt17(off));
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const cplx b = a(p, q);
                const double mod = std::abs(b);
                if (mod <= negligible) continue;
                const cplx e = b / mod;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mod);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx se = s * std::conj(e);  // J = [[c, s], [-s conj(e), c conj(e)]]
                const cplx ce = c * std::conj(e);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - se * akq;
                    a(k, q) = s * akp + ce * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    a(p, k) = std::conj(a(k, p));
                    a(q, k) = std::conj(a(k, q));
                }
                a(p, p) = app - t * mod;
                a(q, q) = aqq + t * mod;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - se * vkq;
                    v(k, q) = s * vkp + ce * vkq;
                }
            }
        off = detail::off_diagonal_mass(a);
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });
    out.phases.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.phases(k) = a(order[k], order[k]).real();
        out.vectors.col(k) = v.col(order[k]);
    }
    out.sweeps = sweep;
    return out;
}

inline double eigen_residual(const Matrix& m, const SpectralData& s) {
    double r = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        r = std::max(r, (m * s.vectors.col(k) - s.eigenvalue(k) * s.vectors.col(k)).norm());
    return r;
}

/// Hermitian eigendecomposition; the input is symmetrised after checking its
/// Hermitian defect against `herm_tol` (relative to max(1, max |m_ij|)).
inline SpectralData hermitian_eig(const Matrix& m, double herm_tol = 1e-10, const JacobiOptions& opt = {}) {
    const double defect = hermiticity_defect(m);
    if (defect > herm_tol * std::max(1.0, max_abs(m)))
        throw DomainError("hermitian_eig: matrix not Hermitian, defect " + fmt17(defect));
    Matrix h = 0.5 * (m + m.adjoint());
    SpectralData s = jacobi_eig(h, opt);
    s.residual = eigen_residual(h, s);
    return s;
}

inline SpectralData hermitian_eig(const LatticeOperator& op, const JacobiOptions& opt = {}) {
    if (!op.flags.hermitian) throw DomainError("hermitian_eig: operator not flagged Hermitian");
    return hermitian_eig(op.matrix, 1e-12, opt);
}

/// Eigendecomposition of a normal matrix through the commuting pair
/// H1 = (U + U*)/2, H2 = (U - U*)/(2i).
inline SpectralData unitary_eig(const Matrix& u, double cluster_gap = 1e-8, const JacobiOptions& opt = {}) {
    const double normality = max_abs(u * u.adjoint() - u.adjoint() * u);
    if (normality > 1e-10) throw DomainError("unitary_eig: normality defect " + fmt17(normality));
    const Eigen::Index n = u.rows();
    const Matrix h1 = 0.5 * (u + u.adjoint());
    const Matrix h2 = (u - u.adjoint()) / (2.0 * kI);
    SpectralData s1 = jacobi_eig(h1, opt);
    Matrix v = s1.vectors;

    // Jacobi stops at a finite off-diagonal mass, so H1 eigenvectors whose
    // eigenvalues sit just above cluster_gap can still be mixed. Group
    // generously and split each group with a generic combination of H1 and H2,
    // which separates the pairs theta, -theta that H1 alone cannot see.
    const double group_gap = std::max(cluster_gap, 1e-5);
    const double gamma = 0.6180339887498949;
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && s1.phases(end) - s1.phases(end - 1) < group_gap) ++end;
        const Eigen::Index m = end - start;
        if (m > 1) {
            Matrix block = v.middleCols(start, m);
            Matrix c = block.adjoint() * (h1 + gamma * h2) * block;
            SpectralData s2 = jacobi_eig(0.5 * (c + c.adjoint()), opt);
            v.middleCols(start, m) = block * s2.vectors;
        }
        start = end;
    }

    SpectralData out;
    out.unitary = true;
    out.sweeps = s1.sweeps;
    std::vector<double> ph(n);
    double modulus = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double l1 = (v.col(k).adjoint() * h1 * v.col(k))(0).real();
        const double l2 = (v.col(k).adjoint() * h2 * v.col(k))(0).real();
        ph[k] = normalize_phase(std::atan2(l2, l1));
        modulus = std::max(modulus, std::abs(std::hypot(l1, l2) - 1.0));
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return ph[x] < ph[y]; });
    out.phases.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.phases(k) = ph[order[k]];
        out.vectors.col(k) = v.col(order[k]);
    }
    out.modulus_defect = modulus;
    out.residual = eigen_residual(u, out);
    if (out.residual > 1e-8) throw PrecisionError("unitary_eig: cluster splitting failed, residual " + fmt17(out.residual));
    return out;
}

inline SpectralData unitary_eig(const LatticeOperator& op, double cluster_gap = 1e-8) {
    if (!op.flags.unitary) throw DomainError("unitary_eig: operator not flagged unitary");
    return unitary_eig(op.matrix, cluster_gap);
}

/// Spectral data of L_f on a periodic line: Fourier modes with phases arg f(2 pi k / N).
/// Exact for the circulant built by laurent_op from the same symbol.
inline SpectralData circulant_spectral_data(const Box& box, const Symbol& f) {
    if (box.dim() != 1 || !box.periodic()) throw DomainError("circulant_spectral_data needs a periodic line");
    const auto n = static_cast<Eigen::Index>(box.size());
    std::vector<std::pair<double, Eigen::Index>> ph;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        ph.emplace_back(normalize_phase(std::arg(f.trig_sum({theta}))), k);
    }
    std::stable_sort(ph.begin(), ph.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    SpectralData s;
    s.unitary = true;
    s.phases.resize(n);
    s.vectors.resize(n, n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        s.phases(j) = ph[j].first;
        const double theta = kTwoPi * static_cast<double>(ph[j].second) / static_cast<double>(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const int x = box.coord(static_cast<std::size_t>(r))[0];
            s.vectors(r, j) = norm * std::polar(1.0, -theta * x);
        }
    }
    return s;
}

/// V diag(w) V* for spectral weights w.
inline Matrix spectral_function(const SpectralData& s, const Eigen::VectorXcd& w) {
    return s.vectors * w.asDiagonal() * s.vectors.adjoint();
}

inline Matrix reconstruct(const SpectralData& s) {
    Eigen::VectorXcd w(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) w(k) = s.eigenvalue(k);
    return spectral_function(s, w);
}

// ---------------------------------------------------------------------------
// Arc projectors and smooth arc functions

inline LatticeOperator spectral_operator(const Box& box, const SpectralData& s, const Eigen::VectorXcd& w) {
    LatticeOperator op = make_operator(box, spectral_function(s, w));
    bool real = true;
    for (Eigen::Index k = 0; k < w.size(); ++k) real = real && w(k).imag() == 0.0;
    op.flags.hermitian = real;
    return op;
}

inline Eigen::VectorXcd arc_indicator(const SpectralData& s, const Arc& arc) {
    Eigen::VectorXcd w(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) w(k) = arc.contains(s.phases(k)) ? 1.0 : 0.0;
    return w;
}

inline LatticeOperator arc_projector(const Box& box, const SpectralData& s, const Arc& arc) {
    return spectral_operator(box, s, arc_indicator(s, arc));
}

inline std::size_t arc_rank(const SpectralData& s, const Arc& arc) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < s.size(); ++k) r += arc.contains(s.phases(k)) ? 1 : 0;
    return r;
}

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

/// Bump equal to 1 on the arc shrunk by `smoothing` and 0 outside the arc.
inline double arc_bump(const Arc& arc, double smoothing, double phi) {
    if (arc.full) return 1.0;
    if (arc.empty) return 0.0;
    if (!(smoothing > 0.0)) return arc.contains(phi) ? 1.0 : 0.0;
    const double off = normalize_phase(phi - arc.low);
    if (off >= arc.width()) return 0.0;
    const double depth = std::min(off, arc.width() - off);
    return smooth_step(depth / smoothing);
}

inline Eigen::VectorXcd arc_filter_weights(const SpectralData& s, const Arc& arc, double smoothing) {
    if (!arc.full && smoothing >= arc.width() / 2.0) throw DomainError("arc_filter: smoothing exceeds half the arc width");
    Eigen::VectorXcd w(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) w(k) = arc_bump(arc, smoothing, s.phases(k));
    return w;
}

inline LatticeOperator arc_filter(const Box& box, const SpectralData& s, const Arc& arc, double smoothing) {
    return spectral_operator(box, s, arc_filter_weights(s, arc, smoothing));
}

// ---------------------------------------------------------------------------
// Essential arc comparison

inline double participation_ratio(const Vector& v) {
    double s2 = v.squaredNorm(), s4 = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) s4 += std::norm(v(k)) * std::norm(v(k));
    return s4 > 0.0 ? s2 * s2 / s4 : 0.0;
}

struct Outlier {
    std::size_t index = 0;
    double phase = 0.0;
    double participation = 0.0;
    bool localized = false;
};

struct EssentialArcReport {
    Arc arc;
    std::size_t inside = 0, outside = 0, unclassified = 0;
    std::vector<Outlier> outliers;

    std::size_t localized_outliers() const {
        return static_cast<std::size_t>(
            std::count_if(outliers.begin(), outliers.end(), [](const Outlier& o) { return o.localized; }));
    }
};

/// Classifies phases against Theta_a. `phase_tol` absorbs round-off at the
/// endpoints; `extended_fraction` times N is the participation threshold above
/// which an outlier is flagged as extended.
inline EssentialArcReport essential_arc_compare(const SpectralData& s, double a, double endpoint_exclusion,
                                                double phase_tol = 1e-8, double extended_fraction = 0.2) {
    EssentialArcReport rep;
    rep.arc = range_arc(a).arc;
    const double n = static_cast<double>(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double ph = s.phases(k);
        const double to_end = std::min(phase_distance(ph, rep.arc.low), phase_distance(ph, rep.arc.high));
        if (endpoint_exclusion > 0.0 && to_end < endpoint_exclusion) {
            ++rep.unclassified;
        } else if (rep.arc.contains_closed(ph, phase_tol)) {
            ++rep.inside;
        } else {
            ++rep.outside;
            Outlier o;
            o.index = k;
            o.phase = ph;
            o.participation = participation_ratio(s.vectors.col(k));
            o.localized = o.participation < extended_fraction * n;
            rep.outliers.push_back(o);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Norm estimation

/// Largest singular value of a linear map given by matvecs, by power iteration on M*M.
template <typename Apply, typename ApplyAdjoint>
double power_norm(Apply&& apply, ApplyAdjoint&& apply_adjoint, Eigen::Index n, double rel_tol = 1e-10,
                  int max_iter = 5000) {
    Vector x(n);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = cplx(1.0 + 0.37 * std::sin(1.0 + k), 0.21 * std::cos(3.0 * k));
    x.normalize();
    double prev = 0.0, est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector y = apply_adjoint(apply(x));
        est = std::sqrt(std::abs(x.dot(y)));
        const double ny = y.norm();
        if (ny == 0.0) return 0.0;
        x = y / ny;
        if (it > 2 && std::abs(est - prev) <= rel_tol * est) break;
        prev = est;
    }
    return est;
}

inline double operator_norm(const Matrix& m, double rel_tol = 1e-10) {
    return power_norm([&](const Vector& x) -> Vector { return m * x; },
                      [&](const Vector& x) -> Vector { return m.adjoint() * x; }, m.cols(), rel_tol);
}

// ---------------------------------------------------------------------------
// Weighted resolvent probe

struct LapRow {
    double theta = 0.0;
    double radius = 0.0;
    double norm = 0.0;
};

struct LapTable {
    std::vector<LapRow> rows;

    std::vector<double> profile(double theta) const {
        std::vector<double> p;
        for (const auto& r : rows)
            if (r.theta == theta) p.push_back(r.norm);
        return p;
    }

    /// Ratio of the last two ladder values at theta.
    double last_ratio(double theta) const {
        auto p = profile(theta);
        if (p.size() < 2) throw DomainError("LAP profile needs two ladder values");
        return p[p.size() - 1] / p[p.size() - 2];
    }
};

inline std::vector<double> radial_ladder(int k_max) {
    std::vector<double> r;
    for (int k = 1; k <= k_max; ++k) r.push_back(1.0 - std::ldexp(1.0, -k));
    return r;
}

/// <A>^{-1} = (A^2 + I)^{-1/2} from the spectral data of A.
inline Matrix japanese_inverse(const SpectralData& a) {
    Eigen::VectorXcd w(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) w(k) = 1.0 / std::sqrt(a.phases(k) * a.phases(k) + 1.0);
    return spectral_function(a, w);
}

/// ||<A>^{-1} (1 - z U*)^{-1} <A>^{-1}|| for z = r e^{i theta}, with U given by its
/// spectral data and A by its matrix.
inline LapTable lap_probe(const SpectralData& u, const Matrix& a, const std::vector<double>& thetas,
                          const std::vector<double>& ladder) {
    for (double r : ladder)
        if (!(r >= 0.0) || std::abs(r - 1.0) < 1e-15) throw DomainError("radial ladder must avoid |z| = 1");
    const SpectralData sa = hermitian_eig(a);
    const Matrix w = japanese_inverse(sa);
    const Matrix b = u.vectors.adjoint() * w;  // <A>^{-1} (1 - zU*)^{-1} <A>^{-1} = b* D b
    LapTable table;
    for (double theta : thetas)
        for (double r : ladder) {
            const cplx z = std::polar(r, theta);
            Eigen::VectorXcd d(u.size());
            for (std::size_t k = 0; k < u.size(); ++k) {
                const cplx den = 1.0 - z * std::polar(1.0, -u.phases(k));
                if (std::abs(den) < 1e-300) throw PrecisionError("resolvent denominator vanished");
                d(k) = 1.0 / den;
            }
            auto apply = [&](const Vector& x) -> Vector { return b.adjoint() * (d.asDiagonal() * (b * x)); };
            auto apply_adj = [&](const Vector& x) -> Vector {
                return b.adjoint() * (d.conjugate().asDiagonal() * (b * x));
            };
            table.rows.push_back({theta, r, power_norm(apply, apply_adj, b.cols(), 1e-9)});
        }
    return table;
}

}  // namespace mlab
