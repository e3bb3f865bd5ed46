#pragma once

// Discrete-time dynamics psi_{n+1} = U psi_n: position norms, ballistic
// rates, telescoping identities and RAGE averages.

#include "mourre.hpp"

namespace mlab {

struct TraceStep {
    int n = 0;
    double x_norm = 0.0;
    double plain_norm = 0.0;
    double rage_partial = 0.0;  // (1/n) sum_{m<n} ||K U^m psi0||, 0 at n = 0
    double arc_weight = 1.0;    // ||P psi_n|| / ||psi_n|| for the supplied arc operator
    double collar_mass = 0.0;   // ||psi_n|| on sites closer than one bandwidth to the boundary
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    int fit_lo = 0, fit_hi = 0;
};

struct PropagationTrace {
    Box box;
    std::vector<TraceStep> steps;
    int wrap_horizon = 0;  // largest n certified free of boundary effects
    int band_horizon = 0;  // margin / bandwidth
    int bandwidth = 0;
    RateFit rate_fit;
    Vector final_state;
};

struct EvolveOptions {
    std::optional<Matrix> k;            // finite-rank observable for the RAGE column
    std::optional<Matrix> arc_operator; // arc projector or filter for the arc_weight column
    int bandwidth = -1;                 // default: the operator's bandwidth flag
    double horizon_tol = 1e-10;         // collar mass tolerated before the run is cut
};

/// Projector onto the sites with |coordinate_j| <= radius on every axis.
inline Matrix central_projector(const Box& box, int radius) {
    const auto n = static_cast<Eigen::Index>(box.size());
    Matrix k = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Coord c = box.coord(static_cast<std::size_t>(i));
        bool in = true;
        for (int v : c) in = in && std::abs(v) <= radius;
        if (in) k(i, i) = 1.0;
    }
    return k;
}

inline int operator_bandwidth(const LatticeOperator& u, int requested) {
    if (requested >= 0) return requested;
    if (u.flags.bandwidth) return *u.flags.bandwidth;
    return u.box.min_side();
}

/// Iterates U on psi0. The run stops at n_max or at the wrap horizon: the larger
/// of margin / bandwidth and the last step whose collar mass stays below
/// horizon_tol. Up to that step the finite box reproduces the lattice dynamics.
inline PropagationTrace evolve(const LatticeOperator& u, const Vector& psi0, int n_max, const EvolveOptions& opt = {}) {
    if (!u.flags.unitary) throw DomainError("evolve needs a unitary-flagged operator");
    if (n_max < 0) throw DomainError("n_max must be non-negative");
    const Box& box = u.box;
    PropagationTrace tr;
    tr.box = box;
    tr.bandwidth = operator_bandwidth(u, opt.bandwidth);
    const int collar = std::max(1, tr.bandwidth);
    const double c0 = collar_mass(box, psi0, collar);
    if (c0 > opt.horizon_tol) throw DomainError("initial state touches the boundary collar (mass " + fmt17(c0) + ")");
    const int margin = support_margin(box, psi0, 0.0);
    tr.band_horizon = tr.bandwidth == 0 ? n_max : margin / tr.bandwidth;

    Vector psi = psi0;
    double rage_sum = 0.0;
    int certified = 0;
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) psi = u.matrix * psi;
        TraceStep st;
        st.n = n;
        st.collar_mass = collar_mass(box, psi, collar);
        if (n > tr.band_horizon && st.collar_mass > opt.horizon_tol) break;
        certified = n;
        st.x_norm = x_norm(box, psi);
        st.plain_norm = psi.norm();
        st.rage_partial = n == 0 ? 0.0 : rage_sum / n;
        if (opt.k) rage_sum += (*opt.k * psi).norm();
        if (opt.arc_operator) st.arc_weight = st.plain_norm > 0 ? (*opt.arc_operator * psi).norm() / st.plain_norm : 0.0;
        tr.steps.push_back(st);
        tr.final_state = psi;
    }
    tr.wrap_horizon = std::max(std::min(tr.band_horizon, n_max), certified);
    return tr;
}

/// Least-squares slope of x_norm against n over the last half of the trace.
inline RateFit ballistic_rate(const PropagationTrace& tr) {
    if (tr.steps.size() < 32) throw DomainError("ballistic_rate needs at least 32 steps");
    const int last = tr.steps.back().n;
    RateFit fit;
    fit.fit_lo = last / 2;
    fit.fit_hi = last;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (const auto& s : tr.steps) {
        if (s.n < fit.fit_lo) continue;
        sx += s.n;
        sy += s.x_norm;
        sxx += static_cast<double>(s.n) * s.n;
        sxy += s.n * s.x_norm;
        m += 1;
    }
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    return fit;
}

// ---------------------------------------------------------------------------
// Rate bounds

struct RateBoundsOptions {
    std::optional<Arc> arc;
    double smoothing = 0.05;
    std::vector<double> excluded_phases;  // point-spectrum phases removed from the filter
    const SpectralData* spectrum = nullptr;
    int n_max = 400;
    int grid = 4096;
    double slack = 0.05;
    // Collar mass tolerated during the rate run; the position norm moves by at
    // most horizon_tol * N, far below the slope tolerance.
    double horizon_tol = 1e-4;
};

struct RateBoundsReport {
    double rate = 0.0;
    double psi_norm = 0.0;
    double commutator_norm = 0.0;  // ||[A, U]|| on the seam-free window
    double upper_bound = 0.0;      // sqrt(||[A, U]||) ||psi||
    bool upper_ok = false;
    bool has_window = false;
    double filtered_norm = 0.0;    // ||Phi(U) psi||
    double c = 0.0, C = 0.0;
    double window_low = 0.0, window_high = 0.0;
    bool window_ok = true;
    int horizon = 0;

    bool ok() const { return upper_ok && window_ok; }
};

inline RateBoundsReport rate_bounds_check(const LatticeOperator& u, const Symbol& f, const Vector& psi0,
                                          const RateBoundsOptions& opt = {}) {
    if (!u.flags.unitary) throw DomainError("rate_bounds_check needs a unitary-flagged operator");
    const Box open = with_boundary(u.box, Boundary::open);
    const DerivedSymbols d = derived_symbols(f);
    const LatticeOperator a = conjugate_op(open, d.conjugate_weights);
    const int bw = operator_bandwidth(u, -1);

    RateBoundsReport rep;
    const auto window = u.box.interior(std::max(bw, 1));
    rep.commutator_norm = operator_norm(principal_block(a.matrix * u.matrix - u.matrix * a.matrix, window));

    Vector psi = psi0;
    if (opt.arc) {
        if (!opt.spectrum) throw DomainError("arc-filtered rate needs the spectral data of U");
        const SpectralData& s = *opt.spectrum;
        Eigen::VectorXcd w = arc_filter_weights(s, *opt.arc, opt.smoothing);
        for (std::size_t k = 0; k < s.size(); ++k)
            for (double p : opt.excluded_phases)
                if (phase_distance(s.phases(k), p) < 1e-8) w(k) = 0.0;
        if (w.cwiseAbs().maxCoeff() == 0.0) throw DomainError("arc lies inside the point spectrum");
        psi = s.vectors * w.cwiseProduct(s.vectors.adjoint() * psi0);
        rep.has_window = true;
        rep.filtered_norm = psi.norm();
        MourreConstants mc = mourre_constant(f, *opt.arc, d.grad_norm_sq, opt.grid);
        rep.c = mc.c;
        rep.C = mc.C;
    }
    EvolveOptions eo;
    eo.horizon_tol = opt.horizon_tol;
    const PropagationTrace tr = evolve(u, psi, opt.n_max, eo);
    rep.horizon = tr.wrap_horizon;
    rep.rate = ballistic_rate(tr).slope;
    rep.psi_norm = psi.norm();
    rep.upper_bound = std::sqrt(rep.commutator_norm) * rep.psi_norm;
    rep.upper_ok = rep.rate <= rep.upper_bound * (1.0 + opt.slack);
    if (rep.has_window) {
        rep.window_low = std::sqrt(rep.c) * rep.filtered_norm;
        rep.window_high = std::sqrt(rep.C) * rep.filtered_norm;
        rep.window_ok = rep.rate >= rep.window_low * (1.0 - opt.slack) && rep.rate <= rep.window_high * (1.0 + opt.slack);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Telescoping identities

/// C_j = X_j - U X_j U* for every axis.
inline std::vector<Matrix> position_defects(const LatticeOperator& u) {
    std::vector<Matrix> c;
    for (int j = 0; j < u.box.dim(); ++j) {
        const RealVector x = coordinates(u.box, j);
        Matrix m = -(u.matrix * x.asDiagonal() * u.matrix.adjoint());
        m.diagonal() += x.cast<cplx>();
        c.push_back(std::move(m));
    }
    return c;
}

struct TelescopingResult {
    double forward_lhs = 0.0, forward_rhs = 0.0;
    double backward_lhs = 0.0, backward_rhs = 0.0;
    double residual = 0.0;  // max of the two |LHS - RHS|
};

/// Forward and backward telescoping sums for ||U^{+-n} psi||_X^2 - ||psi||_X^2.
/// With enforce_horizon the run is refused beyond the certified wrap horizon.
inline TelescopingResult telescoping_check(const LatticeOperator& u, const Vector& psi, int n,
                                           bool enforce_horizon = true, double horizon_tol = 1e-10) {
    if (!u.flags.unitary) throw DomainError("telescoping_check needs a unitary-flagged operator");
    const Box& box = u.box;
    if (enforce_horizon) {
        EvolveOptions eo;
        eo.horizon_tol = horizon_tol;
        if (evolve(u, psi, n, eo).wrap_horizon < n || evolve(adjoint(u), psi, n, eo).wrap_horizon < n)
            throw DomainError("telescoping_check: n exceeds the wrap horizon");
    }
    const auto c = position_defects(u);
    std::vector<RealVector> x;
    for (int j = 0; j < box.dim(); ++j) x.push_back(coordinates(box, j));
    auto term = [&](const Vector& v) {
        double s2 = 0.0, sq = 0.0;
        for (int j = 0; j < box.dim(); ++j) {
            const Vector cv = c[j] * v;
            s2 += 2.0 * cv.dot(x[j].cast<cplx>().cwiseProduct(v)).real();
            sq += cv.squaredNorm();
        }
        return std::pair{s2, sq};
    };
    TelescopingResult r;
    const double base = std::pow(x_norm(box, psi), 2);
    Vector v = psi;
    for (int m = 1; m <= n; ++m) {
        v = u.matrix * v;
        auto [s2, sq] = term(v);
        r.forward_rhs += s2 - sq;
    }
    r.forward_lhs = std::pow(x_norm(box, v), 2) - base;
    v = psi;
    for (int m = 0; m < n; ++m) {
        auto [s2, sq] = term(v);
        r.backward_rhs += -s2 + sq;
        v = u.matrix.adjoint() * v;
    }
    r.backward_lhs = std::pow(x_norm(box, v), 2) - base;
    r.residual = std::max(std::abs(r.forward_lhs - r.forward_rhs), std::abs(r.backward_lhs - r.backward_rhs));
    return r;
}

struct QuadraticResult {
    std::vector<int> n;
    std::vector<double> lhs, rhs, residual;
    double commutator = 0.0;  // max_m sum_j ||[C_j, U] U^m psi||
    double max_residual() const { return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end()); }
};

/// ||U^n psi||_X^2 - ||psi||_X^2 = n^2 sum ||C_j psi||^2 + 2n sum Re<C_j psi, X_j psi>
/// for U commuting with its C_j along the orbit of psi.
inline QuadraticResult corollary_quadratic_check(const LatticeOperator& u, const Vector& psi, const std::vector<int>& ns,
                                                 double commute_tol = 1e-10) {
    if (!u.flags.unitary) throw DomainError("corollary_quadratic_check needs a unitary-flagged operator");
    const Box& box = u.box;
    const auto c = position_defects(u);
    int n_top = 0;
    for (int n : ns) {
        if (n < 0) throw DomainError("negative iteration count");
        n_top = std::max(n_top, n);
    }
    QuadraticResult r;
    Vector v = psi;
    for (int m = 0; m <= n_top; ++m) {
        double s = 0.0;
        for (const auto& cj : c) s += (cj * (u.matrix * v) - u.matrix * (cj * v)).norm();
        r.commutator = std::max(r.commutator, s);
        v = u.matrix * v;
    }
    if (r.commutator >= commute_tol)
        throw DomainError("corollary_quadratic_check: [C, U] = " + fmt17(r.commutator) + " along the orbit");
    double quad = 0.0, lin = 0.0;
    for (int j = 0; j < box.dim(); ++j) {
        const Vector cp = c[j] * psi;
        quad += cp.squaredNorm();
        lin += cp.dot(coordinates(box, j).cast<cplx>().cwiseProduct(psi)).real();
    }
    const double base = std::pow(x_norm(box, psi), 2);
    for (int n : ns) {
        Vector w = psi;
        for (int m = 0; m < n; ++m) w = u.matrix * w;
        const double lhs = std::pow(x_norm(box, w), 2) - base;
        const double rhs = static_cast<double>(n) * n * quad + 2.0 * n * lin;
        r.n.push_back(n);
        r.lhs.push_back(lhs);
        r.rhs.push_back(rhs);
        r.residual.push_back(std::abs(lhs - rhs));
    }
    return r;
}

}  // namespace mlab
