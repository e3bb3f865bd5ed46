#pragma once

// Commutators, the windowed commutator identities, Mourre constants and the
// compressed-commutator positivity check.

#include "spectra.hpp"

#include <set>

namespace mlab {

inline void require_same_sites(const LatticeOperator& a, const LatticeOperator& b) {
    if (a.box.sides() != b.box.sides()) throw DomainError("operators live on different boxes");
}

inline LatticeOperator commutator(const LatticeOperator& a, const LatticeOperator& b) {
    require_same_sites(a, b);
    LatticeOperator r = make_operator(a.box, a.matrix * b.matrix - b.matrix * a.matrix);
    if (a.flags.bandwidth && b.flags.bandwidth) r.flags.bandwidth = *a.flags.bandwidth + *b.flags.bandwidth;
    return r;
}

/// Spectral norm of M restricted to the coordinate subspace `cols`.
inline double restricted_norm(const Matrix& m, const std::vector<std::size_t>& cols) {
    Matrix block(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) block.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
    return cols.empty() ? 0.0 : operator_norm(block);
}

/// Rows and columns of M in the index set `idx`.
inline Matrix principal_block(const Matrix& m, const std::vector<std::size_t>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix b(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            b(r, c) = m(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c]));
    return b;
}

// ---------------------------------------------------------------------------
// U* A U - A

struct SandwichResult {
    LatticeOperator b;           // U* A U - A
    double ad_residual = 0.0; // ||U*AU - A - U*[A, U]||_max
    double hermitian_defect = 0.0;
};

inline SandwichResult sandwich(const LatticeOperator& u, const LatticeOperator& a) {
    require_same_sites(u, a);
    if (!u.flags.unitary) throw DomainError("sandwich needs a unitary-flagged operator");
    SandwichResult r;
    const Matrix ua = u.matrix.adjoint() * a.matrix;
    r.b = make_operator(a.box, ua * u.matrix - a.matrix);
    const Matrix ad = u.matrix.adjoint() * (a.matrix * u.matrix - u.matrix * a.matrix);
    r.ad_residual = max_abs(r.b.matrix - ad);
    r.hermitian_defect = hermiticity_defect(r.b.matrix);
    r.b.flags.hermitian = r.hermitian_defect < 1e-12 * std::max(1.0, max_abs(a.matrix));
    return r;
}

// ---------------------------------------------------------------------------
// ad_{A_{i f grad conj f}} L_f = L_{f |grad f|^2} on interior windows

struct IdentityResidual {
    double residual = 0.0;  // max over unit vectors supported in the window
    int margin = 0;
    std::size_t window = 0;
    std::vector<std::string> warnings;
};

inline IdentityResidual identity_check_laurent(const Symbol& f, const Box& box, int margin, double tail_tol = 1e-15) {
    if (box.periodic()) throw DomainError("identity_check_laurent needs an open box");
    if (f.is_constant()) throw DomainError("identity_check_laurent refuses a constant symbol");
    DerivedSymbols d = derived_symbols(f, tail_tol);
    const LatticeOperator a = conjugate_op(box, d.conjugate_weights);
    const LatticeOperator l = laurent_op(box, f);
    const LatticeOperator r = laurent_op(box, multiply(f, d.grad_norm_sq, 1e-18));
    IdentityResidual out;
    out.margin = margin;
    out.warnings = d.warnings;
    const auto idx = box.interior(margin);
    out.window = idx.size();
    out.residual = restricted_norm(a.matrix * l.matrix - l.matrix * a.matrix - r.matrix, idx);
    return out;
}

/// Local variant: ad_{A_g} L_f = L_{-i g . grad f} for a real weight family g.
inline IdentityResidual identity_check_general(const Symbol& f, const std::vector<Symbol>& g, const Box& box, int margin) {
    if (box.periodic()) throw DomainError("identity_check_general needs an open box");
    const LatticeOperator a = conjugate_op(box, g);
    const LatticeOperator l = laurent_op(box, f);
    const LatticeOperator r = laurent_op(box, scale(weighted_gradient(g, f), -kI));
    IdentityResidual out;
    out.margin = margin;
    const auto idx = box.interior(margin);
    out.window = idx.size();
    out.residual = restricted_norm(a.matrix * l.matrix - l.matrix * a.matrix - r.matrix, idx);
    return out;
}

// ---------------------------------------------------------------------------
// Mourre constants

struct MourreConstants {
    double c = 0.0;  // min of g over the preimage of the arc
    double C = 0.0;  // max of g over the preimage
    std::size_t samples = 0;
};

inline MourreConstants mourre_constant(const Symbol& f, const Arc& arc, const Symbol& g, int grid) {
    if (g.dim != f.dim) throw DomainError("weight and symbol dimensions differ");
    MourreConstants m;
    m.c = std::numeric_limits<double>::infinity();
    m.C = -std::numeric_limits<double>::infinity();
    for_each_grid_point(f.dim, grid, [&](const TorusPoint& t) {
        if (!arc.contains_closed(std::arg(f(t)))) return;
        const double v = g(t).real();
        m.c = std::min(m.c, v);
        m.C = std::max(m.C, v);
        ++m.samples;
    });
    if (m.samples == 0) throw DomainError("arc misses Ran f");
    return m;
}

/// Best bounds over the arcs enlarged by width * {1/2, 1/4, 1/8}; enlarging can
/// only lower c and raise C, so the smallest enlargement gives the sharp pair.
inline MourreConstants mourre_constant_sharp(const Symbol& f, const Arc& arc, const Symbol& g, int grid) {
    MourreConstants best;
    best.c = -std::numeric_limits<double>::infinity();
    best.C = std::numeric_limits<double>::infinity();
    for (double frac : {0.5, 0.25, 0.125}) {
        MourreConstants m = mourre_constant(f, arc.widened(frac * arc.width()), g, grid);
        best.c = std::max(best.c, m.c);
        best.C = std::min(best.C, m.C);
        best.samples = m.samples;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Compressed commutator

/// Compression onto range(P_outer Phi P_inner): P_outer cuts away the seam
/// collar of the finite box, P_inner keeps the sources far from the cut.
struct CompressionWindow {
    std::vector<std::size_t> outer;
    std::vector<std::size_t> inner;
    double range_tol = 1e-2;  // singular values of the compression kept above this

    /// Windows by depth: outer = depth >= collar, inner = depth >= collar + inner_margin.
    static CompressionWindow by_depth(const Box& box, int collar, int inner_margin, double range_tol = 1e-2) {
        CompressionWindow w;
        w.outer = box.interior(collar);
        w.inner = box.interior(collar + inner_margin);
        w.range_tol = range_tol;
        return w;
    }

    /// Every site, for operators without a seam.
    static CompressionWindow everything(const Box& box, double range_tol = 1e-2) {
        return by_depth(box, 0, 0, range_tol);
    }
};

struct MourreReport {
    Arc arc;
    double c_lower = 0.0;
    double C_upper = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double margin = 0.0;  // c_lower - lambda_min
    std::size_t rank = 0;
    RealVector eigenvalues;  // of the compressed commutator, ascending
    Matrix eigenvectors;     // lattice vectors, one per eigenvalue

    /// Indices of the eigenvalues below `threshold`.
    std::vector<std::size_t> below(double threshold) const {
        std::vector<std::size_t> out;
        for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
            if (eigenvalues(k) < threshold) out.push_back(static_cast<std::size_t>(k));
        return out;
    }
};

/// Orthonormal basis (columns, full lattice length) of range(P_outer Phi P_inner).
inline Matrix compression_basis(const Matrix& phi, const CompressionWindow& w, std::size_t n) {
    Matrix block(static_cast<Eigen::Index>(w.outer.size()), static_cast<Eigen::Index>(w.inner.size()));
    for (std::size_t r = 0; r < w.outer.size(); ++r)
        for (std::size_t c = 0; c < w.inner.size(); ++c)
            block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                phi(static_cast<Eigen::Index>(w.outer[r]), static_cast<Eigen::Index>(w.inner[c]));
    const SpectralData g = hermitian_eig(Matrix(block * block.adjoint()));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(g.size()); ++k)
        if (g.phases(k) >= w.range_tol * w.range_tol) keep.push_back(k);
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        for (std::size_t r = 0; r < w.outer.size(); ++r)
            q(static_cast<Eigen::Index>(w.outer[r]), static_cast<Eigen::Index>(j)) =
                g.vectors(static_cast<Eigen::Index>(r), keep[j]);
    return q;
}

/// Extreme eigenvalues of U*AU - A compressed to range(P_outer Phi P_inner).
/// The report records the discrepancy against c_expected instead of asserting it.
inline MourreReport mourre_check(const LatticeOperator& u, const LatticeOperator& a, const Matrix& phi,
                                 const CompressionWindow& w, const MourreConstants& expected, const Arc& arc) {
    require_same_sites(u, a);
    if (!u.flags.unitary) throw DomainError("mourre_check needs a unitary-flagged operator");
    const Matrix b = u.matrix.adjoint() * a.matrix * u.matrix - a.matrix;
    const Matrix q = compression_basis(phi, w, u.size());
    if (q.cols() == 0) throw DomainError("mourre_check: rank-0 compression");
    Matrix c = q.adjoint() * b * q;
    c = 0.5 * (c + c.adjoint());
    const SpectralData s = hermitian_eig(c);
    MourreReport rep;
    rep.arc = arc;
    rep.c_lower = expected.c;
    rep.C_upper = expected.C;
    rep.rank = static_cast<std::size_t>(q.cols());
    rep.eigenvalues = s.phases;
    rep.eigenvectors = q * s.vectors;
    rep.lambda_min = s.phases(0);
    rep.lambda_max = s.phases(s.phases.size() - 1);
    rep.margin = expected.c - rep.lambda_min;
    return rep;
}

/// Fraction of |v|^2 on the index set `mask`.
inline double mass_fraction(const Vector& v, const std::vector<bool>& mask) {
    double in = 0.0, tot = v.squaredNorm();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (mask[static_cast<std::size_t>(k)]) in += std::norm(v(k));
    return tot > 0.0 ? in / tot : 0.0;
}

/// Sites with lo <= depth < hi.
inline std::vector<bool> depth_band(const Box& box, int lo, int hi) {
    std::vector<bool> mask(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
        const int d = box.depth(box.coord(k));
        mask[k] = d >= lo && d < hi;
    }
    return mask;
}

inline std::vector<bool> mask_union(std::vector<bool> a, const std::vector<bool>& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = a[k] || b[k];
    return a;
}

struct Deficiency {
    std::size_t count = 0;
    std::vector<double> eigenvalues;
    std::vector<double> localized_mass;  // mass fraction in the mask, per deficient vector

    double min_mass() const {
        return localized_mass.empty() ? 1.0 : *std::min_element(localized_mass.begin(), localized_mass.end());
    }
};

inline Deficiency deficiency(const MourreReport& rep, double threshold, const std::vector<bool>& mask) {
    Deficiency d;
    for (std::size_t k : rep.below(threshold)) {
        ++d.count;
        d.eigenvalues.push_back(rep.eigenvalues(static_cast<Eigen::Index>(k)));
        d.localized_mass.push_back(mass_fraction(rep.eigenvectors.col(static_cast<Eigen::Index>(k)), mask));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Virial

inline double virial_residual(const LatticeOperator& u, const LatticeOperator& a, const Vector& psi, double phase) {
    require_same_sites(u, a);
    const double eig_res = (u.matrix * psi - std::polar(1.0, phase) * psi).norm();
    if (eig_res >= 1e-8) throw DomainError("virial_residual: not an eigenvector, residual " + fmt17(eig_res));
    const Vector up = u.matrix * psi;
    const cplx q = up.dot(a.matrix * up) - psi.dot(a.matrix * psi);
    return std::abs(q);
}

// ---------------------------------------------------------------------------
// Regularity probe

struct RegularityRow {
    double tau = 0.0;
    double integrand = 0.0;  // norm of the first or second difference
};

struct RegularityTable {
    int s = 0;
    std::vector<RegularityRow> rows;
    double partial_integral = 0.0;  // trapezoid of integrand / tau^{s+1} over the sampled range
};

inline std::vector<double> default_tau_grid() {
    std::vector<double> t;
    for (int k = 0; k <= 12; ++k) t.push_back(std::ldexp(1.0, -k));
    return t;
}

/// Norms of e^{iA tau} B e^{-iA tau} - B (s = 0) or of the symmetric second
/// difference (s = 1), with e^{iA tau} from the spectral data of A.
inline RegularityTable regularity_probe(const Matrix& b, const SpectralData& a, int s, std::vector<double> taus) {
    if (s != 0 && s != 1) throw DomainError("regularity_probe order must be 0 or 1");
    for (double t : taus)
        if (!(t > 0.0 && t <= 1.0)) throw DomainError("tau samples must lie in (0, 1]");
    std::sort(taus.begin(), taus.end());
    RegularityTable table;
    table.s = s;
    const Matrix bt = a.vectors.adjoint() * b * a.vectors;  // B in the eigenbasis of A
    const auto n = bt.rows();
    for (double t : taus) {
        Matrix d(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) {
                const double w = (a.phases(r) - a.phases(c)) * t;
                const cplx e = std::polar(1.0, w);
                d(r, c) = s == 0 ? (e - 1.0) * bt(r, c) : (e + std::conj(e) - 2.0) * bt(r, c);
            }
        table.rows.push_back({t, operator_norm(d, 1e-8)});
    }
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        const auto& p = table.rows[k - 1];
        const auto& q = table.rows[k];
        const double fp = p.integrand / std::pow(p.tau, s + 1), fq = q.integrand / std::pow(q.tau, s + 1);
        table.partial_integral += 0.5 * (q.tau - p.tau) * (fp + fq);
    }
    return table;
}

}  // namespace mlab
