#pragma once

// Finite boxes of Z^d and the operators living on them.

#include "symbol.hpp"

#include <functional>
#include <optional>
#include <ostream>

namespace mlab {

enum class Boundary { periodic, open };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

using Coord = std::vector<int>;

/// Box with odd sides and centered coordinates -(N_j-1)/2 .. (N_j-1)/2.
/// Sites are ordered row-major, the last axis running fastest.
class Box {
public:
    Box() = default;
    Box(std::vector<int> sides, Boundary boundary, std::size_t cap = 8192)
        : sides_(std::move(sides)), boundary_(boundary) {
        if (sides_.empty()) throw DomainError("box needs at least one axis");
        std::size_t total = 1;
        for (int n : sides_) {
            if (n < 3 || n % 2 == 0) throw DomainError("box sides must be odd and >= 3");
            total *= static_cast<std::size_t>(n);
        }
        if (total > cap) throw DomainError("box dimension " + std::to_string(total) + " exceeds cap " + std::to_string(cap));
        size_ = total;
    }

    static Box line(int n, Boundary b) { return Box({n}, b); }

    int dim() const { return static_cast<int>(sides_.size()); }
    const std::vector<int>& sides() const { return sides_; }
    Boundary boundary() const { return boundary_; }
    bool periodic() const { return boundary_ == Boundary::periodic; }
    std::size_t size() const { return size_; }
    int half(int j) const { return (sides_[j] - 1) / 2; }
    int min_side() const { return *std::min_element(sides_.begin(), sides_.end()); }

    bool operator==(const Box& o) const { return sides_ == o.sides_ && boundary_ == o.boundary_; }

    Coord coord(std::size_t index) const {
        Coord c(sides_.size());
        for (int j = dim() - 1; j >= 0; --j) {
            c[j] = static_cast<int>(index % sides_[j]) - half(j);
            index /= sides_[j];
        }
        return c;
    }

    bool contains(const Coord& c) const {
        for (int j = 0; j < dim(); ++j)
            if (std::abs(c[j]) > half(j)) return false;
        return true;
    }

    /// Index of a coordinate; periodic boxes wrap, open boxes return nullopt outside.
    std::optional<std::size_t> index(const Coord& c) const {
        std::size_t k = 0;
        for (int j = 0; j < dim(); ++j) {
            int v = c[j];
            if (periodic()) {
                v = ((v + half(j)) % sides_[j] + sides_[j]) % sides_[j];
            } else {
                if (std::abs(v) > half(j)) return std::nullopt;
                v += half(j);
            }
            k = k * sides_[j] + static_cast<std::size_t>(v);
        }
        return k;
    }

    std::size_t index_of(const Coord& c) const {
        auto k = index(c);
        if (!k) throw DomainError("coordinate outside the box");
        return *k;
    }

    /// Distance from a site to the nearest face (0 on the face).
    int depth(const Coord& c) const {
        int d = std::numeric_limits<int>::max();
        for (int j = 0; j < dim(); ++j) d = std::min(d, half(j) - std::abs(c[j]));
        return d;
    }

    /// Indices of the sites at depth >= margin.
    std::vector<std::size_t> interior(int margin) const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < size_; ++k)
            if (depth(coord(k)) >= margin) out.push_back(k);
        return out;
    }

    std::string describe() const {
        std::string s;
        for (size_t j = 0; j < sides_.size(); ++j) s += (j ? "x" : "") + std::to_string(sides_[j]);
        return s + " " + to_string(boundary_);
    }

private:
    std::vector<int> sides_;
    Boundary boundary_ = Boundary::periodic;
    std::size_t size_ = 0;
};

struct OpFlags {
    bool unitary = false;
    bool hermitian = false;
    std::optional<int> bandwidth;
};

struct LatticeOperator {
    Box box;
    Matrix matrix;
    OpFlags flags;
    double unitary_defect = -1.0;  // ||M*M - I||_max, negative when not measured
    std::vector<std::string> warnings;

    std::size_t size() const { return box.size(); }
};

inline double unitarity_defect(const Matrix& m) {
    return max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols()));
}

inline double hermiticity_defect(const Matrix& m) { return max_abs(m - m.adjoint()); }

/// Sets the flags whose invariants the matrix actually satisfies.
inline void certify(LatticeOperator& op, bool check_unitary, bool check_hermitian) {
    if (check_unitary) {
        op.unitary_defect = unitarity_defect(op.matrix);
        op.flags.unitary = op.unitary_defect < 1e-10;
    }
    if (check_hermitian) op.flags.hermitian = hermiticity_defect(op.matrix) < 1e-12;
}

inline LatticeOperator make_operator(const Box& box, Matrix m) {
    LatticeOperator op;
    op.box = box;
    op.matrix = std::move(m);
    return op;
}

inline void require_same_box(const LatticeOperator& a, const LatticeOperator& b) {
    if (!(a.box == b.box)) throw DomainError("operators live on different boxes");
}

inline LatticeOperator adjoint(const LatticeOperator& a) {
    LatticeOperator r = a;
    r.matrix = a.matrix.adjoint();
    return r;
}

inline LatticeOperator product(const LatticeOperator& a, const LatticeOperator& b) {
    require_same_box(a, b);
    LatticeOperator r = make_operator(a.box, a.matrix * b.matrix);
    if (a.flags.bandwidth && b.flags.bandwidth) r.flags.bandwidth = *a.flags.bandwidth + *b.flags.bandwidth;
    return r;
}

// ---------------------------------------------------------------------------
// Basic operators

/// T^alpha e_beta = e_{beta + alpha}; the open box drops sites leaving the box.
inline LatticeOperator shift_op(const Box& box, const MultiIndex& alpha) {
    if (static_cast<int>(alpha.size()) != box.dim()) throw DomainError("shift index dimension mismatch");
    const std::size_t n = box.size();
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    Coord c(box.dim());
    for (std::size_t k = 0; k < n; ++k) {
        c = box.coord(k);
        for (int j = 0; j < box.dim(); ++j) c[j] += alpha[j];
        if (auto r = box.index(c)) op.matrix(*r, k) = 1.0;
    }
    op.flags.bandwidth = sup_norm(alpha);
    op.flags.unitary = box.periodic();
    op.unitary_defect = box.periodic() ? 0.0 : 1.0;
    op.flags.hermitian = sup_norm(alpha) == 0 || (box.periodic() && [&] {
        for (int j = 0; j < box.dim(); ++j)
            if ((2 * alpha[j]) % box.sides()[j] != 0) return false;
        return true;
    }());
    return op;
}

inline LatticeOperator position_op(const Box& box, int axis) {
    if (axis < 0 || axis >= box.dim()) throw DomainError("axis out of range");
    const std::size_t n = box.size();
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    for (std::size_t k = 0; k < n; ++k) op.matrix(k, k) = static_cast<double>(box.coord(k)[axis]);
    op.flags.hermitian = true;
    op.flags.bandwidth = 0;
    return op;
}

inline RealVector coordinates(const Box& box, int axis) {
    RealVector x(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) x(k) = box.coord(k)[axis];
    return x;
}

inline LatticeOperator diagonal_op(const Box& box, const std::function<cplx(const Coord&)>& gamma) {
    const std::size_t n = box.size();
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    bool real = true, unimodular = true;
    for (std::size_t k = 0; k < n; ++k) {
        cplx v = gamma(box.coord(k));
        op.matrix(k, k) = v;
        real = real && v.imag() == 0.0;
        unimodular = unimodular && std::abs(std::abs(v) - 1.0) < 1e-12;
    }
    op.flags.hermitian = real;
    op.flags.unitary = unimodular;
    op.flags.bandwidth = 0;
    return op;
}

inline LatticeOperator diagonal_op(const Box& box, const Vector& gamma) {
    if (static_cast<std::size_t>(gamma.size()) != box.size()) throw DomainError("diagonal length != box size");
    return diagonal_op(box, [&](const Coord& c) { return gamma(box.index_of(c)); });
}

inline double operator_norm_diagonal(const LatticeOperator& d) { return d.matrix.diagonal().cwiseAbs().maxCoeff(); }

/// L_f = sum_alpha f_alpha T^alpha. On a periodic box coefficients fold onto
/// the cyclic group, giving the circulant whose eigenvalues are the samples
/// of the trigonometric sum at theta = 2 pi k / N.
inline LatticeOperator laurent_op(const Box& box, const Symbol& f) {
    if (f.dim != box.dim()) throw DomainError("symbol dimension != box dimension");
    const int bw = f.bandwidth();
    if (!box.periodic() && bw >= box.min_side())
        throw DomainError("symbol bandwidth " + std::to_string(bw) + " too large for open box");
    const std::size_t n = box.size();
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    Coord c(box.dim());
    for (std::size_t k = 0; k < n; ++k) {
        const Coord base = box.coord(k);
        for (const auto& [a, v] : f.coeffs) {
            for (int j = 0; j < box.dim(); ++j) c[j] = base[j] + a[j];
            if (auto r = box.index(c)) op.matrix(*r, k) += v;
        }
    }
    op.flags.bandwidth = bw;
    if (box.periodic() && bw > box.min_side() / 2) op.warnings.push_back("coefficients folded by the cyclic box");
    if (box.periodic() && f.unimodular) {
        op.unitary_defect = unitarity_defect(op.matrix);
        op.flags.unitary = op.unitary_defect < 1e-10;
    }
    op.flags.hermitian = f.is_real() && hermiticity_defect(op.matrix) < 1e-12;
    return op;
}

/// A_g = 1/2 sum_j (L_{g_j} X_j + X_j L_{g_j}) on an open box.
inline LatticeOperator conjugate_op(const Box& box, const std::vector<Symbol>& g, int test_grid = 256) {
    if (box.periodic()) throw DomainError("conjugate operators need an open box");
    if (static_cast<int>(g.size()) != box.dim()) throw DomainError("weight family size != box dimension");
    const std::size_t n = box.size();
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    int bw = 0;
    for (int j = 0; j < box.dim(); ++j) {
        if (max_imaginary_part(g[j], test_grid) >= 1e-10) throw DomainError("conjugate weight is not real-valued");
        LatticeOperator l = laurent_op(box, g[j]);
        RealVector x = coordinates(box, j);
        op.matrix += 0.5 * (l.matrix * x.asDiagonal() + x.asDiagonal() * l.matrix);
        bw = std::max(bw, g[j].bandwidth());
    }
    op.flags.bandwidth = bw;
    double herm = hermiticity_defect(op.matrix);
    if (herm >= 1e-12) throw PrecisionError("conjugate operator not Hermitian: " + fmt17(herm));
    op.flags.hermitian = true;
    return op;
}

/// A_a = 1/2 sum_{0 < |m| <= cut} a^{-|m|} (T^m X + X T^m) with truncated shifts.
inline LatticeOperator conjugate_op_ggt(const Box& box, double a, int series_cut, double tail_tol = 1e-12) {
    if (box.periodic()) throw DomainError("conjugate operators need an open box");
    if (box.dim() != 1) throw DomainError("conjugate_op_ggt is one-dimensional");
    if (!(a > 1.0)) throw DomainError("conjugate_op_ggt requires a > 1");
    const int n = static_cast<int>(box.size());
    const int h = box.half(0);
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    for (int m = 1; m <= series_cut; ++m) {
        const double w = std::pow(a, -m);
        for (int b = -h; b <= h; ++b) {
            // T^m X + X T^m maps e_b to (2b + m) e_{b+m}
            if (b + m <= h) op.matrix(b + m + h, b + h) += 0.5 * w * (2 * b + m);
            if (b - m >= -h) op.matrix(b - m + h, b + h) += 0.5 * w * (2 * b - m);
        }
    }
    if (std::pow(a, -series_cut) * n >= tail_tol)
        op.warnings.push_back("series_cut " + std::to_string(series_cut) + " leaves tail above tail_tol");
    op.flags.hermitian = hermiticity_defect(op.matrix) < 1e-12;
    op.flags.bandwidth = series_cut;
    return op;
}

/// Smallest cut with a^-cut * N < tail_tol.
inline int ggt_series_cut(double a, std::size_t n, double tail_tol = 1e-12) {
    return static_cast<int>(std::ceil(std::log(static_cast<double>(n) / tail_tol) / std::log(a))) + 1;
}

// ---------------------------------------------------------------------------
// Vectors

inline Vector basis_vector(const Box& box, const Coord& c) {
    Vector v = Vector::Zero(box.size());
    v(box.index_of(c)) = 1.0;
    return v;
}

/// ||psi||_X = sqrt(||psi||^2 + sum_j ||X_j psi||^2).
inline double x_norm(const Box& box, const Vector& psi) {
    double s = psi.squaredNorm();
    for (std::size_t k = 0; k < box.size(); ++k) {
        const Coord c = box.coord(k);
        double r2 = 0.0;
        for (int v : c) r2 += static_cast<double>(v) * v;
        s += r2 * std::norm(psi(k));
    }
    return std::sqrt(s);
}

/// Smallest depth of a site carrying |psi| > tol (the box half-width when psi = 0).
inline int support_margin(const Box& box, const Vector& psi, double tol = 0.0) {
    int m = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < box.size(); ++k)
        if (std::abs(psi(k)) > tol) m = std::min(m, box.depth(box.coord(k)));
    return m == std::numeric_limits<int>::max() ? box.min_side() / 2 : m;
}

/// Mass of psi on sites with depth < width.
inline double collar_mass(const Box& box, const Vector& psi, int width) {
    double s = 0.0;
    for (std::size_t k = 0; k < box.size(); ++k)
        if (box.depth(box.coord(k)) < width) s += std::norm(psi(k));
    return std::sqrt(s);
}

/// Same box with the other boundary mode.
inline Box with_boundary(const Box& box, Boundary b) { return Box(box.sides(), b); }

// ---------------------------------------------------------------------------
// Text dumps

inline void write_operator(std::ostream& os, const LatticeOperator& op) {
    os << "operator\nbox " << op.box.describe() << "\nsize " << op.size() << "\n";
    for (Eigen::Index r = 0; r < op.matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < op.matrix.cols(); ++c) {
            cplx v = op.matrix(r, c);
            if (v != cplx{}) os << r << ' ' << c << ' ' << fmt17(v.real()) << ' ' << fmt17(v.imag()) << "\n";
        }
    os << "end\n";
}

inline void write_vector(std::ostream& os, const Box& box, const Vector& psi) {
    for (std::size_t k = 0; k < box.size(); ++k) {
        const Coord c = box.coord(k);
        for (int v : c) os << v << ' ';
        os << fmt17(psi(k).real()) << ' ' << fmt17(psi(k).imag()) << "\n";
    }
}

}  // namespace mlab
