#pragma once

// GGT matrices from Verblunsky coefficients, q_n seminorms and the
// perturbation hypotheses for alpha_k = alpha_inf (1 + u_k + v_k + w_k).

#include "lattice.hpp"

#include <Eigen/LU>
#include <istream>
#include <map>

namespace mlab {

/// Finite sequence gamma_k on the index range [lo, lo + size).
struct Sequence {
    int lo = 0;
    std::vector<cplx> values;

    Sequence() = default;
    Sequence(int lo_, std::vector<cplx> v) : lo(lo_), values(std::move(v)) {}

    template <typename Fn>
    static Sequence from(int lo, int hi, Fn&& fn) {
        Sequence s;
        s.lo = lo;
        for (int k = lo; k <= hi; ++k) s.values.push_back(fn(k));
        return s;
    }

    int hi() const { return lo + static_cast<int>(values.size()) - 1; }
    bool empty() const { return values.empty(); }
    bool has(int k) const { return k >= lo && k <= hi(); }
    cplx at(int k) const { return has(k) ? values[k - lo] : cplx{}; }

    /// (Delta gamma)_k = gamma_k - gamma_{k+1}, defined on [lo, hi - 1].
    Sequence difference() const {
        Sequence d;
        d.lo = lo;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) d.values.push_back(values[i] - values[i + 1]);
        return d;
    }

    double sup() const {
        double m = 0.0;
        for (auto v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

class VerblunskySequence {
public:
    VerblunskySequence() = default;
    VerblunskySequence(std::map<int, cplx> window, cplx tail) : window_(std::move(window)), tail_(tail) { validate(); }

    static VerblunskySequence constant(cplx tail) { return VerblunskySequence({}, tail); }

    /// Constant sequence whose a-value is `a`, alpha real and positive.
    static VerblunskySequence constant_for(double a) {
        if (!(a > 1.0)) throw DomainError("a must exceed 1");
        return constant(std::sqrt(1.0 - 1.0 / (a * a)));
    }

    const std::map<int, cplx>& window() const { return window_; }
    cplx tail() const { return tail_; }

    cplx alpha(int k) const {
        auto it = window_.find(k);
        return it == window_.end() ? tail_ : it->second;
    }

    /// a_k = (1 - |alpha_k|^2)^{-1/2}
    double a(int k) const { return 1.0 / std::sqrt(1.0 - std::norm(alpha(k))); }
    double tail_a() const { return 1.0 / std::sqrt(1.0 - std::norm(tail_)); }

    double sup_modulus() const {
        double m = std::abs(tail_);
        for (const auto& [k, v] : window_) m = std::max(m, std::abs(v));
        return m;
    }

    double inf_modulus() const {
        double m = std::abs(tail_);
        for (const auto& [k, v] : window_) m = std::min(m, std::abs(v));
        return m;
    }

    /// sup_k a_k^{-1}
    double sup_inverse_a() const { return std::sqrt(1.0 - inf_modulus() * inf_modulus()); }

    void validate() const {
        if (!(inf_modulus() > 0.0)) throw DomainError("Verblunsky coefficients must stay away from 0");
        if (!(sup_modulus() < 1.0)) throw DomainError("Verblunsky coefficients must lie in the open unit disc");
    }

private:
    std::map<int, cplx> window_;
    cplx tail_ = 0.5;
};

struct PerturbationProfile {
    cplx alpha_inf = 0.5;
    Sequence u, v, w;
    double b1 = 1.0, b2 = 2.0;

    int lo() const {
        int m = std::numeric_limits<int>::max();
        for (const Sequence* s : {&u, &v, &w})
            if (!s->empty()) m = std::min(m, s->lo);
        return m == std::numeric_limits<int>::max() ? 0 : m;
    }
    int hi() const {
        int m = std::numeric_limits<int>::min();
        for (const Sequence* s : {&u, &v, &w})
            if (!s->empty()) m = std::max(m, s->hi());
        return m == std::numeric_limits<int>::min() ? -1 : m;
    }

    cplx alpha(int k) const { return alpha_inf * (1.0 + u.at(k) + v.at(k) + w.at(k)); }

    VerblunskySequence compose() const {
        std::map<int, cplx> win;
        for (int k = lo(); k <= hi(); ++k) win[k] = alpha(k);
        return VerblunskySequence(std::move(win), alpha_inf);
    }

    /// Profile with the whole deviation from alpha_inf assigned to u.
    static PerturbationProfile from_sequence(const VerblunskySequence& s, double b1 = 1.0, double b2 = 2.0) {
        PerturbationProfile p;
        p.alpha_inf = s.tail();
        p.b1 = b1;
        p.b2 = b2;
        if (!s.window().empty()) {
            const int lo = s.window().begin()->first, hi = s.window().rbegin()->first;
            p.u = Sequence::from(lo, hi, [&](int k) { return s.alpha(k) / s.tail() - 1.0; });
        }
        return p;
    }
};

/// a-value of a tail coefficient: |alpha|^2 + a^{-2} = 1.
inline double a_of(cplx alpha_inf) { return 1.0 / std::sqrt(1.0 - std::norm(alpha_inf)); }

/// alpha_k = alpha_inf e^{ik} on |k| <= radius, alpha_inf real with a-value `a`.
/// The moduli are untouched, only the phases twist.
inline VerblunskySequence twist_sequence(double a, int radius) {
    const cplx tail = VerblunskySequence::constant_for(a).tail();
    std::map<int, cplx> w;
    for (int k = -radius; k <= radius; ++k) w[k] = tail * std::polar(1.0, static_cast<double>(k));
    return VerblunskySequence(std::move(w), tail);
}

// ---------------------------------------------------------------------------
// Construction

inline void require_line(const Box& box) {
    if (box.dim() != 1) throw DomainError("GGT matrices live on one-dimensional boxes");
}

/// H = T* D2 - T* D1 T (I - D2 T)^{-1} D1* with the cyclic shift of a periodic box.
inline LatticeOperator build_ggt(const Box& box, const VerblunskySequence& seq) {
    require_line(box);
    if (!box.periodic()) throw DomainError("build_ggt needs a periodic box");
    seq.validate();
    const int h = box.half(0);
    for (const auto& [k, v] : seq.window())
        if (std::abs(k) > h) throw DomainError("Verblunsky window exceeds the box");
    const Eigen::Index n = static_cast<Eigen::Index>(box.size());
    Vector d1(n), d2(n);
    for (int k = -h; k <= h; ++k) {
        d1(k + h) = seq.alpha(k);
        d2(k + h) = 1.0 / seq.a(k);
    }
    const Matrix t = shift_op(box, {1}).matrix;
    const Matrix tstar = t.adjoint();
    Matrix m = Matrix::Identity(n, n) - d2.asDiagonal() * t;
    Eigen::PartialPivLU<Matrix> lu(m);
    if (lu.rcond() < 1e-12) throw PrecisionError("I - D2 T numerically singular");
    const Matrix d1star = d1.conjugate().asDiagonal();
    LatticeOperator op = make_operator(box, tstar * d2.asDiagonal() - tstar * d1.asDiagonal() * t * lu.solve(d1star));
    op.unitary_defect = unitarity_defect(op.matrix);
    if (op.unitary_defect >= 1e-10) throw PrecisionError("GGT unitarity defect " + fmt17(op.unitary_defect));
    op.flags.unitary = true;
    return op;
}

/// Row formula H e_k = a_k^{-1} e_{k-1} - conj(alpha_k) sum_{l >= k} alpha_{l+1} prod_{m=k+1}^{l} a_m^{-1} e_l,
/// the sum cut after tail_cut terms and restricted to an open box.
inline LatticeOperator build_ggt_rows(const Box& box, const VerblunskySequence& seq, int tail_cut,
                                      double tail_tol = 1e-12) {
    require_line(box);
    seq.validate();
    const int h = box.half(0);
    const Eigen::Index n = static_cast<Eigen::Index>(box.size());
    LatticeOperator op = make_operator(box, Matrix::Zero(n, n));
    for (int k = -h; k <= h; ++k) {
        if (k - 1 >= -h) op.matrix(k - 1 + h, k + h) += 1.0 / seq.a(k);
        double prod = 1.0;
        const cplx ca = std::conj(seq.alpha(k));
        for (int l = k; l <= std::min(h, k + tail_cut); ++l) {
            if (l > k) prod /= seq.a(l);
            op.matrix(l + h, k + h) += -ca * seq.alpha(l + 1) * prod;
        }
    }
    if (std::pow(seq.sup_inverse_a(), tail_cut) >= tail_tol)
        op.warnings.push_back("tail_cut " + std::to_string(tail_cut) + " leaves row tail above tail_tol");
    op.flags.bandwidth = tail_cut;
    return op;
}

/// Smallest cut with (sup a^{-1})^cut < tail_tol.
inline int ggt_tail_cut(const VerblunskySequence& seq, double tail_tol = 1e-12) {
    return static_cast<int>(std::ceil(std::log(tail_tol) / std::log(seq.sup_inverse_a()))) + 1;
}

/// Sites whose row or column of H - H0 has an entry above tol.
inline std::vector<bool> perturbation_support(const Matrix& h, const Matrix& h0, double tol = 1e-8) {
    const Eigen::MatrixXd d = (h - h0).cwiseAbs();
    std::vector<bool> mask(static_cast<std::size_t>(h.rows()), false);
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index c = 0; c < d.cols(); ++c)
            if (d(r, c) > tol) mask[static_cast<std::size_t>(r)] = mask[static_cast<std::size_t>(c)] = true;
    return mask;
}

// ---------------------------------------------------------------------------
// Seminorms

struct QNorm {
    double value = 0.0;  // lower bound for the seminorm of the infinite sequence
    int lo = 0, hi = 0;  // window the value was computed on
};

/// q_0 = sup |gamma|, q_{n+1} = q_n + sup_k |k^{n+1} (Delta^{n+1} gamma)_k|.
inline QNorm q_norm(int n, const Sequence& g) {
    if (n < 0 || n > 2) throw DomainError("q_norm order must be 0, 1 or 2");
    if (static_cast<int>(g.values.size()) < n + 1) throw DomainError("window shorter than n + 1");
    QNorm q{g.sup(), g.lo, g.hi()};
    Sequence d = g;
    for (int order = 1; order <= n; ++order) {
        d = d.difference();
        double m = 0.0;
        for (int k = d.lo; k <= d.hi(); ++k) m = std::max(m, std::pow(std::abs(static_cast<double>(k)), order) * std::abs(d.at(k)));
        q.value += m;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Hypothesis check

struct AnnulusIntegral {
    double integral = 0.0;        // trapezoid over r in [1, r_end]
    double r_end = 1.0;           // last r with the annulus inside the window
    double tail_increment = 0.0;  // largest step increment beyond r_max / 2
    bool truncated = false;
    bool flat = false;            // tail increments below flat_tol
};

struct HypothesisReport {
    AnnulusIntegral u_integral, dv_integral;
    QNorm q1_v, q2_w;
    double v_outer_sup = 0.0, w_outer_sup = 0.0;
    bool v_decays = false, w_decays = false;
    bool u_ok = false, v_ok = false, w_ok = false;

    bool ok() const { return u_ok && v_ok && w_ok; }
};

/// Trapezoid at step 0.5 of r -> sup_{b1 r <= |k| <= b2 r} |g_k| over [1, r_max].
inline AnnulusIntegral annulus_integral(const Sequence& g, double b1, double b2, double r_max, double flat_tol = 1e-3) {
    if (!(b1 > 0.0 && b2 > b1)) throw DomainError("annulus needs 0 < b1 < b2");
    AnnulusIntegral out;
    const int reach = std::min(-g.lo, g.hi());
    auto sup_at = [&](double r) {
        double m = 0.0;
        for (int k = static_cast<int>(std::ceil(b1 * r)); k <= static_cast<int>(std::floor(b2 * r)); ++k)
            m = std::max({m, std::abs(g.at(k)), std::abs(g.at(-k))});
        return m;
    };
    double prev_r = 1.0, prev_v = sup_at(1.0);
    if (b2 > reach) {
        out.truncated = true;
        return out;
    }
    for (double r = 1.5; r <= r_max + 1e-12; r += 0.5) {
        if (b2 * r > reach) {
            out.truncated = true;
            break;
        }
        const double v = sup_at(r);
        const double inc = 0.5 * (r - prev_r) * (v + prev_v);
        out.integral += inc;
        if (r > r_max / 2.0) out.tail_increment = std::max(out.tail_increment, inc);
        prev_r = r;
        prev_v = v;
    }
    out.r_end = prev_r;
    out.flat = out.tail_increment < flat_tol;
    return out;
}

inline double outer_sup(const Sequence& g, double fraction = 0.1) {
    if (g.empty()) return 0.0;
    const int width = std::max(1, static_cast<int>(std::ceil(fraction * static_cast<double>(g.values.size()))));
    double m = 0.0;
    for (int i = 0; i < width; ++i) {
        m = std::max(m, std::abs(g.values[i]));
        m = std::max(m, std::abs(g.values[g.values.size() - 1 - i]));
    }
    return m;
}

inline HypothesisReport hypothesis_check(const PerturbationProfile& p, double r_max, double decay_tol = 1e-2,
                                         double flat_tol = 1e-3) {
    HypothesisReport rep;
    auto window = [&](const Sequence& s) {
        return s.empty() ? Sequence::from(p.lo(), p.hi(), [](int) { return cplx{}; }) : s;
    };
    const Sequence u = window(p.u), v = window(p.v), w = window(p.w);
    rep.u_integral = annulus_integral(u, p.b1, p.b2, r_max, flat_tol);
    rep.dv_integral = annulus_integral(v.values.size() > 1 ? v.difference() : v, p.b1, p.b2, r_max, flat_tol);
    rep.q1_v = v.values.size() >= 2 ? q_norm(1, v) : QNorm{v.sup(), v.lo, v.hi()};
    rep.q2_w = w.values.size() >= 3 ? q_norm(2, w) : QNorm{w.sup(), w.lo, w.hi()};
    rep.v_outer_sup = outer_sup(v);
    rep.w_outer_sup = outer_sup(w);
    rep.v_decays = rep.v_outer_sup < decay_tol;
    rep.w_decays = rep.w_outer_sup < decay_tol;
    rep.u_ok = rep.u_integral.flat && std::isfinite(rep.u_integral.integral);
    rep.v_ok = rep.dv_integral.flat && std::isfinite(rep.q1_v.value) && rep.v_decays;
    rep.w_ok = std::isfinite(rep.q2_w.value) && rep.w_decays;
    return rep;
}

// ---------------------------------------------------------------------------
// Profile files: header lines "alpha_inf re im", "b1 x", "b2 x"; body lines
// "k re im" give alpha_k, lines "u k re im" (also v, w) give profile entries.

inline PerturbationProfile read_profile(std::istream& is) {
    PerturbationProfile p;
    std::map<int, cplx> alpha, parts[3];
    bool have_tail = false;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        auto fail = [&] { throw DomainError("profile line " + std::to_string(lineno) + ": cannot parse '" + line + "'"); };
        double re = 0, im = 0;
        if (head == "alpha_inf") {
            if (!(ls >> re >> im)) fail();
            p.alpha_inf = {re, im};
            have_tail = true;
        } else if (head == "b1") {
            if (!(ls >> p.b1)) fail();
        } else if (head == "b2") {
            if (!(ls >> p.b2)) fail();
        } else if (head == "u" || head == "v" || head == "w") {
            int k;
            if (!(ls >> k >> re >> im)) fail();
            parts[head == "u" ? 0 : head == "v" ? 1 : 2][k] = {re, im};
        } else {
            std::istringstream ks(head);
            int k;
            if (!(ks >> k) || !(ls >> re >> im)) fail();
            alpha[k] = {re, im};
        }
    }
    if (!have_tail) throw DomainError("profile lacks an alpha_inf header");
    if (!(std::abs(p.alpha_inf) > 0.0 && std::abs(p.alpha_inf) < 1.0)) throw DomainError("alpha_inf must lie in the punctured disc");
    auto to_seq = [](const std::map<int, cplx>& m) {
        if (m.empty()) return Sequence{};
        return Sequence::from(m.begin()->first, m.rbegin()->first, [&](int k) {
            auto it = m.find(k);
            return it == m.end() ? cplx{} : it->second;
        });
    };
    p.u = to_seq(parts[0]);
    p.v = to_seq(parts[1]);
    p.w = to_seq(parts[2]);
    if (!alpha.empty()) {
        std::map<int, cplx> extra;
        for (const auto& [k, a] : alpha) extra[k] = a / p.alpha_inf - 1.0 - p.u.at(k) - p.v.at(k) - p.w.at(k);
        const int lo = std::min(alpha.begin()->first, p.u.empty() ? alpha.begin()->first : p.u.lo);
        const int hi = std::max(alpha.rbegin()->first, p.u.empty() ? alpha.rbegin()->first : p.u.hi());
        const Sequence old = p.u;
        p.u = Sequence::from(lo, hi, [&](int k) {
            auto it = extra.find(k);
            return old.at(k) + (it == extra.end() ? cplx{} : it->second);
        });
    }
    return p;
}

inline void write_profile(std::ostream& os, const PerturbationProfile& p) {
    os << "alpha_inf " << fmt17(p.alpha_inf.real()) << ' ' << fmt17(p.alpha_inf.imag()) << "\n";
    os << "b1 " << fmt17(p.b1) << "\nb2 " << fmt17(p.b2) << "\n";
    const char* names[3] = {"u", "v", "w"};
    const Sequence* seqs[3] = {&p.u, &p.v, &p.w};
    for (int i = 0; i < 3; ++i)
        for (int k = seqs[i]->lo; k <= seqs[i]->hi(); ++k) {
            cplx c = seqs[i]->at(k);
            if (c != cplx{}) os << names[i] << ' ' << k << ' ' << fmt17(c.real()) << ' ' << fmt17(c.imag()) << "\n";
        }
}

}  // namespace mlab
