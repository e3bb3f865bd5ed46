#pragma once

// Symbols on the d-torus: finitely supported Fourier data plus an optional
// closed-form evaluator.

#include "common.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace mlab {

using MultiIndex = std::vector<int>;
using TorusPoint = std::vector<double>;
using TorusFunction = std::function<cplx(const TorusPoint&)>;

inline int sup_norm(const MultiIndex& a) {
    int m = 0;
    for (int v : a) m = std::max(m, std::abs(v));
    return m;
}

struct Symbol {
    int dim = 1;
    std::map<MultiIndex, cplx> coeffs;
    TorusFunction evaluator;  // empty when only the trigonometric sum is known
    bool unimodular = false;
    // Sum of |coefficient| discarded by truncation (an estimate after differentiation).
    double dropped_mass = 0.0;

    int bandwidth() const {
        int b = 0;
        for (const auto& [a, c] : coeffs) b = std::max(b, sup_norm(a));
        return b;
    }

    cplx coeff(const MultiIndex& a) const {
        auto it = coeffs.find(a);
        return it == coeffs.end() ? cplx{} : it->second;
    }

    cplx trig_sum(const TorusPoint& theta) const {
        cplx s{};
        for (const auto& [a, c] : coeffs) {
            double ph = 0.0;
            for (int j = 0; j < dim; ++j) ph += theta[j] * a[j];
            s += c * std::polar(1.0, ph);
        }
        return s;
    }

    cplx operator()(const TorusPoint& theta) const {
        return evaluator ? evaluator(theta) : trig_sum(theta);
    }

    cplx operator()(double theta) const { return (*this)(TorusPoint{theta}); }

    /// l1 norm of the coefficient family.
    double l1() const {
        double s = 0.0;
        for (const auto& [a, c] : coeffs) s += std::abs(c);
        return s;
    }

    bool is_constant(double tol = 1e-14) const {
        for (const auto& [a, c] : coeffs)
            if (sup_norm(a) != 0 && std::abs(c) >= tol) return false;
        return true;
    }

    /// Real-valued on the torus iff coefficients are Hermitian-symmetric.
    bool is_real(double tol = 1e-13) const {
        for (const auto& [a, c] : coeffs) {
            MultiIndex m(a.size());
            for (size_t j = 0; j < a.size(); ++j) m[j] = -a[j];
            if (std::abs(c - std::conj(coeff(m))) > tol) return false;
        }
        return true;
    }
};

// ---------------------------------------------------------------------------
// Grid helpers

/// Calls `fn(theta)` for every point of the uniform grid theta_j = 2 pi i_j / grid.
template <typename Fn>
void for_each_grid_point(int dim, int grid, Fn&& fn) {
    std::vector<int> idx(dim, 0);
    TorusPoint theta(dim, 0.0);
    while (true) {
        for (int j = 0; j < dim; ++j) theta[j] = kTwoPi * idx[j] / grid;
        fn(static_cast<const TorusPoint&>(theta));
        int j = dim - 1;
        while (j >= 0 && ++idx[j] == grid) idx[j--] = 0;
        if (j < 0) break;
    }
}

/// Calls `fn(alpha)` for every multi-index with sup norm <= bandwidth.
template <typename Fn>
void for_each_index(int dim, int bandwidth, Fn&& fn) {
    MultiIndex a(dim, -bandwidth);
    while (true) {
        fn(static_cast<const MultiIndex&>(a));
        int j = dim - 1;
        while (j >= 0 && ++a[j] > bandwidth) a[j--] = -bandwidth;
        if (j < 0) break;
    }
}

// ---------------------------------------------------------------------------
// Elementary symbols and algebra

inline Symbol constant_symbol(int dim, cplx c) {
    Symbol s;
    s.dim = dim;
    s.coeffs[MultiIndex(dim, 0)] = c;
    s.unimodular = std::abs(std::abs(c) - 1.0) < 1e-15;
    return s;
}

/// c * e^{i alpha . theta}
inline Symbol monomial_symbol(const MultiIndex& alpha, cplx c = 1.0) {
    Symbol s;
    s.dim = static_cast<int>(alpha.size());
    s.coeffs[alpha] = c;
    s.unimodular = std::abs(std::abs(c) - 1.0) < 1e-15;
    return s;
}

inline Symbol conj(const Symbol& f) {
    Symbol g;
    g.dim = f.dim;
    g.unimodular = f.unimodular;
    g.dropped_mass = f.dropped_mass;
    for (const auto& [a, c] : f.coeffs) {
        MultiIndex m(a.size());
        for (size_t j = 0; j < a.size(); ++j) m[j] = -a[j];
        g.coeffs[m] = std::conj(c);
    }
    if (f.evaluator) {
        auto ev = f.evaluator;
        g.evaluator = [ev](const TorusPoint& t) { return std::conj(ev(t)); };
    }
    return g;
}

inline Symbol scale(const Symbol& f, cplx s) {
    Symbol g;
    g.dim = f.dim;
    g.dropped_mass = f.dropped_mass * std::abs(s);
    g.unimodular = f.unimodular && std::abs(std::abs(s) - 1.0) < 1e-15;
    for (const auto& [a, c] : f.coeffs) g.coeffs[a] = s * c;
    return g;
}

inline Symbol add(const Symbol& f, const Symbol& g) {
    if (f.dim != g.dim) throw DomainError("symbol dimension mismatch");
    Symbol h;
    h.dim = f.dim;
    h.coeffs = f.coeffs;
    h.dropped_mass = f.dropped_mass + g.dropped_mass;
    for (const auto& [a, c] : g.coeffs) h.coeffs[a] += c;
    return h;
}

/// Coefficient convolution; products below tail_tol are discarded and accounted for.
inline Symbol multiply(const Symbol& f, const Symbol& g, double tail_tol = 1e-17) {
    if (f.dim != g.dim) throw DomainError("symbol dimension mismatch");
    Symbol h;
    h.dim = f.dim;
    MultiIndex s(f.dim);
    for (const auto& [a, ca] : f.coeffs)
        for (const auto& [b, cb] : g.coeffs) {
            for (int j = 0; j < f.dim; ++j) s[j] = a[j] + b[j];
            h.coeffs[s] += ca * cb;
        }
    h.dropped_mass = f.dropped_mass * g.l1() + g.dropped_mass * f.l1();
    for (auto it = h.coeffs.begin(); it != h.coeffs.end();) {
        if (std::abs(it->second) < tail_tol) {
            h.dropped_mass += std::abs(it->second);
            it = h.coeffs.erase(it);
        } else {
            ++it;
        }
    }
    return h;
}

/// d/d theta_j: coefficients i alpha_j f_alpha.
inline Symbol partial(const Symbol& f, int j) {
    Symbol g;
    g.dim = f.dim;
    for (const auto& [a, c] : f.coeffs)
        if (a[j] != 0) g.coeffs[a] = kI * static_cast<double>(a[j]) * c;
    g.dropped_mass = f.dropped_mass * (f.bandwidth() + 1);
    return g;
}

/// Symbol with every coefficient beyond `bandwidth` moved into the dropped mass.
inline Symbol truncated(const Symbol& f, int bandwidth) {
    Symbol g;
    g.dim = f.dim;
    g.dropped_mass = f.dropped_mass;
    g.unimodular = f.unimodular;
    for (const auto& [a, c] : f.coeffs) {
        if (sup_norm(a) <= bandwidth)
            g.coeffs[a] = c;
        else
            g.dropped_mass += std::abs(c);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Fourier coefficients from samples

/// Trapezoidal (DFT) approximation of the Fourier integral on a grid with `grid`
/// points per axis. Coefficients below tail_tol are dropped and their modulus
/// summed into `dropped_mass`.
inline Symbol fourier_coeffs(const TorusFunction& f, int dim, int grid, int bandwidth,
                             double tail_tol) {
    if (dim < 1) throw DomainError("torus dimension must be positive");
    if (bandwidth < 0) throw DomainError("negative bandwidth");
    if (grid < 4 * bandwidth || grid < 1)
        throw DomainError("grid must be at least 4 * bandwidth per axis");

    std::vector<std::pair<TorusPoint, cplx>> samples;
    for_each_grid_point(dim, grid, [&](const TorusPoint& t) {
        cplx v = f(t);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("evaluator is not finite on the grid");
        samples.emplace_back(t, v);
    });
    const double norm = 1.0 / static_cast<double>(samples.size());

    Symbol s;
    s.dim = dim;
    s.evaluator = f;
    for_each_index(dim, bandwidth, [&](const MultiIndex& a) {
        cplx acc{};
        for (const auto& [t, v] : samples) {
            double ph = 0.0;
            for (int j = 0; j < dim; ++j) ph -= t[j] * a[j];
            acc += v * std::polar(1.0, ph);
        }
        acc *= norm;
        if (std::abs(acc) < tail_tol) {
            s.dropped_mass += std::abs(acc);
            return;
        }
        if (bandwidth > 0 && sup_norm(a) == bandwidth)
            throw PrecisionError("coefficient at the bandwidth edge exceeds tail_tol (aliasing risk)");
        s.coeffs[a] = acc;
    });
    return s;
}

// ---------------------------------------------------------------------------
// The GGT symbol f_a(theta) = -(e^{-i theta} - a) / (e^{i theta} - a)

inline cplx ggt_symbol_value(double a, double theta) {
    return -(std::polar(1.0, -theta) - a) / (std::polar(1.0, theta) - a);
}

/// f_a with coefficients 1/a at index -1 and -(1 - a^-2) a^-l at l >= 0, the
/// geometric tail cut where it drops below tail_tol.
inline Symbol ggt_symbol(double a, double tail_tol = 1e-17) {
    if (!(a > 1.0)) throw DomainError("ggt_symbol requires a > 1");
    Symbol s;
    s.dim = 1;
    s.unimodular = true;
    s.evaluator = [a](const TorusPoint& t) { return ggt_symbol_value(a, t[0]); };
    const double alpha2 = 1.0 - 1.0 / (a * a);
    s.coeffs[{-1}] = 1.0 / a;
    double w = 1.0;
    int l = 0;
    for (; alpha2 * w >= tail_tol; ++l, w /= a) s.coeffs[{l}] = -alpha2 * w;
    // remaining geometric tail: alpha2 * a^-l / (1 - 1/a)
    s.dropped_mass = alpha2 * w / (1.0 - 1.0 / a);
    return s;
}

// ---------------------------------------------------------------------------
// Derived symbols

struct DerivedSymbols {
    std::vector<Symbol> gradient;           // d_j f
    std::vector<Symbol> conjugate_weights;  // i f d_j conj(f), real when |f| = 1
    Symbol grad_norm_sq;                    // |grad f|^2
    std::vector<std::string> warnings;
};

inline DerivedSymbols derived_symbols(const Symbol& f, double tail_tol = 1e-15) {
    DerivedSymbols d;
    const Symbol fbar = conj(f);
    d.grad_norm_sq.dim = f.dim;
    for (int j = 0; j < f.dim; ++j) {
        Symbol dj = partial(f, j);
        if (dj.dropped_mass > tail_tol)
            d.warnings.push_back("differentiated tail mass " + fmt17(dj.dropped_mass) +
                                 " exceeds tail_tol on axis " + std::to_string(j));
        Symbol w = scale(multiply(f, partial(fbar, j)), kI);
        d.grad_norm_sq = add(d.grad_norm_sq, multiply(dj, conj(dj)));
        d.gradient.push_back(std::move(dj));
        d.conjugate_weights.push_back(std::move(w));
    }
    return d;
}

/// g . grad f for a weight family g.
inline Symbol weighted_gradient(const std::vector<Symbol>& g, const Symbol& f) {
    if (static_cast<int>(g.size()) != f.dim) throw DomainError("weight family size != dim");
    Symbol s;
    s.dim = f.dim;
    for (int j = 0; j < f.dim; ++j) s = add(s, multiply(g[j], partial(f, j)));
    return s;
}

/// Largest | |f| - 1 | on the grid.
inline double unimodular_defect(const Symbol& f, int grid) {
    double m = 0.0;
    for_each_grid_point(f.dim, grid, [&](const TorusPoint& t) {
        m = std::max(m, std::abs(std::abs(f(t)) - 1.0));
    });
    return m;
}

/// Largest |evaluator - trigonometric sum| on the grid (0 without evaluator).
inline double evaluator_mismatch(const Symbol& f, int grid) {
    if (!f.evaluator) return 0.0;
    double m = 0.0;
    for_each_grid_point(f.dim, grid, [&](const TorusPoint& t) {
        m = std::max(m, std::abs(f.evaluator(t) - f.trig_sum(t)));
    });
    return m;
}

/// Largest |Im f| on the grid, using the trigonometric sum.
inline double max_imaginary_part(const Symbol& f, int grid) {
    double m = 0.0;
    for_each_grid_point(f.dim, grid,
                        [&](const TorusPoint& t) { m = std::max(m, std::abs(f.trig_sum(t).imag())); });
    return m;
}

// ---------------------------------------------------------------------------
// Critical set

struct CriticalReport {
    std::vector<TorusPoint> critical_points;
    std::vector<double> critical_values;  // phases arg f in [0, 2pi)
    double grid_step = 0.0;
};

namespace detail {

inline double grad_norm(const std::vector<Symbol>& grad, const TorusPoint& t) {
    double s = 0.0;
    for (const auto& g : grad) s += std::norm(g.trig_sum(t));
    return std::sqrt(s);
}

// Golden-section minimisation of |grad f| along one axis on [x - h, x + h].
inline void refine_axis(const std::vector<Symbol>& grad, TorusPoint& t, int axis, double h) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = t[axis] - h, hi = t[axis] + h;
    auto at = [&](double x) {
        TorusPoint p = t;
        p[axis] = x;
        return grad_norm(grad, p);
    };
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = at(x1), f2 = at(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (f1 <= f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - r * (hi - lo); f1 = at(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + r * (hi - lo); f2 = at(x2);
        }
    }
    double best = 0.5 * (lo + hi);
    if (at(best) <= grad_norm(grad, t)) t[axis] = best;
}

}  // namespace detail

/// Grid scan for |grad f| < tol. Grid points that are local minima along every
/// axis are refined by a one-dimensional search along each axis in turn.
inline CriticalReport critical_set(const Symbol& f, int grid, double tol = 1e-8) {
    if (grid < 3) throw DomainError("critical_set grid too small");
    CriticalReport rep;
    rep.grid_step = kTwoPi / grid;
    std::vector<Symbol> grad;
    for (int j = 0; j < f.dim; ++j) grad.push_back(partial(f, j));

    std::vector<TorusPoint> pts;
    std::vector<double> vals;
    for_each_grid_point(f.dim, grid, [&](const TorusPoint& t) {
        pts.push_back(t);
        vals.push_back(detail::grad_norm(grad, t));
    });

    auto linear = [&](std::vector<int> idx) {
        size_t k = 0;
        for (int j = 0; j < f.dim; ++j) k = k * grid + static_cast<size_t>((idx[j] % grid + grid) % grid);
        return k;
    };

    std::vector<TorusPoint> found;
    const bool flat = f.is_constant();
    for (size_t k = 0; k < pts.size(); ++k) {
        std::vector<int> idx(f.dim);
        size_t r = k;
        for (int j = f.dim - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(r % grid);
            r /= grid;
        }
        bool candidate = vals[k] < tol;
        if (!candidate && !flat) {
            candidate = true;
            for (int j = 0; j < f.dim && candidate; ++j) {
                auto lo = idx, hi = idx;
                --lo[j];
                ++hi[j];
                double vl = vals[linear(lo)], vh = vals[linear(hi)];
                candidate = vals[k] <= vl && vals[k] <= vh && (vals[k] < vl || vals[k] < vh);
            }
        }
        if (!candidate) continue;
        TorusPoint t = pts[k];
        if (!flat && vals[k] >= tol) {
            for (int round = 0; round < 2 * f.dim; ++round)
                for (int j = 0; j < f.dim; ++j) detail::refine_axis(grad, t, j, rep.grid_step);
            if (detail::grad_norm(grad, t) >= tol) continue;
        }
        for (auto& x : t) x = normalize_phase(x);
        bool dup = false;
        if (!flat)
            for (const auto& q : found) {
                double dist = 0.0;
                for (int j = 0; j < f.dim; ++j) dist = std::max(dist, phase_distance(q[j], t[j]));
                if (dist < rep.grid_step) dup = true;
            }
        if (!dup) found.push_back(t);
    }

    std::vector<std::pair<double, TorusPoint>> keyed;
    for (auto& t : found) keyed.emplace_back(normalize_phase(std::arg(f(t))), t);
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [ph, t] : keyed) {
        rep.critical_values.push_back(ph);
        rep.critical_points.push_back(t);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Range of f_a

struct RangeArc {
    double theta_a = 0.0;  // arccos(1/a)
    Arc arc;               // [arg f_a(-theta_a), arg f_a(theta_a)]
};

inline RangeArc range_arc(double a) {
    if (!(a > 1.0)) throw DomainError("range_arc requires a > 1");
    RangeArc r;
    r.theta_a = std::acos(1.0 / a);
    r.arc = Arc(std::arg(ggt_symbol_value(a, -r.theta_a)), std::arg(ggt_symbol_value(a, r.theta_a)));
    return r;
}

// ---------------------------------------------------------------------------
// Text serialization

inline void write_symbol(std::ostream& os, const Symbol& f) {
    os << "symbol\n";
    os << "dim " << f.dim << "\n";
    os << "bandwidth " << f.bandwidth() << "\n";
    os << "unimodular " << (f.unimodular ? 1 : 0) << "\n";
    os << "dropped_mass " << fmt17(f.dropped_mass) << "\n";
    for (const auto& [a, c] : f.coeffs) {
        os << "coeff";
        for (int v : a) os << ' ' << v;
        os << ' ' << fmt17(c.real()) << ' ' << fmt17(c.imag()) << "\n";
    }
    os << "end\n";
}

inline Symbol read_symbol(std::istream& is) {
    Symbol f;
    std::string line, key;
    int declared_bw = -1;
    bool header = false;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw DomainError("symbol record line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ls >> key;
        if (key == "symbol") {
            header = true;
        } else if (key == "dim") {
            if (!(ls >> f.dim) || f.dim < 1) fail("bad dim");
        } else if (key == "bandwidth") {
            if (!(ls >> declared_bw)) fail("bad bandwidth");
        } else if (key == "unimodular") {
            int u = 0;
            ls >> u;
            f.unimodular = u != 0;
        } else if (key == "dropped_mass") {
            ls >> f.dropped_mass;
        } else if (key == "coeff") {
            MultiIndex a(f.dim);
            for (auto& v : a)
                if (!(ls >> v)) fail("bad multi-index");
            std::string re, im;
            if (!(ls >> re >> im)) fail("bad coefficient");
            f.coeffs[a] = cplx(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr));
        } else if (key == "end") {
            break;
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (!header) throw DomainError("missing symbol header");
    if (declared_bw >= 0 && f.bandwidth() > declared_bw) throw DomainError("coefficient beyond declared bandwidth");
    return f;
}

}  // namespace mlab
