#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mlab;

namespace {

double grid_max(int grid, const std::function<double(double)>& fn) {
    double m = 0.0;
    for (int k = 0; k < grid; ++k) m = std::max(m, fn(kTwoPi * k / grid));
    return m;
}

}  // namespace

TEST(FourierCoeffs, ConstantHasOnlyZeroMode) {
    const Symbol s = fourier_coeffs([](const TorusPoint&) { return cplx(0.3, -0.7); }, 1, 32, 4, 1e-14);
    ASSERT_EQ(s.coeffs.size(), 1u);
    EXPECT_NEAR(std::abs(s.coeff({0}) - cplx(0.3, -0.7)), 0.0, 1e-14);
}

TEST(FourierCoeffs, SingleMode) {
    const Symbol s = fourier_coeffs([](const TorusPoint& t) { return std::polar(1.0, t[0]); }, 1, 32, 4, 1e-14);
    ASSERT_EQ(s.coeffs.size(), 1u);
    EXPECT_NEAR(std::abs(s.coeff({1}) - 1.0), 0.0, 1e-14);
}

TEST(FourierCoeffs, ConjugateWeightOfGgtIsGeometric) {
    // i f_a d/dtheta conj(f_a), the derivative taken by central differences on the closed form
    const double a = 2.0, h = 1e-5;
    auto w = [&](const TorusPoint& t) {
        const cplx d = (std::conj(oracle::f_a(a, t[0] + h)) - std::conj(oracle::f_a(a, t[0] - h))) / (2.0 * h);
        return kI * oracle::f_a(a, t[0]) * d;
    };
    const Symbol s = fourier_coeffs(w, 1, 512, 60, 1e-9);
    EXPECT_LT(std::abs(s.coeff({0})), 1e-9);
    for (int m : {1, 2, 3, 7, -1, -4, -10}) EXPECT_NEAR(s.coeff({m}).real(), std::pow(a, -std::abs(m)), 1e-8) << m;
}

TEST(FourierCoeffs, EdgeCoefficientSignalsAliasing) {
    auto f = [](const TorusPoint& t) { return std::polar(1.0, 3.0 * t[0]); };
    EXPECT_THROW(fourier_coeffs(f, 1, 16, 3, 1e-12), PrecisionError);
    EXPECT_THROW(fourier_coeffs(f, 1, 8, 3, 1e-12), DomainError);
}

TEST(GgtSymbol, Examples) {
    const Symbol f = ggt_symbol(2.0);
    EXPECT_NEAR(std::abs(f(0.0) - cplx(-1.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(f(kPi) - cplx(-1.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(f(kPi / 2)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(f(kPi / 2) - oracle::f_a(2.0, kPi / 2)), 0.0, 1e-12);
    // trigonometric sum against the closed form
    EXPECT_LT(grid_max(97, [&](double t) { return std::abs(f.trig_sum({t}) - oracle::f_a(2.0, t)); }), 1e-12);
    EXPECT_TRUE(f.unimodular);
    EXPECT_THROW(ggt_symbol(1.0), DomainError);
    EXPECT_THROW(ggt_symbol(0.5), DomainError);
}

TEST(GgtSymbol, CoefficientsAgreeWithSampledIntegral) {
    for (double a : {1.5, 2.0, 3.0}) {
        const Symbol f = ggt_symbol(a);
        const Symbol g = fourier_coeffs([a](const TorusPoint& t) { return oracle::f_a(a, t[0]); }, 1, 1024, 200, 1e-13);
        for (int m = -3; m < 40; ++m) EXPECT_NEAR(std::abs(f.coeff({m}) - g.coeff({m})), 0.0, 1e-12) << a << " " << m;
    }
}

TEST(DerivedSymbols, ConstantIsFlat) {
    const DerivedSymbols d = derived_symbols(constant_symbol(1, cplx(0.6, 0.8)));
    EXPECT_LT(d.gradient[0].l1(), 1e-15);
    EXPECT_LT(d.conjugate_weights[0].l1(), 1e-15);
    EXPECT_LT(d.grad_norm_sq.l1(), 1e-15);
}

TEST(DerivedSymbols, PureMode) {
    const DerivedSymbols d = derived_symbols(monomial_symbol({1}));
    EXPECT_NEAR(std::abs(d.conjugate_weights[0].coeff({0}) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d.grad_norm_sq.coeff({0}) - 1.0), 0.0, 1e-15);
    EXPECT_EQ(d.grad_norm_sq.coeffs.size(), 1u);
}

TEST(DerivedSymbols, GgtGradientAtPi) {
    const DerivedSymbols d = derived_symbols(ggt_symbol(2.0));
    const double h = 1e-5;
    const double numeric = std::norm((oracle::f_a(2.0, kPi + h) - oracle::f_a(2.0, kPi - h)) / (2.0 * h));
    EXPECT_NEAR(d.grad_norm_sq.trig_sum({kPi}).real(), 4.0 / 9.0, 1e-10);
    EXPECT_NEAR(numeric, 4.0 / 9.0, 1e-8);
    EXPECT_LT(grid_max(101, [&](double t) { return std::abs(d.grad_norm_sq.trig_sum({t}).real() - std::pow(oracle::abs_df_a(2.0, t), 2)); }),
              1e-10);
}

TEST(DerivedSymbols, WeightIsRealForUnimodular) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(1.2, 5.0);
    for (int rep = 0; rep < 10; ++rep) {
        const Symbol f = ggt_symbol(ua(rng));
        EXPECT_LT(max_imaginary_part(derived_symbols(f).conjugate_weights[0], 128), 1e-10);
    }
    // products of unimodular modes in two dimensions
    Symbol g = multiply(monomial_symbol({1, 0}), monomial_symbol({0, 2}, std::polar(1.0, 0.4)));
    g.unimodular = true;
    for (const Symbol& w : derived_symbols(g).conjugate_weights) EXPECT_LT(max_imaginary_part(w, 16), 1e-10);
}

TEST(CriticalSet, Examples) {
    EXPECT_TRUE(critical_set(monomial_symbol({1}), 64).critical_points.empty());
    const CriticalReport r = critical_set(ggt_symbol(2.0), 360);
    ASSERT_EQ(r.critical_points.size(), 2u);
    std::vector<double> got{normalize_phase(r.critical_points[0][0]), normalize_phase(r.critical_points[1][0])};
    std::sort(got.begin(), got.end());
    const double t = std::acos(0.5);
    EXPECT_NEAR(got[0], t, 1e-8);
    EXPECT_NEAR(got[1], kTwoPi - t, 1e-8);
    EXPECT_TRUE(std::is_sorted(r.critical_values.begin(), r.critical_values.end()));
    EXPECT_EQ(critical_set(constant_symbol(1, 1.0), 24).critical_points.size(), 24u);
}

TEST(RangeArc, Examples) {
    const RangeArc r = range_arc(2.0);
    EXPECT_NEAR(r.theta_a, kPi / 3, 1e-14);
    EXPECT_NEAR(r.arc.low, 2 * kPi / 3, 1e-12);
    EXPECT_NEAR(r.arc.high, 4 * kPi / 3, 1e-12);
    double prev = 10.0;
    for (double a : {5.0, 10.0, 20.0}) {
        const RangeArc q = range_arc(a);
        const double lo = normalize_phase(std::arg(oracle::f_a(a, -std::acos(1 / a))));
        const double hi = normalize_phase(std::arg(oracle::f_a(a, std::acos(1 / a))));
        EXPECT_NEAR(q.arc.width(), hi - lo, 1e-12);
        EXPECT_NEAR(q.arc.width(), 4 * std::asin(1 / a), 1e-12);
        EXPECT_LT(q.arc.width(), prev);
        prev = q.arc.width();
    }
    EXPECT_THROW(range_arc(1.0), DomainError);
}

TEST(SymbolProperties, Parseval) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
        Symbol s;
        s.dim = 1 + rep % 2;
        for (int k = 0; k < 6; ++k) {
            MultiIndex m(s.dim);
            for (int& v : m) v = static_cast<int>(rng() % 7) - 3;
            s.coeffs[m] += cplx(g(rng), g(rng));
        }
        double coeff_sum = 0.0, grid_mean = 0.0;
        for (const auto& [m, c] : s.coeffs) coeff_sum += std::norm(c);
        int count = 0;
        for_each_grid_point(s.dim, 16, [&](const TorusPoint& t) {
            grid_mean += std::norm(s.trig_sum(t));
            ++count;
        });
        EXPECT_NEAR(coeff_sum, grid_mean / count, 1e-8 * std::max(1.0, coeff_sum));
    }
    const Symbol f = ggt_symbol(2.0);
    double sum = 0.0;
    for (const auto& [m, c] : f.coeffs) sum += std::norm(c);
    EXPECT_NEAR(sum, 1.0, 1e-8);
}

TEST(SymbolProperties, UnimodularProductIsOne) {
    for (double a : {1.3, 2.0, 4.0}) {
        const Symbol f = ggt_symbol(a);
        const Symbol one = multiply(f, conj(f));
        EXPECT_NEAR(std::abs(one.coeff({0}) - 1.0), 0.0, 1e-8);
        double rest = 0.0;
        for (const auto& [m, c] : one.coeffs)
            if (m[0] != 0) rest = std::max(rest, std::abs(c));
        EXPECT_LT(rest, 1e-8);
    }
}

TEST(SymbolProperties, FourierRoundTrip) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 10; ++rep) {
        Symbol s;
        s.dim = 1 + rep % 3;
        for (int k = 0; k < 5; ++k) {
            MultiIndex m(s.dim);
            for (int& v : m) v = static_cast<int>(rng() % 5) - 2;
            s.coeffs[m] += cplx(g(rng), g(rng));
        }
        const Symbol r = fourier_coeffs([&](const TorusPoint& t) { return s.trig_sum(t); }, s.dim, 12, 3, 1e-13);
        for (const auto& [m, c] : s.coeffs) EXPECT_NEAR(std::abs(r.coeff(m) - c), 0.0, 1e-10);
        for (const auto& [m, c] : r.coeffs) EXPECT_NEAR(std::abs(s.coeff(m) - c), 0.0, 1e-10);
    }
}

TEST(SymbolIo, RoundTripIsExact) {
    const Symbol f = ggt_symbol(2.7);
    std::stringstream ss;
    write_symbol(ss, f);
    const Symbol g = read_symbol(ss);
    EXPECT_EQ(g.dim, f.dim);
    ASSERT_EQ(g.coeffs.size(), f.coeffs.size());
    for (const auto& [m, c] : f.coeffs) EXPECT_EQ(g.coeff(m), c);
}

TEST(SymbolIo, RejectsMalformedInput) {
    std::istringstream bad("symbol\ndim 1\nbandwidth 1\ncoeff 3 1.0 0.0\nend\n");
    EXPECT_THROW(read_symbol(bad), DomainError);
    std::istringstream unknown("symbol\ndim 1\nfoo 2\nend\n");
    EXPECT_THROW(read_symbol(unknown), DomainError);
}
