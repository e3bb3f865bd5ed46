#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

using namespace mlab;

namespace {

Vector random_local_state(const Box& box, int radius, double norm, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v = Vector::Zero(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
        const Coord c = box.coord(k);
        bool in = true;
        for (int x : c) in = in && std::abs(x) <= radius;
        if (!in) continue;
        const double re = g(rng);
        v(k) = cplx(re, g(rng));
    }
    return norm * v / v.norm();
}

// Nearest unitary (polar factor) to a random banded matrix.
LatticeOperator random_banded_unitary(const Box& box, int band, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    const auto n = static_cast<Eigen::Index>(box.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = std::max<Eigen::Index>(0, r - band); c <= std::min(n - 1, r + band); ++c) {
            const double re = g(rng);
            m(r, c) = cplx(re, g(rng));
        }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    LatticeOperator u = make_operator(box, svd.matrixU() * svd.matrixV().adjoint());
    u.flags.unitary = true;
    return u;
}

Vector arc_filtered(const SpectralData& s, const Arc& arc, double smoothing, const Vector& psi) {
    return s.vectors * arc_filter_weights(s, arc, smoothing).cwiseProduct(s.vectors.adjoint() * psi);
}

std::vector<double> outlier_phases(const SpectralData& s) {
    std::vector<double> out;
    for (const auto& o : essential_arc_compare(s, 2.0, 0.0).outliers) out.push_back(o.phase);
    return out;
}

}  // namespace

TEST(Evolve, IdentityKeepsPositionNorm) {
    const Box b = Box::line(41, Boundary::periodic);
    std::mt19937_64 rng(21);
    const Vector psi = random_local_state(b, 4, 1.0, rng);
    const PropagationTrace tr = evolve(shift_op(b, {0}), psi, 30);
    ASSERT_EQ(tr.steps.size(), 31u);
    for (const auto& s : tr.steps) EXPECT_NEAR(s.x_norm, x_norm(b, psi), 1e-13);
}

TEST(Evolve, ShiftMovesOneSitePerStep) {
    const Box b = Box::line(101, Boundary::periodic);
    const PropagationTrace tr = evolve(shift_op(b, {1}), basis_vector(b, {0}), 80);
    EXPECT_EQ(tr.band_horizon, 50);
    EXPECT_EQ(tr.wrap_horizon, 50);
    ASSERT_EQ(tr.steps.size(), 51u);
    for (const auto& s : tr.steps) EXPECT_NEAR(s.x_norm, std::sqrt(1.0 + s.n * s.n), 1e-12) << s.n;
}

TEST(Evolve, RageOfLocalProjectorUnderShift) {
    // K = |e0><e0| sees the orbit of e0 only at m = 0
    const Box b = Box::line(101, Boundary::periodic);
    EvolveOptions o;
    o.k = central_projector(b, 0);
    const PropagationTrace tr = evolve(shift_op(b, {1}), basis_vector(b, {0}), 40, o);
    EXPECT_EQ(tr.steps[0].rage_partial, 0.0);
    for (std::size_t k = 1; k < tr.steps.size(); ++k) EXPECT_NEAR(tr.steps[k].rage_partial, 1.0 / tr.steps[k].n, 1e-15);
}

TEST(Evolve, PreservesNormUnderTwistedGgt) {
    const Box b = Box::line(127, Boundary::periodic);
    LatticeOperator u = build_ggt(b, twist_sequence(2.0, 5));
    u.flags.bandwidth = 8;
    std::mt19937_64 rng(4);
    EvolveOptions o;
    o.horizon_tol = 1e-6;
    const PropagationTrace tr = evolve(u, random_local_state(b, 3, 1.0, rng), 200, o);
    ASSERT_GT(tr.steps.size(), 10u);
    for (const auto& s : tr.steps) EXPECT_NEAR(s.plain_norm, 1.0, 1e-12);
}

TEST(Evolve, ArcWeightIsConservedForSpectralProjector) {
    const Box b = Box::line(255, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const SpectralData s = circulant_spectral_data(b, f);
    EvolveOptions o;
    o.arc_operator = arc_projector(b, s, Arc(2.5, 3.8)).matrix;
    o.horizon_tol = 1e-4;
    std::mt19937_64 rng(8);
    const PropagationTrace tr = evolve(laurent_op(b, f), random_local_state(b, 2, 1.0, rng), 60, o);
    const double w0 = tr.steps[0].arc_weight;
    EXPECT_GT(w0, 0.05);
    EXPECT_LT(w0, 0.95);
    for (const auto& st : tr.steps) EXPECT_NEAR(st.arc_weight, w0, 1e-12);
}

TEST(Evolve, Errors) {
    const Box b = Box::line(31, Boundary::periodic);
    const LatticeOperator t = shift_op(b, {1});
    EXPECT_THROW(evolve(t, basis_vector(b, {15}), 5), DomainError);
    EXPECT_THROW(evolve(t, basis_vector(b, {0}), -1), DomainError);
    EXPECT_THROW(evolve(shift_op(Box::line(31, Boundary::open), {1}), basis_vector(Box::line(31, Boundary::open), {0}), 5),
                 DomainError);
}

TEST(BallisticRate, ModulatedShiftHasUnitRate) {
    const Box b = Box::line(201, Boundary::periodic);
    const PropagationTrace tr = evolve(laurent_op(b, monomial_symbol({1}, std::polar(1.0, 0.7))), basis_vector(b, {0}), 400);
    EXPECT_NEAR(ballistic_rate(tr).slope, 1.0, 1e-3);
    PropagationTrace shortened = tr;
    shortened.steps.resize(31);
    EXPECT_THROW(ballistic_rate(shortened), DomainError);
}

TEST(BallisticRate, GgtRateIsRootMeanSquareDerivative) {
    const Box b = Box::line(513, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const PropagationTrace tr = evolve(laurent_op(b, f), basis_vector(b, {0}), 400);
    const double rate = ballistic_rate(tr).slope;
    EXPECT_GE(tr.wrap_horizon, 60);
    EXPECT_NEAR(rate / std::sqrt(oracle::rate_sq_f_a(2.0)), 1.0, 0.02);
    EXPECT_NEAR(rate / std::sqrt(derived_symbols(f).grad_norm_sq.coeff({0}).real()), 1.0, 0.02);
}

TEST(BallisticRate, DiagonalShiftInTwoDimensions) {
    const Box b({71, 71}, Boundary::periodic);
    std::mt19937_64 rng(31);
    const PropagationTrace tr = evolve(shift_op(b, {1, 1}), random_local_state(b, 1, 2.0, rng), 400);
    EXPECT_NEAR(ballistic_rate(tr).slope / (2.0 * std::sqrt(2.0)), 1.0, 0.01);
}

TEST(RateBounds, UnfilteredBasisVector) {
    const Box b = Box::line(513, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const RateBoundsReport r = rate_bounds_check(laurent_op(b, f), f, basis_vector(b, {0}));
    // the commutator is L_{|f'|^2} away from the seam, of norm max |f'|^2 = 4
    EXPECT_NEAR(r.commutator_norm, 4.0, 0.01);
    EXPECT_NEAR(r.upper_bound, 2.0, 0.01);
    EXPECT_TRUE(r.upper_ok);
    EXPECT_FALSE(r.has_window);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(r.rate, r.upper_bound);
}

TEST(RateBounds, FilteredRateInsideWindow) {
    const Box b = Box::line(1025, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const SpectralData s = circulant_spectral_data(b, f);
    RateBoundsOptions o;
    o.arc = Arc(2.6, 3.6);
    o.smoothing = 0.2;
    o.spectrum = &s;
    const RateBoundsReport r = rate_bounds_check(laurent_op(b, f), f, basis_vector(b, {0}), o);
    const auto [c, C] = oracle::mourre_pair(2.0, 2.6, 3.6);
    EXPECT_NEAR(r.c, c, 1e-3);
    EXPECT_NEAR(r.C, C, 1e-3);
    EXPECT_NEAR(r.filtered_norm, arc_filtered(s, *o.arc, 0.2, basis_vector(b, {0})).norm(), 1e-14);
    EXPECT_TRUE(r.window_ok) << r.rate << " " << r.window_low << " " << r.window_high;
    EXPECT_TRUE(r.upper_ok);
}

TEST(RateBounds, PerturbedFilteredRateInsideWindow) {
    // eigenvectors of the localized outliers are removed from the filter
    const Box b = Box::line(513, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const VerblunskySequence seq = twist_sequence(2.0, 5);
    LatticeOperator u = build_ggt(b, seq);
    u.flags.bandwidth = ggt_tail_cut(seq, 1e-16);
    const SpectralData s = unitary_eig(u);
    EXPECT_LT(s.residual, 1e-8);
    RateBoundsOptions o;
    o.arc = Arc(2.3, 3.9);
    o.smoothing = 0.4;
    o.spectrum = &s;
    o.excluded_phases = outlier_phases(s);
    EXPECT_EQ(o.excluded_phases.size(), 6u);
    const RateBoundsReport r = rate_bounds_check(u, f, basis_vector(b, {0}), o);
    EXPECT_GE(r.horizon, 64);
    EXPECT_TRUE(r.ok()) << r.rate << " " << r.window_low << " " << r.window_high;
}

TEST(RateBounds, Errors) {
    const Box b = Box::line(63, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const LatticeOperator u = laurent_op(b, f);
    RateBoundsOptions o;
    o.arc = Arc(2.6, 3.6);
    EXPECT_THROW(rate_bounds_check(u, f, basis_vector(b, {0}), o), DomainError);
    const SpectralData s = circulant_spectral_data(b, f);
    o.spectrum = &s;
    o.excluded_phases.assign(s.phases.data(), s.phases.data() + s.phases.size());
    EXPECT_THROW(rate_bounds_check(u, f, basis_vector(b, {0}), o), DomainError);
}

TEST(Telescoping, IdentityHasNoDefect) {
    const Box b = Box::line(21, Boundary::periodic);
    std::mt19937_64 rng(2);
    const TelescopingResult r = telescoping_check(shift_op(b, {0}), random_local_state(b, 3, 1.0, rng), 5);
    EXPECT_NEAR(r.forward_lhs, 0.0, 1e-13);
    EXPECT_NEAR(r.backward_lhs, 0.0, 1e-13);
    EXPECT_LT(r.residual, 1e-13);
}

TEST(Telescoping, ShiftOfBasisVector) {
    const Box b = Box::line(41, Boundary::periodic);
    const TelescopingResult r = telescoping_check(shift_op(b, {1}), basis_vector(b, {0}), 10);
    EXPECT_NEAR(r.forward_lhs, 100.0, 1e-12);
    EXPECT_NEAR(r.forward_rhs, 100.0, 1e-12);
    EXPECT_NEAR(r.backward_lhs, 100.0, 1e-12);
    EXPECT_LT(r.residual, 1e-12);
}

TEST(Telescoping, HoldsForAnyUnitaryWithoutHorizon) {
    // the finite sum is an algebraic identity, boundaries included
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        const Box b = Box::line(25, Boundary::periodic);
        const LatticeOperator u = random_banded_unitary(b, 2, rng);
        const TelescopingResult r = telescoping_check(u, random_local_state(b, 12, 1.0, rng), 17, false);
        EXPECT_LT(r.residual, 1e-8 * std::max(1.0, std::abs(r.forward_lhs)));
    }
}

TEST(Telescoping, RefusesRunsPastHorizon) {
    const Box b = Box::line(21, Boundary::periodic);
    EXPECT_THROW(telescoping_check(shift_op(b, {1}), basis_vector(b, {0}), 15), DomainError);
    EXPECT_NO_THROW(telescoping_check(shift_op(b, {1}), basis_vector(b, {0}), 15, false));
}

TEST(QuadraticGrowth, ShiftIsExactlyQuadratic) {
    const Box b = Box::line(101, Boundary::periodic);
    const LatticeOperator t = shift_op(b, {1});
    const QuadraticResult r = corollary_quadratic_check(t, basis_vector(b, {0}), {0, 1, 5, 20});
    ASSERT_EQ(r.lhs.size(), 4u);
    EXPECT_EQ(r.lhs[0], 0.0);
    EXPECT_EQ(r.rhs[0], 0.0);
    for (std::size_t k = 0; k < r.n.size(); ++k) EXPECT_NEAR(r.lhs[k], r.n[k] * r.n[k], 1e-12);
    EXPECT_LT(r.max_residual(), 1e-12);

    // off-centre start: linear term 2 n x0
    const QuadraticResult q = corollary_quadratic_check(t, basis_vector(b, {5}), {3, 10, 20});
    const PropagationTrace tr = evolve(t, basis_vector(b, {5}), 20);
    for (std::size_t k = 0; k < q.n.size(); ++k) {
        const int n = q.n[k];
        EXPECT_NEAR(q.rhs[k], n * n + 10.0 * n, 1e-12);
        EXPECT_NEAR(q.lhs[k], std::pow(tr.steps[n].x_norm, 2) - 26.0, 1e-10);
    }
}

TEST(QuadraticGrowth, Errors) {
    const Box b = Box::line(63, Boundary::periodic);
    EXPECT_THROW(corollary_quadratic_check(build_ggt(b, twist_sequence(2.0, 5)), basis_vector(b, {0}), {4}), DomainError);
    EXPECT_THROW(corollary_quadratic_check(shift_op(b, {1}), basis_vector(b, {0}), {-1}), DomainError);
}

TEST(ConjugateGrowth, LinearInStepCount) {
    // <U^n psi, A U^n psi> - <psi, A psi> = n <psi, L_{|f'|^2} psi> away from the boundary
    const Box per = Box::line(401, Boundary::periodic);
    const Box open = with_boundary(per, Boundary::open);
    const Symbol f = ggt_symbol(2.0);
    const DerivedSymbols d = derived_symbols(f);
    const LatticeOperator u = laurent_op(per, f);
    const Matrix a = conjugate_op(open, d.conjugate_weights).matrix;
    const Matrix g = laurent_op(per, d.grad_norm_sq).matrix;
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 3; ++rep) {
        const Vector psi = random_local_state(per, 3, 1.0, rng);
        const double base = psi.dot(a * psi).real();
        const double slope = psi.dot(g * psi).real();
        Vector v = psi;
        for (int n = 1; n <= 20; ++n) {
            v = u.matrix * v;
            EXPECT_NEAR((v.dot(a * v).real() - base) / n, slope, 1e-10) << n;
        }
    }
}

TEST(Rage, CesaroAverageDecaysOnArc) {
    const Box b = Box::line(1025, Boundary::periodic);
    const Symbol f = ggt_symbol(2.0);
    const SpectralData s = circulant_spectral_data(b, f);
    EvolveOptions o;
    o.k = central_projector(b, 2);
    o.horizon_tol = 1e-4;
    const Vector psi = arc_filtered(s, Arc(2.3, 3.9), 0.2, basis_vector(b, {0}));
    const PropagationTrace tr = evolve(laurent_op(b, f), psi, 400, o);
    ASSERT_GE(tr.wrap_horizon, 150);
    for (std::size_t k = 17; k < tr.steps.size(); ++k)
        EXPECT_LE(tr.steps[k].rage_partial, tr.steps[k - 1].rage_partial + 1e-15) << k;
    EXPECT_LT(tr.steps.back().rage_partial / tr.steps[1].rage_partial, 0.1);
}
