#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "dgreedy/la.hpp"
#include "oracles.hpp"

using namespace dgreedy;

namespace {

// Roots of the characteristic polynomial of a symmetric 3×3 matrix, descending.
std::array<double, 3> cubic_eigenvalues(const Mat& a) {
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double q = a.trace() / 3.0;
    const double p2 = std::pow(a(0, 0) - q, 2) + std::pow(a(1, 1) - q, 2) + std::pow(a(2, 2) - q, 2) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const Mat b = (a - q * Mat::Identity(3, 3)) / p;
    const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    return {e1, 3.0 * q - e1 - e3, e3};
}

}  // namespace

TEST(Cholesky, IdentityAndDiagonal) {
    const SpdFactor i2 = cholesky_spd(Mat::Identity(2, 2));
    EXPECT_TRUE(i2.factor.isApprox(Mat::Identity(2, 2)));
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const SpdFactor f = cholesky_spd(d);
    EXPECT_NEAR(f.factor(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(f.factor(1, 1), 3.0, 1e-15);
    EXPECT_NEAR(f.factor(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(f.factor(1, 0), 0.0, 1e-15);
}

TEST(Cholesky, RandomReconstructs) {
    std::mt19937_64 rng(11);
    for (int n : {1, 3, 7, 15}) {
        const Mat a = oracle::random_spd(rng, n);
        const SpdFactor f = cholesky_spd(a);
        EXPECT_LE((f.reconstruct() - a).norm(), 1e-12 * a.norm());
        EXPECT_TRUE(f.factor.isLowerTriangular(1e-14));
        const Vec b = Vec::LinSpaced(n, -1.0, 2.0);
        EXPECT_LE((a * f.solve(b) - b).norm(), 1e-10 * b.norm() * a.norm());
    }
}

TEST(Cholesky, RejectsIndefinite) {
    Mat a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    EXPECT_THROW(cholesky_spd(a), NotSpdError);
    EXPECT_THROW(spectral_factor(a), NotSpdError);
}

TEST(Spectral, DiagonalSortedDescending) {
    Mat d = Mat::Zero(3, 3);
    d.diagonal() << 3.0, 1.0, 2.0;
    const SymEigen e = spectral_spd(d);
    EXPECT_NEAR(e.values(0), 3.0, 1e-14);
    EXPECT_NEAR(e.values(1), 2.0, 1e-14);
    EXPECT_NEAR(e.values(2), 1.0, 1e-14);
    const SymEigen i = spectral_spd(Mat::Identity(3, 3));
    EXPECT_TRUE(i.values.isApproxToConstant(1.0, 1e-14));
    EXPECT_LE((i.vectors.transpose() * i.vectors - Mat::Identity(3, 3)).norm(), 1e-14);
}

TEST(Spectral, MatchesCubicRoots) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Mat a = oracle::random_spd(rng, 3);
        const SymEigen e = spectral_spd(a);
        const auto roots = cubic_eigenvalues(a);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(e.values(k), roots[static_cast<std::size_t>(k)], 1e-10 * a.norm());
        const Mat back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
        EXPECT_LE((back - a).norm(), 1e-12 * a.norm());
        const SpdFactor f = spectral_factor(a);
        EXPECT_LE((f.reconstruct() - a).norm(), 1e-12 * a.norm());
    }
}

TEST(MinSingular, SmallCases) {
    const SingularTriplet i = min_singular(Mat::Identity(2, 2));
    EXPECT_NEAR(i.sigma_min, 1.0, 1e-15);
    EXPECT_NEAR(i.right_vector.norm(), 1.0, 1e-15);
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 2.0;
    const SingularTriplet s = min_singular(d);
    EXPECT_NEAR(s.sigma_min, 2.0, 1e-14);
    EXPECT_NEAR(s.right_vector(0), 0.0, 1e-14);
    EXPECT_NEAR(s.right_vector(1), 1.0, 1e-14);
}

TEST(MinSingular, TallMatchesClosedForm) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const Mat d = oracle::random_mat(rng, 4, 2);
        const Mat g = d.transpose() * d;
        const double mean = 0.5 * (g(0, 0) + g(1, 1));
        const double rad = std::hypot(0.5 * (g(0, 0) - g(1, 1)), g(0, 1));
        const SingularTriplet s = min_singular(d);
        EXPECT_NEAR(s.sigma_min * s.sigma_min, mean - rad, 1e-12 * g.norm());
        EXPECT_NEAR((d * s.right_vector).norm(), s.sigma_min, 1e-12 * g.norm());
    }
    EXPECT_THROW(min_singular(Mat::Ones(2, 3)), ShapeError);
}

TEST(NormalizeSign, LargestEntryPositive) {
    Vec v(3);
    v << 0.1, -0.9, 0.3;
    normalize_sign(v);
    EXPECT_GT(v(1), 0.0);
    EXPECT_LT(v(0), 0.0);
}

TEST(Rayleigh, MatchesGeneralizedEigen) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10; ++t) {
        const Mat a = oracle::random_spd(rng, 5) - 3.0 * Mat::Identity(5, 5);
        const Mat b = oracle::random_spd(rng, 5);
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(a, b);
        const RayleighMax r = max_generalized_rayleigh(a, b);
        EXPECT_NEAR(r.value, ges.eigenvalues()(4), 1e-10 * std::abs(ges.eigenvalues()(4)) + 1e-12);
        EXPECT_NEAR(r.vector.dot(b * r.vector), 1.0, 1e-12);
        EXPECT_NEAR(r.vector.dot(a * r.vector), r.value, 1e-9 * (1.0 + std::abs(r.value)));
    }
}

TEST(GramSchmidt, DependenceAndOrthonormality) {
    const Mat g = Mat::Identity(2, 2);
    Mat e1 = Mat::Zero(2, 1);
    e1(0, 0) = 1.0;
    Vec v = Vec::Zero(2);
    v(0) = 2.0;
    EXPECT_FALSE(gram_schmidt_in(g, e1, v).has_value());
    v << 0.0, 1.0;
    const auto w = gram_schmidt_in(g, e1, v);
    ASSERT_TRUE(w.has_value());
    EXPECT_NEAR((*w - v).norm(), 0.0, 1e-15);

    std::mt19937_64 rng(9);
    const Mat gr = oracle::random_spd(rng, 8);
    Mat basis(8, 0);
    for (int k = 0; k < 6; ++k) {
        const auto c = gram_schmidt_in(gr, basis, Vec(oracle::random_mat(rng, 8, 1).col(0)));
        ASSERT_TRUE(c.has_value());
        basis.conservativeResize(8, basis.cols() + 1);
        basis.col(basis.cols() - 1) = *c;
    }
    EXPECT_LE((basis.transpose() * gr * basis - Mat::Identity(6, 6)).norm(), 1e-10);
    const Vec inside = basis * Vec::LinSpaced(6, 1.0, 2.0);
    EXPECT_FALSE(gram_schmidt_in(gr, basis, inside).has_value());
    EXPECT_THROW(gram_schmidt_in(gr, basis, Vec(Vec::Ones(3))), ShapeError);
}

TEST(GramSchmidt, NonOrthonormalBasis) {
    std::mt19937_64 rng(10);
    const Mat g = oracle::random_spd(rng, 6);
    const Mat basis = oracle::random_mat(rng, 6, 3);
    const Vec v = oracle::random_mat(rng, 6, 1).col(0);
    const auto w = orthonormalize_against(g, basis, v);
    ASSERT_TRUE(w.has_value());
    EXPECT_LE((basis.transpose() * g * *w).norm(), 1e-10);
    EXPECT_NEAR(w->dot(g * *w), 1.0, 1e-12);
    EXPECT_FALSE(orthonormalize_against(g, basis, Vec(basis * Vec::Ones(3))).has_value());
}

TEST(Indefinite, SmallAndRandom) {
    SpMat i(2, 2);
    i.setIdentity();
    Vec b(2);
    b << 1.0, -2.0;
    EXPECT_LE((solve_sym_indefinite(i, b) - b).norm(), 1e-15);

    Mat k(2, 2);
    k << 1.0, 1.0, 1.0, 0.0;
    Vec r(2);
    r << 1.0, 0.0;
    const Vec x = solve_sym_indefinite(k.sparseView(), r);
    EXPECT_NEAR(x(0), 0.0, 1e-14);
    EXPECT_NEAR(x(1), 1.0, 1e-14);

    std::mt19937_64 rng(4);
    const Mat a = oracle::random_spd(rng, 12);
    const Mat bb = oracle::random_mat(rng, 12, 5);
    Mat kk = Mat::Zero(17, 17);
    kk.topLeftCorner(12, 12) = a;
    kk.topRightCorner(12, 5) = bb;
    kk.bottomLeftCorner(5, 12) = bb.transpose();
    kk.bottomRightCorner(5, 5) = -0.1 * Mat::Identity(5, 5);
    const Vec rhs = oracle::random_mat(rng, 17, 1).col(0);
    const Vec sol = solve_sym_indefinite(kk.sparseView(), rhs);
    EXPECT_LE((kk * sol - rhs).norm(), 1e-10 * kk.norm() * sol.norm());
}

TEST(SparseSpd, SolvesAgainstDense) {
    std::mt19937_64 rng(8);
    const Mat a = oracle::random_spd(rng, 10);
    const SparseSpdFactor f(a.sparseView());
    const Vec b = Vec::LinSpaced(10, 0.0, 1.0);
    EXPECT_LE((f.solve(b) - a.ldlt().solve(b)).norm(), 1e-10 * b.norm());
    EXPECT_LE((symmetrize(a) - a).norm(), 1e-14 * a.norm());
}
