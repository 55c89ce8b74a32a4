#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <memory>
#include <optional>

#include "dgreedy/errors.hpp"

namespace dgreedy {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class FactorKind { cholesky, spectral };

// A = factorᵀ · factor. For the Cholesky kind the factor is lower triangular;
// for the spectral kind it is Λ^{1/2} Qᵀ.
struct SpdFactor {
    Mat factor;
    FactorKind kind = FactorKind::cholesky;

    Eigen::Index size() const { return factor.rows(); }
    Mat reconstruct() const { return factor.transpose() * factor; }
    Mat apply_inverse(const Mat& m) const;            // L⁻¹ m
    Mat apply_inverse_transpose(const Mat& m) const;  // L⁻ᵀ m
    Vec solve(const Vec& b) const;                    // A⁻¹ b
    Mat solve(const Mat& b) const;
};

SpdFactor cholesky_spd(const Mat& a);
SpdFactor spectral_factor(const Mat& a);

struct SymEigen {
    Vec values;   // descending
    Mat vectors;  // orthonormal columns, a = vectors · diag(values) · vectorsᵀ
};

SymEigen spectral_spd(const Mat& a);

struct SingularTriplet {
    double sigma_min = 0.0;
    Vec right_vector;
};

SingularTriplet min_singular(const Mat& d);

// Flips v so that its first entry of largest magnitude is positive.
void normalize_sign(Vec& v);

struct RayleighMax {
    double value = 0.0;
    Vec vector;  // unit in the b-norm
};

// max over q of qᵀ a q / qᵀ b q, b SPD.
RayleighMax max_generalized_rayleigh(const Mat& a, const Mat& b);
RayleighMax max_generalized_rayleigh(const Mat& a, const SpdFactor& b);

inline constexpr double kDependenceTol = 1e-10;

namespace detail {
template <class GMat>
double g_norm(const GMat& g, const Vec& v) {
    return std::sqrt(std::max(0.0, v.dot(g * v)));
}
}  // namespace detail

// Two-pass modified Gram-Schmidt against a g-orthonormal basis.
// Returns nullopt when v is numerically in span(basis).
template <class GMat>
std::optional<Vec> gram_schmidt_in(const GMat& g, const Mat& basis, const Vec& v,
                                   double rel_tol = kDependenceTol) {
    if (v.size() != g.rows() || (basis.cols() > 0 && basis.rows() != v.size()))
        throw ShapeError("gram_schmidt_in: dimension mismatch");
    const double n0 = detail::g_norm(g, v);
    if (!(n0 > 0.0)) return std::nullopt;
    Vec w = v;
    if (basis.cols() > 0) {
        const Mat gb = g * basis;
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < basis.cols(); ++j)
                w -= gb.col(j).dot(w) * basis.col(j);
    }
    const double n1 = detail::g_norm(g, w);
    if (!(n1 >= rel_tol * n0)) return std::nullopt;
    return Vec(w / n1);
}

// Same contract for a basis that is only linearly independent: projects out
// span(basis) in the g-inner product through its Gramian, twice.
template <class GMat>
std::optional<Vec> orthonormalize_against(const GMat& g, const Mat& basis, const Vec& v,
                                          double rel_tol = kDependenceTol) {
    if (v.size() != g.rows() || (basis.cols() > 0 && basis.rows() != v.size()))
        throw ShapeError("orthonormalize_against: dimension mismatch");
    const double n0 = detail::g_norm(g, v);
    if (!(n0 > 0.0)) return std::nullopt;
    Vec w = v;
    if (basis.cols() > 0) {
        const Mat gb = g * basis;
        const Mat gram = basis.transpose() * gb;
        Eigen::LDLT<Mat> ldlt(0.5 * (gram + gram.transpose()));
        for (int pass = 0; pass < 2; ++pass) w -= basis * ldlt.solve(gb.transpose() * w);
    }
    const double n1 = detail::g_norm(g, w);
    if (!(n1 >= rel_tol * n0)) return std::nullopt;
    return Vec(w / n1);
}

// Sparse direct factorization of a nonsingular (symmetric indefinite) matrix with
// one step of iterative refinement.
class IndefiniteFactor {
public:
    explicit IndefiniteFactor(const SpMat& k);
    Vec solve(const Vec& rhs) const;
    Eigen::Index size() const { return k_.rows(); }

private:
    SpMat k_;
    double k_norm_;
    std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_;
};

Vec solve_sym_indefinite(const SpMat& k, const Vec& rhs);

class SparseSpdFactor {
public:
    explicit SparseSpdFactor(const SpMat& a);
    Vec solve(const Vec& b) const;
    Mat solve(const Mat& b) const;
    Eigen::Index size() const { return n_; }

private:
    Eigen::Index n_;
    std::unique_ptr<Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>> llt_;
};

Mat symmetrize(const Mat& a);

}  // namespace dgreedy
