#include "dgreedy/la.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>

namespace dgreedy {

namespace {

void require_square(const Mat& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw ShapeError(std::string(who) + ": expected a nonempty square matrix");
}

}  // namespace

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat SpdFactor::apply_inverse(const Mat& m) const {
    if (kind == FactorKind::cholesky) return factor.triangularView<Eigen::Lower>().solve(m);
    // factor = Λ^{1/2} Qᵀ, so factor⁻¹ = Q Λ^{-1/2} = (factor⁻ᵀ)ᵀ with rows scaled.
    const Vec d = factor.rowwise().norm();
    Mat qt = factor;
    for (Eigen::Index i = 0; i < qt.rows(); ++i) qt.row(i) /= d(i);
    return qt.transpose() * (d.cwiseInverse().asDiagonal() * m);
}

Mat SpdFactor::apply_inverse_transpose(const Mat& m) const {
    if (kind == FactorKind::cholesky)
        return factor.transpose().triangularView<Eigen::Upper>().solve(m);
    const Vec d = factor.rowwise().norm();
    Mat qt = factor;
    for (Eigen::Index i = 0; i < qt.rows(); ++i) qt.row(i) /= d(i);
    return d.cwiseInverse().asDiagonal() * (qt * m);
}

Vec SpdFactor::solve(const Vec& b) const { return apply_inverse(apply_inverse_transpose(b)); }

Mat SpdFactor::solve(const Mat& b) const { return apply_inverse(apply_inverse_transpose(b)); }

SpdFactor cholesky_spd(const Mat& a) {
    require_square(a, "cholesky_spd");
    const Eigen::Index n = a.rows();
    // Factor the index-reversed matrix J A J = C Cᵀ; then A = Lᵀ L with L = J Cᵀ J lower.
    const Mat rev = symmetrize(a).reverse();
    Eigen::LLT<Mat> llt(rev);
    const double scale = a.norm();
    if (llt.info() != Eigen::Success)
        throw NotSpdError("cholesky_spd: matrix is not positive definite");
    const Mat c = llt.matrixL();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(c(i, i) * c(i, i) > 1e-12 * scale))
            throw NotSpdError("cholesky_spd: pivot below tolerance");
    }
    SpdFactor f;
    f.kind = FactorKind::cholesky;
    f.factor = c.transpose().reverse();
    f.factor.triangularView<Eigen::StrictlyUpper>().setZero();
    return f;
}

SymEigen spectral_spd(const Mat& a) {
    require_square(a, "spectral_spd");
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral_spd: eigen iteration did not converge");
    const Eigen::Index n = a.rows();
    SymEigen out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) {
        Vec col = out.vectors.col(j);
        normalize_sign(col);
        out.vectors.col(j) = col;
    }
    return out;
}

SpdFactor spectral_factor(const Mat& a) {
    const SymEigen e = spectral_spd(a);
    const double scale = a.norm();
    if (!(e.values(e.values.size() - 1) > 1e-12 * scale))
        throw NotSpdError("spectral_factor: matrix is not positive definite");
    SpdFactor f;
    f.kind = FactorKind::spectral;
    f.factor = e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
    return f;
}

void normalize_sign(Vec& v) {
    if (v.size() == 0) return;
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= m * (1.0 - 1e-8)) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

SingularTriplet min_singular(const Mat& d) {
    if (d.cols() < 1 || d.rows() < d.cols())
        throw ShapeError("min_singular: expected m >= n >= 1");
    const Mat g = d.transpose() * d;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(g));
    if (es.info() != Eigen::Success)
        throw NumericalError("min_singular: eigen iteration did not converge");
    SingularTriplet t;
    t.sigma_min = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    t.right_vector = es.eigenvectors().col(0);
    normalize_sign(t.right_vector);
    return t;
}

RayleighMax max_generalized_rayleigh(const Mat& a, const SpdFactor& b) {
    if (a.rows() != b.size() || a.cols() != b.size())
        throw ShapeError("max_generalized_rayleigh: dimension mismatch");
    const Mat c = b.apply_inverse_transpose(b.apply_inverse_transpose(a).transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(c));
    if (es.info() != Eigen::Success)
        throw NumericalError("max_generalized_rayleigh: eigen iteration did not converge");
    const Eigen::Index n = c.rows();
    Vec y = es.eigenvectors().col(n - 1);
    normalize_sign(y);
    RayleighMax r;
    r.value = es.eigenvalues()(n - 1);
    r.vector = b.apply_inverse(y);
    return r;
}

RayleighMax max_generalized_rayleigh(const Mat& a, const Mat& b) {
    return max_generalized_rayleigh(a, cholesky_spd(b));
}

IndefiniteFactor::IndefiniteFactor(const SpMat& k)
    : k_(k), lu_(std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>()) {
    if (k.rows() != k.cols() || k.rows() < 1)
        throw ShapeError("solve_sym_indefinite: expected a nonempty square matrix");
    k_.makeCompressed();
    k_norm_ = k_.norm();
    lu_->analyzePattern(k_);
    lu_->factorize(k_);
    if (lu_->info() != Eigen::Success)
        throw SingularError("solve_sym_indefinite: singular factorization");
}

Vec IndefiniteFactor::solve(const Vec& rhs) const {
    if (rhs.size() != k_.rows()) throw ShapeError("solve_sym_indefinite: rhs size mismatch");
    Vec x = lu_->solve(rhs);
    Vec r = rhs - k_ * x;
    const double target = 1e-10 * (k_norm_ * x.norm() + rhs.norm());
    if (r.norm() > 0.1 * target) {
        x += lu_->solve(r);
        r = rhs - k_ * x;
    }
    if (!x.allFinite()) throw SingularError("solve_sym_indefinite: non-finite solution");
    return x;
}

Vec solve_sym_indefinite(const SpMat& k, const Vec& rhs) { return IndefiniteFactor(k).solve(rhs); }

SparseSpdFactor::SparseSpdFactor(const SpMat& a)
    : n_(a.rows()),
      llt_(std::make_unique<Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>>()) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw ShapeError("SparseSpdFactor: expected a nonempty square matrix");
    llt_->compute(a);
    if (llt_->info() != Eigen::Success) throw SingularError("SparseSpdFactor: factorization failed");
}

Vec SparseSpdFactor::solve(const Vec& b) const {
    if (b.size() != n_) throw ShapeError("SparseSpdFactor: rhs size mismatch");
    return llt_->solve(b);
}

Mat SparseSpdFactor::solve(const Mat& b) const {
    if (b.rows() != n_) throw ShapeError("SparseSpdFactor: rhs size mismatch");
    return llt_->solve(b);
}

}  // namespace dgreedy
