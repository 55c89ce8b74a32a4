#pragma once

#include <vector>

#include "dgreedy/problem.hpp"

namespace dgreedy {

struct ReducedGramians {
    Mat b;     // m × n, rows test, columns trial
    Mat ry;    // m × m
    Mat xhat;  // n × n
    Mat a;     // m × m, equals ry unless the problem has its own A form
    Mat h;     // n × n, ω Zᵀ H Z (zero without penalty)
    Mat xnative;  // n × n, Zᵀ G Z with the trial orthonormalization Gramian
};

// Trial basis Z and test basis Ψ as truth coefficient columns, with per-component
// reduced tensors kept in sync on every append. The leading `anchor` trial
// columns take part in stabilization only; reduced solves use the remaining ones.
class ReducedPair {
public:
    explicit ReducedPair(const SaddleProblem& problem);

    const SaddleProblem& problem() const { return *problem_; }
    const Mat& trial() const { return z_; }
    const Mat& test() const { return psi_; }
    Eigen::Index n() const { return z_.cols() - anchor_; }
    Eigen::Index m() const { return psi_.cols(); }
    Eigen::Index anchor_columns() const { return anchor_; }
    Eigen::Index trial_columns() const { return z_.cols(); }
    Mat approximation_basis() const { return z_.rightCols(n()); }

    void append_trial(const Vec& z);
    void append_test(const Vec& psi);
    void set_anchor(const Mat& anchor);  // only on a pair without trial columns

    // All trial columns (anchor included). Skipping X̂ avoids truth solves when the
    // graph norm has to be formed from a parameter-dependent Riesz map.
    ReducedGramians gramians(double mu, bool with_xhat = true) const;
    Vec f(double mu) const;  // Ψᵀ f(μ)
    Vec g(double mu) const;  // Zᵀ g(μ), approximation columns

    // B(μ) Z c for trial coefficients c over all columns.
    Vec apply_operator(double mu, const Vec& c) const;
    const std::vector<Mat>& b_components() const { return b_; }
    const std::vector<Mat>& bz_components() const { return bz_; }
    const std::vector<Mat>& ry_components() const { return ry_; }
    const std::vector<Vec>& f_components() const { return f_; }

private:
    void append_trial_column(const Vec& z);

    const SaddleProblem* problem_;
    Eigen::Index anchor_ = 0;
    Mat z_;
    Mat psi_;
    std::vector<Mat> bz_;  // B_k Z
    std::vector<Mat> b_;   // Ψᵀ B_k Z
    std::vector<Mat> ry_;  // Ψᵀ R_q Ψ
    std::vector<Mat> a_;   // Ψᵀ A_q Ψ
    std::vector<Vec> f_;   // Ψᵀ f_q
    std::vector<Vec> gq_;  // Zᵀ g_q
    Mat h_;                // Zᵀ H Z
    Mat xfix_;             // Zᵀ X Z
    Mat xgram_;            // Zᵀ G Z
    std::vector<Mat> w_;   // R_Y⁻¹ B_k Z (graph norm)
    std::vector<std::vector<Mat>> gkl_;  // (B_k Z)ᵀ W_l
};

}  // namespace dgreedy
