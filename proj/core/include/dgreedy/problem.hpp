#pragma once

#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dgreedy/fem.hpp"
#include "dgreedy/la.hpp"

namespace dgreedy {

struct ThetaMap {
    std::vector<std::function<double(double)>> fns;

    std::size_t size() const { return fns.size(); }
    Vec eval(double mu) const;

    static ThetaMap constant_one();
};

// B(μ) = Σ_k Θ_k(μ) B_k.
struct AffineOperator {
    std::vector<SpMat> components;
    ThetaMap theta;

    std::size_t terms() const { return components.size(); }
    Eigen::Index rows() const { return components.empty() ? 0 : components.front().rows(); }
    Eigen::Index cols() const { return components.empty() ? 0 : components.front().cols(); }
    SpMat at(double mu) const;
    Vec apply(double mu, const Vec& x) const;
    void validate(const std::string& what) const;
};

struct AffineVector {
    std::vector<Vec> components;
    ThetaMap theta;

    Eigen::Index size() const { return components.empty() ? 0 : components.front().size(); }
    Vec at(double mu) const;
};

struct ParameterDomain {
    double lo = 0.2;
    double hi = std::numbers::pi - 0.2;
    int samples = 100;

    std::vector<double> sample_points() const;
    bool contains(double mu) const;
    void validate() const;
};

struct CoverPiece {
    double lo = 0.0;
    double hi = 0.0;
    bool open_lo = false;  // the right piece excludes the split point
    EdgeSet inflow;
    EdgeSet outflow;

    bool contains(double mu) const;
};

inline constexpr double kSplitAngle = std::numbers::pi / 2;

std::vector<CoverPiece> cover_pieces(const ParameterDomain& domain);
const CoverPiece& piece_of(const std::vector<CoverPiece>& pieces, double mu);

enum class ProblemKind { convection_diffusion, transport, generic };

// Norm used for the trial side of the stability diagnostics.
enum class XNormKind {
    graph,  // ‖q‖² = ‖B q‖²_{Y'} + ω‖q‖²_H on the truth test space
    fixed,  // the parameter-independent Gramian xhat_fixed
};

class RieszCache;

// A parametric saddle problem on one cover piece:
//   [A(μ)  B(μ)] [u]   [f(μ)]
//   [B(μ)ᵀ -ωH ] [p] = [g(μ)]
// with A = R_Y unless a separate form is supplied.
class SaddleProblem {
public:
    ProblemKind kind = ProblemKind::generic;
    std::string name;
    CoverPiece piece;
    std::vector<double> samples;

    std::optional<FESpace> trial_space;
    std::optional<FESpace> test_space;

    AffineOperator op;       // test × trial
    AffineOperator riesz_y;  // test × test, SPD
    std::optional<AffineOperator> a_form;
    AffineVector f;
    std::optional<AffineVector> g;
    std::function<Vec(double)> rhs_override;  // replaces f when set (defect problems)

    SpMat penalty;  // trial × trial
    double omega = 0.0;

    XNormKind xhat_kind = XNormKind::fixed;
    SpMat xhat_fixed;  // trial × trial
    SpMat trial_gram;  // orthonormalization Gramian for the trial basis
    SpMat trial_mass;  // L2 reporting

    double delta_truth = 0.5;
    double beta_truth = 1.0;

    bool y_norm_constant = false;  // R_Y has one term with constant weight

    SaddleProblem();
    SaddleProblem(const SaddleProblem& other);
    SaddleProblem& operator=(const SaddleProblem& other);
    SaddleProblem(SaddleProblem&&) noexcept = default;
    SaddleProblem& operator=(SaddleProblem&&) noexcept = default;

    Eigen::Index trial_dofs() const { return op.cols(); }
    Eigen::Index test_dofs() const { return op.rows(); }

    bool riesz_y_mu_independent() const { return y_norm_constant; }
    bool has_penalty() const { return omega > 0.0 && penalty.nonZeros() > 0; }
    const AffineOperator& a() const { return a_form ? *a_form : riesz_y; }

    SpMat operator_at(double mu) const;
    SpMat riesz_y_at(double mu) const;
    Vec rhs_at(double mu) const;
    Vec g_at(double mu) const;

    Vec riesz_solve(double mu, const Vec& w) const;
    Mat riesz_solve(double mu, const Mat& w) const;
    std::shared_ptr<const SparseSpdFactor> riesz_factor(double mu) const;

    void set_riesz_cache_capacity(std::size_t capacity);
    std::size_t riesz_factorizations() const;

    double y_norm(double mu, const Vec& v) const;

    void validate() const;

private:
    std::shared_ptr<RieszCache> cache_;
};

SpMat operator_at(const AffineOperator& op, double mu, const ParameterDomain& domain);

struct CdOptions {
    double epsilon = 1.0 / 32.0;
    double omega = 1e-2;
    int trial_level = 5;
    int test_level = 6;
    double delta_truth = 0.5;
    double beta_truth = 1.0;
};

SaddleProblem build_cd_problem(const CdOptions& opts, const CoverPiece& piece,
                               std::vector<double> samples);

enum class TransportData {
    smooth,  // f = 1, p = 0 on the inflow boundary
    jump,    // f = 0.5 for x < y, 1 otherwise; p = 1 - y for x <= 0.5 on the inflow boundary
};

struct TransportOptions {
    int trial_level = 3;
    int test_level = 4;
    TransportData data = TransportData::smooth;
    double delta_truth = 0.5;
    double beta_truth = 1.0;
};

SaddleProblem build_transport_problem(const TransportOptions& opts, const CoverPiece& piece,
                                      std::vector<double> samples);

// Components of (B*v, B*w)_{L2} with B*v = -μ·∇v + v on a continuous space, in the
// order cos², cos·sin, sin², cos, sin, 1.
AffineOperator transport_test_gramian(const FESpace& test);

// The isometry ratio ‖P_Y R_Y⁻¹ B q‖_Y / ‖q‖_{X̂} minimized over trial vectors.
double truth_isometry_ratio(const SaddleProblem& problem, double mu);

}  // namespace dgreedy
