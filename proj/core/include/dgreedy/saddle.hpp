#pragma once

#include <vector>

#include "dgreedy/reduced_pair.hpp"

namespace dgreedy {

struct SaddleSolution {
    Vec u;  // test coefficients (truth or reduced)
    Vec p;  // trial coefficients (truth or reduced)
    double mu = 0.0;
    double residual_norm = 0.0;
};

SpMat assemble_truth_system(const SaddleProblem& problem, double mu);

SaddleSolution solve_truth(const SaddleProblem& problem, double mu);

// Reduced coefficients: u over the test basis, p over the approximation columns.
SaddleSolution solve_reduced(const SaddleProblem& problem, double mu, const ReducedPair& pair);
SaddleSolution solve_reduced(const ReducedPair& pair, const ReducedGramians& g, const Vec& f,
                             const Vec& gvec, double mu);

Vec lift_trial(const ReducedPair& pair, const Vec& p);
Vec lift_test(const ReducedPair& pair, const Vec& u);

// (1 - δ_𝒩²)^{-1/2} ‖u_𝒩(μ)‖_{Y_μ}.
double truth_error_bound(const SaddleProblem& problem, double mu, const SaddleSolution& truth);
double truth_error_bound(const SaddleProblem& problem, double mu);

// Test functions ψ_{k,j} ∈ Y_n with (ψ_{k,j}, v)_Y = b_k(φ_j, v) for all v ∈ Y_n,
// plus the contracted tensors for the n × n online system.
struct OnlineTestBasis {
    std::vector<Mat> coeffs;                   // per k: m × n coefficients over Ψ
    std::vector<std::vector<Mat>> cross;       // [l][k]: B_{l,n}ᵀ C_k
    std::vector<std::vector<Vec>> load;        // [q][k]: C_kᵀ f_{q,n}
    Mat h;                                     // ω Zᵀ H Z over the approximation columns

    Mat psi_component(const ReducedPair& pair, std::size_t k) const;  // truth vectors
    Mat psi_at(const ReducedPair& pair, const ThetaMap& theta, double mu) const;
};

OnlineTestBasis build_online_test_basis(const SaddleProblem& problem, const ReducedPair& pair);

Vec online_pg_solve(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                    const OnlineTestBasis& otb);

}  // namespace dgreedy
