#pragma once

#include <cstdint>
#include <vector>

#include "dgreedy/greedy.hpp"

namespace dgreedy {

// R*(μ) = ‖f - A u_n - B p_n‖_{Y'} + ‖g - Bᵀ u_n + ωH p_n‖_{X'}, evaluated at truth level
// with the trial Gramian as X reference norm.
class ResidualStar {
public:
    explicit ResidualStar(const SaddleProblem& problem);
    double operator()(double mu, const Vec& u_truth, const Vec& p_truth) const;

private:
    const SaddleProblem* problem_;
    SparseSpdFactor x_;
};

struct Dg2Result {
    std::unique_ptr<ReducedPair> pair;
    GreedyHistory history;
    std::vector<double> selected;      // μ₁, μ̂₂, ...
    std::vector<Vec> p_trajectory;     // p-snapshots in selection order
    std::vector<bool> u_added;         // whether û entered the test space
};

// Double greedy with the two-space update; a_μ must be SPD on the test space.
Dg2Result dg2(const SaddleProblem& problem, const GreedyConfig& cfg, const TruthSnapshots* truth = nullptr);

struct SyntheticOptions {
    int trial_dim = 20;
    int test_dim = 30;
    int terms = 3;
    int samples = 40;
    std::uint64_t seed = 7;
};

// Dense random affine saddle problem with Θ = (1, cos μ, sin μ, ...), an affine SPD
// A form, nonzero g and fixed X/Y Gramians. β_𝒩 is set to the truth inf-sup minimum.
SaddleProblem build_synthetic_problem(const SyntheticOptions& opts);

// Copy of problem with an explicit A form equal to its Y-inner product and g = 0.
SaddleProblem recast_as_generic(const SaddleProblem& problem);

}  // namespace dgreedy
