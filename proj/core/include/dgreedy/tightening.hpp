#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dgreedy/greedy.hpp"

namespace dgreedy {

struct TighteningCycle {
    int cycle = 0;
    GreedyHistory history;
    SurrogateReport report;
    Eigen::Index anchor_dim = 0;
    double stop_tol = 0.0;
};

struct TighteningResult {
    std::vector<TighteningCycle> cycles;
    std::unique_ptr<ReducedPair> pair;  // final cycle
    std::string warning;

    // Owned defect problems and their pairs, kept alive for the final pair.
    std::vector<std::unique_ptr<SaddleProblem>> problems;
    std::vector<std::unique_ptr<ReducedPair>> pairs;
    std::vector<std::unique_ptr<TruthSnapshots>> truths;
};

// Cycle 0 runs dg1 until the max reduced-dual surrogate falls below α times the
// max truth error bound (or the configured tolerance when that bound vanishes).
// Later cycles rerun dg1 and stabilize the accumulated trial spaces together with
// the new one (accumulate mode) or approximate the defect of the previous cycles.
TighteningResult iterative_tightening(const SaddleProblem& problem, const GreedyConfig& cfg,
                                      const TruthSnapshots& truth);

}  // namespace dgreedy
