#pragma once

#include <vector>

#include "dgreedy/reduced_pair.hpp"

namespace dgreedy {

enum class NormKind {
    graph,   // the problem's X̂ norm (graph norm, or L2 for transport)
    native,  // the trial orthonormalization Gramian
};

enum class StabLoop { inf_sup, delta };

struct StabConfig {
    double zeta = 0.5;
    double delta = 0.5;
    double beta = 1.0;  // β_𝒩
    NormKind norm = NormKind::graph;
    FactorKind factor = FactorKind::cholesky;
    int max_enrichments = 1000;

    void validate() const;
};

ReducedGramians reduced_matrices(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                                 NormKind norm = NormKind::graph);

// Trial coefficients q are over all trial columns of the pair (anchor included).
struct InfSup {
    double sigma = 0.0;
    Vec q;
};

struct DeltaMax {
    double delta2 = 0.0;
    Vec q;
};

InfSup inf_sup_constant(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                        NormKind norm = NormKind::graph, FactorKind factor = FactorKind::cholesky);

DeltaMax delta_rayleigh(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                        NormKind norm = NormKind::graph, FactorKind factor = FactorKind::cholesky);

// R_{Y_μ}⁻¹ B_μ (Z q) as a truth test vector.
Vec supremizer(const SaddleProblem& problem, double mu, const Vec& q, const ReducedPair& pair);

struct EnrichmentRecord {
    double mu = 0.0;
    double value = 0.0;  // σ_min or δ² before the enrichment
    Vec q;
    Eigen::Index m_after = 0;
};

struct StabResult {
    std::vector<EnrichmentRecord> records;
    double final_value = 0.0;  // worst σ_min or δ² after the loop
    double final_mu = 0.0;
};

struct Sweep {
    double worst_mu = 0.0;
    double worst_value = 0.0;
    Vec worst_q;
    std::vector<double> values;
};

Sweep inf_sup_sweep(const SaddleProblem& problem, const ReducedPair& pair, const StabConfig& cfg);
Sweep delta_sweep(const SaddleProblem& problem, const ReducedPair& pair, const StabConfig& cfg);

StabResult update_inf_sup(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg);
StabResult update_delta(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg);
StabResult stabilize(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg, StabLoop loop);

}  // namespace dgreedy
