#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dgreedy/saddle.hpp"
#include "dgreedy/stabilization.hpp"

namespace dgreedy {

enum class SurrogateKind {
    truth_dual,    // ‖P R_Y⁻¹ (f - B p_n)‖_Y on the truth test space
    reduced_dual,  // ‖u_n‖_Y, fully online
};

enum class TighteningMode { accumulate, defect };

struct TighteningConfig {
    int cycles = 0;
    double alpha = 0.1;
    TighteningMode mode = TighteningMode::accumulate;
};

struct IterationRecord;

struct GreedyConfig {
    double tol = 1e-4;
    int n_max = 10;
    SurrogateKind surrogate = SurrogateKind::truth_dual;
    StabConfig stab;
    StabLoop loop = StabLoop::inf_sup;
    std::optional<double> mu_start;
    TighteningConfig tightening;
    bool track_best_error = true;
    bool report_each_iteration = false;  // fills IterationRecord::summary (needs truth snapshots)
    // Called after each stabilization, before the trial space grows.
    std::function<void(const ReducedPair&, const IterationRecord&)> observer;

    void validate() const;
};

// Truth solutions on the sample set, computed once and shared.
class TruthSnapshots {
public:
    explicit TruthSnapshots(const SaddleProblem& problem);
    const SaddleSolution& at(std::size_t i) const { return sols_[i]; }
    const SaddleSolution& at_mu(double mu) const;
    std::size_t size() const { return sols_.size(); }

private:
    const SaddleProblem* problem_;
    std::vector<SaddleSolution> sols_;
};

double surrogate_truth_dual(const SaddleProblem& problem, double mu, const Vec& p_truth);
double surrogate_reduced_dual(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                              const SaddleSolution& reduced);

struct SurrogateSweep {
    std::vector<double> values;
    std::vector<SaddleSolution> reduced;
    double max_value = 0.0;  // over all samples
    double argmax_mu = 0.0;  // largest value among samples not excluded
    std::size_t argmax_index = 0;
};

SurrogateSweep surrogate_sweep(const SaddleProblem& problem, const ReducedPair& pair, SurrogateKind kind,
                               const std::vector<double>& exclude = {});

struct ApproximationUpdate {
    double mu = 0.0;
    double surrogate = 0.0;
    Vec snapshot;  // truth trial coefficients before orthonormalization
};

// Selects the worst sample by surrogate, solves the truth problem there and
// appends the orthonormalized snapshot. Throws SnapshotDependent on rejection.
ApproximationUpdate update_approximation(const SaddleProblem& problem, ReducedPair& pair,
                                         const GreedyConfig& cfg, const TruthSnapshots* truth = nullptr);
ApproximationUpdate update_approximation(const SaddleProblem& problem, ReducedPair& pair,
                                         const SurrogateSweep& sweep, const TruthSnapshots* truth);

struct ReportSummary {
    double max_rb_truth = 0.0;
    double max_rb_l2 = 0.0;
    double max_truth_bound = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double top_ratio = 0.0;
};

struct IterationRecord {
    int n = 0;
    Eigen::Index m = 0;
    double delta = 0.0;      // achieved sqrt of max δ² over 𝒮
    double sigma_min = 0.0;  // achieved min inf-sup over 𝒮
    double max_surrogate = 0.0;
    double argmax_mu = 0.0;
    double best_error = -1.0;  // max over 𝒮 of min_{q∈X_n} ‖p_𝒩 - q‖_X, negative when not tracked
    double selected_mu = 0.0;  // parameter of the snapshot added to reach this n
    int enrichments = 0;
    std::vector<double> enrichment_mus;
    double wall_seconds = 0.0;
    std::optional<ReportSummary> summary;
};

struct GreedyHistory {
    std::vector<IterationRecord> records;
    std::string stop_reason;
};

struct GreedyResult {
    std::unique_ptr<ReducedPair> pair;
    GreedyHistory history;
};

// Best-approximation error of each truth snapshot in the trial Gramian norm.
std::vector<double> best_approximation_errors(const SaddleProblem& problem, const ReducedPair& pair,
                                              const TruthSnapshots& truth);

GreedyResult dg1(const SaddleProblem& problem, const GreedyConfig& cfg, const TruthSnapshots* truth = nullptr,
                 const Mat* anchor = nullptr);

struct SurrogateReport {
    std::vector<double> mu;
    std::vector<double> surrogate;
    std::vector<double> rb_truth;  // ‖p_𝒩 - p_n‖_{L2}
    std::vector<double> rb_l2;     // ‖p_n - P_{X_n} p_𝒩‖_{L2}
    std::vector<double> ratio;     // surrogate / rb_truth where rb_truth > 1e-14
    std::vector<double> truth_bound;

    double max_surrogate() const;
    double max_rb_truth() const;
    double max_rb_l2() const;
    double max_truth_bound() const;
    double min_ratio() const;
    double max_ratio() const;
    // Largest ratio among the parameters whose surrogate lies in the top fraction.
    double top_ratio(double fraction = 0.1) const;
};

// offset, when set, is added to the lifted reduced solution before errors are taken.
ReportSummary summarize(const SurrogateReport& report);

SurrogateReport evaluate_report(const SaddleProblem& problem, const ReducedPair& pair, SurrogateKind kind,
                                const TruthSnapshots& truth, const std::function<Vec(double)>& offset = {});

}  // namespace dgreedy
