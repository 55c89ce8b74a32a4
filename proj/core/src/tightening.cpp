#include "dgreedy/tightening.hpp"

#include <algorithm>

namespace dgreedy {

namespace {

double max_truth_bound(const SaddleProblem& problem, const TruthSnapshots& truth) {
    double tau = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        tau = std::max(tau, truth_error_bound(problem, problem.samples[i], truth.at(i)));
    return tau;
}

void accumulate(const SaddleProblem& problem, Mat& anchor, const Mat& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        const auto w = gram_schmidt_in(problem.trial_gram, anchor, Vec(basis.col(j)));
        if (!w) continue;
        anchor.conservativeResize(Eigen::NoChange, anchor.cols() + 1);
        anchor.col(anchor.cols() - 1) = *w;
    }
}

}  // namespace

TighteningResult iterative_tightening(const SaddleProblem& problem, const GreedyConfig& cfg,
                                      const TruthSnapshots& truth) {
    cfg.validate();
    if (cfg.surrogate != SurrogateKind::reduced_dual)
        throw ConfigError("surrogate", "iterative tightening runs on the reduced-dual surrogate");
    TighteningResult out;
    const int cycles = cfg.tightening.cycles;

    GreedyConfig first = cfg;
    if (cycles > 0) {
        const double tau = max_truth_bound(problem, truth);
        if (tau > 0.0) first.tol = cfg.tightening.alpha * tau;
    }

    if (cfg.tightening.mode == TighteningMode::accumulate) {
        Mat anchor(problem.trial_dofs(), 0);
        for (int c = 0; c <= cycles; ++c) {
            const GreedyConfig& cc = c == 0 ? first : cfg;
            GreedyResult r = dg1(problem, cc, &truth, c == 0 ? nullptr : &anchor);
            TighteningCycle rec;
            rec.cycle = c;
            rec.anchor_dim = r.pair->anchor_columns();
            rec.stop_tol = cc.tol;
            rec.history = std::move(r.history);
            rec.report = evaluate_report(problem, *r.pair, cfg.surrogate, truth);
            out.cycles.push_back(std::move(rec));
            accumulate(problem, anchor, r.pair->approximation_basis());
            out.pair = std::move(r.pair);
        }
        return out;
    }

    // Defect mode: cycle c approximates p_𝒩 minus the sum of earlier reduced solutions.
    std::vector<std::pair<const SaddleProblem*, const ReducedPair*>> earlier;
    for (int c = 0; c <= cycles; ++c) {
        const SaddleProblem* prob = &problem;
        const TruthSnapshots* tr = &truth;
        if (c > 0) {
            auto dp = std::make_unique<SaddleProblem>(problem);
            auto snapshot = earlier;
            dp->rhs_override = [base = &problem, snapshot](double mu) {
                Vec r = base->rhs_at(mu);
                for (const auto& [pb, pr] : snapshot)
                    r -= base->op.apply(mu, lift_trial(*pr, solve_reduced(*pb, mu, *pr).p));
                return r;
            };
            dp->name = problem.name + "_defect" + std::to_string(c);
            prob = dp.get();
            out.problems.push_back(std::move(dp));
            out.truths.push_back(std::make_unique<TruthSnapshots>(*prob));
            tr = out.truths.back().get();
        }
        const GreedyConfig& cc = c == 0 ? first : cfg;
        GreedyResult r = dg1(*prob, cc, tr);
        TighteningCycle rec;
        rec.cycle = c;
        rec.stop_tol = cc.tol;
        rec.history = std::move(r.history);
        rec.report = evaluate_report(*prob, *r.pair, cfg.surrogate, *tr);
        out.cycles.push_back(std::move(rec));
        earlier.emplace_back(prob, r.pair.get());
        out.pairs.push_back(std::move(r.pair));
    }
    out.warning = "defect mode: final approximation is the sum of all cycle solutions";
    return out;
}

}  // namespace dgreedy
