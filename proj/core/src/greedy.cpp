#include "dgreedy/greedy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dgreedy/parallel.hpp"

namespace dgreedy {

void GreedyConfig::validate() const {
    if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
    if (n_max < 1) throw ConfigError("n_max", "must be at least 1");
    if (!(tightening.alpha > 0.0 && tightening.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
    if (tightening.cycles < 0) throw ConfigError("cycles", "must be nonnegative");
    stab.validate();
}

TruthSnapshots::TruthSnapshots(const SaddleProblem& problem) : problem_(&problem) {
    sols_.resize(problem.samples.size());
    parallel_for(sols_.size(), [&](std::size_t i) { sols_[i] = solve_truth(problem, problem.samples[i]); });
}

const SaddleSolution& TruthSnapshots::at_mu(double mu) const {
    for (std::size_t i = 0; i < sols_.size(); ++i)
        if (std::abs(problem_->samples[i] - mu) <= 1e-14) return sols_[i];
    throw DomainError("TruthSnapshots: parameter is not a sample");
}

double surrogate_truth_dual(const SaddleProblem& problem, double mu, const Vec& p_truth) {
    const Vec r = problem.rhs_at(mu) - problem.op.apply(mu, p_truth);
    const Vec v = problem.riesz_solve(mu, r);
    return std::sqrt(std::max(0.0, r.dot(v)));
}

double surrogate_reduced_dual(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                              const SaddleSolution& reduced) {
    const ReducedGramians g = pair.gramians(mu, false);
    (void)problem;
    return std::sqrt(std::max(0.0, reduced.u.dot(g.ry * reduced.u)));
}

SurrogateSweep surrogate_sweep(const SaddleProblem& problem, const ReducedPair& pair, SurrogateKind kind,
                               const std::vector<double>& exclude) {
    const auto& s = problem.samples;
    SurrogateSweep out;
    out.values.resize(s.size());
    out.reduced.resize(s.size());
    parallel_for(s.size(), [&](std::size_t i) {
        const double mu = s[i];
        const ReducedGramians g = pair.gramians(mu, false);
        SaddleSolution red = solve_reduced(pair, g, pair.f(mu), pair.g(mu), mu);
        if (kind == SurrogateKind::truth_dual) {
            out.values[i] = surrogate_truth_dual(problem, mu, lift_trial(pair, red.p));
        } else {
            out.values[i] = std::sqrt(std::max(0.0, red.u.dot(g.ry * red.u)));
        }
        out.reduced[i] = std::move(red);
    });
    for (std::size_t i = 1; i < s.size(); ++i)
        if (out.values[i] > out.values[out.argmax_index]) out.argmax_index = i;
    out.max_value = out.values[out.argmax_index];
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool taken = std::any_of(exclude.begin(), exclude.end(),
                                       [&](double m) { return std::abs(m - s[i]) <= 1e-14; });
        if (!taken && (!pick || out.values[i] > out.values[*pick])) pick = i;
    }
    out.argmax_index = pick.value_or(out.argmax_index);
    out.argmax_mu = s[out.argmax_index];
    return out;
}

namespace {

Vec snapshot_at(const SaddleProblem& problem, double mu, const TruthSnapshots* truth) {
    if (truth) return truth->at_mu(mu).p;
    return solve_truth(problem, mu).p;
}

void append_snapshot(const SaddleProblem& problem, ReducedPair& pair, double mu, const Vec& p) {
    const auto w = gram_schmidt_in(problem.trial_gram, pair.approximation_basis(), p);
    if (!w) {
        std::ostringstream msg;
        msg << "snapshot at mu=" << mu << " is linearly dependent on the trial basis";
        throw SnapshotDependent(mu, msg.str());
    }
    pair.append_trial(*w);
}

}  // namespace

ApproximationUpdate update_approximation(const SaddleProblem& problem, ReducedPair& pair,
                                         const SurrogateSweep& sweep, const TruthSnapshots* truth) {
    ApproximationUpdate up;
    up.mu = sweep.argmax_mu;
    up.surrogate = sweep.max_value;
    up.snapshot = snapshot_at(problem, up.mu, truth);
    append_snapshot(problem, pair, up.mu, up.snapshot);
    return up;
}

ApproximationUpdate update_approximation(const SaddleProblem& problem, ReducedPair& pair,
                                         const GreedyConfig& cfg, const TruthSnapshots* truth) {
    return update_approximation(problem, pair, surrogate_sweep(problem, pair, cfg.surrogate), truth);
}

std::vector<double> best_approximation_errors(const SaddleProblem& problem, const ReducedPair& pair,
                                              const TruthSnapshots& truth) {
    const Mat z = pair.approximation_basis();
    const Mat gz = problem.trial_gram * z;
    std::vector<double> out(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const Vec& p = truth.at(i).p;
        const Vec e = p - z * (gz.transpose() * p);
        out[i] = std::sqrt(std::max(0.0, e.dot(problem.trial_gram * e)));
    }
    return out;
}

GreedyResult dg1(const SaddleProblem& problem, const GreedyConfig& cfg, const TruthSnapshots* truth,
                 const Mat* anchor) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    std::unique_ptr<TruthSnapshots> own;
    if (!truth && cfg.track_best_error) {
        own = std::make_unique<TruthSnapshots>(problem);
        truth = own.get();
    }

    GreedyResult res;
    res.pair = std::make_unique<ReducedPair>(problem);
    ReducedPair& pair = *res.pair;
    if (anchor) pair.set_anchor(*anchor);

    const double mu1 = cfg.mu_start.value_or(problem.samples.front());
    if (!problem.piece.contains(mu1)) throw DomainError("dg1: initial parameter outside the cover piece");
    append_snapshot(problem, pair, mu1, snapshot_at(problem, mu1, truth));
    double selected = mu1;
    std::vector<double> chosen{mu1};

    for (;;) {
        const auto t0 = clock::now();
        IterationRecord rec;
        rec.selected_mu = selected;
        const StabResult st = stabilize(problem, pair, cfg.stab, cfg.loop);
        rec.enrichments = static_cast<int>(st.records.size());
        for (const auto& e : st.records) rec.enrichment_mus.push_back(e.mu);

        const Sweep ds = delta_sweep(problem, pair, cfg.stab);
        const Sweep is = inf_sup_sweep(problem, pair, cfg.stab);
        rec.delta = std::sqrt(std::max(0.0, ds.worst_value));
        rec.sigma_min = is.worst_value;

        const SurrogateSweep ss = surrogate_sweep(problem, pair, cfg.surrogate, chosen);
        rec.n = static_cast<int>(pair.n());
        rec.m = pair.m();
        rec.max_surrogate = ss.max_value;
        rec.argmax_mu = ss.argmax_mu;
        if (truth) {
            const auto be = best_approximation_errors(problem, pair, *truth);
            rec.best_error = *std::max_element(be.begin(), be.end());
            if (cfg.report_each_iteration)
                rec.summary = summarize(evaluate_report(problem, pair, cfg.surrogate, *truth));
        }

        if (cfg.observer) cfg.observer(pair, rec);

        bool stop = false;
        if (ss.max_value <= cfg.tol) {
            res.history.stop_reason = "tolerance reached";
            stop = true;
        } else if (pair.n() >= cfg.n_max) {
            res.history.stop_reason = "n_max reached";
            stop = true;
        }
        if (!stop) {
            try {
                selected = update_approximation(problem, pair, ss, truth).mu;
                chosen.push_back(selected);
            } catch (const SnapshotDependent& e) {
                res.history.stop_reason = e.what();
                stop = true;
            }
        }
        rec.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        res.history.records.push_back(std::move(rec));
        if (stop) break;
    }
    return res;
}

double SurrogateReport::max_surrogate() const {
    return surrogate.empty() ? 0.0 : *std::max_element(surrogate.begin(), surrogate.end());
}
double SurrogateReport::max_rb_truth() const {
    return rb_truth.empty() ? 0.0 : *std::max_element(rb_truth.begin(), rb_truth.end());
}
double SurrogateReport::max_rb_l2() const {
    return rb_l2.empty() ? 0.0 : *std::max_element(rb_l2.begin(), rb_l2.end());
}
double SurrogateReport::max_truth_bound() const {
    return truth_bound.empty() ? 0.0 : *std::max_element(truth_bound.begin(), truth_bound.end());
}

namespace {
double finite_extreme(const std::vector<double>& r, bool want_min) {
    double out = std::nan("");
    for (double x : r) {
        if (!std::isfinite(x)) continue;
        if (std::isnan(out) || (want_min ? x < out : x > out)) out = x;
    }
    return out;
}
}  // namespace

double SurrogateReport::min_ratio() const { return finite_extreme(ratio, true); }
double SurrogateReport::max_ratio() const { return finite_extreme(ratio, false); }

double SurrogateReport::top_ratio(double fraction) const {
    std::vector<std::size_t> idx(surrogate.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return surrogate[a] > surrogate[b]; });
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * idx.size())));
    std::vector<double> top;
    for (std::size_t i = 0; i < std::min(k, idx.size()); ++i) top.push_back(ratio[idx[i]]);
    return finite_extreme(top, false);
}

ReportSummary summarize(const SurrogateReport& r) {
    ReportSummary s;
    s.max_rb_truth = r.max_rb_truth();
    s.max_rb_l2 = r.max_rb_l2();
    s.max_truth_bound = r.max_truth_bound();
    s.min_ratio = r.min_ratio();
    s.max_ratio = r.max_ratio();
    s.top_ratio = r.top_ratio();
    return s;
}

SurrogateReport evaluate_report(const SaddleProblem& problem, const ReducedPair& pair, SurrogateKind kind,
                                const TruthSnapshots& truth, const std::function<Vec(double)>& offset) {
    const SurrogateSweep ss = surrogate_sweep(problem, pair, kind);
    const Mat z = pair.approximation_basis();
    const SpMat& mass = problem.trial_mass;
    const Mat mz = mass * z;
    const Eigen::LDLT<Mat> gram(symmetrize(z.transpose() * mz));
    SurrogateReport r;
    const std::size_t ns = problem.samples.size();
    r.mu = problem.samples;
    r.surrogate = ss.values;
    r.rb_truth.resize(ns);
    r.rb_l2.resize(ns);
    r.ratio.resize(ns);
    r.truth_bound.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        const SaddleSolution& t = truth.at(i);
        Vec pn = lift_trial(pair, ss.reduced[i].p);
        if (offset) pn += offset(problem.samples[i]);
        const Vec e = t.p - pn;
        r.rb_truth[i] = std::sqrt(std::max(0.0, e.dot(mass * e)));
        const Vec proj = z * gram.solve(mz.transpose() * t.p);
        const Vec d = pn - proj;
        r.rb_l2[i] = std::sqrt(std::max(0.0, d.dot(mass * d)));
        r.ratio[i] = r.rb_truth[i] > 1e-14 ? r.surrogate[i] / r.rb_truth[i] : std::nan("");
        r.truth_bound[i] = truth_error_bound(problem, problem.samples[i], t);
    }
    return r;
}

}  // namespace dgreedy
