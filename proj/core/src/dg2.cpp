#include "dgreedy/dg2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>

namespace dgreedy {

ResidualStar::ResidualStar(const SaddleProblem& problem)
    : problem_(&problem), x_(problem.trial_gram) {}

double ResidualStar::operator()(double mu, const Vec& u, const Vec& p) const {
    const SaddleProblem& pb = *problem_;
    const SpMat b = pb.operator_at(mu);
    const Vec r1 = pb.rhs_at(mu) - pb.a().apply(mu, u) - b * p;
    Vec r2 = pb.g_at(mu) - b.transpose() * u;
    if (pb.has_penalty()) r2 += pb.omega * (pb.penalty * p);
    const double y = std::sqrt(std::max(0.0, r1.dot(pb.riesz_solve(mu, r1))));
    const double x = std::sqrt(std::max(0.0, r2.dot(x_.solve(r2))));
    return y + x;
}

namespace {

void append_p(const SaddleProblem& problem, ReducedPair& pair, double mu, const Vec& p) {
    const auto w = gram_schmidt_in(problem.trial_gram, pair.approximation_basis(), p);
    if (!w) throw SnapshotDependent(mu, "dg2: p-snapshot is linearly dependent on the trial basis");
    pair.append_trial(*w);
}

// û at roundoff level relative to the data (u_𝒩 = 0 on square truth pairs) is skipped.
bool append_u(const SaddleProblem& problem, ReducedPair& pair, double mu, const Vec& u) {
    const Vec f = problem.rhs_at(mu);
    const double scale = std::sqrt(std::max(0.0, f.dot(problem.riesz_solve(mu, f))));
    if (problem.y_norm(mu, u) <= 1e-10 * scale) return false;
    const auto w = orthonormalize_against(problem.riesz_y_at(mu), pair.test(), u);
    if (!w) return false;
    pair.append_test(*w);
    return true;
}

}  // namespace

Dg2Result dg2(const SaddleProblem& problem, const GreedyConfig& cfg, const TruthSnapshots* truth) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    if (problem.a_form) {
        for (double mu : problem.samples) {
            try {
                SparseSpdFactor check(problem.a_form->at(mu));
                (void)check;
            } catch (const Error&) {
                throw ConfigError("a_form", "A form is not SPD on the test space");
            }
        }
    }
    const ResidualStar rstar(problem);
    auto solve_at = [&](double mu) { return truth ? truth->at_mu(mu) : solve_truth(problem, mu); };

    Dg2Result res;
    res.pair = std::make_unique<ReducedPair>(problem);
    ReducedPair& pair = *res.pair;
    const double mu1 = cfg.mu_start.value_or(problem.samples.front());
    {
        const SaddleSolution s = solve_at(mu1);
        append_p(problem, pair, mu1, s.p);
        res.selected.push_back(mu1);
        res.p_trajectory.push_back(s.p);
        res.u_added.push_back(append_u(problem, pair, mu1, s.u));
    }
    double selected = mu1;
    for (;;) {
        const auto t0 = clock::now();
        IterationRecord rec;
        rec.selected_mu = selected;
        const StabResult st = stabilize(problem, pair, cfg.stab, cfg.loop);
        rec.enrichments = static_cast<int>(st.records.size());
        for (const auto& e : st.records) rec.enrichment_mus.push_back(e.mu);
        rec.delta = std::sqrt(std::max(0.0, delta_sweep(problem, pair, cfg.stab).worst_value));
        rec.sigma_min = inf_sup_sweep(problem, pair, cfg.stab).worst_value;

        const auto& s = problem.samples;
        std::vector<double> vals(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const SaddleSolution red = solve_reduced(problem, s[i], pair);
            vals[i] = rstar(s[i], lift_test(pair, red.u), lift_trial(pair, red.p));
        }
        std::size_t top = 0;
        for (std::size_t i = 1; i < vals.size(); ++i)
            if (vals[i] > vals[top]) top = i;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const bool taken = std::find(res.selected.begin(), res.selected.end(), s[i]) != res.selected.end();
            if (!taken && (!pick || vals[i] > vals[*pick])) pick = i;
        }
        const std::size_t arg = pick.value_or(top);
        rec.n = static_cast<int>(pair.n());
        rec.m = pair.m();
        rec.max_surrogate = vals[top];
        rec.argmax_mu = s[arg];
        if (truth) {
            const auto be = best_approximation_errors(problem, pair, *truth);
            rec.best_error = *std::max_element(be.begin(), be.end());
            if (cfg.report_each_iteration) {
                SurrogateReport r = evaluate_report(problem, pair, cfg.surrogate, *truth);
                r.surrogate = vals;
                for (std::size_t i = 0; i < vals.size(); ++i)
                    r.ratio[i] = r.rb_truth[i] > 1e-14 ? vals[i] / r.rb_truth[i] : std::nan("");
                rec.summary = summarize(r);
            }
        }
        bool stop = false;
        if (vals[top] <= cfg.tol) {
            res.history.stop_reason = "tolerance reached";
            stop = true;
        } else if (pair.n() >= cfg.n_max) {
            res.history.stop_reason = "n_max reached";
            stop = true;
        }
        if (!stop) {
            const double mu = s[arg];
            const SaddleSolution sol = solve_at(mu);
            try {
                append_p(problem, pair, mu, sol.p);
                res.selected.push_back(mu);
                res.p_trajectory.push_back(sol.p);
                res.u_added.push_back(append_u(problem, pair, mu, sol.u));
                selected = mu;
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

namespace {

SpMat to_sparse(const Mat& m) { return m.sparseView(0.0, 0.0); }

Mat random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
    return m;
}

}  // namespace

SaddleProblem build_synthetic_problem(const SyntheticOptions& opts) {
    if (opts.trial_dim < 1 || opts.test_dim < opts.trial_dim)
        throw ConfigError("synthetic", "need test_dim >= trial_dim >= 1");
    if (opts.terms < 1) throw ConfigError("synthetic", "need at least one component");
    std::mt19937_64 rng(opts.seed);
    const Eigen::Index nx = opts.trial_dim, ny = opts.test_dim;

    SaddleProblem p;
    p.kind = ProblemKind::generic;
    p.name = "synthetic_saddle";
    ParameterDomain dom;
    dom.samples = opts.samples;
    p.samples = dom.sample_points();
    p.piece.lo = dom.lo;
    p.piece.hi = dom.hi;

    const Mat ry_half = random_matrix(rng, ny, ny) / std::sqrt(static_cast<double>(ny));
    const Mat gy = Mat::Identity(ny, ny) + 0.2 * ry_half * ry_half.transpose();
    const Mat rx_half = random_matrix(rng, nx, nx) / std::sqrt(static_cast<double>(nx));
    const Mat gx = Mat::Identity(nx, nx) + 0.2 * rx_half * rx_half.transpose();

    std::vector<std::function<double(double)>> basis_fns = {
        [](double) { return 1.0; }, [](double m) { return std::cos(m); }, [](double m) { return std::sin(m); }};
    for (int k = 3; k < opts.terms; ++k)
        basis_fns.push_back([k](double m) { return std::cos(k * m); });

    Mat lead = Mat::Zero(ny, nx);
    lead.topRows(nx) = 2.0 * Mat::Identity(nx, nx);
    for (int k = 0; k < opts.terms; ++k) {
        Mat bk = 0.3 * random_matrix(rng, ny, nx) / std::sqrt(static_cast<double>(ny));
        if (k == 0) bk += lead;
        p.op.components.push_back(to_sparse(bk));
        p.op.theta.fns.push_back(basis_fns[static_cast<std::size_t>(k)]);
    }

    p.riesz_y.components = {to_sparse(gy)};
    p.riesz_y.theta = ThetaMap::constant_one();
    p.y_norm_constant = true;

    const Mat s = random_matrix(rng, ny, ny);
    Mat a1 = symmetrize(s);
    a1 *= 0.3 / a1.operatorNorm();
    AffineOperator a;
    a.components = {to_sparse(gy), to_sparse(a1)};
    a.theta.fns = {[](double) { return 1.0; }, [](double m) { return std::cos(m); }};
    p.a_form = a;

    p.f.components = {random_matrix(rng, ny, 1).col(0), random_matrix(rng, ny, 1).col(0)};
    p.f.theta.fns = {[](double) { return 1.0; }, [](double m) { return std::sin(m); }};
    AffineVector g;
    g.components = {random_matrix(rng, nx, 1).col(0), random_matrix(rng, nx, 1).col(0)};
    g.theta.fns = {[](double) { return 1.0; }, [](double m) { return std::cos(m); }};
    p.g = g;

    p.xhat_kind = XNormKind::fixed;
    p.xhat_fixed = to_sparse(gx);
    p.trial_gram = p.xhat_fixed;
    p.trial_mass = p.xhat_fixed;

    // β_𝒩: smallest truth inf-sup constant over the samples.
    const SpdFactor ly = cholesky_spd(gy);
    const SpdFactor lx = cholesky_spd(gx);
    double beta = 1e300;
    for (double mu : p.samples) {
        const Mat b = Mat(p.op.at(mu));
        const Mat d = lx.apply_inverse_transpose(ly.apply_inverse_transpose(b).transpose()).transpose();
        beta = std::min(beta, min_singular(d).sigma_min);
    }
    p.beta_truth = beta;
    p.delta_truth = 0.0;
    p.validate();
    return p;
}

SaddleProblem recast_as_generic(const SaddleProblem& problem) {
    SaddleProblem p(problem);
    p.a_form = problem.riesz_y;
    p.g.reset();
    return p;
}

}  // namespace dgreedy
