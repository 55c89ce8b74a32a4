// One line per acceptance criterion; exit status is the number of failures.

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dgreedy/dg2.hpp"
#include "dgreedy/experiment.hpp"
#include "dgreedy/tightening.hpp"

using namespace dgreedy;
using clock_type = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = clock_type::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (limit_s > 0.0 && secs > limit_s) {
        v.pass = false;
        v.detail += " [over time budget]";
    }
    if (!v.pass) ++failures;
    std::printf("%s  %2d %-34s %7.1fs  %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), secs, v.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<double> piece_samples(const CoverPiece& piece, const ParameterDomain& dom) {
    std::vector<double> s;
    for (double mu : dom.sample_points())
        if (piece.contains(mu)) s.push_back(mu);
    return s;
}

// Truth-level graph-norm machinery built directly from the assembled matrices.
struct GraphOracle {
    const SaddleProblem* p;
    double mu;
    SpMat r;
    Eigen::SimplicialLDLT<SpMat> ry;
    SpMat b;

    GraphOracle(const SaddleProblem& problem, double m) : p(&problem), mu(m) {
        r = problem.riesz_y.at(m);
        ry.compute(r);
        b = problem.op.at(m);
    }
    Mat supremizers(const Mat& z) const { return ry.solve(Mat(b * z)); }
    Mat gram(const Mat& z) const {
        Mat g = Mat(b * z).transpose() * supremizers(z);
        if (p->omega > 0.0 && p->penalty.nonZeros() > 0) g += p->omega * z.transpose() * (p->penalty * z);
        return 0.5 * (g + g.transpose());
    }
    double norm(const Vec& v) const { return std::sqrt(std::max(0.0, gram(Mat(v))(0, 0))); }
    // min over span(z) of ‖v - z c‖ in the graph norm.
    double best(const Mat& z, const Vec& v) const {
        Mat zv(z.rows(), z.cols() + 1);
        zv << z, v;
        const Mat g = gram(zv);
        const Eigen::Index n = z.cols();
        const Vec rhs = g.col(n).head(n);
        const Vec c = g.topLeftCorner(n, n).ldlt().solve(rhs);
        const double e2 = g(n, n) - rhs.dot(c);
        return std::sqrt(std::max(0.0, e2));
    }
};

double l2(const SaddleProblem& p, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(p.trial_mass * v))); }

double y_norm_direct(const SaddleProblem& p, double mu, const Vec& v) {
    return std::sqrt(std::max(0.0, v.dot(p.riesz_y.at(mu) * v)));
}

// --- shared desk-scale runs -----------------------------------------------------------

struct CdRun {
    SaddleProblem problem;
    std::unique_ptr<TruthSnapshots> truth;
    GreedyConfig cfg;
    GreedyResult result;
    double bap_worst = -1.0;    // max of err - (1-δ)⁻¹ best
    double lower_worst = 1e300; // min of R_n/best - (1-δ²)^{1/2}
    double upper_worst = -1e300; // max of R_n/best - ((1-δ)⁻¹ + 0.05)
    double upper_mu = 0.0;
    int upper_n = 0;
    double rprime_identity = 0.0;
    double rprime_order = -1e300;
    double seconds = 0.0;
};

CdRun* cd_run = nullptr;

CdRun& get_cd_run() {
    if (cd_run) return *cd_run;
    const auto t0 = clock_type::now();
    static CdRun run;
    ParameterDomain dom;
    dom.hi = kSplitAngle;
    dom.samples = 100;
    const CoverPiece piece = cover_pieces(dom).front();
    CdOptions o;
    o.epsilon = std::pow(2.0, -5);
    o.trial_level = 5;
    o.test_level = 6;
    run.problem = build_cd_problem(o, piece, dom.sample_points());
    run.truth = std::make_unique<TruthSnapshots>(run.problem);
    run.cfg.surrogate = SurrogateKind::truth_dual;
    run.cfg.loop = StabLoop::inf_sup;
    run.cfg.tol = 1e-12;
    run.cfg.n_max = 10;
    run.cfg.stab.beta = run.problem.beta_truth;
    const SaddleProblem& p = run.problem;
    const double dstab = run.cfg.stab.delta;

    run.cfg.observer = [&](const ReducedPair& pair, const IterationRecord& rec) {
        const Mat z = pair.approximation_basis();
        const double dm = rec.delta;
        for (std::size_t i = 0; i < p.samples.size(); ++i) {
            const double mu = p.samples[i];
            const GraphOracle go(p, mu);
            const Vec& pt = run.truth->at(i).p;
            const SaddleSolution red = solve_reduced(p, mu, pair);
            const Vec pn = lift_trial(pair, red.p);
            const double err = go.norm(pt - pn);
            const double best = go.best(z, pt);
            run.bap_worst = std::max(run.bap_worst, err - best / (1.0 - dm));
            const double rn = surrogate_truth_dual(p, mu, pn);
            if (best > 1e-12) {
                const double ratio = rn / best;
                run.lower_worst = std::min(run.lower_worst, ratio - std::sqrt(1.0 - dm * dm));
                const double up = ratio - (1.0 / (1.0 - dstab) + 0.05);
                if (up > run.upper_worst) {
                    run.upper_worst = up;
                    run.upper_mu = mu;
                    run.upper_n = rec.n;
                }
            }
            const double rp = surrogate_reduced_dual(p, mu, pair, red);
            const double un = y_norm_direct(p, mu, lift_test(pair, red.u));
            run.rprime_identity = std::max(run.rprime_identity, std::abs(rp - un));
            run.rprime_order = std::max(run.rprime_order, rp - rn);
        }
    };
    run.result = dg1(p, run.cfg, run.truth.get());
    run.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    cd_run = &run;
    return run;
}

struct TransportRun {
    std::vector<SaddleProblem> problems;
    std::vector<std::unique_ptr<TruthSnapshots>> truths;
    std::vector<TighteningResult> tight;
    double seconds = 0.0;
};

TransportRun* tr_run = nullptr;

TransportRun& get_transport_run() {
    if (tr_run) return *tr_run;
    const auto t0 = clock_type::now();
    static TransportRun run;
    ParameterDomain dom;
    dom.samples = 100;
    run.problems.reserve(2);
    for (const CoverPiece& piece : cover_pieces(dom)) {
        TransportOptions o;
        o.trial_level = 3;
        o.test_level = 4;
        run.problems.push_back(build_transport_problem(o, piece, piece_samples(piece, dom)));
    }
    for (const SaddleProblem& p : run.problems) {
        run.truths.push_back(std::make_unique<TruthSnapshots>(p));
        GreedyConfig c;
        c.surrogate = SurrogateKind::reduced_dual;
        c.loop = StabLoop::delta;
        c.n_max = 12;
        c.tol = 1e-12;
        c.report_each_iteration = true;
        c.tightening.cycles = 1;
        c.stab.beta = p.beta_truth;
        run.tight.push_back(iterative_tightening(p, c, *run.truths.back()));
    }
    run.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    tr_run = &run;
    return run;
}

struct SyntheticRun {
    SaddleProblem problem;
    std::unique_ptr<TruthSnapshots> truth;
    GreedyConfig cfg;
    Dg2Result result;
};

SyntheticRun* syn_run = nullptr;

SyntheticRun& get_synthetic_run() {
    if (syn_run) return *syn_run;
    static SyntheticRun run;
    SyntheticOptions so;
    so.trial_dim = 20;
    so.test_dim = 30;
    so.terms = 3;
    run.problem = build_synthetic_problem(so);
    run.truth = std::make_unique<TruthSnapshots>(run.problem);
    run.cfg.tol = 1e-6;
    run.cfg.n_max = 20;
    run.cfg.stab.beta = run.problem.beta_truth;
    run.cfg.loop = StabLoop::inf_sup;
    run.result = dg2(run.problem, run.cfg, run.truth.get());
    syn_run = &run;
    return run;
}

// --- criteria -------------------------------------------------------------------------

Verdict duality() {
    ParameterDomain dom;
    dom.samples = 40;
    std::mt19937_64 rng(2024);
    double worst_identity = 0.0, worst_sigma = 0.0, worst_delta = 0.0;
    int instances = 0;
    for (const CoverPiece& piece : cover_pieces(dom)) {
        TransportOptions o;
        o.trial_level = 3;
        o.test_level = 4;
        const SaddleProblem p = build_transport_problem(o, piece, piece_samples(piece, dom));
        std::uniform_int_distribution<std::size_t> pick(0, p.samples.size() - 1);
        std::normal_distribution<double> nd;
        for (int inst = 0; inst < 30; ++inst) {
            ReducedPair pair(p);
            const int n = 1 + inst % 6;
            for (int j = 0; j < n; ++j) {
                const Vec s = solve_truth(p, p.samples[pick(rng)]).p;
                if (auto w = gram_schmidt_in(p.trial_gram, pair.trial(), s)) pair.append_trial(*w);
            }
            const double mu0 = p.samples[pick(rng)];
            const int sup = static_cast<int>(rng() % (pair.n() + 1));
            for (int j = 0; j < sup; ++j) pair.append_test(supremizer(p, mu0, Vec::Unit(pair.n(), j), pair));
            const int extra = 1 + static_cast<int>(rng() % 6);
            for (int j = 0; j < extra; ++j) {
                Vec v(p.test_dofs());
                for (auto& x : v) x = nd(rng);
                pair.append_test(v);
            }
            const double mu = p.samples[pick(rng)];
            const double sigma = inf_sup_constant(p, mu, pair).sigma;
            const double d2 = delta_rayleigh(p, mu, pair).delta2;
            worst_identity = std::max(worst_identity, std::abs(sigma * sigma + d2 - 1.0));

            // Independent: generalized eigenproblems of the projected supremizer Gramians.
            const GraphOracle go(p, mu);
            const Mat z = pair.trial();
            const Mat w = go.supremizers(z);
            const Mat x = go.gram(z);
            const Mat psi = pair.test();
            const Mat rp = go.r * psi;
            const Mat coef = (psi.transpose() * rp).ldlt().solve(rp.transpose() * w);
            const Mat m = (rp * coef).transpose() * w;
            const Mat mm = 0.5 * (m + m.transpose());
            Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ge(mm, x);
            const double s_oracle = std::sqrt(std::max(0.0, ge.eigenvalues().minCoeff()));
            Eigen::GeneralizedSelfAdjointEigenSolver<Mat> gd(Mat(x - mm), x);
            const double d_oracle = gd.eigenvalues().maxCoeff();
            worst_sigma = std::max(worst_sigma, std::abs(s_oracle - sigma));
            worst_delta = std::max(worst_delta, std::abs(d_oracle - d2));
            ++instances;
        }
    }
    const bool ok = instances >= 50 && worst_identity <= 1e-8 && worst_sigma <= 1e-8 && worst_delta <= 1e-8;
    return {ok, std::to_string(instances) + " instances, |σ²+δ²-1| " + fmt("%.2e", worst_identity) + ", |σ-σ_oracle| " +
                    fmt("%.2e", worst_sigma) + ", |δ²-δ²_oracle| " + fmt("%.2e", worst_delta)};
}

Verdict loop_equivalence() {
    ParameterDomain dom;
    dom.samples = 60;
    const CoverPiece piece = cover_pieces(dom).front();
    TransportOptions o;
    const SaddleProblem p = build_transport_problem(o, piece, piece_samples(piece, dom));
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, p.samples.size() - 1);
    int agree = 0;
    std::string detail;
    double worst_q = 0.0;
    for (int start = 0; start < 5; ++start) {
        ReducedPair pair(p);
        while (pair.n() < 3) {
            const Vec s = solve_truth(p, p.samples[pick(rng)]).p;
            if (auto w = gram_schmidt_in(p.trial_gram, pair.trial(), s)) pair.append_trial(*w);
        }
        ReducedPair a = pair, b = pair;
        StabConfig ci;
        ci.delta = 0.5;
        ci.zeta = std::sqrt(1.0 - ci.delta * ci.delta);
        ci.beta = 1.0;
        ci.factor = FactorKind::spectral;
        StabConfig cd = ci;
        cd.factor = FactorKind::cholesky;
        const StabResult ri = update_inf_sup(p, a, ci);
        const StabResult rd = update_delta(p, b, cd);
        bool same = ri.records.size() == rd.records.size() && a.m() == b.m();
        for (std::size_t k = 0; same && k < ri.records.size(); ++k) {
            same = ri.records[k].mu == rd.records[k].mu;
            const Vec qi = ri.records[k].q.normalized(), qd = rd.records[k].q.normalized();
            const double dq = std::min((qi - qd).norm(), (qi + qd).norm());
            worst_q = std::max(worst_q, dq);
            same = same && dq <= 1e-6;
        }
        agree += same;
        detail += std::to_string(ri.records.size()) + "/" + std::to_string(rd.records.size()) + " ";
    }
    return {agree == 5, std::to_string(agree) + "/5 starts identical, enrichments " + detail + "max |Δq| " +
                            fmt("%.2e", worst_q)};
}

Verdict mb_bound() {
    CdRun& r = get_cd_run();
    bool ok = !r.result.history.records.empty();
    std::string d;
    for (const auto& rec : r.result.history.records) {
        ok = ok && rec.m <= 3 * rec.n;
        d += std::to_string(rec.n) + ":" + std::to_string(rec.m) + " ";
    }
    ok = ok && r.result.history.records.back().n == 10;
    return {ok, "(n:m) " + d + fmt("run %.1fs", r.seconds)};
}

Verdict bap() {
    CdRun& r = get_cd_run();
    return {r.bap_worst <= 1e-8, "max(err - best/(1-δ)) " + fmt("%.3e", r.bap_worst)};
}

Verdict sandwich() {
    CdRun& r = get_cd_run();
    const bool ok = r.lower_worst >= 0.0 && r.upper_worst <= 0.0 && r.rprime_identity <= 1e-10 &&
                    r.rprime_order <= 1e-10;
    return {ok, "lower margin " + fmt("%.3e", r.lower_worst) + ", upper excess " + fmt("%.3e", r.upper_worst) +
                    " (n=" + std::to_string(r.upper_n) + fmt(", mu=%.4f)", r.upper_mu) + ", |R'-‖u_n‖| " +
                    fmt("%.1e", r.rprime_identity) + ", max(R'-R) " + fmt("%.2e", r.rprime_order)};
}

bool non_increasing(const GreedyHistory& h) {
    for (std::size_t i = 1; i < h.records.size(); ++i)
        if (h.records[i].best_error > h.records[i - 1].best_error * (1.0 + 1e-12) + 1e-15) return false;
    return true;
}

Verdict decay() {
    CdRun& cd = get_cd_run();
    TransportRun& tr = get_transport_run();
    SyntheticRun& sy = get_synthetic_run();
    bool mono = non_increasing(cd.result.history) && non_increasing(sy.result.history);
    for (const auto& t : tr.tight)
        for (const auto& c : t.cycles) mono = mono && non_increasing(c.history);
    const auto& recs = cd.result.history.records;
    const double first = recs.front().max_surrogate, last = recs.back().max_surrogate;
    const bool drop = recs.back().n == 10 && last <= first / 100.0;
    return {mono && drop, std::string("best-error monotone ") + (mono ? "yes" : "no") + ", CD surrogate n=1 " +
                              fmt("%.3e", first) + " -> n=10 " + fmt("%.3e", last) + fmt(" (%.2f orders)", std::log10(first / last))};
}

Verdict transport_conditioning() {
    TransportRun& tr = get_transport_run();
    double lo = 1e300, hi = -1e300;
    bool increases = true;
    std::string d;
    for (const auto& t : tr.tight) {
        double cmin[2] = {1e300, 1e300};
        for (const auto& c : t.cycles) {
            for (const auto& rec : c.history.records) {
                const double r = rec.summary->top_ratio;
                if (c.cycle == 0) {
                    lo = std::min(lo, r);
                    hi = std::max(hi, r);
                }
                if (c.cycle < 2) cmin[c.cycle] = std::min(cmin[c.cycle], r);
            }
        }
        increases = increases && t.cycles.size() == 2 && cmin[1] > cmin[0];
        d += fmt(" min %.3f", cmin[0]) + fmt("->%.3f", cmin[1]);
    }
    const bool ok = lo >= 0.15 && hi <= 1.05 && increases && tr.seconds < 600.0;
    return {ok, "surr/err in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "], tightening" + d + fmt(", run %.1fs", tr.seconds)};
}

struct Repro {
    double p_err = 0.0;
    double surr = 0.0;
};

Verdict snapshot_reproduction() {
    std::string d;
    bool ok = true;
    auto check = [&](const std::string& name, const Repro& r) {
        ok = ok && r.p_err <= 1e-7 && r.surr <= 1e-7;
        d += name + fmt(" p %.1e", r.p_err) + fmt(" surr %.1e; ", r.surr);
    };
    {
        CdRun& cd = get_cd_run();
        const ReducedPair& pair = *cd.result.pair;
        Repro r;
        for (const auto& rec : cd.result.history.records) {
            const double mu = rec.selected_mu;
            const Vec pn = lift_trial(pair, solve_reduced(cd.problem, mu, pair).p);
            r.p_err = std::max(r.p_err, l2(cd.problem, pn - cd.truth->at_mu(mu).p));
            r.surr = std::max(r.surr, surrogate_truth_dual(cd.problem, mu, pn));
        }
        check("cd", r);
    }
    {
        TransportRun& tr = get_transport_run();
        Repro r;
        for (std::size_t k = 0; k < tr.problems.size(); ++k) {
            const SaddleProblem& p = tr.problems[k];
            const ReducedPair& pair = *tr.tight[k].pair;
            for (const auto& rec : tr.tight[k].cycles.back().history.records) {
                const double mu = rec.selected_mu;
                const SaddleSolution red = solve_reduced(p, mu, pair);
                r.p_err = std::max(r.p_err, l2(p, lift_trial(pair, red.p) - tr.truths[k]->at_mu(mu).p));
                r.surr = std::max(r.surr, surrogate_reduced_dual(p, mu, pair, red));
            }
        }
        check("transport", r);
    }
    {
        SyntheticRun& sy = get_synthetic_run();
        const ReducedPair& pair = *sy.result.pair;
        const ResidualStar rstar(sy.problem);
        Repro r;
        for (double mu : sy.result.selected) {
            const SaddleSolution red = solve_reduced(sy.problem, mu, pair);
            const Vec pn = lift_trial(pair, red.p);
            r.p_err = std::max(r.p_err, l2(sy.problem, pn - sy.truth->at_mu(mu).p));
            r.surr = std::max(r.surr, rstar(mu, lift_test(pair, red.u), pn));
        }
        check("synthetic", r);
    }
    return {ok, d};
}

Verdict online_offline() {
    CdRun& cd = get_cd_run();
    const ReducedPair& pair = *cd.result.pair;
    const OnlineTestBasis otb = build_online_test_basis(cd.problem, pair);
    double worst = 0.0;
    for (double mu : cd.problem.samples) {
        const Vec a = online_pg_solve(cd.problem, mu, pair, otb);
        const Vec b = solve_reduced(cd.problem, mu, pair).p;
        worst = std::max(worst, (a - b).lpNorm<Eigen::Infinity>());
    }
    return {worst <= 1e-9, "max coefficient difference " + fmt("%.2e", worst)};
}

Verdict dg2_generic() {
    SyntheticRun& sy = get_synthetic_run();
    const auto& last = sy.result.history.records.back();
    const double zb = sy.cfg.stab.zeta * sy.problem.beta_truth;
    const bool syn_ok = last.max_surrogate <= 1e-6 && last.sigma_min >= zb;

    ParameterDomain dom;
    dom.samples = 100;
    const CoverPiece piece = cover_pieces(dom).front();
    TransportOptions o;
    const SaddleProblem p = build_transport_problem(o, piece, piece_samples(piece, dom));
    const SaddleProblem q = recast_as_generic(p);
    GreedyConfig c;
    c.surrogate = SurrogateKind::reduced_dual;
    c.loop = StabLoop::delta;
    c.n_max = 8;
    c.tol = 1e-12;
    c.track_best_error = false;
    const TruthSnapshots truth(p);
    const GreedyResult r1 = dg1(p, c, &truth);
    const Dg2Result r2 = dg2(q, c, &truth);
    double worst = 0.0;
    std::size_t matched = 0;
    const std::size_t steps = std::min(r1.history.records.size(), r2.p_trajectory.size());
    for (std::size_t i = 0; i < steps; ++i) {
        const double e = l2(p, truth.at_mu(r1.history.records[i].selected_mu).p - r2.p_trajectory[i]);
        worst = std::max(worst, e);
        if (e <= 1e-8 && matched == i) ++matched;
    }
    const bool traj_ok = steps == r1.history.records.size() && worst <= 1e-8;
    return {syn_ok && traj_ok, fmt("synthetic R* %.2e", last.max_surrogate) + fmt(" sigma %.3f", last.sigma_min) +
                                   fmt(" >= %.3f", zb) + "; transport trajectory matches for " + std::to_string(matched) +
                                   "/" + std::to_string(steps) + fmt(" steps, max L2 gap %.2e", worst)};
}

}  // namespace

int main() {
    std::printf("acceptance: table schema v%d\n", kTableSchemaVersion);
    report(1, "graph-norm duality identity", 60.0, duality);
    report(2, "update-loop equivalence", 120.0, loop_equivalence);
    report(3, "m_B bound m(n) <= 3n (CD desk)", 300.0, mb_bound);
    report(4, "BAP constant (CD desk)", 0.0, bap);
    report(5, "surrogate tightness sandwich", 0.0, sandwich);
    report(6, "monotone greedy decay", 0.0, decay);
    report(7, "transport surrogate conditioning", 600.0, transport_conditioning);
    report(8, "snapshot reproduction", 0.0, snapshot_reproduction);
    report(9, "online/offline equivalence (CD)", 0.0, online_offline);
    report(10, "DG-2 generic run", 60.0, dg2_generic);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
