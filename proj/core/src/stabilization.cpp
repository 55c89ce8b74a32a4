#include "dgreedy/stabilization.hpp"

#include <cmath>
#include <vector>
#include <sstream>

#include "dgreedy/parallel.hpp"

namespace dgreedy {

void StabConfig::validate() const {
    if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("zeta", "must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
    if (!(beta > 0.0)) throw ConfigError("beta_truth", "must be positive");
    if (max_enrichments < 0) throw ConfigError("max_enrichments", "must be nonnegative");
}

ReducedGramians reduced_matrices(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                                 NormKind norm) {
    if (&pair.problem() != &problem) throw StateError("reduced_matrices: pair built for another problem");
    if (pair.trial_columns() == 0) throw StateError("reduced_matrices: missing offline tensors");
    ReducedGramians g = pair.gramians(mu, norm == NormKind::graph);
    if (norm == NormKind::native) g.xhat = g.xnative;
    return g;
}

namespace {

// Reduced data in coordinates where the trial Gramian is well conditioned. With
// anchor columns the union basis may be dependent, so it is re-expressed through
// the nondegenerate eigenspace of its Gramian.
struct Frame {
    Mat t;  // frame coordinates -> pair trial coefficients
    Mat b, x, h, ry;
};

Frame make_frame(const SaddleProblem& problem, double mu, const ReducedPair& pair, NormKind norm) {
    const ReducedGramians g = reduced_matrices(problem, mu, pair, norm);
    Frame f;
    f.ry = g.ry;
    if (pair.anchor_columns() == 0) {
        f.t = Mat::Identity(pair.trial_columns(), pair.trial_columns());
        f.b = g.b;
        f.x = g.xhat;
        f.h = g.h;
        return f;
    }
    const SymEigen e = spectral_spd(g.xhat);
    const double cut = 1e-10 * std::max(e.values(0), 0.0);
    Eigen::Index r = 0;
    while (r < e.values.size() && e.values(r) > cut) ++r;
    f.t = e.vectors.leftCols(r) * e.values.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
    f.b = g.b * f.t;
    f.x = symmetrize(f.t.transpose() * g.xhat * f.t);
    f.h = symmetrize(f.t.transpose() * g.h * f.t);
    return f;
}

SpdFactor factor_of(const Mat& x, FactorKind kind) {
    try {
        return kind == FactorKind::cholesky ? cholesky_spd(x) : spectral_factor(x);
    } catch (const NotSpdError& e) {
        throw SingularError(std::string("trial Gramian factorization failed: ") + e.what());
    }
}

SpdFactor test_factor(const Mat& ry) {
    try {
        return cholesky_spd(ry);
    } catch (const NotSpdError& e) {
        throw SingularError(std::string("test Gramian factorization failed: ") + e.what());
    }
}

}  // namespace

namespace {

struct Extreme {
    double value = 0.0;
    Vec q;  // frame coordinates
};

// Extreme eigenpair of Lx⁻ᵀ C Lx⁻¹. A degenerate extreme eigenspace is resolved by
// projecting a fixed reference vector onto it in the X inner product, which makes
// the chosen direction independent of the factorization of X.
Extreme extreme_direction(const Mat& c, const Mat& x, const SpdFactor& lx, bool want_min) {
    const Mat k = lx.apply_inverse_transpose(lx.apply_inverse_transpose(c).transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(k));
    if (es.info() != Eigen::Success) throw NumericalError("stabilization: eigen iteration did not converge");
    const Eigen::Index n = k.rows();
    const Vec& ev = es.eigenvalues();
    const double ext = want_min ? ev(0) : ev(n - 1);
    constexpr double cluster_tol = 1e-9;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(ev(i) - ext) <= cluster_tol) idx.push_back(i);
    Extreme out;
    out.value = ext;
    if (idx.size() == 1) {
        Vec y = es.eigenvectors().col(idx.front());
        normalize_sign(y);
        out.q = lx.apply_inverse(y);
        return out;
    }
    Mat z(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) z.col(static_cast<Eigen::Index>(j)) = lx.apply_inverse(Vec(es.eigenvectors().col(idx[j])));
    for (Eigen::Index r = 0; r <= n; ++r) {
        const Vec ref = r == 0 ? Vec(Vec::Ones(n)) : Vec(Vec::Unit(n, r - 1));
        Vec q = z * (z.transpose() * (x * ref));
        const double nq = std::sqrt(std::max(0.0, q.dot(x * q)));
        if (nq > 1e-8) {
            q /= nq;
            normalize_sign(q);
            out.q = q;
            return out;
        }
    }
    out.q = z.col(0);
    return out;
}

Mat stability_matrix(const Frame& f, const ReducedPair& pair) {
    Mat m = f.h;
    if (pair.m() > 0) {
        const Mat w = test_factor(f.ry).apply_inverse_transpose(f.b);
        m += w.transpose() * w;
    }
    return symmetrize(m);
}

}  // namespace

InfSup inf_sup_constant(const SaddleProblem& problem, double mu, const ReducedPair& pair, NormKind norm,
                        FactorKind factor) {
    const Frame f = make_frame(problem, mu, pair, norm);
    const SpdFactor lx = factor_of(f.x, factor);
    const Extreme e = extreme_direction(stability_matrix(f, pair), f.x, lx, true);
    InfSup out;
    out.sigma = std::sqrt(std::max(0.0, e.value));
    out.q = f.t * e.q;
    return out;
}

DeltaMax delta_rayleigh(const SaddleProblem& problem, double mu, const ReducedPair& pair, NormKind norm,
                        FactorKind factor) {
    const Frame f = make_frame(problem, mu, pair, norm);
    const SpdFactor lx = factor_of(f.x, factor);
    const Extreme e = extreme_direction(symmetrize(f.x - stability_matrix(f, pair)), f.x, lx, false);
    DeltaMax out;
    out.delta2 = e.value;
    out.q = f.t * e.q;
    return out;
}

Vec supremizer(const SaddleProblem& problem, double mu, const Vec& q, const ReducedPair& pair) {
    if (q.size() != pair.trial_columns()) throw ShapeError("supremizer: coefficient size mismatch");
    if (q.norm() == 0.0) throw ArgumentError("supremizer: zero trial direction");
    return problem.riesz_solve(mu, pair.apply_operator(mu, q));
}

namespace {

template <class Diag>
Sweep run_sweep(const SaddleProblem& problem, bool minimize, Diag diag) {
    const auto& s = problem.samples;
    if (s.empty()) throw ConfigError("sample_count", "empty sample set");
    std::vector<double> values(s.size());
    std::vector<Vec> dirs(s.size());
    parallel_for(s.size(), [&](std::size_t i) {
        auto [v, q] = diag(s[i]);
        values[i] = v;
        dirs[i] = std::move(q);
    });
    // Eigenvalues (σ² or δ²) within roundoff of the extreme count as ties; the smallest parameter wins.
    auto key = [minimize](double v) { return minimize ? v * v : v; };
    double ext = key(values[0]);
    for (double v : values) ext = minimize ? std::min(ext, key(v)) : std::max(ext, key(v));
    std::size_t best = 0;
    while (std::abs(key(values[best]) - ext) > 1e-10) ++best;
    Sweep out;
    out.worst_mu = s[best];
    out.worst_value = values[best];
    out.worst_q = dirs[best];
    out.values = std::move(values);
    return out;
}

void enrich(const SaddleProblem& problem, ReducedPair& pair, double mu, const Vec& q, double value) {
    const Vec v = supremizer(problem, mu, q, pair);
    std::optional<Vec> w;
    if (problem.riesz_y_mu_independent()) {
        w = gram_schmidt_in(problem.riesz_y_at(mu), pair.test(), v);
    } else {
        w = orthonormalize_against(problem.riesz_y_at(mu), pair.test(), v);
    }
    if (!w) {
        std::ostringstream msg;
        msg << "stabilization stalled: supremizer at mu=" << mu << " is linearly dependent";
        throw StabilizationStalled(mu, value, msg.str());
    }
    pair.append_test(*w);
}

StabResult run_loop(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg, StabLoop loop) {
    cfg.validate();
    if (pair.trial_columns() == 0) throw StateError("stabilization: empty trial basis");
    const double target = loop == StabLoop::inf_sup ? cfg.zeta * cfg.beta : cfg.delta * cfg.delta;
    StabResult res;
    for (;;) {
        const Sweep sw = loop == StabLoop::inf_sup ? inf_sup_sweep(problem, pair, cfg) : delta_sweep(problem, pair, cfg);
        res.final_value = sw.worst_value;
        res.final_mu = sw.worst_mu;
        const bool ok = loop == StabLoop::inf_sup ? sw.worst_value >= target : sw.worst_value <= target;
        if (ok) break;
        if (static_cast<int>(res.records.size()) >= cfg.max_enrichments || pair.m() >= problem.test_dofs()) {
            std::ostringstream msg;
            msg << "stabilization stalled after " << res.records.size() << " enrichments; worst mu="
                << sw.worst_mu << " value=" << sw.worst_value;
            throw StabilizationStalled(sw.worst_mu, sw.worst_value, msg.str());
        }
        enrich(problem, pair, sw.worst_mu, sw.worst_q, sw.worst_value);
        res.records.push_back({sw.worst_mu, sw.worst_value, sw.worst_q, pair.m()});
    }
    return res;
}

}  // namespace

Sweep inf_sup_sweep(const SaddleProblem& problem, const ReducedPair& pair, const StabConfig& cfg) {
    return run_sweep(problem, true, [&](double mu) {
        InfSup r = inf_sup_constant(problem, mu, pair, cfg.norm, cfg.factor);
        return std::pair<double, Vec>(r.sigma, std::move(r.q));
    });
}

Sweep delta_sweep(const SaddleProblem& problem, const ReducedPair& pair, const StabConfig& cfg) {
    return run_sweep(problem, false, [&](double mu) {
        DeltaMax r = delta_rayleigh(problem, mu, pair, cfg.norm, cfg.factor);
        return std::pair<double, Vec>(r.delta2, std::move(r.q));
    });
}

StabResult update_inf_sup(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg) {
    return run_loop(problem, pair, cfg, StabLoop::inf_sup);
}

StabResult update_delta(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg) {
    return run_loop(problem, pair, cfg, StabLoop::delta);
}

StabResult stabilize(const SaddleProblem& problem, ReducedPair& pair, const StabConfig& cfg, StabLoop loop) {
    return run_loop(problem, pair, cfg, loop);
}

}  // namespace dgreedy
