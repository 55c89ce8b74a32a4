#include "dgreedy/saddle.hpp"

#include <cmath>

namespace dgreedy {

SpMat assemble_truth_system(const SaddleProblem& problem, double mu) {
    const SpMat a = problem.a().at(mu);
    const SpMat b = problem.operator_at(mu);
    const Eigen::Index ny = problem.test_dofs();
    const Eigen::Index nx = problem.trial_dofs();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * b.nonZeros() + problem.penalty.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < b.outerSize(); ++k) {
        for (SpMat::InnerIterator it(b, k); it; ++it) {
            t.emplace_back(it.row(), ny + it.col(), it.value());
            t.emplace_back(ny + it.col(), it.row(), it.value());
        }
    }
    if (problem.has_penalty()) {
        const SpMat& h = problem.penalty;
        for (int k = 0; k < h.outerSize(); ++k)
            for (SpMat::InnerIterator it(h, k); it; ++it)
                t.emplace_back(ny + it.row(), ny + it.col(), -problem.omega * it.value());
    }
    SpMat k(ny + nx, ny + nx);
    k.setFromTriplets(t.begin(), t.end());
    k.makeCompressed();
    return k;
}

SaddleSolution solve_truth(const SaddleProblem& problem, double mu) {
    const Eigen::Index ny = problem.test_dofs();
    const Eigen::Index nx = problem.trial_dofs();
    const SpMat k = assemble_truth_system(problem, mu);
    Vec rhs(ny + nx);
    rhs.head(ny) = problem.rhs_at(mu);
    rhs.tail(nx) = problem.g_at(mu);
    SaddleSolution s;
    s.mu = mu;
    if (rhs.norm() == 0.0) {
        s.u = Vec::Zero(ny);
        s.p = Vec::Zero(nx);
        return s;
    }
    const Vec x = IndefiniteFactor(k).solve(rhs);
    s.u = x.head(ny);
    s.p = x.tail(nx);
    s.residual_norm = (k * x - rhs).norm() / rhs.norm();
    return s;
}

SaddleSolution solve_reduced(const ReducedPair& pair, const ReducedGramians& g, const Vec& f,
                             const Vec& gvec, double mu) {
    const Eigen::Index n = pair.n();
    const Eigen::Index m = pair.m();
    if (n == 0) throw StateError("solve_reduced: empty trial basis");
    if (m < n) throw UnstableError("solve_reduced: test space smaller than trial space");
    const Mat b = g.b.rightCols(n);
    const Mat h = g.h.bottomRightCorner(n, n);
    SpdFactor la, ls;
    try {
        la = cholesky_spd(g.a);
    } catch (const NotSpdError&) {
        throw UnstableError("solve_reduced: reduced A block not positive definite");
    }
    const Mat aib = la.solve(b);
    const Mat s = symmetrize(b.transpose() * aib + h);
    try {
        ls = cholesky_spd(s);
    } catch (const NotSpdError&) {
        throw UnstableError("solve_reduced: reduced Schur complement singular");
    }
    const Vec aif = la.solve(f);
    SaddleSolution out;
    out.mu = mu;
    out.p = ls.solve(Vec(b.transpose() * aif - gvec));
    out.u = aif - aib * out.p;
    const Vec r1 = g.a * out.u + b * out.p - f;
    const Vec r2 = b.transpose() * out.u - h * out.p - gvec;
    const double scale = std::max(1e-300, std::sqrt(f.squaredNorm() + gvec.squaredNorm()));
    out.residual_norm = std::sqrt(r1.squaredNorm() + r2.squaredNorm()) / scale;
    return out;
}

SaddleSolution solve_reduced(const SaddleProblem& problem, double mu, const ReducedPair& pair) {
    if (&pair.problem() != &problem) throw StateError("solve_reduced: pair built for another problem");
    return solve_reduced(pair, pair.gramians(mu, false), pair.f(mu), pair.g(mu), mu);
}

Vec lift_trial(const ReducedPair& pair, const Vec& p) { return pair.trial().rightCols(pair.n()) * p; }

Vec lift_test(const ReducedPair& pair, const Vec& u) { return pair.test() * u; }

double truth_error_bound(const SaddleProblem& problem, double mu, const SaddleSolution& truth) {
    if (!(problem.delta_truth < 1.0)) throw ConfigError("delta_truth", "must be below 1");
    return problem.y_norm(mu, truth.u) / std::sqrt(1.0 - problem.delta_truth * problem.delta_truth);
}

double truth_error_bound(const SaddleProblem& problem, double mu) {
    if (!(problem.delta_truth < 1.0)) throw ConfigError("delta_truth", "must be below 1");
    return truth_error_bound(problem, mu, solve_truth(problem, mu));
}

Mat OnlineTestBasis::psi_component(const ReducedPair& pair, std::size_t k) const {
    return pair.test() * coeffs.at(k);
}

Mat OnlineTestBasis::psi_at(const ReducedPair& pair, const ThetaMap& theta, double mu) const {
    const Vec t = theta.eval(mu);
    Mat c = Mat::Zero(coeffs.front().rows(), coeffs.front().cols());
    for (std::size_t k = 0; k < coeffs.size(); ++k) c += t(static_cast<Eigen::Index>(k)) * coeffs[k];
    return pair.test() * c;
}

OnlineTestBasis build_online_test_basis(const SaddleProblem& problem, const ReducedPair& pair) {
    if (!problem.riesz_y_mu_independent())
        throw UnsupportedError("online Petrov-Galerkin path needs a parameter-independent Y-norm");
    if (problem.rhs_override) throw UnsupportedError("online Petrov-Galerkin path needs an affine rhs");
    if (pair.m() == 0 || pair.n() == 0) throw StateError("online test basis: empty pair");
    const Eigen::Index n = pair.n();
    const ReducedGramians g = pair.gramians(problem.samples.front(), false);
    const SpdFactor ry = cholesky_spd(g.ry);
    OnlineTestBasis otb;
    const auto& bk = pair.b_components();
    for (const Mat& b : bk) otb.coeffs.push_back(ry.solve(Mat(b.rightCols(n))));
    otb.cross.resize(bk.size());
    for (std::size_t l = 0; l < bk.size(); ++l)
        for (std::size_t k = 0; k < bk.size(); ++k)
            otb.cross[l].push_back(bk[l].rightCols(n).transpose() * otb.coeffs[k]);
    const auto& fq = pair.f_components();
    otb.load.resize(fq.size());
    for (std::size_t q = 0; q < fq.size(); ++q)
        for (std::size_t k = 0; k < bk.size(); ++k) otb.load[q].push_back(otb.coeffs[k].transpose() * fq[q]);
    otb.h = g.h.bottomRightCorner(n, n);
    return otb;
}

Vec online_pg_solve(const SaddleProblem& problem, double mu, const ReducedPair& pair,
                    const OnlineTestBasis& otb) {
    if (!problem.riesz_y_mu_independent())
        throw UnsupportedError("online Petrov-Galerkin path needs a parameter-independent Y-norm");
    const Eigen::Index n = pair.n();
    const Vec tb = problem.op.theta.eval(mu);
    const Vec tf = problem.f.theta.eval(mu);
    Mat k = otb.h;
    Vec rhs = Vec::Zero(n);
    for (std::size_t l = 0; l < otb.cross.size(); ++l)
        for (std::size_t j = 0; j < otb.cross[l].size(); ++j)
            k += tb(static_cast<Eigen::Index>(l)) * tb(static_cast<Eigen::Index>(j)) * otb.cross[l][j].transpose();
    for (std::size_t q = 0; q < otb.load.size(); ++q)
        for (std::size_t j = 0; j < otb.load[q].size(); ++j)
            rhs += tf(static_cast<Eigen::Index>(q)) * tb(static_cast<Eigen::Index>(j)) * otb.load[q][j];
    Eigen::FullPivLU<Mat> lu(k);
    if (!lu.isInvertible()) throw UnstableError("online_pg_solve: singular Petrov-Galerkin system");
    return lu.solve(rhs);
}

}  // namespace dgreedy
