#include "dgreedy/reduced_pair.hpp"

namespace dgreedy {

namespace {

void append_col(Mat& m, const Vec& c) {
    if (m.cols() == 0) m.resize(c.size(), 0);
    m.conservativeResize(Eigen::NoChange, m.cols() + 1);
    m.col(m.cols() - 1) = c;
}

void append_row(Mat& m, const Vec& r) {
    if (m.rows() == 0) m.resize(0, r.size());
    m.conservativeResize(m.rows() + 1, Eigen::NoChange);
    m.row(m.rows() - 1) = r.transpose();
}

// Grows a symmetric matrix by one: col holds the new last column (full length).
void grow_sym(Mat& m, const Vec& col) {
    const Eigen::Index k = col.size();
    m.conservativeResize(k, k);
    m.col(k - 1) = col;
    m.row(k - 1) = col.transpose();
}

void append_entry(Vec& v, double x) {
    v.conservativeResize(v.size() + 1);
    v(v.size() - 1) = x;
}

}  // namespace

ReducedPair::ReducedPair(const SaddleProblem& problem) : problem_(&problem) {
    problem.validate();
    const Eigen::Index nt = problem.trial_dofs();
    const Eigen::Index ny = problem.test_dofs();
    z_.resize(nt, 0);
    psi_.resize(ny, 0);
    bz_.assign(problem.op.terms(), Mat(ny, 0));
    b_.assign(problem.op.terms(), Mat(0, 0));
    ry_.assign(problem.riesz_y.terms(), Mat(0, 0));
    if (problem.a_form) a_.assign(problem.a_form->terms(), Mat(0, 0));
    f_.assign(problem.f.components.size(), Vec(0));
    if (problem.g) gq_.assign(problem.g->components.size(), Vec(0));
    if (problem.xhat_kind == XNormKind::graph && problem.riesz_y_mu_independent()) {
        w_.assign(problem.op.terms(), Mat(ny, 0));
        gkl_.assign(problem.op.terms(), std::vector<Mat>(problem.op.terms(), Mat(0, 0)));
    }
}

void ReducedPair::set_anchor(const Mat& anchor) {
    if (z_.cols() != 0) throw StateError("set_anchor: pair already has trial columns");
    for (Eigen::Index j = 0; j < anchor.cols(); ++j) append_trial_column(anchor.col(j));
    anchor_ = anchor.cols();
}

void ReducedPair::append_trial(const Vec& z) { append_trial_column(z); }

void ReducedPair::append_trial_column(const Vec& z) {
    const SaddleProblem& p = *problem_;
    if (z.size() != p.trial_dofs()) throw ShapeError("append_trial: size mismatch");
    append_col(z_, z);
    for (std::size_t k = 0; k < bz_.size(); ++k) {
        const Vec bz = p.op.components[k] * z;
        append_col(bz_[k], bz);
        if (psi_.cols() > 0) {
            append_col(b_[k], psi_.transpose() * bz);
        } else {
            b_[k].resize(0, z_.cols());
        }
    }
    if (p.has_penalty()) grow_sym(h_, z_.transpose() * (p.penalty * z));
    else h_ = Mat::Zero(z_.cols(), z_.cols());
    if (p.xhat_kind == XNormKind::fixed) grow_sym(xfix_, z_.transpose() * (p.xhat_fixed * z));
    grow_sym(xgram_, z_.transpose() * (p.trial_gram * z));
    if (!w_.empty()) {
        const double mu0 = p.samples.empty() ? 0.0 : p.samples.front();
        for (std::size_t k = 0; k < w_.size(); ++k) append_col(w_[k], p.riesz_solve(mu0, Vec(bz_[k].rightCols(1))));
        const Eigen::Index n = z_.cols();
        for (std::size_t k = 0; k < w_.size(); ++k) {
            for (std::size_t l = 0; l < w_.size(); ++l) {
                Mat& g = gkl_[k][l];
                g.conservativeResize(n, n);
                g.row(n - 1) = bz_[k].col(n - 1).transpose() * w_[l];
                g.col(n - 1) = bz_[k].transpose() * w_[l].col(n - 1);
            }
        }
    }
    for (std::size_t q = 0; q < gq_.size(); ++q) append_entry(gq_[q], p.g->components[q].dot(z));
}

void ReducedPair::append_test(const Vec& psi) {
    const SaddleProblem& p = *problem_;
    if (psi.size() != p.test_dofs()) throw ShapeError("append_test: size mismatch");
    append_col(psi_, psi);
    for (std::size_t k = 0; k < b_.size(); ++k) {
        if (b_[k].cols() != z_.cols()) b_[k].resize(0, z_.cols());
        append_row(b_[k], bz_[k].transpose() * psi);
    }
    for (std::size_t q = 0; q < ry_.size(); ++q) grow_sym(ry_[q], psi_.transpose() * (p.riesz_y.components[q] * psi));
    for (std::size_t q = 0; q < a_.size(); ++q) grow_sym(a_[q], psi_.transpose() * (p.a_form->components[q] * psi));
    for (std::size_t q = 0; q < f_.size(); ++q) append_entry(f_[q], p.f.components[q].dot(psi));
}

ReducedGramians ReducedPair::gramians(double mu, bool with_xhat) const {
    const SaddleProblem& p = *problem_;
    if (z_.cols() == 0) throw StateError("gramians: pair has no trial columns");
    const Eigen::Index n = z_.cols();
    const Eigen::Index m = psi_.cols();
    ReducedGramians r;
    const Vec tb = p.op.theta.eval(mu);
    r.b = Mat::Zero(m, n);
    if (m > 0)
        for (std::size_t k = 0; k < b_.size(); ++k) r.b += tb(static_cast<Eigen::Index>(k)) * b_[k];
    const Vec ty = p.riesz_y.theta.eval(mu);
    r.ry = Mat::Zero(m, m);
    if (m > 0)
        for (std::size_t q = 0; q < ry_.size(); ++q) r.ry += ty(static_cast<Eigen::Index>(q)) * ry_[q];
    if (p.a_form) {
        const Vec ta = p.a_form->theta.eval(mu);
        r.a = Mat::Zero(m, m);
        if (m > 0)
            for (std::size_t q = 0; q < a_.size(); ++q) r.a += ta(static_cast<Eigen::Index>(q)) * a_[q];
    } else {
        r.a = r.ry;
    }
    r.xnative = xgram_;
    r.h = p.has_penalty() ? Mat(p.omega * h_) : Mat(Mat::Zero(n, n));
    if (!with_xhat) return r;
    if (p.xhat_kind == XNormKind::fixed) {
        r.xhat = xfix_;
    } else if (w_.empty()) {
        // μ-dependent Y-norm: graph norm through truth Riesz solves at μ.
        Mat bz = Mat::Zero(p.test_dofs(), n);
        for (std::size_t k = 0; k < bz_.size(); ++k) bz += tb(static_cast<Eigen::Index>(k)) * bz_[k];
        r.xhat = symmetrize(r.h + bz.transpose() * p.riesz_solve(mu, bz));
    } else {
        r.xhat = r.h;
        for (std::size_t k = 0; k < gkl_.size(); ++k)
            for (std::size_t l = 0; l < gkl_.size(); ++l)
                r.xhat += tb(static_cast<Eigen::Index>(k)) * tb(static_cast<Eigen::Index>(l)) * gkl_[k][l];
        r.xhat = symmetrize(r.xhat);
    }
    return r;
}

Vec ReducedPair::f(double mu) const {
    const SaddleProblem& p = *problem_;
    if (p.rhs_override) return psi_.transpose() * p.rhs_override(mu);
    const Vec t = p.f.theta.eval(mu);
    Vec out = Vec::Zero(m());
    for (std::size_t q = 0; q < f_.size(); ++q) out += t(static_cast<Eigen::Index>(q)) * f_[q];
    return out;
}

Vec ReducedPair::g(double mu) const {
    const SaddleProblem& p = *problem_;
    if (!p.g) return Vec::Zero(n());
    const Vec t = p.g->theta.eval(mu);
    Vec out = Vec::Zero(z_.cols());
    for (std::size_t q = 0; q < gq_.size(); ++q) out += t(static_cast<Eigen::Index>(q)) * gq_[q];
    return out.tail(n());
}

Vec ReducedPair::apply_operator(double mu, const Vec& c) const {
    const Vec t = problem_->op.theta.eval(mu);
    Vec out = Vec::Zero(problem_->test_dofs());
    for (std::size_t k = 0; k < bz_.size(); ++k) out += t(static_cast<Eigen::Index>(k)) * (bz_[k] * c);
    return out;
}

}  // namespace dgreedy
